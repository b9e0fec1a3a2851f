# -*- coding: utf-8 -*-

"""Array geometries, array factors and steering weights."""

import logging
import math

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .utils import as_angles, wrap_degrees, wrap_radians

LOGGER = logging.getLogger(__name__)

HORIZONTAL_PLANE_DEG = 90.0


def _check_spacing(value, name):
    if not value > 0 or not math.isfinite(value):
        raise DomainError(
            f"{name} must be a positive number of wavelengths, got {value}"
        )


def _check_theta(theta):
    theta = as_angles(theta, "theta")
    if np.any((theta < 0) | (theta > 180)):
        raise DomainError(f"theta must lie in [0, 180] degrees, got {theta}")
    return theta


@dataclass(frozen=True)
class SteeringConfig:
    """relative excitation phase per row step (vertical) and column step (horizontal)"""

    delta_phi_v: float = 0.0
    delta_phi_h: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "delta_phi_v", wrap_radians(self.delta_phi_v))
        object.__setattr__(self, "delta_phi_h", wrap_radians(self.delta_phi_h))

    @classmethod
    def horizontal(cls, delta_phi: float) -> "SteeringConfig":
        """steering with a horizontal phase step only"""
        return cls(delta_phi_v=0.0, delta_phi_h=delta_phi)


@dataclass(frozen=True)
class TwoElementArray:
    """two identical elements along the y-axis, spacing in wavelengths"""

    spacing_d: float = 0.5

    def __post_init__(self):
        _check_spacing(self.spacing_d, "spacing_d")

    @property
    def num_branches(self) -> int:
        """RF chains per polarization"""
        return 2

    @property
    def polarizations(self) -> int:
        """the two-element model is single-polarized"""
        return 1

    def geometric_phases(self, phi, theta=HORIZONTAL_PLANE_DEG) -> np.ndarray:
        """per-branch geometric phase, shape (..., 2); only theta = 90 deg exists"""

        if np.any(_check_theta(theta) != HORIZONTAL_PLANE_DEG):
            raise DomainError("the two-element model is restricted to theta = 90 deg")
        psi = np.asarray(geometric_phase(self, phi))
        return np.stack((np.zeros_like(psi), psi), axis=-1)

    def excitation_phases(self, steering: SteeringConfig) -> np.ndarray:
        """per-branch excitation phase; branch 1 is the zero-phase reference"""
        return np.array((0.0, steering.delta_phi_h))

    def steer(
        self, phi0: float, theta0: float = HORIZONTAL_PLANE_DEG
    ) -> SteeringConfig:
        """excitation that co-phases both elements towards phi0"""

        if theta0 != HORIZONTAL_PLANE_DEG:
            raise DomainError("the two-element model is restricted to theta = 90 deg")
        return SteeringConfig.horizontal(-geometric_phase(self, phi0))


@dataclass(frozen=True)
class ArrayGeometry:
    """M x N grid of sub-arrays, spacings in wavelengths"""

    rows_m: int = 1
    cols_n: int = 2
    d_v: float = 0.5
    d_h: float = 0.5
    polarizations: int = 1

    def __post_init__(self):
        if int(self.rows_m) != self.rows_m or self.rows_m < 1:
            raise DomainError(f"rows_m must be a positive integer, got {self.rows_m}")
        if int(self.cols_n) != self.cols_n or self.cols_n < 1:
            raise DomainError(f"cols_n must be a positive integer, got {self.cols_n}")
        _check_spacing(self.d_v, "d_v")
        _check_spacing(self.d_h, "d_h")
        if self.polarizations not in (1, 2):
            raise DomainError(f"polarizations must be 1 or 2, got {self.polarizations}")

    @property
    def num_elements(self) -> int:
        """M * N"""
        return self.rows_m * self.cols_n

    @property
    def num_branches(self) -> int:
        """RF chains per polarization"""
        return self.num_elements

    @property
    def num_chains(self) -> int:
        """total RF chains, 2MN for a dual-polarized array"""
        return self.polarizations * self.num_elements

    def _indices(self):
        rows, cols = np.meshgrid(
            np.arange(self.rows_m), np.arange(self.cols_n), indexing="ij"
        )
        return rows.ravel(), cols.ravel()

    def geometric_phases(self, phi, theta=HORIZONTAL_PLANE_DEG) -> np.ndarray:
        """per-branch geometric phase of v_mn, shape (..., M*N), row-major in (m, n)"""

        theta = np.radians(_check_theta(theta))
        phi = np.radians(wrap_degrees(phi))
        vertical = 2 * math.pi * self.d_v * np.cos(theta)
        horizontal = 2 * math.pi * self.d_h * np.sin(theta) * np.sin(phi)
        rows, cols = self._indices()
        return (
            np.multiply.outer(vertical, rows) + np.multiply.outer(horizontal, cols)
        )

    def excitation_phases(self, steering: SteeringConfig) -> np.ndarray:
        """per-branch excitation phase of w_mn, row-major in (m, n)"""

        rows, cols = self._indices()
        return rows * steering.delta_phi_v + cols * steering.delta_phi_h

    def steer(
        self, phi0: float, theta0: float = HORIZONTAL_PLANE_DEG
    ) -> SteeringConfig:
        """excitation that co-phases all sub-arrays towards (theta0, phi0)"""
        return compensate_steering(self, theta0, phi0)


def geometric_phase(array: TwoElementArray, phi):
    """path-difference phase k d sin(phi) in radians"""

    scalar = np.ndim(phi) == 0
    phi = np.radians(wrap_degrees(phi))
    result = 2 * math.pi * array.spacing_d * np.sin(phi)
    return float(result) if scalar else result


def af2(array: TwoElementArray, phi, delta_phi):
    """complex two-element array factor 1 + exp(j (psi + delta_phi))"""

    psi = geometric_phase(array, phi)
    return 1 + np.exp(1j * (np.add(psi, delta_phi)))


def af2_magnitude(array: TwoElementArray, phi, delta_phi):
    """|AF| = 2 |cos(pi d sin(phi) + delta_phi / 2)|, broadcast over both arguments"""

    scalar = np.ndim(phi) == 0 and np.ndim(delta_phi) == 0
    phi = np.radians(wrap_degrees(phi))
    delta_phi = as_angles(delta_phi, "delta_phi")
    result = 2 * np.abs(np.cos(math.pi * array.spacing_d * np.sin(phi) + delta_phi / 2))
    return float(result) if scalar else result


def af_aas(geometry: ArrayGeometry, steering: SteeringConfig, theta, phi):
    """array factor of the M x N grid, sum of w_mn v_mn; |AF| <= M N"""

    scalar = np.ndim(theta) == 0 and np.ndim(phi) == 0
    theta = np.radians(_check_theta(theta))
    phi = np.radians(wrap_degrees(phi))
    vertical = 2 * math.pi * geometry.d_v * np.cos(theta) + steering.delta_phi_v
    horizontal = (
        2 * math.pi * geometry.d_h * np.sin(theta) * np.sin(phi) + steering.delta_phi_h
    )
    # the double sum separates into a row sum times a column sum
    rows = np.exp(1j * np.multiply.outer(vertical, np.arange(geometry.rows_m))).sum(-1)
    cols = np.exp(
        1j * np.multiply.outer(horizontal, np.arange(geometry.cols_n))
    ).sum(-1)
    result = rows * cols
    return complex(result) if scalar else result


def compensate_steering(
    geometry: ArrayGeometry, theta0: float, phi0: float
) -> SteeringConfig:
    """phase gradients that exactly cancel the geometric phase towards (theta0, phi0)"""

    theta0 = math.radians(float(_check_theta(theta0)))
    phi0 = math.radians(wrap_degrees(phi0))
    return SteeringConfig(
        delta_phi_v=-2 * math.pi * geometry.d_v * math.cos(theta0),
        delta_phi_h=-2 * math.pi * geometry.d_h * math.sin(theta0) * math.sin(phi0),
    )
