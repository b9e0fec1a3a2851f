# -*- coding: utf-8 -*-

"""Analytic directional EIRP, spatial envelopes per regime and bound checks."""

import logging
import math

from dataclasses import dataclass, fields
from typing import Any, Dict, NamedTuple, Optional, Tuple, Union

import numpy as np

from pytility import normalize_space
from scipy.signal import find_peaks

from .exceptions import DomainError, GridMismatchError
from .geometry import (
    HORIZONTAL_PLANE_DEG,
    ArrayGeometry,
    SteeringConfig,
    TwoElementArray,
    af2_magnitude,
    af_aas,
)
from .pattern import ElementPatternParams, attenuation, element_gain
from .spectral import SpectralRegion
from .utils import FLOOR_DB, amplitude_to_db, as_angles, db_to_power, power_to_db

LOGGER = logging.getLogger(__name__)

# carried exactly; 6 dB and 3 dB are the rounded textbook values
COHERENT_PAIR_GAIN_DB = 20 * math.log10(2)
INCOHERENT_PAIR_GAIN_DB = 10 * math.log10(2)
ROUNDED_COHERENT_PAIR_GAIN_DB = 6.0
ROUNDED_INCOHERENT_PAIR_GAIN_DB = 3.0

DEFAULT_IN_BAND_MARGIN_DB = 1.3
DEFAULT_OOB_MARGIN_DB = 3.0
DEFAULT_MU_SLACK_DB = 0.5
GRID_MATCH_TOLERANCE_DEG = 1e-9


@dataclass(frozen=True)
class RegimePowers:
    """conducted powers in dBm; None marks a regime that is not modelled"""

    p_e: Optional[float] = None
    p_im3: Optional[float] = None
    p_noise: Optional[float] = None
    p_sub: Optional[float] = None
    p_noise_s: Optional[float] = None

    def __post_init__(self):
        for field in fields(self):
            value = getattr(self, field.name)
            if value is not None and not math.isfinite(value):
                raise DomainError(
                    f"{field.name} must be finite dBm or absent, got {value}"
                )

    def require(self, name: str) -> float:
        """value of a power that must be present"""
        value = getattr(self, name)
        if value is None:
            raise DomainError(f"{name} is required for this envelope")
        return value


@dataclass(frozen=True, eq=False)
class AngularCut:
    """dB values on a strictly increasing azimuth grid"""

    angles: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        angles = as_angles(self.angles)
        values = np.asarray(self.values, dtype=float)
        if angles.ndim != 1 or angles.shape != values.shape or not len(angles):
            raise DomainError(
                "angles and values must be non-empty vectors of equal length"
            )
        if np.any(np.diff(angles) <= 0):
            raise DomainError("angles must be strictly increasing")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "label", normalize_space(self.label) or "")

    def __len__(self):
        return len(self.angles)

    def same_grid(self, other: "AngularCut") -> bool:
        """True iff both cuts share the angle grid"""
        return np.array_equal(self.angles, other.angles)

    def index_of(self, angle: float) -> int:
        """grid index nearest to the angle"""
        return int(np.argmin(np.abs(self.angles - angle)))

    def value_at(self, angle: float) -> float:
        """value at the grid point nearest to the angle"""
        return float(self.values[self.index_of(angle)])

    def argmax_angle(self) -> float:
        """angle of the maximum, ties broken toward 0 deg"""
        candidates = np.flatnonzero(self.values == self.values.max())
        nearest = candidates[np.argmin(np.abs(self.angles[candidates]))]
        return float(self.angles[nearest])

    def local_maxima(self, prominence: Optional[float] = None) -> np.ndarray:
        """angles of interior local maxima, optionally filtered by prominence in dB"""
        peaks, _ = find_peaks(self.values, prominence=prominence)
        return self.angles[peaks]

    def shifted(self, offset: float, label: Optional[str] = None) -> "AngularCut":
        """cut raised by a constant; floor sentinels stay at the floor"""
        values = np.where(self.values <= FLOOR_DB, self.values, self.values + offset)
        return AngularCut(
            self.angles.copy(), values, self.label if label is None else label
        )

    def normalized(self, reference_angle: float = 0.0) -> "AngularCut":
        """cut relative to its value at the reference angle (boresight)

        The reference angle must lie on the grid.
        """
        index = self.index_of(reference_angle)
        if abs(self.angles[index] - reference_angle) > GRID_MATCH_TOLERANCE_DEG:
            raise DomainError(
                f"cannot normalize <{self.label}> to {reference_angle} deg: "
                f"not on the grid, nearest is {self.angles[index]} deg"
            )
        reference = float(self.values[index])
        return AngularCut(
            self.angles.copy(),
            self.values - reference,
            f"{self.label} normalized".strip(),
        )


@dataclass(frozen=True)
class UncertaintyMargins:
    """one-sided margins in dB on top of the analytic envelope"""

    in_band_margin: float = DEFAULT_IN_BAND_MARGIN_DB
    oob_margin: float = DEFAULT_OOB_MARGIN_DB

    def __post_init__(self):
        for name in ("in_band_margin", "oob_margin"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be a non-negative number, got {value}")

    def margin_for(self, region: SpectralRegion) -> float:
        """in-band margin for signal-dominated regions, out-of-band margin otherwise"""
        if region is SpectralRegion.SIGNAL_DOMINATED:
            return self.in_band_margin
        return self.oob_margin


class ImDirection(NamedTuple):
    """direction of a Type-B intermodulation lobe; angle is None when evanescent"""

    angle: Optional[float]
    visible: bool


@dataclass(frozen=True)
class BoundReport:
    """worst (largest) excess of a cut over its bound"""

    worst_margin_db: float
    worst_angle_deg: float
    passed: bool
    slack_db: float = DEFAULT_MU_SLACK_DB

    def to_dict(self) -> Dict[str, Any]:
        """report fields as written to JSON"""
        return {
            "worst_margin_db": self.worst_margin_db,
            "worst_angle_deg": self.worst_angle_deg,
            "pass": self.passed,
            "slack_db": self.slack_db,
        }


Array = Union[TwoElementArray, ArrayGeometry]


def _cut(angles, values, label) -> AngularCut:
    return AngularCut(np.asarray(angles, dtype=float), values, label)


def _with_floor(level, amplitude_db):
    return np.where(amplitude_db <= FLOOR_DB, FLOOR_DB, level + amplitude_db)


def _polarization_gain(geometry: Array) -> float:
    return INCOHERENT_PAIR_GAIN_DB if geometry.polarizations == 2 else 0.0


def eirp_signal(
    powers: RegimePowers,
    pattern: ElementPatternParams,
    array: TwoElementArray,
    phi,
    delta_phi,
):
    """P_e + A_E(phi) + 20 log10 |AF(phi, delta_phi)|; floor sentinel at nulls"""

    af_db = amplitude_to_db(af2_magnitude(array, phi, delta_phi))
    return _with_floor(powers.require("p_e") + element_gain(pattern, phi), af_db)[()]


def eirp_im3(
    powers: RegimePowers,
    pattern: ElementPatternParams,
    array: TwoElementArray,
    phi,
    delta_phi,
):
    """P_IM3 + A_E(phi) + 20 log10 |AF(phi, delta_phi)|; IM3 shares the signal phase"""

    af_db = amplitude_to_db(af2_magnitude(array, phi, delta_phi))
    return _with_floor(powers.require("p_im3") + element_gain(pattern, phi), af_db)[()]


def eirp_aas(
    powers: RegimePowers,
    sub_pattern: ElementPatternParams,
    geometry: ArrayGeometry,
    steering: SteeringConfig,
    phi,
    theta=HORIZONTAL_PLANE_DEG,
):
    """steered AAS EIRP: P_sub (+3 dB dual-pol) + A_sub(phi) + 20 log10 |AF_A|"""

    af_db = amplitude_to_db(af_aas(geometry, steering, theta, phi))
    level = (
        powers.require("p_sub")
        + _polarization_gain(geometry)
        + element_gain(sub_pattern, phi)
    )
    return _with_floor(level, af_db)[()]


def eirp_noise_two_element(
    powers: RegimePowers,
    pattern: ElementPatternParams,
    phi,
    branches: int = 2,
):
    """P_noise + A_E(phi) + 10 log10(branches); uncorrelated noise ignores the phase"""

    if branches < 1:
        raise DomainError(f"need at least one branch, got {branches}")
    return (
        powers.require("p_noise")
        + element_gain(pattern, phi)
        + 10 * math.log10(branches)
    )


def envelope_signal(
    powers: RegimePowers,
    pattern: ElementPatternParams,
    angles,
    label: str = "signal envelope",
) -> AngularCut:
    """P_e + A_E(phi) + 20 log10 2"""

    values = (
        powers.require("p_e") + element_gain(pattern, angles) + COHERENT_PAIR_GAIN_DB
    )
    return _cut(angles, values, label)


def envelope_im3(
    powers: RegimePowers,
    pattern: ElementPatternParams,
    angles,
    label: str = "im3 envelope",
) -> AngularCut:
    """P_IM3 + A_E(phi) + 20 log10 2"""

    values = (
        powers.require("p_im3") + element_gain(pattern, angles) + COHERENT_PAIR_GAIN_DB
    )
    return _cut(angles, values, label)


def envelope_noise(
    powers: RegimePowers,
    pattern: ElementPatternParams,
    angles,
    branches: int = 2,
    label: str = "noise envelope",
) -> AngularCut:
    """two-element noise EIRP over the grid; it is its own envelope"""

    values = eirp_noise_two_element(
        powers, pattern, np.asarray(angles, dtype=float), branches
    )
    return _cut(angles, values, label)


def envelope_noise_aas(
    powers: RegimePowers,
    sub_pattern: ElementPatternParams,
    geometry: ArrayGeometry,
    angles,
    label: str = "aas noise envelope",
) -> AngularCut:
    """P_noise,s + A_sub(phi) + 10 log10(polarizations * M * N)"""

    values = (
        powers.require("p_noise_s")
        + element_gain(sub_pattern, angles)
        + 10 * math.log10(geometry.num_chains)
    )
    return _cut(angles, values, label)


def envelope_coherent_aas(
    powers: RegimePowers,
    sub_pattern: ElementPatternParams,
    geometry: ArrayGeometry,
    angles,
    label: str = "aas coherent envelope",
) -> AngularCut:
    """P_sub (+3 dB for two polarizations) + A_sub(phi) + 20 log10(M * N)"""

    values = (
        powers.require("p_sub")
        + _polarization_gain(geometry)
        + element_gain(sub_pattern, angles)
        + 20 * math.log10(geometry.num_elements)
    )
    return _cut(angles, values, label)


def envelope_total(
    coherent_power: float,
    noise_power: float,
    pattern: ElementPatternParams,
    angles,
    branches: int,
    polarizations: int = 1,
    label: str = "envelope",
) -> AngularCut:
    """envelope of a band holding coherent and uncorrelated power per branch

    10 log10(B^2 P_coh + B P_noise) + A_E(phi), plus 3 dB for two polarizations;
    B is the number of branches per polarization.
    """

    if branches < 1:
        raise DomainError(f"need at least one branch, got {branches}")
    if polarizations not in (1, 2):
        raise DomainError(f"polarizations must be 1 or 2, got {polarizations}")
    angles = np.asarray(angles, dtype=float)
    level = power_to_db(
        branches**2 * db_to_power(coherent_power) + branches * db_to_power(noise_power)
    )
    if level <= FLOOR_DB:
        return _cut(angles, np.full(angles.shape, FLOOR_DB), label)
    if polarizations == 2:
        level += INCOHERENT_PAIR_GAIN_DB
    return _cut(angles, level + element_gain(pattern, angles), label)


def bound_from_boresight(
    boresight_level: float,
    pattern: ElementPatternParams,
    angles,
    label: str = "bound",
) -> AngularCut:
    """envelope through a measured or simulated boresight level: level + A(phi)"""

    angles = np.asarray(angles, dtype=float)
    return _cut(angles, boresight_level + attenuation(pattern, angles), label)


def _im_direction(argument: float) -> ImDirection:
    if abs(argument) > 1 + 1e-12:
        return ImDirection(angle=None, visible=False)
    argument = min(max(argument, -1.0), 1.0)
    return ImDirection(angle=math.degrees(math.asin(argument)), visible=True)


def mu_im_directions(phi1: float, phi2: float) -> Tuple[ImDirection, ImDirection]:
    """Type-B lobe directions arcsin(2 sin phi_k - sin phi_l) of a two-user beam pair"""

    for name, value in (("phi1", phi1), ("phi2", phi2)):
        if not math.isfinite(value) or abs(value) > 90:
            raise DomainError(f"{name} must lie in [-90, 90] degrees, got {value}")

    sin1 = math.sin(math.radians(phi1))
    sin2 = math.sin(math.radians(phi2))
    directions = (_im_direction(2 * sin1 - sin2), _im_direction(2 * sin2 - sin1))
    LOGGER.debug(
        "Type-B directions for users at %.2f and %.2f deg: %s", phi1, phi2, directions
    )
    return directions


def check_mu_bound(
    mu_cut: AngularCut,
    su_envelope: AngularCut,
    slack: float = DEFAULT_MU_SLACK_DB,
) -> BoundReport:
    """verify mu_cut <= su_envelope + slack everywhere and report the worst excess"""

    if not mu_cut.same_grid(su_envelope):
        raise GridMismatchError(
            "multi-user cut and single-user envelope use different grids"
        )

    excess = mu_cut.values - su_envelope.values
    worst = int(np.argmax(excess))
    report = BoundReport(
        worst_margin_db=float(excess[worst]),
        worst_angle_deg=float(mu_cut.angles[worst]),
        passed=bool(excess[worst] <= slack),
        slack_db=float(slack),
    )
    if not report.passed:
        LOGGER.warning(
            "Cut <%s> exceeds <%s> by %.3f dB at %.2f deg",
            mu_cut.label,
            su_envelope.label,
            report.worst_margin_db,
            report.worst_angle_deg,
        )
    return report


def apply_margins(
    cut: AngularCut,
    margins: UncertaintyMargins,
    region: SpectralRegion,
) -> AngularCut:
    """cut plus the margin matching the region; zero margin returns an exact copy"""

    margin = margins.margin_for(region)
    if not margin:
        return AngularCut(cut.angles.copy(), cut.values.copy(), cut.label)
    return cut.shifted(margin)
