# -*- coding: utf-8 -*-

"""Parametric radiation pattern of the elementary radiator (element or sub-array)."""

import logging
import math

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .utils import db_to_power, wrap_degrees

LOGGER = logging.getLogger(__name__)

DEFAULT_HPBW_DEG = 85.0
DEFAULT_FRONT_TO_BACK_DB = 30.0


@dataclass(frozen=True)
class ElementPatternParams:
    """horizontal cut of the 3GPP-style element pattern

    g_e_max: peak gain in dBi, phi_3db: half-power beamwidth in degrees,
    a_m: front-to-back attenuation floor in dB (positive)
    """

    g_e_max: float
    phi_3db: float = DEFAULT_HPBW_DEG
    a_m: float = DEFAULT_FRONT_TO_BACK_DB

    def __post_init__(self):
        if not math.isfinite(self.g_e_max):
            raise DomainError(f"peak gain must be finite, got {self.g_e_max}")
        if not self.phi_3db > 0 or not math.isfinite(self.phi_3db):
            raise DomainError(
                f"half-power beamwidth must be positive, got {self.phi_3db}"
            )
        if not self.a_m > 0 or not math.isfinite(self.a_m):
            raise DomainError(f"front-to-back ratio must be positive, got {self.a_m}")


def attenuation(params: ElementPatternParams, phi):
    """relative attenuation -min{12 (phi / phi_3db)^2, A_m} in dB"""

    scalar = np.ndim(phi) == 0
    phi = np.asarray(wrap_degrees(phi), dtype=float)
    result = -np.minimum(12.0 * (phi / params.phi_3db) ** 2, params.a_m)
    return float(result) if scalar else result


def element_gain(params: ElementPatternParams, phi):
    """gain in dBi towards azimuth phi (degrees) in the theta = 90 deg plane"""

    return params.g_e_max + attenuation(params, phi)


def element_field(params: ElementPatternParams, phi):
    """linear field amplitude of the radiator, so that |field|^2 is the gain"""

    return np.sqrt(db_to_power(element_gain(params, phi)))
