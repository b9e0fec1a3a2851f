"""Spatial upper bound of radiated power for active antenna arrays."""

import logging

from .__version__ import VERSION, __version__
from .config import ScenarioConfig, load_config
from .envelope import (
    AngularCut,
    RegimePowers,
    UncertaintyMargins,
    apply_margins,
    check_mu_bound,
    envelope_coherent_aas,
    envelope_im3,
    envelope_noise_aas,
    envelope_signal,
    mu_im_directions,
)
from .exceptions import SpatialBoundError
from .geometry import ArrayGeometry, SteeringConfig, TwoElementArray
from .oracle import FarFieldScenario, mu_cut, radiate, sweep_envelope
from .pattern import ElementPatternParams
from .spectral import BandDefinition, SpectralRegion, Spectrum, estimate_psd
from .waveform import PaModel, UserSignal

logging.getLogger(__name__).addHandler(logging.NullHandler())
