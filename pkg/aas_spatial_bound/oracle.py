# -*- coding: utf-8 -*-

"""Waveform-level far-field simulator used as the oracle for the analytic envelopes.

Every branch input is passed through the PA model, the branch outputs are
combined with the geometric phase and element field of each observation angle,
and the radiated power is measured with the same Welch estimator and band
integration as any conducted spectrum. Per excitation, the band cross-spectral
matrix S of the branch outputs is computed once; the band power radiated
towards an angle with weight vector v is then v^H S v, which equals the band
power of the time-domain sum returned by :func:`radiate`.
"""

import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from pytility import arg_to_iter
from scipy.optimize import brentq

from .envelope import AngularCut
from .exceptions import BudgetExceededError, CalibrationError, DomainError
from .geometry import ArrayGeometry, SteeringConfig, TwoElementArray
from .pattern import ElementPatternParams, element_field
from .spectral import (
    BandDefinition,
    ComponentSpectra,
    aclr,
    band_mask,
    component_spectra,
    empty_spectrum,
    estimate_psd,
    integrate_band,
    segment_spectra,
)
from .utils import as_angles, derive_seed, power_to_db
from .waveform import (
    BranchAssignment,
    PaModel,
    UserSignal,
    branch_inputs,
    generate_user_signal,
    pa_output,
)

LOGGER = logging.getLogger(__name__)

DEFAULT_PHASE_STEPS = 128
MIN_PHASE_STEPS = 8
DEFAULT_BUDGET = 2**31
ALPHA_BRACKET = (-0.3, -1e-6)

Array = Union[TwoElementArray, ArrayGeometry]
Excitation = Union[None, float, SteeringConfig]


@dataclass(frozen=True)
class UserBeam:
    """one user: its waveform parameters and the azimuth its beam is steered to"""

    power_dbm: float = 0.0
    bandwidth_hz: float = 20e6
    center_offset_hz: float = 0.0
    steer_deg: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.steer_deg) or abs(self.steer_deg) > 90:
            raise DomainError(
                f"beam target must lie in [-90, 90] degrees, got {self.steer_deg}"
            )


@dataclass(frozen=True, eq=False)
class FarFieldScenario:
    """everything the oracle needs; user waveforms are generated lazily and cached"""

    array: Array
    pattern: ElementPatternParams
    pa: PaModel
    users: Tuple[UserBeam, ...]
    bands: Tuple[BandDefinition, ...]
    angles: np.ndarray
    phase_steps: int = DEFAULT_PHASE_STEPS
    sample_rate: float = 122.88e6
    num_samples: int = 2**16
    rbw: float = 1e6
    seed: int = 1
    budget: int = DEFAULT_BUDGET
    workers: int = 1
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(arg_to_iter(self.users)))
        object.__setattr__(self, "bands", tuple(arg_to_iter(self.bands)))
        angles = as_angles(self.angles, "observation angle")
        object.__setattr__(self, "angles", angles)

        if not self.users:
            raise DomainError("a scenario needs at least one user")
        if not self.bands:
            raise DomainError("a scenario needs at least one band")
        labels = [band.label for band in self.bands]
        if len(set(labels)) != len(labels):
            raise DomainError(f"band labels must be unique, got {labels}")
        if angles.ndim != 1 or not len(angles) or np.any(np.diff(angles) <= 0):
            raise DomainError(
                "the angle grid must be non-empty and strictly increasing"
            )
        if self.phase_steps < MIN_PHASE_STEPS:
            raise DomainError(
                f"phase sweep needs at least {MIN_PHASE_STEPS} steps, "
                f"got {self.phase_steps}"
            )
        if self.budget < 1:
            raise DomainError(f"budget must be positive, got {self.budget}")
        if self.workers < 1:
            raise DomainError(f"workers must be positive, got {self.workers}")

    @property
    def num_branches(self) -> int:
        """RF chains per polarization"""
        return self.array.num_branches

    @property
    def polarizations(self) -> int:
        """1 or 2"""
        return self.array.polarizations

    @property
    def phase_grid(self) -> np.ndarray:
        """uniform excitation phase sweep over [0, 2 pi)"""
        return 2 * math.pi * np.arange(self.phase_steps) / self.phase_steps

    @cached_property
    def user_signals(self) -> Tuple[UserSignal, ...]:
        """one waveform per user, seeded from (seed, user index)"""
        LOGGER.info(
            "Generating %d user waveform(s) with seed %d", len(self.users), self.seed
        )
        return tuple(
            generate_user_signal(
                bandwidth=user.bandwidth_hz,
                sample_rate=self.sample_rate,
                num_samples=self.num_samples,
                power=user.power_dbm,
                seed=derive_seed(self.seed, index, "user"),
                center_offset=user.center_offset_hz,
            )
            for index, user in enumerate(self.users)
        )

    def band(self, label: str) -> BandDefinition:
        """band by label"""
        for band in self.bands:
            if band.label == label:
                return band
        raise DomainError(f"no band labelled <{label}>")

    def noise_seed(self, polarization: int, branch: int) -> int:
        """seed of the PA noise of one chain"""
        return derive_seed(self.seed, polarization, branch, "noise")

    def with_array(self, array: Array) -> "FarFieldScenario":
        """same scenario on another array"""
        return replace(self, array=array)


@dataclass(frozen=True, eq=False)
class SweepResult:
    """band powers in dBm over the excitation sweep, shape (steps, angles, bands)"""

    angles: np.ndarray
    phases: np.ndarray
    bands: Tuple[BandDefinition, ...]
    samples: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        expected = (len(self.phases), len(self.angles), len(self.bands))
        if self.samples.shape != expected:
            raise DomainError(
                f"sweep samples have shape {self.samples.shape}, expected {expected}"
            )

    @property
    def max(self) -> np.ndarray:
        """max over the sweep, shape (angles, bands)"""
        return self.samples.max(axis=0)

    @property
    def min(self) -> np.ndarray:
        """min over the sweep, shape (angles, bands)"""
        return self.samples.min(axis=0)

    def band_index(self, label: str) -> int:
        """column of a band"""
        for index, band in enumerate(self.bands):
            if band.label == label:
                return index
        raise DomainError(f"no band labelled <{label}>")

    def cut(self, label: str) -> AngularCut:
        """measured envelope of one band"""
        return AngularCut(self.angles, self.max[:, self.band_index(label)], label)

    def spread(self, label: str) -> np.ndarray:
        """per-angle max - min over the sweep in dB"""
        index = self.band_index(label)
        return self.max[:, index] - self.min[:, index]

    def cuts(self) -> Dict[str, AngularCut]:
        """measured envelope of every band"""
        return {band.label: self.cut(band.label) for band in self.bands}


class BandPowers(NamedTuple):
    """conducted per-branch band powers in dBm"""

    signal: float
    coherent: float
    im3: float
    noise: float
    total: float


class ScalingPoint(NamedTuple):
    """boresight band powers in dBm of a 1 x N array"""

    cols_n: int
    coherent_dbm: float
    noise_dbm: float


def processed_samples(
    scenario: FarFieldScenario, num_angles: int, num_steps: int
) -> int:
    """work measure checked against the budget"""
    return (
        num_angles
        * num_steps
        * scenario.num_samples
        * scenario.num_branches
        * scenario.polarizations
    )


def check_budget(scenario: FarFieldScenario, num_angles: int, num_steps: int) -> int:
    """raise if the run would process more samples than the budget allows"""

    total = processed_samples(scenario, num_angles, num_steps)
    if total > scenario.budget:
        raise BudgetExceededError(
            f"scenario <{scenario.name}> needs {total} processed samples, "
            f"budget is {scenario.budget}"
        )
    LOGGER.debug("Scenario <%s> processes %d samples", scenario.name, total)
    return total


def excitation(
    scenario: FarFieldScenario, setting: Excitation = None
) -> BranchAssignment:
    """per-user branch phases

    None steers each user towards its own beam target; a number is a common
    horizontal phase step; a SteeringConfig is applied to every user.
    """

    if setting is None:
        steerings = [scenario.array.steer(user.steer_deg) for user in scenario.users]
    else:
        steering = (
            setting
            if isinstance(setting, SteeringConfig)
            else SteeringConfig.horizontal(float(setting))
        )
        steerings = [steering] * len(scenario.users)
    return BranchAssignment(
        np.stack([scenario.array.excitation_phases(steering) for steering in steerings])
    )


def branch_outputs(
    scenario: FarFieldScenario,
    assignment: BranchAssignment,
    polarization: int = 0,
) -> np.ndarray:
    """PA outputs of every branch of one polarization, shape (branches, samples)"""

    inputs = branch_inputs(scenario.user_signals, assignment)
    return np.stack(
        [
            pa_output(
                scenario.pa,
                inputs[branch],
                scenario.noise_seed(polarization, branch),
            )
            for branch in range(inputs.shape[0])
        ]
    )


def angle_weights(scenario: FarFieldScenario, angles) -> np.ndarray:
    """element field times geometric phase, shape (angles, branches)"""

    angles = np.asarray(angles, dtype=float)
    field_amplitude = element_field(scenario.pattern, angles)
    return np.asarray(field_amplitude)[..., None] * np.exp(
        1j * scenario.array.geometric_phases(angles)
    )


def radiate(
    scenario: FarFieldScenario,
    setting: Excitation,
    phi: float,
    polarization: int = 0,
) -> np.ndarray:
    """far-field samples towards phi: element field times sum_b y_b(n) exp(j psi_b)"""

    weights = angle_weights(scenario, phi)
    outputs = branch_outputs(scenario, excitation(scenario, setting), polarization)
    return weights @ outputs


def band_cross_spectra(scenario: FarFieldScenario, outputs: np.ndarray) -> np.ndarray:
    """per-band cross-spectral matrices of the branch outputs, shape (bands, B, B)"""

    spectra = segment_spectra(outputs, scenario.sample_rate, scenario.rbw)
    num_segments = spectra.shape[1]
    grid = empty_spectrum(scenario.sample_rate, scenario.rbw)

    matrices = []
    for band in scenario.bands:
        selected = spectra[..., band_mask(grid, band)]
        matrices.append(
            np.einsum("isf,jsf->ij", selected, np.conj(selected))
            * grid.bin_width
            / num_segments
        )
    return np.stack(matrices)


def _radiated_powers(weights: np.ndarray, matrices: np.ndarray) -> np.ndarray:
    """v^H S v for every angle and band, shape (angles, bands)"""
    return np.einsum("ai,kij,aj->ak", weights, matrices, np.conj(weights)).real


def _excitation_matrices(
    scenario: FarFieldScenario, assignment: BranchAssignment
) -> np.ndarray:
    # polarizations share the excitation, only their noise differs; powers add
    return sum(
        band_cross_spectra(scenario, branch_outputs(scenario, assignment, polarization))
        for polarization in range(scenario.polarizations)
    )


def _map(scenario: FarFieldScenario, function, items: Sequence) -> List:
    if scenario.workers == 1 or len(items) < 2:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=scenario.workers) as executor:
        # map preserves input order, so the result is independent of the schedule
        return list(executor.map(function, items))


def sweep_envelope(scenario: FarFieldScenario) -> SweepResult:
    """band power per (phase step, angle, band) over the horizontal phase sweep"""

    phases = scenario.phase_grid
    check_budget(scenario, len(scenario.angles), len(phases))
    weights = angle_weights(scenario, scenario.angles)

    LOGGER.info(
        "Sweeping <%s>: %d phase steps x %d angles x %d bands",
        scenario.name,
        len(phases),
        len(scenario.angles),
        len(scenario.bands),
    )

    def _step(phase):
        matrices = _excitation_matrices(scenario, excitation(scenario, phase))
        return _radiated_powers(weights, matrices)

    # generate the waveforms before fanning out
    LOGGER.debug("Using %d user waveform(s)", len(scenario.user_signals))
    samples = np.stack(_map(scenario, _step, phases))
    return SweepResult(
        angles=scenario.angles.copy(),
        phases=phases,
        bands=scenario.bands,
        samples=power_to_db(samples),
        metadata=scenario_metadata(scenario),
    )


def beam_cut(
    scenario: FarFieldScenario,
    setting: Excitation = None,
    label_prefix: str = "",
) -> Dict[str, AngularCut]:
    """fixed-excitation angular cut per band; by default each user on its beam target"""

    check_budget(scenario, len(scenario.angles), 1)
    matrices = _excitation_matrices(scenario, excitation(scenario, setting))
    powers = power_to_db(
        _radiated_powers(angle_weights(scenario, scenario.angles), matrices)
    )
    return {
        band.label: AngularCut(
            scenario.angles.copy(), powers[:, index], f"{label_prefix}{band.label}"
        )
        for index, band in enumerate(scenario.bands)
    }


def mu_cut(scenario: FarFieldScenario) -> Dict[str, AngularCut]:
    """two-user cut per band with every user on its own beam"""

    if len(scenario.users) != 2:
        raise DomainError(
            f"multi-user cut needs exactly two users, got {len(scenario.users)}"
        )
    LOGGER.info(
        "Multi-user cut for users at %.2f and %.2f deg",
        scenario.users[0].steer_deg,
        scenario.users[1].steer_deg,
    )
    return beam_cut(scenario, label_prefix="mu ")


def reference_input(scenario: FarFieldScenario) -> np.ndarray:
    """composite input of branch 1, the zero-phase reference branch"""
    return np.sum([signal.samples for signal in scenario.user_signals], axis=0)


def reference_spectra(scenario: FarFieldScenario) -> ComponentSpectra:
    """signal, IM3, noise and total spectra of the reference branch"""

    return component_spectra(
        scenario.pa,
        reference_input(scenario),
        scenario.sample_rate,
        scenario.rbw,
        scenario.noise_seed(0, 0),
    )


def conducted_band_powers(scenario: FarFieldScenario) -> Dict[str, BandPowers]:
    """per-branch conducted powers of each band, measured from the decomposition"""

    samples = reference_input(scenario)
    coherent = estimate_psd(
        scenario.pa.noiseless(samples), scenario.sample_rate, scenario.rbw
    )
    spectra = reference_spectra(scenario)

    return {
        band.label: BandPowers(
            signal=integrate_band(spectra.signal, band),
            coherent=integrate_band(coherent, band),
            im3=integrate_band(spectra.im3, band),
            noise=integrate_band(spectra.noise, band),
            total=integrate_band(spectra.total, band),
        )
        for band in scenario.bands
    }


def scaling_study(
    scenario: FarFieldScenario,
    coherent_band: str,
    noise_band: str,
    columns: Iterable[int] = (1, 2, 4, 8),
) -> List[ScalingPoint]:
    """boresight coherent and noise band power of single-row arrays with N columns"""

    points = []
    for cols_n in columns:
        geometry = ArrayGeometry(rows_m=1, cols_n=cols_n, polarizations=1)
        scaled = scenario.with_array(geometry)
        cut = beam_cut(replace(scaled, angles=np.zeros(1)), setting=SteeringConfig())
        points.append(
            ScalingPoint(
                cols_n=cols_n,
                coherent_dbm=cut[coherent_band].values[0],
                noise_dbm=cut[noise_band].values[0],
            )
        )
        LOGGER.info(
            "N=%d: %.3f dBm coherent, %.3f dBm noise",
            cols_n,
            points[-1].coherent_dbm,
            points[-1].noise_dbm,
        )
    return points


def calibrate_alpha(
    scenario: FarFieldScenario,
    target_aclr_db: float,
    in_band: str,
    adjacent: str,
    bracket: Tuple[float, float] = ALPHA_BRACKET,
    xtol: float = 1e-6,
) -> float:
    """real alpha whose single-branch ACLR equals the target"""

    samples = reference_input(scenario)
    noise_seed = scenario.noise_seed(0, 0)
    in_band_def = scenario.band(in_band)
    adjacent_def = scenario.band(adjacent)

    def _aclr(alpha):
        output = pa_output(replace(scenario.pa, alpha=alpha), samples, noise_seed)
        spectrum = estimate_psd(output, scenario.sample_rate, scenario.rbw)
        return aclr(spectrum, in_band_def, adjacent_def) - target_aclr_db

    low, high = bracket
    try:
        alpha = brentq(_aclr, low, high, xtol=xtol)
    except ValueError as exc:
        raise CalibrationError(
            f"target ACLR {target_aclr_db:.2f} dB is not reachable "
            f"for alpha in [{low}, {high}]"
        ) from exc
    LOGGER.info("Calibrated alpha=%.6f for ACLR %.2f dB", alpha, target_aclr_db)
    return float(alpha)


@dataclass(frozen=True)
class PaConfiguration:
    """one PA operating point: DPD as an ACLR target, backoff as a drive offset"""

    name: str
    target_aclr_db: Optional[float] = None
    drive_offset_db: float = 0.0

    def __post_init__(self):
        if not self.name:
            raise DomainError("a PA configuration needs a name")
        if not math.isfinite(self.drive_offset_db):
            raise DomainError(
                f"drive offset must be finite, got {self.drive_offset_db}"
            )
        if self.target_aclr_db is not None and not self.target_aclr_db > 0:
            raise DomainError(
                f"target ACLR must be positive, got {self.target_aclr_db}"
            )


class ConfigurationResult(NamedTuple):
    """beam cuts and conducted ACLR of one PA configuration"""

    configuration: PaConfiguration
    scenario: FarFieldScenario
    aclr_db: float
    cuts: Dict[str, AngularCut]


def configure(
    scenario: FarFieldScenario,
    configuration: PaConfiguration,
    in_band: str,
    adjacent: str,
) -> FarFieldScenario:
    """scenario with every user driven at the offset and alpha calibrated if asked"""

    users = tuple(
        replace(user, power_dbm=user.power_dbm + configuration.drive_offset_db)
        for user in scenario.users
    )
    configured = replace(
        scenario, users=users, name=f"{scenario.name} {configuration.name}"
    )
    if configuration.target_aclr_db is None:
        return configured
    alpha = calibrate_alpha(
        configured, configuration.target_aclr_db, in_band, adjacent
    )
    return replace(configured, pa=replace(configured.pa, alpha=alpha))


def configuration_study(
    scenario: FarFieldScenario,
    configurations: Iterable[PaConfiguration],
    in_band: str,
    adjacent: str,
) -> List[ConfigurationResult]:
    """beam cut of every band for each PA configuration, users on their beams"""

    in_band_def = scenario.band(in_band)
    adjacent_def = scenario.band(adjacent)
    results = []
    for configuration in configurations:
        configured = configure(scenario, configuration, in_band, adjacent)
        ratio = aclr(reference_spectra(configured).total, in_band_def, adjacent_def)
        results.append(
            ConfigurationResult(
                configuration=configuration,
                scenario=configured,
                aclr_db=ratio,
                cuts=beam_cut(configured, label_prefix=f"{configuration.name} "),
            )
        )
        LOGGER.info(
            "Configuration <%s>: alpha=%s, drive offset %.1f dB, ACLR %.2f dB",
            configuration.name,
            configured.pa.alpha,
            configuration.drive_offset_db,
            ratio,
        )
    return results


def scenario_metadata(scenario: FarFieldScenario) -> Dict[str, Any]:
    """seed, grids and model parameters of a run"""

    array = scenario.array
    return {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "array": type(array).__name__,
        "geometry": array,
        "pattern": scenario.pattern,
        "alpha": scenario.pa.alpha,
        "noise_power_dbm": (
            scenario.pa.noise_power if math.isfinite(scenario.pa.noise_power) else None
        ),
        "users": scenario.users,
        "bands": scenario.bands,
        "angles_deg": {
            "start": float(scenario.angles[0]),
            "stop": float(scenario.angles[-1]),
            "count": len(scenario.angles),
        },
        "phase_steps": scenario.phase_steps,
        "sample_rate_hz": scenario.sample_rate,
        "num_samples": scenario.num_samples,
        "rbw_hz": scenario.rbw,
    }
