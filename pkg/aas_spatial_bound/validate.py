# -*- coding: utf-8 -*-

"""Claims checked by the validate command: analytic envelopes against the oracle."""

import logging
import math

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import ScenarioConfig
from .envelope import (
    AngularCut,
    RegimePowers,
    UncertaintyMargins,
    apply_margins,
    check_mu_bound,
    eirp_signal,
    envelope_coherent_aas,
    envelope_im3,
    envelope_noise,
    envelope_noise_aas,
    envelope_signal,
    envelope_total,
    mu_im_directions,
)
from .geometry import ArrayGeometry, TwoElementArray, af_aas, compensate_steering
from .oracle import (
    BandPowers,
    FarFieldScenario,
    PaConfiguration,
    SweepResult,
    beam_cut,
    conducted_band_powers,
    configuration_study,
    mu_cut,
    reference_spectra,
    scaling_study,
    sweep_envelope,
)
from .spectral import SpectralRegion, band_region
from .utils import FLOOR_DB, angle_grid, derive_seed
from .waveform import (
    BranchAssignment,
    branch_inputs,
    decompose_two_user,
    generate_user_signal,
    pa_output,
)

LOGGER = logging.getLogger(__name__)

LEMMA_ANGLE_STEP_DEG = 0.25
LEMMA_PHASE_STEPS = 720
LEMMA_TOLERANCE_DB = 1e-3
COMPENSATION_DRAWS = 100
COMPENSATION_TOLERANCE = 1e-9
DECOMPOSITION_SAMPLES = 2**12
DECOMPOSITION_TOLERANCE = 1e-12
SIGNAL_TOLERANCE_DB = 0.3
IM3_TOLERANCE_DB = 0.5
NOISE_SPREAD_TOLERANCE_DB = 0.5
NOISE_BORESIGHT_TOLERANCE_DB = 0.3
BORESIGHT_TOLERANCE_DB = 0.1
STEERED_TOUCH_TOLERANCE_DB = 1.0
COHERENT_SCALING_TOLERANCE_DB = 0.2
NOISE_SCALING_TOLERANCE_DB = 0.3
MU_DIRECTION_TOLERANCE_DEG = 1.0
MU_LOBE_PROMINENCE_DB = 2.0
MU_IM_EXCESS_DB = 3.0
CONFIGURATION_TOLERANCE_DB = 0.5
CONFIGURATION_ACLR_TOLERANCE_DB = 0.05


@dataclass(frozen=True)
class ClaimResult:
    """outcome of one checked claim

    measured is a deviation that must not exceed tolerance, or for a lower
    bound a level that must reach it.
    """

    name: str
    passed: bool
    measured: float
    tolerance: float
    details: Dict[str, Any] = field(default_factory=dict)
    lower_bound: bool = False


@dataclass(frozen=True)
class ValidationReport:
    """all claims of one scenario run"""

    scenario: str
    seed: int
    claims: Tuple[ClaimResult, ...]

    @property
    def passed(self) -> bool:
        """True iff every claim passed"""
        return all(claim.passed for claim in self.claims)

    @property
    def failed(self) -> List[str]:
        """names of the failed claims"""
        return [claim.name for claim in self.claims if not claim.passed]

    def to_dict(self) -> Dict[str, Any]:
        """report as written to JSON"""
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "pass": self.passed,
            "claims": [
                {
                    "name": claim.name,
                    "pass": claim.passed,
                    "measured": claim.measured,
                    "tolerance": claim.tolerance,
                    "lower_bound": claim.lower_bound,
                    "details": claim.details,
                }
                for claim in self.claims
            ],
        }


def _claim(name, measured, tolerance, at_least=False, **details) -> ClaimResult:
    """measured must not exceed tolerance, or reach it if at_least"""
    measured = float(measured)
    result = ClaimResult(
        name=name,
        passed=bool(measured >= tolerance if at_least else measured <= tolerance),
        measured=measured,
        tolerance=float(tolerance),
        details=details,
        lower_bound=at_least,
    )
    log = LOGGER.info if result.passed else LOGGER.warning
    log(
        "Claim <%s> %s: %.6g (%s %.6g)",
        name,
        "passed" if result.passed else "FAILED",
        measured,
        "minimum" if at_least else "tolerance",
        tolerance,
    )
    return result


def _max_deviation(cut: AngularCut, reference: AngularCut) -> float:
    return float(np.max(np.abs(cut.values - reference.values)))


def _lemma_array(config: ScenarioConfig) -> TwoElementArray:
    if config.geometry.type == "two_element":
        return TwoElementArray(spacing_d=config.geometry.spacing_wavelengths)
    return TwoElementArray(spacing_d=config.geometry.horizontal_spacing_wavelengths)


def check_envelope_lemma(
    config: ScenarioConfig, envelope_offset: float = 0.0
) -> ClaimResult:
    """brute-force phase sweep of the two-element EIRP against its closed form"""

    pattern = config.build_pattern()
    array = _lemma_array(config)
    powers = RegimePowers(p_e=0.0)
    angles = angle_grid(-180.0, 180.0, LEMMA_ANGLE_STEP_DEG)
    angles = angles[angles > -180.0]
    phases = 2 * math.pi * np.arange(LEMMA_PHASE_STEPS) / LEMMA_PHASE_STEPS

    swept = eirp_signal(
        powers, pattern, array, angles[:, None], phases[None, :]
    ).max(axis=1)
    envelope = envelope_signal(powers, pattern, angles).values + envelope_offset
    return _claim(
        "envelope_lemma",
        np.max(np.abs(swept - envelope)),
        LEMMA_TOLERANCE_DB,
        angles=len(angles),
        phase_steps=LEMMA_PHASE_STEPS,
    )


def check_compensation(seed: int, draws: int = COMPENSATION_DRAWS) -> ClaimResult:
    """|AF_A| = MN at the compensated direction for random geometries and directions"""

    rng = np.random.default_rng(derive_seed(seed, "draw"))
    worst = 0.0
    for _ in range(draws):
        geometry = ArrayGeometry(
            rows_m=int(rng.integers(1, 9)),
            cols_n=int(rng.integers(1, 9)),
            d_v=float(rng.uniform(0.3, 1.0)),
            d_h=float(rng.uniform(0.3, 1.0)),
        )
        theta0 = float(rng.uniform(0.0, 180.0))
        phi0 = float(rng.uniform(-179.0, 180.0))
        steering = compensate_steering(geometry, theta0, phi0)
        magnitude = abs(af_aas(geometry, steering, theta0, phi0))
        worst = max(
            worst, abs(magnitude - geometry.num_elements) / geometry.num_elements
        )
    return _claim("compensation", worst, COMPENSATION_TOLERANCE, draws=draws)


def check_decomposition(config: ScenarioConfig) -> ClaimResult:
    """two-user IM3 split reconstructs the branch output and degenerates cleanly"""

    pa = config.build_pa()
    seed = config.seed
    user = config.users[0]
    sample_rate = config.grids.sample_rate_hz
    signals = [
        generate_user_signal(
            bandwidth=user.bandwidth_hz,
            sample_rate=sample_rate,
            num_samples=DECOMPOSITION_SAMPLES,
            power=user.power_dbm,
            seed=derive_seed(seed, index, "draw"),
        )
        for index in range(2)
    ]
    rng = np.random.default_rng(derive_seed(seed, 2, "draw"))
    phases = BranchAssignment.two_branch(*rng.uniform(-math.pi, math.pi, size=2))
    noise_seed = derive_seed(seed, 0, 1, "noise")

    decomposition = decompose_two_user(
        pa, signals[0], signals[1], phases, branch=2, seed=noise_seed
    )
    expected = pa_output(pa, branch_inputs(signals, phases)[1], noise_seed)
    residual = decomposition.reconstruct(pa.alpha) - expected
    error = np.sqrt(np.mean(np.abs(residual) ** 2))
    relative = error / np.sqrt(np.mean(np.abs(expected) ** 2))

    silent = generate_user_signal(
        bandwidth=user.bandwidth_hz,
        sample_rate=sample_rate,
        num_samples=DECOMPOSITION_SAMPLES,
        power=-math.inf,
        seed=0,
    )
    single = decompose_two_user(
        pa, signals[0], silent, phases, branch=2, seed=noise_seed
    )
    degenerate = bool(not np.any(single.cross_a) and not np.any(single.cross_b))

    return _claim(
        "decomposition",
        relative if degenerate else math.inf,
        DECOMPOSITION_TOLERANCE,
        single_user_cross_terms_zero=degenerate,
    )


def check_margins(config: ScenarioConfig) -> ClaimResult:
    """margins add exactly their value and zero margins are the identity"""

    angles = config.build_angles()
    cut = envelope_signal(RegimePowers(p_e=0.0), config.build_pattern(), angles)
    margins = config.build_margins()
    worst = 0.0
    for region in SpectralRegion:
        margin = margins.margin_for(region)
        shifted = apply_margins(cut, margins, region)
        if not np.array_equal(shifted.values, cut.values + margin):
            worst = math.inf
    identity = apply_margins(
        cut, UncertaintyMargins(0.0, 0.0), SpectralRegion.NOISE_DOMINATED
    )
    if not np.array_equal(identity.values, cut.values):
        worst = math.inf
    return _claim(
        "margins",
        worst,
        0.0,
        in_band_db=margins.in_band_margin,
        oob_db=margins.oob_margin,
    )


def band_regions(scenario: FarFieldScenario) -> Dict[str, SpectralRegion]:
    """configured region of each band, else the dominant conducted component"""

    spectra = None
    result = {}
    for band in scenario.bands:
        if band.region is None and spectra is None:
            spectra = reference_spectra(scenario)
        result[band.label] = (
            band.region
            if band.region is not None
            else band_region(spectra.signal, spectra.im3, spectra.noise, band)
        )
    return result


def reference_envelopes(
    scenario: FarFieldScenario,
    envelope_offset: float = 0.0,
) -> Dict[str, AngularCut]:
    """analytic envelope of every band from the measured conducted powers"""

    powers = conducted_band_powers(scenario)
    return {
        label: envelope_total(
            band.coherent + envelope_offset,
            band.noise + envelope_offset,
            scenario.pattern,
            scenario.angles,
            branches=scenario.num_branches,
            polarizations=scenario.polarizations,
            label=f"{label} envelope",
        )
        for label, band in powers.items()
    }


def regime_powers(
    scenario: FarFieldScenario,
    regions: Dict[str, SpectralRegion],
    powers: Optional[Dict[str, BandPowers]] = None,
) -> RegimePowers:
    """per-branch power of each regime, taken from the first band in that regime"""

    powers = powers or conducted_band_powers(scenario)

    def _first(region, component):
        for label, value in regions.items():
            level = getattr(powers[label], component)
            if value is region and level > FLOOR_DB:
                return level
        return None

    coherent = _first(SpectralRegion.SIGNAL_DOMINATED, "coherent")
    noise = _first(SpectralRegion.NOISE_DOMINATED, "noise")
    return RegimePowers(
        p_e=coherent,
        p_im3=_first(SpectralRegion.IM3_DOMINATED, "im3"),
        p_noise=noise,
        p_sub=coherent,
        p_noise_s=noise,
    )


def analytic_envelopes(
    scenario: FarFieldScenario,
    powers: RegimePowers,
) -> Dict[str, AngularCut]:
    """closed-form envelope of every regime with a known power

    The regimes are signal, im3 and noise, plus total for a band holding the
    coherent and the uncorrelated power at once. On an AAS the signal and im3
    envelopes use the coherent sub-array gain and noise the incoherent one.
    """

    array, pattern, angles = scenario.array, scenario.pattern, scenario.angles
    cuts = {}

    if isinstance(array, ArrayGeometry):
        coherent, noise = powers.p_sub, powers.p_noise_s
        if coherent is not None:
            cuts["signal"] = envelope_coherent_aas(
                powers, pattern, array, angles, label="signal envelope"
            )
        if powers.p_im3 is not None:
            cuts["im3"] = envelope_coherent_aas(
                replace(powers, p_sub=powers.p_im3),
                pattern,
                array,
                angles,
                label="im3 envelope",
            )
        if noise is not None:
            cuts["noise"] = envelope_noise_aas(
                powers, pattern, array, angles, label="noise envelope"
            )
    else:
        coherent, noise = powers.p_e, powers.p_noise
        if coherent is not None:
            cuts["signal"] = envelope_signal(powers, pattern, angles)
        if powers.p_im3 is not None:
            cuts["im3"] = envelope_im3(powers, pattern, angles)
        if noise is not None:
            cuts["noise"] = envelope_noise(
                powers, pattern, angles, branches=array.num_branches
            )

    if coherent is not None and noise is not None:
        cuts["total"] = envelope_total(
            coherent,
            noise,
            pattern,
            angles,
            branches=array.num_branches,
            polarizations=array.polarizations,
            label="total envelope",
        )
    return cuts


def check_sweep(
    scenario: FarFieldScenario,
    regions: Dict[str, SpectralRegion],
    envelope_offset: float = 0.0,
    sweep: Optional[SweepResult] = None,
) -> List[ClaimResult]:
    """phase-swept oracle against the analytic envelope of each band"""

    sweep = sweep if sweep is not None else sweep_envelope(scenario)
    references = reference_envelopes(scenario, envelope_offset)
    powers = conducted_band_powers(scenario)
    has_boresight = bool(np.any(scenario.angles == 0))
    chains = scenario.num_branches * scenario.polarizations
    claims = []

    for band in scenario.bands:
        label = band.label
        cut = sweep.cut(label)
        region = regions[label]

        if region is SpectralRegion.SIGNAL_DOMINATED:
            claims.append(
                _claim(
                    f"signal_envelope[{label}]",
                    _max_deviation(cut, references[label]),
                    SIGNAL_TOLERANCE_DB,
                )
            )
        elif region is SpectralRegion.IM3_DOMINATED:
            claims.append(
                _claim(
                    f"im3_envelope[{label}]",
                    _max_deviation(cut, references[label]),
                    IM3_TOLERANCE_DB,
                )
            )
        else:
            claims.append(
                _claim(
                    f"noise_flatness[{label}]",
                    np.max(sweep.spread(label)),
                    NOISE_SPREAD_TOLERANCE_DB,
                )
            )
            if has_boresight:
                expected = (
                    powers[label].noise
                    + scenario.pattern.g_e_max
                    + 10 * math.log10(chains)
                    + envelope_offset
                )
                claims.append(
                    _claim(
                        f"noise_boresight[{label}]",
                        abs(cut.value_at(0.0) - expected),
                        NOISE_BORESIGHT_TOLERANCE_DB,
                        expected_dbm=expected,
                        measured_dbm=cut.value_at(0.0),
                    )
                )

        if has_boresight:
            claims.append(
                _claim(
                    f"boresight_maximality[{label}]",
                    float(np.max(cut.values)) - cut.value_at(0.0),
                    BORESIGHT_TOLERANCE_DB,
                    argmax_deg=cut.argmax_angle(),
                )
            )

    return claims


def _bands_in(regions: Dict[str, SpectralRegion], region: SpectralRegion) -> List[str]:
    return [label for label, value in regions.items() if value is region]


def check_steered(
    scenario: FarFieldScenario,
    steer_angles: Tuple[float, ...],
    regions: Dict[str, SpectralRegion],
    envelope_offset: float = 0.0,
) -> List[ClaimResult]:
    """steered single-user cuts: in-band and IM3 peaks co-located, envelopes hold"""

    references = reference_envelopes(scenario, envelope_offset)
    coherent = _bands_in(regions, SpectralRegion.SIGNAL_DOMINATED) + _bands_in(
        regions, SpectralRegion.IM3_DOMINATED
    )
    step = float(np.min(np.diff(scenario.angles))) if len(scenario.angles) > 1 else 0.0
    claims = []

    for steer_deg in steer_angles:
        LOGGER.info("Steered cut towards %.1f deg", steer_deg)
        cuts = beam_cut(scenario, setting=scenario.array.steer(steer_deg))

        peaks = {label: cuts[label].argmax_angle() for label in coherent}
        spread = max(peaks.values()) - min(peaks.values()) if peaks else 0.0
        claims.append(
            _claim(f"steered_peaks[{steer_deg:g}]", spread, step, peak_angles_deg=peaks)
        )

        excess = max(
            float(np.max(cut.values - references[label].values))
            for label, cut in cuts.items()
        )
        touch = max(
            (
                abs(
                    cuts[label].value_at(steer_deg)
                    - references[label].value_at(steer_deg)
                )
                for label in coherent
            ),
            default=0.0,
        )
        claims.append(
            _claim(
                f"steered_envelope[{steer_deg:g}]",
                max(excess, touch),
                STEERED_TOUCH_TOLERANCE_DB,
                excess_db=excess,
                touch_deviation_db=touch,
            )
        )
    return claims


def check_scaling(
    scenario: FarFieldScenario,
    columns: Tuple[int, ...],
    regions: Dict[str, SpectralRegion],
) -> List[ClaimResult]:
    """boresight coherent gain grows 20 log10 and noise 10 log10 of the column ratio"""

    coherent = _bands_in(regions, SpectralRegion.SIGNAL_DOMINATED)
    noise = _bands_in(regions, SpectralRegion.NOISE_DOMINATED)
    if len(columns) < 2 or not coherent or not noise:
        LOGGER.info("Skipping scaling claims")
        return []

    points = scaling_study(scenario, coherent[0], noise[0], columns)
    coherent_error = 0.0
    noise_error = 0.0
    for previous, current in zip(points, points[1:]):
        ratio = current.cols_n / previous.cols_n
        coherent_error = max(
            coherent_error,
            abs(current.coherent_dbm - previous.coherent_dbm - 20 * math.log10(ratio)),
        )
        noise_error = max(
            noise_error,
            abs(current.noise_dbm - previous.noise_dbm - 10 * math.log10(ratio)),
        )
    table = [point._asdict() for point in points]
    return [
        _claim(
            "coherent_scaling",
            coherent_error,
            COHERENT_SCALING_TOLERANCE_DB,
            points=table,
        ),
        _claim("noise_scaling", noise_error, NOISE_SCALING_TOLERANCE_DB, points=table),
    ]


def linear_reference(scenario: FarFieldScenario) -> FarFieldScenario:
    """same waveforms and noise through a PA without intermodulation"""
    return replace(
        scenario, pa=replace(scenario.pa, alpha=0.0), name=f"{scenario.name} linear"
    )


def _nearest_lobe(cut: AngularCut, target: float) -> float:
    maxima = cut.local_maxima(prominence=MU_LOBE_PROMINENCE_DB)
    if not len(maxima):
        return math.inf
    return float(np.min(np.abs(maxima - target)))


def check_multi_user(
    scenario: FarFieldScenario,
    regions: Dict[str, SpectralRegion],
    slack: float,
    envelope_offset: float = 0.0,
) -> List[ClaimResult]:
    """two-user lobes, Type-B directions and the single-user bound

    A Type-B lobe counts only as a prominent maximum near its predicted
    direction that rises above the cut of the linear reference PA.
    """

    cuts = mu_cut(scenario)
    references = reference_envelopes(scenario, envelope_offset)
    phi1, phi2 = (user.steer_deg for user in scenario.users)
    low, high = scenario.angles[0], scenario.angles[-1]
    claims = []

    for label in _bands_in(regions, SpectralRegion.SIGNAL_DOMINATED):
        targets = [phi for phi in (phi1, phi2) if low < phi < high]
        offset = max((_nearest_lobe(cuts[label], phi) for phi in targets), default=0.0)
        claims.append(
            _claim(
                f"mu_user_lobes[{label}]",
                offset,
                MU_DIRECTION_TOLERANCE_DEG,
                users_deg=targets,
            )
        )

    predicted = [
        direction.angle
        for direction in mu_im_directions(phi1, phi2)
        if direction.visible and low < direction.angle < high
    ]
    im_labels = _bands_in(regions, SpectralRegion.IM3_DOMINATED)
    linear_cuts = mu_cut(linear_reference(scenario)) if predicted and im_labels else {}
    for label in im_labels:
        offset = max(
            (_nearest_lobe(cuts[label], phi) for phi in predicted), default=0.0
        )
        claims.append(
            _claim(
                f"mu_im_lobes[{label}]",
                offset,
                MU_DIRECTION_TOLERANCE_DEG,
                predicted_deg=predicted,
                prominence_db=MU_LOBE_PROMINENCE_DB,
            )
        )
        if not predicted:
            continue
        excess = min(
            cuts[label].value_at(phi) - linear_cuts[label].value_at(phi)
            for phi in predicted
        )
        claims.append(
            _claim(
                f"mu_im_excess[{label}]",
                excess,
                MU_IM_EXCESS_DB,
                at_least=True,
                predicted_deg=predicted,
            )
        )

    for label, cut in cuts.items():
        report = check_mu_bound(cut, references[label], slack=slack)
        claims.append(
            _claim(
                f"mu_bound[{label}]",
                report.worst_margin_db,
                slack,
                worst_angle_deg=report.worst_angle_deg,
            )
        )
    return claims


def check_configurations(
    scenario: FarFieldScenario,
    configurations: Tuple[PaConfiguration, ...],
    in_band: str,
    adjacent: str,
) -> List[ClaimResult]:
    """EIRP change at the beam between PA configurations against the envelopes

    The first configuration is the baseline. Calibrated configurations must
    also reach their ACLR target.
    """

    if not configurations:
        return []

    results = configuration_study(scenario, configurations, in_band, adjacent)
    beam = scenario.users[0].steer_deg
    levels = []
    for result in results:
        references = reference_envelopes(result.scenario)
        levels.append(
            {
                label: (
                    result.cuts[label].value_at(beam),
                    references[label].value_at(beam),
                )
                for label in (in_band, adjacent)
            }
        )

    baseline = results[0].configuration.name
    claims = []
    for result, level in zip(results[1:], levels[1:]):
        name = result.configuration.name
        for label in (in_band, adjacent):
            measured_drop = levels[0][label][0] - level[label][0]
            predicted_drop = levels[0][label][1] - level[label][1]
            claims.append(
                _claim(
                    f"configuration_drop[{name}/{label}]",
                    abs(measured_drop - predicted_drop),
                    CONFIGURATION_TOLERANCE_DB,
                    baseline=baseline,
                    measured_drop_db=measured_drop,
                    predicted_drop_db=predicted_drop,
                )
            )

    for result in results:
        target = result.configuration.target_aclr_db
        if target is None:
            continue
        claims.append(
            _claim(
                f"configuration_aclr[{result.configuration.name}]",
                abs(result.aclr_db - target),
                CONFIGURATION_ACLR_TOLERANCE_DB,
                target_db=target,
                alpha=float(np.real(result.scenario.pa.alpha)),
            )
        )
    return claims


def run_validation(
    config: ScenarioConfig,
    envelope_offset: float = 0.0,
    scenario: Optional[FarFieldScenario] = None,
    sweep: Optional[SweepResult] = None,
) -> ValidationReport:
    """every claim that applies to the scenario; envelope_offset injects a fault"""

    if envelope_offset:
        LOGGER.warning("Injecting an envelope offset of %.3f dB", envelope_offset)

    scenario = scenario or config.build_scenario()
    regions = band_regions(scenario)
    LOGGER.info(
        "Band regions: %s", {label: region.value for label, region in regions.items()}
    )

    claims = [
        check_envelope_lemma(config, envelope_offset),
        check_compensation(config.seed),
        check_decomposition(config),
        check_margins(config),
    ]

    if len(scenario.users) == 1:
        claims.extend(check_sweep(scenario, regions, envelope_offset, sweep))
        claims.extend(
            check_steered(
                scenario, config.grids.steer_angles_deg, regions, envelope_offset
            )
        )
        claims.extend(check_scaling(scenario, config.grids.scaling_columns, regions))
    elif len(scenario.users) == 2:
        claims.extend(
            check_multi_user(
                scenario, regions, config.margins.mu_slack_db, envelope_offset
            )
        )
    else:
        LOGGER.info("No oracle claims for %d users", len(scenario.users))

    claims.extend(
        check_configurations(
            scenario,
            config.build_configurations(),
            config.pa.calibration_in_band,
            config.pa.calibration_adjacent,
        )
    )

    report = ValidationReport(
        scenario=config.name, seed=config.seed, claims=tuple(claims)
    )
    if report.passed:
        LOGGER.info("All %d claims passed", len(claims))
    else:
        LOGGER.warning("Failed claims: %s", ", ".join(report.failed))
    return report
