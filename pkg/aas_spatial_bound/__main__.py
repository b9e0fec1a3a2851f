# -*- coding: utf-8 -*-

"""Command line entry point."""

import argparse
import logging
import math
import sys

from pathlib import Path
from typing import Dict, List, Optional

from .config import (
    ScenarioConfig,
    bundled_scenarios,
    dump_config,
    load_config,
    override_keys,
)
from .envelope import (
    COHERENT_PAIR_GAIN_DB,
    INCOHERENT_PAIR_GAIN_DB,
    ROUNDED_COHERENT_PAIR_GAIN_DB,
    ROUNDED_INCOHERENT_PAIR_GAIN_DB,
    AngularCut,
    apply_margins,
    bound_from_boresight,
    check_mu_bound,
    mu_im_directions,
)
from .exceptions import ConfigError, SpatialBoundError
from .export import (
    OutputLayout,
    write_cut_csv,
    write_report,
    write_spectrum_csv,
    write_sweep_csv,
)
from .oracle import (
    FarFieldScenario,
    conducted_band_powers,
    configuration_study,
    mu_cut,
    reference_spectra,
    scenario_metadata,
    sweep_envelope,
)
from .spectral import SpectralRegion, aclr, classify_regions, region_spans
from .validate import (
    analytic_envelopes,
    band_regions,
    reference_envelopes,
    regime_powers,
    run_validation,
)

LOGGER = logging.getLogger(__name__)

DEFAULT_CONFIG = "two_element"
DEFAULT_OUT = "results"
EXIT_OK = 0
EXIT_CLAIM_FAILED = 1
EXIT_ERROR = 2


def _layout(args, config: ScenarioConfig) -> OutputLayout:
    return OutputLayout(
        base=Path(args.out or DEFAULT_OUT), scenario=config.name, seed=config.seed
    )


def _prepare_cut(cut: AngularCut, normalize: bool) -> AngularCut:
    return cut.normalized() if normalize else cut


def _write_cut(layout: OutputLayout, what: str, cut: AngularCut, normalize: bool):
    return write_cut_csv(layout.cut(what), _prepare_cut(cut, normalize))


def _boresight_levels(
    values: List[str], scenario: FarFieldScenario
) -> Dict[str, float]:
    levels = {}
    for value in values:
        label, separator, raw = value.partition("=")
        label = label.strip()
        try:
            level = float(raw)
        except ValueError:
            level = math.nan
        if not separator or not math.isfinite(level):
            raise ConfigError(f"boresight EIRP must look like band=dBm, got {value!r}")
        scenario.band(label)
        levels[label] = level
    return levels


def cmd_envelope(args, config: ScenarioConfig) -> int:
    """signal, im3, noise and total regime envelopes, band envelopes and bounds"""

    layout = _layout(args, config)
    scenario = config.build_scenario()
    measured = _boresight_levels(args.boresight_eirp, scenario)
    regions = band_regions(scenario)
    powers = conducted_band_powers(scenario)
    regimes = regime_powers(scenario, regions, powers)
    margins = config.build_margins()

    for regime, cut in analytic_envelopes(scenario, regimes).items():
        _write_cut(layout, f"{regime}-envelope", cut, args.normalize_boresight)

    bands = {}
    for label, envelope in reference_envelopes(scenario).items():
        region = regions[label]
        bound = apply_margins(envelope, margins, region)
        _write_cut(layout, f"{label}-envelope", envelope, args.normalize_boresight)
        _write_cut(layout, f"{label}-bound", bound, args.normalize_boresight)
        bands[label] = {
            "region": region.value,
            "coherent_dbm": powers[label].coherent,
            "im3_dbm": powers[label].im3,
            "noise_dbm": powers[label].noise,
            "margin_db": margins.margin_for(region),
            "boresight_envelope_dbm": envelope.value_at(0.0),
            "boresight_bound_dbm": bound.value_at(0.0),
        }
        if label in measured:
            measured_bound = apply_margins(
                bound_from_boresight(
                    measured[label],
                    scenario.pattern,
                    scenario.angles,
                    label=f"{label} boresight bound",
                ),
                margins,
                region,
            )
            _write_cut(
                layout,
                f"{label}-boresight-bound",
                measured_bound,
                args.normalize_boresight,
            )
            bands[label]["measured_boresight_dbm"] = measured[label]
            bands[label]["measured_bound_dbm"] = (
                measured[label] + margins.margin_for(region)
            )

    report = {
        "scenario": config.name,
        "seed": config.seed,
        "normalized": args.normalize_boresight,
        "constants": {
            "coherent_pair_gain_db": COHERENT_PAIR_GAIN_DB,
            "coherent_pair_gain_rounded_db": ROUNDED_COHERENT_PAIR_GAIN_DB,
            "incoherent_pair_gain_db": INCOHERENT_PAIR_GAIN_DB,
            "incoherent_pair_gain_rounded_db": ROUNDED_INCOHERENT_PAIR_GAIN_DB,
        },
        "regime_powers_dbm": regimes,
        "bands": bands,
        "model": scenario_metadata(scenario),
    }
    write_report(layout.report("envelope"), report)
    return EXIT_OK


def cmd_validate(args, config: ScenarioConfig) -> int:
    """oracle against analytic envelopes; exit status 1 iff a claim fails"""

    layout = _layout(args, config)
    scenario = config.build_scenario()

    sweep = None
    if len(scenario.users) == 1:
        sweep = sweep_envelope(scenario)
        write_sweep_csv(layout.cut("sweep"), sweep)

    report = run_validation(
        config,
        envelope_offset=args.inject_envelope_offset,
        scenario=scenario,
        sweep=sweep,
    )
    write_report(layout.report("validate"), report.to_dict())

    for claim in report.claims:
        print(
            f"{'PASS' if claim.passed else 'FAIL'} {claim.name}: "
            f"{claim.measured:.6g} "
            f"({'minimum' if claim.lower_bound else 'tolerance'} "
            f"{claim.tolerance:.6g})"
        )
    print(f"{'PASS' if report.passed else 'FAIL'} {config.name} seed={config.seed}")

    return EXIT_OK if report.passed else EXIT_CLAIM_FAILED


def _directions(phi1: float, phi2: float) -> List[Dict]:
    return [
        {
            "users_deg": [phi_k, phi_l],
            "angle_deg": direction.angle,
            "visible": direction.visible,
        }
        for (phi_k, phi_l), direction in zip(
            ((phi1, phi2), (phi2, phi1)), mu_im_directions(phi1, phi2)
        )
    ]


def cmd_mu(args, config: ScenarioConfig) -> int:
    """two-user cuts, predicted Type-B directions and the single-user bound check"""

    if len(config.users) != 2:
        raise ConfigError(
            f"the mu command needs exactly two users, got {len(config.users)}",
            path="users",
        )

    layout = _layout(args, config)
    scenario = config.build_scenario()
    cuts = mu_cut(scenario)
    references = reference_envelopes(scenario)
    regions = band_regions(scenario)
    phi1, phi2 = (user.steer_deg for user in config.users)

    bounds = {}
    for label, cut in cuts.items():
        _write_cut(layout, f"mu-{label}", cut, args.normalize_boresight)
        _write_cut(
            layout, f"su-{label}-envelope", references[label], args.normalize_boresight
        )
        bounds[label] = dict(
            check_mu_bound(
                cut, references[label], slack=config.margins.mu_slack_db
            ).to_dict(),
            region=regions[label].value,
        )

    directions = _directions(phi1, phi2)
    for direction in directions:
        if not direction["visible"]:
            LOGGER.info(
                "Type-B direction for users %s is invisible", direction["users_deg"]
            )

    write_report(layout.report("mu-directions"), {"directions": directions})
    write_report(
        layout.report("mu-bound"),
        {
            "scenario": config.name,
            "seed": config.seed,
            "users_deg": [phi1, phi2],
            "pass": all(bound["pass"] for bound in bounds.values()),
            "bands": bounds,
        },
    )
    return EXIT_OK


def cmd_psd(args, config: ScenarioConfig) -> int:
    """component spectra of the reference branch, region spans and ACLR"""

    layout = _layout(args, config)
    scenario = config.build_scenario()
    spectra = reference_spectra(scenario)

    for component, spectrum in spectra._asdict().items():
        write_spectrum_csv(layout.spectrum(component), spectrum)

    regions = classify_regions(spectra.signal, spectra.im3, spectra.noise)
    spans = [
        {"f_low_hz": low, "f_high_hz": high, "region": region.value}
        for low, high, region in region_spans(spectra.total, regions)
    ]
    band_kinds = band_regions(scenario)
    in_bands = [
        band
        for band in scenario.bands
        if band_kinds[band.label] is SpectralRegion.SIGNAL_DOMINATED
    ]
    ratios = {
        f"{reference.label}/{band.label}": aclr(spectra.total, reference, band)
        for reference in in_bands
        for band in scenario.bands
        if band is not reference
    }

    write_report(
        layout.report("psd"),
        {
            "scenario": config.name,
            "seed": config.seed,
            "rbw_hz": scenario.rbw,
            "alpha": scenario.pa.alpha,
            "regions": spans,
            "aclr_db": ratios,
        },
    )
    return EXIT_OK


def cmd_compare(args, config: ScenarioConfig) -> int:
    """beam cuts and ACLR of every configured PA operating point"""

    configurations = config.build_configurations()
    if not configurations:
        raise ConfigError(
            "compare needs at least one configuration", path="configurations"
        )

    layout = _layout(args, config)
    scenario = config.build_scenario()
    in_band, adjacent = config.pa.calibration_in_band, config.pa.calibration_adjacent
    beam = scenario.users[0].steer_deg

    summary = []
    for result in configuration_study(scenario, configurations, in_band, adjacent):
        name = result.configuration.name
        for label, cut in result.cuts.items():
            _write_cut(layout, f"{name}-{label}", cut, args.normalize_boresight)
        summary.append(
            {
                "name": name,
                "target_aclr_db": result.configuration.target_aclr_db,
                "drive_offset_db": result.configuration.drive_offset_db,
                "alpha": result.scenario.pa.alpha,
                "aclr_db": result.aclr_db,
                "beam_eirp_dbm": {
                    label: cut.value_at(beam) for label, cut in result.cuts.items()
                },
            }
        )

    write_report(
        layout.report("compare"),
        {
            "scenario": config.name,
            "seed": config.seed,
            "beam_deg": beam,
            "in_band": in_band,
            "adjacent": adjacent,
            "configurations": summary,
        },
    )
    return EXIT_OK


def cmd_config_dump(args, config: ScenarioConfig) -> int:
    """fully resolved scenario; to stdout, and to reports/ if --out is given"""

    if args.keys:
        sys.stdout.write("".join(f"{key}\n" for key in override_keys(config)))
        return EXIT_OK
    if args.out:
        dump_config(config, _layout(args, config).path("reports", "config", "yaml"))
    sys.stdout.write(dump_config(config))
    return EXIT_OK


COMMANDS = {
    "envelope": cmd_envelope,
    "validate": cmd_validate,
    "mu": cmd_mu,
    "psd": cmd_psd,
    "compare": cmd_compare,
    "config-dump": cmd_config_dump,
}


def _parse_args(argv: Optional[List[str]] = None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        "-c",
        default=DEFAULT_CONFIG,
        help="scenario YAML file or name of a bundled scenario "
        f"({', '.join(bundled_scenarios())})",
    )
    common.add_argument(
        "--out", "-o", help=f"output directory (default: {DEFAULT_OUT})"
    )
    common.add_argument("--seed", "-s", type=int, help="master seed override")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration key by dot path, e.g. pa.alpha=-0.02",
    )
    common.add_argument(
        "--normalize-boresight",
        action="store_true",
        help="write cuts relative to their boresight value",
    )
    common.add_argument(
        "--budget", type=int, help="ceiling on processed samples of the oracle"
    )
    common.add_argument(
        "--inject-envelope-offset",
        type=float,
        default=0.0,
        help=argparse.SUPPRESS,
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument(
        "--verbose",
        "-v",
        action="count",
        default=0,
        help="log level (repeat for more verbosity)",
    )
    verbosity.add_argument(
        "--quiet", "-q", action="store_true", help="only log warnings and errors"
    )

    parser = argparse.ArgumentParser(
        prog="aas-bound",
        description="Spatial upper bound of radiated power for active antenna arrays",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in COMMANDS.items():
        subparser = subparsers.add_parser(name, parents=[common], help=command.__doc__)
        if name == "config-dump":
            subparser.add_argument(
                "--keys", action="store_true", help="list the dot paths --set accepts"
            )
        if name == "envelope":
            subparser.add_argument(
                "--boresight-eirp",
                action="append",
                default=[],
                metavar="BAND=DBM",
                help="measured boresight EIRP of a band; adds a bound through it",
            )

    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    """Command line entry point."""

    args = _parse_args(argv)

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING
        if args.quiet
        else logging.DEBUG
        if args.verbose > 0
        else logging.INFO,
        format="%(asctime)s %(levelname)-8.8s [%(name)s:%(lineno)s] %(message)s",
    )

    LOGGER.info(args)

    try:
        config = load_config(
            args.config, overrides=args.overrides, seed=args.seed, budget=args.budget
        )
        return COMMANDS[args.command](args, config)
    except (SpatialBoundError, OSError) as exc:
        LOGGER.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
