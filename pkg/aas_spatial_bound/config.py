# -*- coding: utf-8 -*-

"""Scenario configuration: YAML parsing, validation, overrides and dumping."""

import dataclasses
import logging
import math
import os

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
import yaml

from pytility import arg_to_iter, normalize_space, parse_float

from .envelope import UncertaintyMargins
from .exceptions import ConfigError
from .geometry import ArrayGeometry, TwoElementArray
from .oracle import (
    DEFAULT_BUDGET,
    DEFAULT_PHASE_STEPS,
    FarFieldScenario,
    PaConfiguration,
    UserBeam,
    calibrate_alpha,
)
from .pattern import DEFAULT_FRONT_TO_BACK_DB, DEFAULT_HPBW_DEG, ElementPatternParams
from .spectral import BandDefinition, SpectralRegion
from .utils import angle_grid
from .waveform import PaModel

LOGGER = logging.getLogger(__name__)

SCENARIO_PACKAGE = "aas_spatial_bound"
SCENARIO_DIR = "scenarios"
REQUIRED_SECTIONS = ("pattern", "geometry", "pa", "users", "bands")
SECTION_ORDER = (
    "scenario",
    "pattern",
    "geometry",
    "pa",
    "users",
    "bands",
    "grids",
    "margins",
    "configurations",
    "seed",
)
GEOMETRY_KEYS = {
    "two_element": ("type", "spacing_wavelengths"),
    "aas": (
        "type",
        "rows",
        "cols",
        "vertical_spacing_wavelengths",
        "horizontal_spacing_wavelengths",
        "polarizations",
    ),
}
REGIONS = {region.value: region for region in SpectralRegion}

Lines = Dict[str, int]


def _fail(message: str, path: str, lines: Optional[Lines]) -> ConfigError:
    return ConfigError(message, path=path, line=(lines or {}).get(path))


def _to_float(value: Any, path: str, lines: Optional[Lines]) -> float:
    number = None if isinstance(value, bool) else parse_float(value)
    if number is None or not math.isfinite(number):
        raise _fail(f"expected a finite number, got {value!r}", path, lines)
    return number


def _to_int(value: Any, path: str, lines: Optional[Lines]) -> int:
    number = _to_float(value, path, lines)
    if not number.is_integer():
        raise _fail(f"expected an integer, got {value!r}", path, lines)
    return int(number)


def _to_str(value: Any, path: str, lines: Optional[Lines]) -> str:
    if not isinstance(value, (str, int, float)) or isinstance(value, bool):
        raise _fail(f"expected text, got {value!r}", path, lines)
    text = normalize_space(str(value))
    if not text:
        raise _fail("expected non-empty text", path, lines)
    return text


def _to_floats(value: Any, path: str, lines: Optional[Lines]) -> Tuple[float, ...]:
    if not isinstance(value, (list, tuple)):
        raise _fail(f"expected a list of numbers, got {value!r}", path, lines)
    return tuple(_to_float(item, f"{path}.{i}", lines) for i, item in enumerate(value))


def _to_ints(value: Any, path: str, lines: Optional[Lines]) -> Tuple[int, ...]:
    if not isinstance(value, (list, tuple)):
        raise _fail(f"expected a list of integers, got {value!r}", path, lines)
    return tuple(_to_int(item, f"{path}.{i}", lines) for i, item in enumerate(value))


PARSERS = {
    float: _to_float,
    int: _to_int,
    str: _to_str,
    Tuple[float, ...]: _to_floats,
    Tuple[int, ...]: _to_ints,
}


class _Section:
    """shared parsing of a flat mapping into a frozen dataclass"""

    @classmethod
    def from_mapping(
        cls,
        mapping: Any,
        path: str,
        lines: Optional[Lines] = None,
        allowed: Optional[Iterable[str]] = None,
    ):
        """validate keys and coerce values; missing keys take the defaults"""

        if mapping is None:
            mapping = {}
        if not isinstance(mapping, dict):
            raise _fail(
                f"section must be a mapping, got {type(mapping).__name__}",
                path,
                lines,
            )

        fields = {field.name: field for field in dataclasses.fields(cls)}
        allowed = frozenset(arg_to_iter(allowed)) or frozenset(fields)
        kwargs = {}

        for key, value in mapping.items():
            key_path = f"{path}.{key}"
            if key not in allowed:
                raise _fail(f"unknown key <{key}>", key_path, lines)
            field = fields[key]
            optional = _is_optional(field.type)
            if value is None and optional:
                kwargs[key] = None
                continue
            parser = PARSERS[_strip_optional(field.type)]
            kwargs[key] = parser(value, key_path, lines)

        for name, field in fields.items():
            if (
                name not in kwargs
                and field.default is dataclasses.MISSING
                and field.default_factory is dataclasses.MISSING
            ):
                raise _fail(f"missing required key <{name}>", f"{path}.{name}", lines)

        return cls(**kwargs)

    def to_mapping(self, keys: Optional[Iterable[str]] = None) -> Dict[str, Any]:
        """plain YAML-serialisable mapping"""

        keys = tuple(arg_to_iter(keys)) or tuple(
            field.name for field in dataclasses.fields(self)
        )
        result = {}
        for key in keys:
            value = getattr(self, key)
            result[key] = list(value) if isinstance(value, tuple) else value
        return result


def _is_optional(annotation) -> bool:
    return (
        getattr(annotation, "__origin__", None) is Union
        and type(None) in annotation.__args__
    )


def _strip_optional(annotation):
    if not _is_optional(annotation):
        return annotation
    return next(arg for arg in annotation.__args__ if arg is not type(None))


@dataclass(frozen=True)
class ScenarioSection(_Section):
    """run identity and resource limits"""

    name: str = "scenario"
    budget_samples: int = DEFAULT_BUDGET
    workers: int = 1


@dataclass(frozen=True)
class PatternSection(_Section):
    """element or sub-array pattern"""

    peak_gain_dbi: float
    hpbw_deg: float = DEFAULT_HPBW_DEG
    front_to_back_db: float = DEFAULT_FRONT_TO_BACK_DB


@dataclass(frozen=True)
class GeometrySection(_Section):
    """two-element array or M x N AAS"""

    type: str = "two_element"
    spacing_wavelengths: float = 0.5
    rows: int = 1
    cols: int = 2
    vertical_spacing_wavelengths: float = 0.5
    horizontal_spacing_wavelengths: float = 0.5
    polarizations: int = 1


@dataclass(frozen=True)
class PaSection(_Section):
    """PA nonlinearity and noise; target_aclr_db triggers alpha calibration"""

    alpha: float = -0.05
    alpha_imag: float = 0.0
    noise_power_dbm: Optional[float] = None
    target_aclr_db: Optional[float] = None
    calibration_in_band: Optional[str] = None
    calibration_adjacent: Optional[str] = None


@dataclass(frozen=True)
class UserSection(_Section):
    """one user waveform and its beam target"""

    power_dbm: float = 0.0
    bandwidth_hz: float = 20e6
    center_offset_hz: float = 0.0
    steer_deg: float = 0.0


@dataclass(frozen=True)
class BandSection(_Section):
    """integration band relative to the carrier"""

    label: str
    f_low_hz: float
    f_high_hz: float
    region: Optional[str] = None


@dataclass(frozen=True)
class GridSection(_Section):
    """angle, phase and sampling grids"""

    angle_start_deg: float = -60.0
    angle_stop_deg: float = 60.0
    angle_step_deg: float = 1.0
    phase_steps: int = DEFAULT_PHASE_STEPS
    sample_rate_hz: float = 122.88e6
    num_samples: int = 2**16
    rbw_hz: float = 1e6
    steer_angles_deg: Tuple[float, ...] = ()
    scaling_columns: Tuple[int, ...] = (1, 2, 4, 8)


@dataclass(frozen=True)
class MarginSection(_Section):
    """uncertainty margins and the multi-user slack"""

    in_band_db: float = 1.3
    oob_db: float = 3.0
    mu_slack_db: float = 0.5


@dataclass(frozen=True)
class ConfigurationSection(_Section):
    """PA operating point compared against the configured PA"""

    name: str
    target_aclr_db: Optional[float] = None
    drive_offset_db: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    """fully resolved scenario"""

    pattern: PatternSection
    geometry: GeometrySection
    pa: PaSection
    users: Tuple[UserSection, ...]
    bands: Tuple[BandSection, ...]
    scenario: ScenarioSection = ScenarioSection()
    grids: GridSection = GridSection()
    margins: MarginSection = MarginSection()
    configurations: Tuple[ConfigurationSection, ...] = ()
    seed: int = 1

    @classmethod
    def from_dict(
        cls, document: Any, lines: Optional[Lines] = None
    ) -> "ScenarioConfig":
        """validate a parsed YAML document"""

        if not isinstance(document, dict):
            raise ConfigError("configuration must be a mapping of sections")

        for key in document:
            if key not in SECTION_ORDER:
                raise _fail(f"unknown section <{key}>", str(key), lines)
        for section in REQUIRED_SECTIONS:
            if section not in document:
                raise ConfigError(f"missing required section <{section}>", path=section)

        geometry = document["geometry"] or {}
        if not isinstance(geometry, dict):
            raise _fail("section must be a mapping", "geometry", lines)
        geometry_type = geometry.get("type", "two_element")
        if not isinstance(geometry_type, str) or geometry_type not in GEOMETRY_KEYS:
            raise _fail(
                f"geometry type must be one of {sorted(GEOMETRY_KEYS)}, "
                f"got {geometry_type!r}",
                "geometry.type",
                lines,
            )

        config = cls(
            scenario=ScenarioSection.from_mapping(
                document.get("scenario"), "scenario", lines
            ),
            pattern=PatternSection.from_mapping(document["pattern"], "pattern", lines),
            geometry=GeometrySection.from_mapping(
                geometry, "geometry", lines, allowed=GEOMETRY_KEYS[geometry_type]
            ),
            pa=PaSection.from_mapping(document["pa"], "pa", lines),
            users=_parse_list(UserSection, document["users"], "users", lines),
            bands=_parse_list(BandSection, document["bands"], "bands", lines),
            grids=GridSection.from_mapping(document.get("grids"), "grids", lines),
            margins=MarginSection.from_mapping(
                document.get("margins"), "margins", lines
            ),
            configurations=_parse_list(
                ConfigurationSection,
                document.get("configurations") or [],
                "configurations",
                lines,
                allow_empty=True,
            ),
            seed=_to_int(document.get("seed", 1), "seed", lines),
        )
        config.validate(lines)
        return config

    def validate(self, lines: Optional[Lines] = None):
        """cross-field checks that the domain types do not cover"""

        if self.seed < 0:
            raise _fail("seed must be non-negative", "seed", lines)
        labels = [band.label for band in self.bands]
        for index, band in enumerate(self.bands):
            if labels.count(band.label) > 1:
                raise _fail(
                    f"duplicate band label <{band.label}>",
                    f"bands.{index}.label",
                    lines,
                )
            if band.region is not None and band.region not in REGIONS:
                raise _fail(
                    f"region must be one of {sorted(REGIONS)}, got {band.region!r}",
                    f"bands.{index}.region",
                    lines,
                )
        names = [item.name for item in self.configurations]
        for index, item in enumerate(self.configurations):
            if names.count(item.name) > 1:
                raise _fail(
                    f"duplicate configuration name <{item.name}>",
                    f"configurations.{index}.name",
                    lines,
                )
        if self.pa.target_aclr_db is not None or self.configurations:
            for key in ("calibration_in_band", "calibration_adjacent"):
                label = getattr(self.pa, key)
                if label not in labels:
                    raise _fail(
                        f"calibration needs a band label, got {label!r}",
                        f"pa.{key}",
                        lines,
                    )

        # build every domain object once so parameter errors surface with a path
        for path, builder in (
            ("pattern", self.build_pattern),
            ("geometry", self.build_array),
            ("pa", self.build_pa),
            ("users", self.build_users),
            ("bands", self.build_bands),
            ("grids", self.build_angles),
            ("margins", self.build_margins),
            ("configurations", self.build_configurations),
        ):
            try:
                builder()
            except ValueError as exc:
                raise _fail(str(exc), path, lines) from exc

    def to_dict(self) -> Dict[str, Any]:
        """document in section order, defaults filled in"""

        return {
            "scenario": self.scenario.to_mapping(),
            "pattern": self.pattern.to_mapping(),
            "geometry": self.geometry.to_mapping(GEOMETRY_KEYS[self.geometry.type]),
            "pa": self.pa.to_mapping(),
            "users": [user.to_mapping() for user in self.users],
            "bands": [band.to_mapping() for band in self.bands],
            "grids": self.grids.to_mapping(),
            "margins": self.margins.to_mapping(),
            "configurations": [item.to_mapping() for item in self.configurations],
            "seed": self.seed,
        }

    @property
    def name(self) -> str:
        """scenario name used in output file names"""
        return self.scenario.name

    def build_pattern(self) -> ElementPatternParams:
        """radiator pattern"""
        return ElementPatternParams(
            g_e_max=self.pattern.peak_gain_dbi,
            phi_3db=self.pattern.hpbw_deg,
            a_m=self.pattern.front_to_back_db,
        )

    def build_array(self) -> Union[TwoElementArray, ArrayGeometry]:
        """array of the configured type"""
        if self.geometry.type == "two_element":
            return TwoElementArray(spacing_d=self.geometry.spacing_wavelengths)
        return ArrayGeometry(
            rows_m=self.geometry.rows,
            cols_n=self.geometry.cols,
            d_v=self.geometry.vertical_spacing_wavelengths,
            d_h=self.geometry.horizontal_spacing_wavelengths,
            polarizations=self.geometry.polarizations,
        )

    def build_pa(self, alpha: Optional[float] = None) -> PaModel:
        """PA model; alpha overrides the configured coefficient"""
        if alpha is None:
            alpha = (
                complex(self.pa.alpha, self.pa.alpha_imag)
                if self.pa.alpha_imag
                else self.pa.alpha
            )
        noise = (
            -math.inf if self.pa.noise_power_dbm is None else self.pa.noise_power_dbm
        )
        return PaModel(alpha=alpha, noise_power=noise)

    def build_users(self) -> Tuple[UserBeam, ...]:
        """user beams"""
        if not self.users:
            raise ValueError("at least one user is required")
        return tuple(
            UserBeam(
                power_dbm=user.power_dbm,
                bandwidth_hz=user.bandwidth_hz,
                center_offset_hz=user.center_offset_hz,
                steer_deg=user.steer_deg,
            )
            for user in self.users
        )

    def build_bands(self) -> Tuple[BandDefinition, ...]:
        """integration bands"""
        if not self.bands:
            raise ValueError("at least one band is required")
        return tuple(
            BandDefinition(
                f_low=band.f_low_hz,
                f_high=band.f_high_hz,
                label=band.label,
                region=None if band.region is None else REGIONS[band.region],
            )
            for band in self.bands
        )

    def build_angles(self) -> np.ndarray:
        """observation angle grid in degrees"""
        return angle_grid(
            self.grids.angle_start_deg,
            self.grids.angle_stop_deg,
            self.grids.angle_step_deg,
        )

    def build_margins(self) -> UncertaintyMargins:
        """uncertainty margins"""
        return UncertaintyMargins(
            in_band_margin=self.margins.in_band_db, oob_margin=self.margins.oob_db
        )

    def build_configurations(self) -> Tuple[PaConfiguration, ...]:
        """PA operating points to compare, in configured order"""
        return tuple(
            PaConfiguration(
                name=item.name,
                target_aclr_db=item.target_aclr_db,
                drive_offset_db=item.drive_offset_db,
            )
            for item in self.configurations
        )

    def build_scenario(self, calibrate: bool = True) -> FarFieldScenario:
        """oracle scenario; calibrates alpha first if a target ACLR is configured"""

        scenario = FarFieldScenario(
            array=self.build_array(),
            pattern=self.build_pattern(),
            pa=self.build_pa(),
            users=self.build_users(),
            bands=self.build_bands(),
            angles=self.build_angles(),
            phase_steps=self.grids.phase_steps,
            sample_rate=self.grids.sample_rate_hz,
            num_samples=self.grids.num_samples,
            rbw=self.grids.rbw_hz,
            seed=self.seed,
            budget=self.scenario.budget_samples,
            workers=self.scenario.workers,
            name=self.name,
        )
        if not calibrate or self.pa.target_aclr_db is None:
            return scenario

        alpha = calibrate_alpha(
            scenario,
            target_aclr_db=self.pa.target_aclr_db,
            in_band=self.pa.calibration_in_band,
            adjacent=self.pa.calibration_adjacent,
        )
        return dataclasses.replace(scenario, pa=self.build_pa(alpha=alpha))


def _parse_list(
    section_cls,
    items: Any,
    path: str,
    lines: Optional[Lines],
    allow_empty: bool = False,
) -> tuple:
    if not isinstance(items, list) or not (items or allow_empty):
        raise _fail(
            "expected a list" if allow_empty else "expected a non-empty list",
            path,
            lines,
        )
    return tuple(
        section_cls.from_mapping(item, f"{path}.{index}", lines)
        for index, item in enumerate(items)
    )


def line_numbers(text: str) -> Lines:
    """1-based line of every dot path in a YAML document"""

    result = {}

    def _walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                result[path] = key_node.start_mark.line + 1
                _walk(value_node, path)
        elif isinstance(node, yaml.SequenceNode):
            for index, item in enumerate(node.value):
                path = f"{prefix}.{index}"
                result[path] = item.start_mark.line + 1
                _walk(item, path)

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return result
    if root is not None:
        _walk(root, "")
    return result


@lru_cache(maxsize=None)
def bundled_scenarios() -> Tuple[str, ...]:
    """names of the scenarios shipped with the package"""
    directory = resources.files(SCENARIO_PACKAGE) / SCENARIO_DIR
    return tuple(
        sorted(
            entry.name[: -len(".yaml")]
            for entry in directory.iterdir()
            if entry.name.endswith(".yaml")
        )
    )


def read_config_text(path_or_name: Union[str, os.PathLike]) -> Tuple[str, str]:
    """YAML text and its origin, from a file path or a bundled scenario name"""

    path = Path(path_or_name)
    if path.is_file():
        LOGGER.info("Reading scenario from <%s>", path.resolve())
        return path.read_text(encoding="utf-8"), str(path.resolve())

    name = str(path_or_name)
    if name in bundled_scenarios():
        LOGGER.info("Reading bundled scenario <%s>", name)
        resource = resources.files(SCENARIO_PACKAGE) / SCENARIO_DIR / f"{name}.yaml"
        return resource.read_text(encoding="utf-8"), f"<bundled:{name}>"

    raise ConfigError(
        f"no such file or bundled scenario <{name}>; "
        f"bundled: {', '.join(bundled_scenarios())}"
    )


def parse_document(text: str) -> Tuple[Dict[str, Any], Lines]:
    """parsed document and its line numbers"""

    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(
            f"invalid YAML: {getattr(exc, 'problem', exc)}",
            line=None if mark is None else mark.line + 1,
        ) from exc
    return document, line_numbers(text)


def apply_overrides(
    document: Dict[str, Any], overrides: Iterable[str]
) -> Dict[str, Any]:
    """set dot-path keys (`pa.alpha=-0.02`, `users.1.steer_deg=18`) in place"""

    for override in arg_to_iter(overrides):
        key, separator, raw = override.partition("=")
        key = key.strip()
        if not separator or not key:
            raise ConfigError(
                f"override must look like key.path=value, got {override!r}"
            )
        try:
            value = yaml.safe_load(raw) if raw.strip() else None
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid override value {raw!r}", path=key) from exc

        parts = key.split(".")
        target = document
        for depth, part in enumerate(parts):
            last = depth == len(parts) - 1
            if isinstance(target, list):
                try:
                    index = int(part)
                    if last:
                        target[index] = value
                    else:
                        target = target[index]
                except (ValueError, IndexError) as exc:
                    raise ConfigError(
                        f"no list entry <{part}>", path=".".join(parts[: depth + 1])
                    ) from exc
            elif isinstance(target, dict):
                if last:
                    target[part] = value
                else:
                    if target.get(part) is None:
                        target[part] = {}
                    target = target[part]
            else:
                raise ConfigError(
                    "cannot descend into a scalar", path=".".join(parts[: depth + 1])
                )
        LOGGER.info("Override <%s> = %r", key, value)
    return document


def load_config(
    path_or_name: Union[str, os.PathLike],
    overrides: Iterable[str] = (),
    seed: Optional[int] = None,
    budget: Optional[int] = None,
) -> ScenarioConfig:
    """read, override and validate a scenario"""

    text, origin = read_config_text(path_or_name)
    document, lines = parse_document(text)
    if document is None:
        raise ConfigError(f"scenario <{origin}> is empty")
    if not isinstance(document, dict):
        raise ConfigError(f"scenario <{origin}> must be a mapping of sections", line=1)

    overrides = list(arg_to_iter(overrides))
    if seed is not None:
        overrides.append(f"seed={seed}")
    if budget is not None:
        overrides.append(f"scenario.budget_samples={budget}")
    apply_overrides(document, overrides)

    return ScenarioConfig.from_dict(document, lines)


def dump_config(config: ScenarioConfig, file=None) -> Optional[str]:
    """YAML document that re-parses to the same configuration"""

    text = yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=False)
    if file is None:
        return text
    path = Path(file).resolve()
    path.parent.mkdir(parents=True, exist_ok=True)
    LOGGER.info("Writing configuration to <%s>", path)
    path.write_text(text, encoding="utf-8")
    return None


def override_keys(config: ScenarioConfig) -> List[str]:
    """every dot path that can be overridden"""

    result = []

    def _walk(value, prefix):
        if isinstance(value, dict):
            for key, item in value.items():
                _walk(item, f"{prefix}.{key}" if prefix else key)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for index, item in enumerate(value):
                _walk(item, f"{prefix}.{index}")
        else:
            result.append(prefix)

    _walk(config.to_dict(), "")
    return result
