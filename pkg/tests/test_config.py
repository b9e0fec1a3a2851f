# -*- coding: utf-8 -*-

"""Tests for scenario configuration."""

import numpy as np
import pytest
import yaml

from aas_spatial_bound.config import (
    ScenarioConfig,
    apply_overrides,
    bundled_scenarios,
    dump_config,
    line_numbers,
    load_config,
    override_keys,
)
from aas_spatial_bound.exceptions import ConfigError
from aas_spatial_bound.geometry import ArrayGeometry, TwoElementArray
from aas_spatial_bound.spectral import SpectralRegion

MINIMAL = """\
pattern:
  peak_gain_dbi: 8.0
  colour: red
geometry:
  type: two_element
pa:
  alpha: -0.05
users:
  - power_dbm: 0.0
bands:
  - label: in-band
    f_low_hz: -10000000.0
    f_high_hz: 10000000.0
"""


def _write(tmp_path, text):
    path = tmp_path / "scenario.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_bundled_scenarios():
    assert bundled_scenarios() == (
        "aas_8x2",
        "configurations",
        "mu_0_18",
        "scaling",
        "seven_beams",
        "two_element",
    )


@pytest.mark.parametrize(
    "name",
    ["aas_8x2", "configurations", "mu_0_18", "scaling", "seven_beams", "two_element"],
)
def test_bundled_round_trip(name):
    config = load_config(name)
    assert config.name == name
    assert ScenarioConfig.from_dict(yaml.safe_load(dump_config(config))) == config


def test_two_element_scenario():
    config = load_config("two_element")
    scenario = config.build_scenario()
    assert isinstance(scenario.array, TwoElementArray)
    assert len(scenario.angles) == 121
    assert scenario.phase_steps == 128
    assert scenario.pa.noise_power == -40.0
    assert [band.label for band in scenario.bands] == [
        "in-band",
        "adjacent-low",
        "adjacent-high",
        "far-out",
    ]
    assert scenario.bands[0].region is SpectralRegion.SIGNAL_DOMINATED


def test_aas_scenario_calibrates_alpha():
    config = load_config("aas_8x2", overrides=["grids.num_samples=16384"])
    uncalibrated = config.build_scenario(calibrate=False)
    assert isinstance(uncalibrated.array, ArrayGeometry)
    assert uncalibrated.array.num_chains == 32
    assert uncalibrated.pa.alpha == -0.05
    calibrated = config.build_scenario()
    assert -0.3 < calibrated.pa.alpha < 0
    assert calibrated.pa.alpha != -0.05


def test_unknown_key_has_line(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        load_config(_write(tmp_path, MINIMAL))
    assert excinfo.value.line == 3
    assert excinfo.value.path == "pattern.colour"
    assert str(excinfo.value).startswith("line 3: ")


def test_defaults_fill_in(tmp_path):
    config = load_config(_write(tmp_path, MINIMAL.replace("  colour: red\n", "")))
    assert config.seed == 1
    assert config.pattern.hpbw_deg == 85.0
    assert config.pa.noise_power_dbm is None
    assert config.build_pa().noise_power == -np.inf
    assert config.grids.num_samples == 2**16


def test_missing_section(tmp_path):
    text = MINIMAL.replace("  colour: red\n", "").replace("pa:\n  alpha: -0.05\n", "")
    with pytest.raises(ConfigError) as excinfo:
        load_config(_write(tmp_path, text))
    assert excinfo.value.path == "pa"


@pytest.mark.parametrize(
    "override, path",
    [
        ("bands.0.region=loud", "bands.0.region"),
        ("pattern.peak_gain_dbi=abc", "pattern.peak_gain_dbi"),
        ("grids.num_samples=1.5", "grids.num_samples"),
        ("geometry.type=ring", "geometry.type"),
        ("pattern.hpbw_deg=0", "pattern"),
        ("seed=-1", "seed"),
    ],
)
def test_invalid_values(override, path):
    with pytest.raises(ConfigError) as excinfo:
        load_config("two_element", overrides=[override])
    assert excinfo.value.path == path


def test_configurations_scenario():
    config = load_config("configurations")
    assert [item.name for item in config.configurations] == [
        "no-dpd",
        "dpd",
        "backoff",
    ]
    no_dpd, dpd, backoff = config.build_configurations()
    assert no_dpd.target_aclr_db is None
    assert no_dpd.drive_offset_db == 0.0
    assert dpd.target_aclr_db == 45.0
    assert backoff.drive_offset_db == -16.0
    assert load_config("two_element").configurations == ()
    assert load_config("two_element").build_configurations() == ()


@pytest.mark.parametrize(
    "override, path",
    [
        ("configurations.2.name=dpd", "configurations.1.name"),
        ("configurations.1.target_aclr_db=-3", "configurations"),
        ("pa.calibration_adjacent=missing", "pa.calibration_adjacent"),
    ],
)
def test_invalid_configurations(override, path):
    with pytest.raises(ConfigError) as excinfo:
        load_config("configurations", overrides=[override])
    assert excinfo.value.path == path


def test_invalid_documents(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "extras: 1\n" + MINIMAL))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, ""))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "- just\n- a list\n"))
    with pytest.raises(ConfigError) as excinfo:
        load_config(_write(tmp_path, "pattern: [unclosed\n"))
    assert excinfo.value.line is not None
    with pytest.raises(ConfigError):
        load_config("no_such_scenario")


def test_overrides():
    config = load_config(
        "two_element",
        overrides=["pa.alpha=-0.02", "users.0.steer_deg=18", "grids.phase_steps=32"],
        seed=7,
        budget=123,
    )
    assert config.pa.alpha == -0.02
    assert config.users[0].steer_deg == 18.0
    assert config.grids.phase_steps == 32
    assert config.seed == 7
    assert config.scenario.budget_samples == 123


def test_apply_overrides_errors():
    document = {"users": [{"power_dbm": 0.0}], "seed": 1}
    with pytest.raises(ConfigError):
        apply_overrides(document, ["users.0.power_dbm"])
    with pytest.raises(ConfigError):
        apply_overrides(document, ["users.5.power_dbm=1"])
    with pytest.raises(ConfigError):
        apply_overrides(document, ["seed.value=1"])
    apply_overrides(document, ["grids.rbw_hz=500000.0"])
    assert document["grids"] == {"rbw_hz": 500000.0}


def test_dump_to_file(tmp_path):
    config = load_config("mu_0_18")
    path = tmp_path / "out" / "config.yaml"
    assert dump_config(config, path) is None
    restored = load_config(path)
    assert restored == config
    assert len(restored.users) == 2


def test_line_numbers():
    lines = line_numbers(MINIMAL)
    assert lines["pattern"] == 1
    assert lines["pattern.colour"] == 3
    assert lines["users.0"] == 9
    assert lines["bands.0.f_high_hz"] == 13


def test_override_keys():
    keys = override_keys(load_config("two_element"))
    assert "pa.alpha" in keys
    assert "users.0.steer_deg" in keys
    assert "bands.3.label" in keys
    assert "grids.steer_angles_deg" in keys
    assert "seed" in keys
