# -*- coding: utf-8 -*-

"""Tests for array factors and steering."""

import math

import numpy as np
import pytest

from aas_spatial_bound.exceptions import DomainError
from aas_spatial_bound.geometry import (
    ArrayGeometry,
    SteeringConfig,
    TwoElementArray,
    af2,
    af2_magnitude,
    af_aas,
    compensate_steering,
    geometric_phase,
)
from aas_spatial_bound.utils import angle_grid


@pytest.mark.parametrize(
    "phi, expected", [(0.0, 0.0), (90.0, math.pi), (30.0, math.pi / 2)]
)
def test_geometric_phase(two_element, phi, expected):
    assert geometric_phase(two_element, phi) == pytest.approx(expected, abs=1e-12)


def test_af2_magnitude_examples(two_element):
    assert af2_magnitude(two_element, 0.0, 0.0) == 2.0
    assert af2_magnitude(two_element, 90.0, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert abs(af2(two_element, 25.0, 1.0)) == pytest.approx(
        af2_magnitude(two_element, 25.0, 1.0)
    )


def test_envelope_lemma(two_element):
    angles = angle_grid(-180.0, 180.0, 0.25)
    phases = np.radians(np.arange(0.0, 360.0, 0.5))
    swept = af2_magnitude(two_element, angles[:, None], phases[None, :]).max(axis=1)
    np.testing.assert_allclose(swept, 2.0, rtol=1e-4)
    assert np.all(swept <= 2.0)


def test_periodicity(two_element):
    angles = angle_grid(-90.0, 90.0, 3.0)
    np.testing.assert_allclose(
        af2_magnitude(two_element, angles, 0.7),
        af2_magnitude(two_element, angles, 0.7 + 2 * math.pi),
        atol=1e-12,
    )


def test_two_element_steer(two_element):
    for phi0 in (-42.0, 0.0, 18.0, 60.0):
        steering = two_element.steer(phi0)
        assert steering.delta_phi_v == 0.0
        assert af2_magnitude(
            two_element, phi0, steering.delta_phi_h
        ) == pytest.approx(2.0)


def test_two_element_horizontal_plane_only(two_element):
    with pytest.raises(DomainError):
        two_element.geometric_phases(0.0, theta=45.0)
    with pytest.raises(DomainError):
        two_element.steer(0.0, theta0=45.0)


def test_two_element_equals_one_by_two():
    pair = TwoElementArray(spacing_d=0.5)
    row = ArrayGeometry(rows_m=1, cols_n=2, d_h=0.5)
    angles = angle_grid(-90.0, 90.0, 1.0)
    for delta_phi in (0.0, 1.0, -2.5):
        np.testing.assert_allclose(
            np.abs(af_aas(row, SteeringConfig.horizontal(delta_phi), 90.0, angles)),
            af2_magnitude(pair, angles, delta_phi),
            atol=1e-12,
        )
    np.testing.assert_allclose(
        row.geometric_phases(angles), pair.geometric_phases(angles), atol=1e-12
    )


def test_af_aas_examples():
    single = ArrayGeometry(rows_m=1, cols_n=1)
    assert af_aas(single, SteeringConfig(0.3, -1.2), 40.0, 77.0) == pytest.approx(1.0)

    grid = ArrayGeometry(rows_m=8, cols_n=2, d_v=0.7, d_h=0.5)
    steering = compensate_steering(grid, 90.0, 25.0)
    assert af_aas(grid, steering, 90.0, 25.0) == pytest.approx(16.0 + 0j, abs=1e-9)

    column = ArrayGeometry(rows_m=2, cols_n=1, d_v=0.5)
    for phi in (-170.0, 0.0, 33.0):
        assert af_aas(column, SteeringConfig(), 90.0, phi) == pytest.approx(2.0)


def test_compensate_steering_examples():
    grid = ArrayGeometry(rows_m=4, cols_n=4, d_v=0.7, d_h=0.5)
    boresight = compensate_steering(grid, 90.0, 0.0)
    assert boresight.delta_phi_v == pytest.approx(0.0, abs=1e-12)
    assert boresight.delta_phi_h == pytest.approx(0.0, abs=1e-12)
    steered = compensate_steering(grid, 90.0, 30.0)
    assert steered.delta_phi_h == pytest.approx(-math.pi / 2)
    assert steered.delta_phi_v == pytest.approx(0.0, abs=1e-12)


def test_bound_and_compensation_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        geometry = ArrayGeometry(
            rows_m=int(rng.integers(1, 9)),
            cols_n=int(rng.integers(1, 9)),
            d_v=float(rng.uniform(0.3, 1.0)),
            d_h=float(rng.uniform(0.3, 1.0)),
        )
        theta0 = float(rng.uniform(0.0, 180.0))
        phi0 = float(rng.uniform(-179.0, 180.0))
        size = geometry.num_elements

        steering = SteeringConfig(*rng.uniform(-math.pi, math.pi, size=2))
        thetas = rng.uniform(0.0, 180.0, size=50)
        phis = rng.uniform(-180.0, 180.0, size=50)
        assert np.all(np.abs(af_aas(geometry, steering, thetas, phis)) <= size + 1e-9)

        compensated = compensate_steering(geometry, theta0, phi0)
        magnitude = abs(af_aas(geometry, compensated, theta0, phi0))
        assert abs(magnitude - size) / size < 1e-9


def test_steering_is_wrapped():
    steering = SteeringConfig(delta_phi_v=3 * math.pi, delta_phi_h=-1.5 * math.pi)
    assert -math.pi < steering.delta_phi_v <= math.pi
    assert steering.delta_phi_v == pytest.approx(math.pi)
    assert steering.delta_phi_h == pytest.approx(math.pi / 2)
    assert SteeringConfig(delta_phi_h=1.0).delta_phi_h == 1.0


def test_geometry_counts(aas_8x2):
    assert aas_8x2.num_elements == 16
    assert aas_8x2.num_branches == 16
    assert aas_8x2.num_chains == 32
    assert aas_8x2.geometric_phases(np.zeros(3)).shape == (3, 16)
    phases = aas_8x2.excitation_phases(SteeringConfig(0.5, 1.0))
    assert phases[0] == 0.0
    assert phases[1] == pytest.approx(1.0)
    assert phases[2] == pytest.approx(0.5)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rows_m": 0},
        {"cols_n": 1.5},
        {"d_v": 0.0},
        {"d_h": -0.5},
        {"polarizations": 3},
    ],
)
def test_invalid_geometry(kwargs):
    with pytest.raises(DomainError):
        ArrayGeometry(**kwargs)


def test_invalid_theta(aas_8x2):
    with pytest.raises(DomainError):
        af_aas(aas_8x2, SteeringConfig(), 190.0, 0.0)
    with pytest.raises(DomainError):
        TwoElementArray(spacing_d=0.0)
