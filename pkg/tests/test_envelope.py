# -*- coding: utf-8 -*-

"""Tests for directional EIRP, regime envelopes and bound checks."""

import math

import numpy as np
import pytest

from aas_spatial_bound.envelope import (
    COHERENT_PAIR_GAIN_DB,
    INCOHERENT_PAIR_GAIN_DB,
    AngularCut,
    RegimePowers,
    UncertaintyMargins,
    apply_margins,
    bound_from_boresight,
    check_mu_bound,
    eirp_aas,
    eirp_im3,
    eirp_noise_two_element,
    eirp_signal,
    envelope_coherent_aas,
    envelope_im3,
    envelope_noise,
    envelope_noise_aas,
    envelope_signal,
    envelope_total,
    mu_im_directions,
)
from aas_spatial_bound.exceptions import DomainError, GridMismatchError
from aas_spatial_bound.geometry import ArrayGeometry
from aas_spatial_bound.spectral import SpectralRegion
from aas_spatial_bound.utils import FLOOR_DB, angle_grid

POWERS = RegimePowers(p_e=30.0, p_im3=-10.0, p_noise=-10.0, p_sub=20.0, p_noise_s=-20.0)


def test_pair_gains():
    assert COHERENT_PAIR_GAIN_DB == pytest.approx(6.0206, abs=1e-4)
    assert INCOHERENT_PAIR_GAIN_DB == pytest.approx(3.0103, abs=1e-4)
    assert COHERENT_PAIR_GAIN_DB == 2 * INCOHERENT_PAIR_GAIN_DB


def test_envelope_examples(pattern, figure_angles):
    signal = envelope_signal(POWERS, pattern, figure_angles)
    assert signal.value_at(0.0) == pytest.approx(44.0206, abs=1e-4)
    assert signal.label == "signal envelope"
    im3 = envelope_im3(POWERS, pattern, figure_angles)
    assert im3.value_at(0.0) == pytest.approx(4.0206, abs=1e-4)
    noise = envelope_noise(POWERS, pattern, figure_angles)
    assert noise.value_at(0.0) == pytest.approx(1.0103, abs=1e-4)
    assert signal.argmax_angle() == 0.0
    np.testing.assert_allclose(signal.values - im3.values, 40.0)


def test_eirp_signal_below_envelope(pattern, two_element):
    angles = angle_grid(-90.0, 90.0, 1.0)
    phases = np.radians(angle_grid(-180.0, 179.5, 0.5))
    swept = eirp_signal(POWERS, pattern, two_element, angles[:, None], phases[None, :])
    envelope = envelope_signal(POWERS, pattern, angles)
    assert np.all(swept <= envelope.values[:, None] + 1e-9)
    np.testing.assert_allclose(swept.max(axis=1), envelope.values, atol=1e-3)


@pytest.mark.parametrize("phi0", [-42.0, 0.0, 18.0, 60.0])
def test_eirp_attains_envelope_when_steered(pattern, two_element, phi0):
    delta_phi = two_element.steer(phi0).delta_phi_h
    envelope = envelope_signal(POWERS, pattern, [phi0])
    assert eirp_signal(POWERS, pattern, two_element, phi0, delta_phi) == pytest.approx(
        envelope.values[0], abs=1e-9
    )
    im3 = envelope_im3(POWERS, pattern, [phi0])
    assert eirp_im3(POWERS, pattern, two_element, phi0, delta_phi) == pytest.approx(
        im3.values[0], abs=1e-9
    )


def test_eirp_null(pattern, two_element):
    assert eirp_signal(POWERS, pattern, two_element, 30.0, math.pi / 2) == FLOOR_DB


def test_noise_ignores_phase(pattern):
    angles = angle_grid(-60.0, 60.0, 10.0)
    values = eirp_noise_two_element(POWERS, pattern, angles)
    np.testing.assert_allclose(
        values, -10.0 + 8.0 + INCOHERENT_PAIR_GAIN_DB + (-12 * (angles / 85.0) ** 2)
    )
    assert eirp_noise_two_element(
        POWERS, pattern, 0.0, branches=1
    ) == pytest.approx(-2.0)
    with pytest.raises(DomainError):
        eirp_noise_two_element(POWERS, pattern, 0.0, branches=0)


def test_aas_envelopes(pattern, aas_8x2, figure_angles):
    coherent = envelope_coherent_aas(POWERS, pattern, aas_8x2, figure_angles)
    noise = envelope_noise_aas(POWERS, pattern, aas_8x2, figure_angles)
    assert coherent.value_at(0.0) == pytest.approx(
        20.0 + 3.0103 + 8.0 + 24.0824, abs=1e-4
    )
    assert noise.value_at(0.0) == pytest.approx(-20.0 + 8.0 + 15.0515, abs=1e-4)
    single = ArrayGeometry(rows_m=8, cols_n=2, d_v=0.7, d_h=0.5, polarizations=1)
    single_coherent = envelope_coherent_aas(POWERS, pattern, single, figure_angles)
    np.testing.assert_allclose(
        coherent.values - single_coherent.values, INCOHERENT_PAIR_GAIN_DB
    )


@pytest.mark.parametrize("polarizations", [1, 2])
@pytest.mark.parametrize("cols_n", [1, 2, 4, 8])
@pytest.mark.parametrize("rows_m", [1, 2, 4, 8])
def test_aas_coherent_gain_over_noise(pattern, rows_m, cols_n, polarizations):
    geometry = ArrayGeometry(rows_m=rows_m, cols_n=cols_n, polarizations=polarizations)
    equal = RegimePowers(p_sub=0.0, p_noise_s=0.0)
    angles = angle_grid(-60.0, 60.0, 15.0)
    coherent = envelope_coherent_aas(equal, pattern, geometry, angles)
    noise = envelope_noise_aas(equal, pattern, geometry, angles)
    assert coherent.value_at(0.0) - noise.value_at(0.0) == pytest.approx(
        10 * math.log10(rows_m * cols_n), abs=1e-9
    )
    np.testing.assert_allclose(
        coherent.values - noise.values, 10 * math.log10(rows_m * cols_n), atol=1e-9
    )


@pytest.mark.parametrize("phi0", [-50.0, 0.0, 25.0])
def test_eirp_aas_steered(pattern, aas_8x2, phi0):
    envelope = envelope_coherent_aas(POWERS, pattern, aas_8x2, [phi0])
    steered = eirp_aas(POWERS, pattern, aas_8x2, aas_8x2.steer(phi0), phi0)
    assert steered == pytest.approx(envelope.values[0], abs=1e-9)


def test_eirp_aas_below_envelope(pattern, aas_8x2, figure_angles):
    envelope = envelope_coherent_aas(POWERS, pattern, aas_8x2, figure_angles)
    for phi0 in (-33.0, 7.0, 48.0):
        cut = eirp_aas(POWERS, pattern, aas_8x2, aas_8x2.steer(phi0), figure_angles)
        assert np.all(cut <= envelope.values + 1e-9)


def test_envelope_total_reductions(pattern, figure_angles):
    coherent_only = envelope_total(30.0, -math.inf, pattern, figure_angles, branches=2)
    np.testing.assert_allclose(
        coherent_only.values, envelope_signal(POWERS, pattern, figure_angles).values
    )
    noise_only = envelope_total(-math.inf, -10.0, pattern, figure_angles, branches=2)
    np.testing.assert_allclose(
        noise_only.values, envelope_noise(POWERS, pattern, figure_angles).values
    )
    silent = envelope_total(-math.inf, -math.inf, pattern, figure_angles, branches=2)
    assert np.all(silent.values == FLOOR_DB)


def test_envelope_total_mixed(pattern, aas_8x2):
    mixed = envelope_total(0.0, 0.0, pattern, [0.0], branches=16, polarizations=2)
    expected = 10 * math.log10(16**2 + 16) + 8.0 + INCOHERENT_PAIR_GAIN_DB
    assert mixed.values[0] == pytest.approx(expected)
    with pytest.raises(DomainError):
        envelope_total(0.0, 0.0, pattern, [0.0], branches=0)
    with pytest.raises(DomainError):
        envelope_total(0.0, 0.0, pattern, [0.0], branches=2, polarizations=3)


def test_bound_from_boresight(pattern, figure_angles):
    envelope = envelope_signal(POWERS, pattern, figure_angles)
    bound = bound_from_boresight(envelope.value_at(0.0), pattern, figure_angles)
    np.testing.assert_allclose(bound.values, envelope.values)
    assert bound.label == "bound"


def test_missing_power(pattern):
    with pytest.raises(DomainError):
        envelope_signal(RegimePowers(p_noise=0.0), pattern, [0.0])
    with pytest.raises(DomainError):
        RegimePowers(p_e=math.inf)
    with pytest.raises(DomainError):
        RegimePowers(p_im3=math.nan)


def test_mu_directions():
    first, second = mu_im_directions(0.0, 18.0)
    assert first.visible and second.visible
    assert first.angle == pytest.approx(-18.0)
    assert second.angle == pytest.approx(38.17, abs=0.01)

    first, second = mu_im_directions(-30.0, 45.0)
    assert not first.visible and first.angle is None
    assert not second.visible and second.angle is None

    same = mu_im_directions(20.0, 20.0)
    assert same[0].angle == pytest.approx(20.0)
    assert same[1].angle == pytest.approx(20.0)


def test_mu_directions_domain():
    with pytest.raises(DomainError):
        mu_im_directions(95.0, 0.0)
    with pytest.raises(DomainError):
        mu_im_directions(0.0, math.nan)


def test_angular_cut_validation():
    with pytest.raises(DomainError):
        AngularCut([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        AngularCut([0.0, 1.0], [1.0])
    with pytest.raises(DomainError):
        AngularCut([0.0, math.nan], [1.0, 2.0])
    with pytest.raises(DomainError):
        AngularCut([], [])


def test_angular_cut_queries():
    cut = AngularCut([-5.0, 2.0, 7.0], [1.0, 1.0, 0.0], "  some   cut ")
    assert cut.label == "some cut"
    assert cut.argmax_angle() == 2.0
    assert cut.value_at(6.0) == 0.0
    assert cut.index_of(-100.0) == 0
    assert len(cut) == 3

    lobes = AngularCut(angle_grid(-4.0, 4.0, 1.0), [0, 1, 5, 1, 0, 1, 3, 1, 0])
    np.testing.assert_array_equal(lobes.local_maxima(), [-2.0, 2.0])
    np.testing.assert_array_equal(lobes.local_maxima(prominence=4.0), [-2.0])


def test_angular_cut_transforms():
    cut = AngularCut([-1.0, 0.0, 1.0], [FLOOR_DB, 3.0, 1.0], "cut")
    shifted = cut.shifted(2.0)
    np.testing.assert_array_equal(shifted.values, [FLOOR_DB, 5.0, 3.0])
    assert shifted.label == "cut"
    normalized = AngularCut([-1.0, 0.0, 1.0], [2.0, 3.0, 1.0], "cut").normalized()
    np.testing.assert_array_equal(normalized.values, [-1.0, 0.0, -2.0])
    assert normalized.label == "cut normalized"


def test_normalized_needs_reference_on_grid():
    cut = AngularCut([-1.5, -0.5, 0.5, 1.5], [1.0, 3.0, 2.0, 0.0], "cut")
    with pytest.raises(DomainError, match="nearest is -0.5"):
        cut.normalized()
    np.testing.assert_array_equal(
        cut.normalized(reference_angle=0.5).values, [-1.0, 1.0, 0.0, -2.0]
    )


def test_margins():
    margins = UncertaintyMargins()
    assert margins.margin_for(SpectralRegion.SIGNAL_DOMINATED) == 1.3
    assert margins.margin_for(SpectralRegion.IM3_DOMINATED) == 3.0
    assert margins.margin_for(SpectralRegion.NOISE_DOMINATED) == 3.0
    with pytest.raises(DomainError):
        UncertaintyMargins(in_band_margin=-0.1)
    with pytest.raises(DomainError):
        UncertaintyMargins(oob_margin=math.inf)


def test_apply_margins(pattern, figure_angles):
    envelope = envelope_signal(POWERS, pattern, figure_angles)
    exact = apply_margins(
        envelope, UncertaintyMargins(0.0, 0.0), SpectralRegion.IM3_DOMINATED
    )
    np.testing.assert_array_equal(exact.values, envelope.values)
    assert exact.values is not envelope.values
    in_band = apply_margins(
        envelope, UncertaintyMargins(), SpectralRegion.SIGNAL_DOMINATED
    )
    np.testing.assert_allclose(in_band.values - envelope.values, 1.3)
    out_of_band = apply_margins(
        envelope, UncertaintyMargins(), SpectralRegion.NOISE_DOMINATED
    )
    np.testing.assert_allclose(out_of_band.values - envelope.values, 3.0)


def test_check_mu_bound():
    angles = [-10.0, 0.0, 10.0]
    envelope = AngularCut(angles, [5.0, 8.0, 5.0], "su")
    below = check_mu_bound(AngularCut(angles, [4.0, 7.9, 3.0], "mu"), envelope)
    assert below.passed
    assert below.worst_angle_deg == 0.0
    assert below.worst_margin_db == pytest.approx(-0.1)

    within_slack = check_mu_bound(AngularCut(angles, [5.4, 7.0, 3.0], "mu"), envelope)
    assert within_slack.passed

    above = check_mu_bound(
        AngularCut(angles, [4.0, 7.0, 6.0], "mu"), envelope, slack=0.5
    )
    assert not above.passed
    assert above.worst_angle_deg == 10.0
    assert above.to_dict() == {
        "worst_margin_db": 1.0,
        "worst_angle_deg": 10.0,
        "pass": False,
        "slack_db": 0.5,
    }


def test_check_mu_bound_grid_mismatch():
    with pytest.raises(GridMismatchError):
        check_mu_bound(
            AngularCut([0.0, 1.0], [0.0, 0.0]), AngularCut([0.0, 2.0], [0.0, 0.0])
        )
