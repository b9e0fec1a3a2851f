# -*- coding: utf-8 -*-

"""Shared fixtures."""

import math

import numpy as np
import pytest

from aas_spatial_bound.geometry import ArrayGeometry, TwoElementArray
from aas_spatial_bound.oracle import FarFieldScenario, UserBeam
from aas_spatial_bound.pattern import ElementPatternParams
from aas_spatial_bound.spectral import BandDefinition, SpectralRegion
from aas_spatial_bound.utils import angle_grid
from aas_spatial_bound.waveform import PaModel, generate_user_signal

SAMPLE_RATE = 122.88e6
BANDWIDTH = 20e6
RBW = 1e6
SMALL_SAMPLES = 2**13


@pytest.fixture
def pattern():
    """default radiator with 8 dBi peak gain"""
    return ElementPatternParams(g_e_max=8.0)


@pytest.fixture
def two_element():
    """half-wavelength pair"""
    return TwoElementArray(spacing_d=0.5)


@pytest.fixture
def aas_8x2():
    """dual-polarized 8 x 2 grid"""
    return ArrayGeometry(rows_m=8, cols_n=2, d_v=0.7, d_h=0.5, polarizations=2)


@pytest.fixture
def figure_angles():
    """[-60, 60] deg in 1 deg steps"""
    return angle_grid(-60.0, 60.0, 1.0)


@pytest.fixture
def user_signal():
    """small deterministic 20 MHz user at 0 dBm"""
    return generate_user_signal(
        bandwidth=BANDWIDTH,
        sample_rate=SAMPLE_RATE,
        num_samples=SMALL_SAMPLES,
        power=0.0,
        seed=1,
    )


@pytest.fixture
def bands():
    """in-band, adjacent and far-out bands of a 20 MHz user"""
    return (
        BandDefinition(-10e6, 10e6, "in-band", SpectralRegion.SIGNAL_DOMINATED),
        BandDefinition(12e6, 28e6, "adjacent-high", SpectralRegion.IM3_DOMINATED),
        BandDefinition(40e6, 58e6, "far-out", SpectralRegion.NOISE_DOMINATED),
    )


def make_scenario(
    array,
    bands,
    pa=None,
    users=(UserBeam(),),
    angles=None,
    num_samples=SMALL_SAMPLES,
    phase_steps=16,
    seed=1,
    **kwargs,
):
    """small scenario for fast oracle tests"""
    return FarFieldScenario(
        array=array,
        pattern=ElementPatternParams(g_e_max=8.0),
        pa=pa or PaModel(alpha=-0.05, noise_power=-40.0),
        users=users,
        bands=bands,
        angles=angle_grid(-60.0, 60.0, 5.0) if angles is None else angles,
        phase_steps=phase_steps,
        sample_rate=SAMPLE_RATE,
        num_samples=num_samples,
        rbw=RBW,
        seed=seed,
        **kwargs,
    )


@pytest.fixture
def small_scenario(two_element, bands):
    """two-element scenario at reduced sample count"""
    return make_scenario(two_element, bands)


@pytest.fixture
def linear_scenario(two_element, bands):
    """alpha = 0 and no noise"""
    return make_scenario(
        two_element, bands, pa=PaModel(alpha=0.0, noise_power=-math.inf)
    )


def db(value):
    """10 log10 of a positive number"""
    return 10 * np.log10(value)
