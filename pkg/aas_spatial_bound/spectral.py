# -*- coding: utf-8 -*-

"""Welch PSD estimation, band integration and spectral region classification."""

import enum
import logging

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from pytility import normalize_space
from scipy.signal import get_window, welch

from .exceptions import GridMismatchError, SpectralError
from .utils import FLOOR_DB, db_to_power, power_to_db
from .waveform import PaModel, distortion, pa_noise

LOGGER = logging.getLogger(__name__)

WINDOW = "hann"
MIN_SEGMENTS = 16


class SpectralRegion(enum.Enum):
    """dominant component of a frequency region"""

    SIGNAL_DOMINATED = "signal"
    IM3_DOMINATED = "im3"
    NOISE_DOMINATED = "noise"


# tie-break order: signal before IM3 before noise
REGION_ORDER = (
    SpectralRegion.SIGNAL_DOMINATED,
    SpectralRegion.IM3_DOMINATED,
    SpectralRegion.NOISE_DOMINATED,
)


@dataclass(frozen=True)
class BandDefinition:
    """frequency band relative to the carrier; an explicit region fixes the regime"""

    f_low: float
    f_high: float
    label: str
    region: Optional[SpectralRegion] = None

    def __post_init__(self):
        if not self.f_low < self.f_high:
            raise SpectralError(f"band <{self.label}> needs f_low < f_high")
        label = normalize_space(self.label)
        if not label:
            raise SpectralError("band label must not be empty")
        object.__setattr__(self, "label", label)

    @property
    def width(self) -> float:
        """bandwidth in Hz"""
        return self.f_high - self.f_low


@dataclass(frozen=True, eq=False)
class Spectrum:
    """PSD on a uniform grid; psd is in dBm per rbw"""

    bin_freqs: np.ndarray
    psd: np.ndarray
    rbw: float

    def __post_init__(self):
        freqs = np.asarray(self.bin_freqs, dtype=float)
        psd = np.asarray(self.psd, dtype=float)
        if freqs.shape != psd.shape or freqs.ndim != 1 or not len(freqs):
            raise SpectralError("frequency and PSD arrays must be equal-length vectors")
        steps = np.diff(freqs)
        if len(steps) and not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise SpectralError("bins must be uniformly spaced")
        object.__setattr__(self, "bin_freqs", freqs)
        object.__setattr__(self, "psd", psd)

    @property
    def bin_width(self) -> float:
        """bin spacing in Hz"""
        if len(self.bin_freqs) < 2:
            return self.rbw
        return float(self.bin_freqs[1] - self.bin_freqs[0])

    @property
    def span(self) -> Tuple[float, float]:
        """lowest and highest frequency covered by the bins"""
        half = self.bin_width / 2
        return float(self.bin_freqs[0] - half), float(self.bin_freqs[-1] + half)

    @property
    def bin_powers(self) -> np.ndarray:
        """linear power per bin in mW"""
        return db_to_power(self.psd) * (self.bin_width / self.rbw)

    def same_grid(self, other: "Spectrum") -> bool:
        """True iff both spectra share bins and RBW"""
        return self.rbw == other.rbw and np.array_equal(self.bin_freqs, other.bin_freqs)

    def full_band(self, label: str = "full-span") -> BandDefinition:
        """band covering every bin"""
        low, high = self.span
        return BandDefinition(low, high, label)


class ComponentSpectra(NamedTuple):
    """spectra of the decomposed branch output"""

    signal: Spectrum
    im3: Spectrum
    noise: Spectrum
    total: Spectrum


def segment_length(sample_rate: float, rbw: float) -> int:
    """Welch segment length whose bin spacing matches the RBW"""
    return max(int(round(sample_rate / rbw)), 2)


def check_resolution(num_samples: int, sample_rate: float, rbw: float) -> int:
    """validate the RBW request and return the segment length"""

    if not rbw > 0 or rbw < sample_rate / num_samples:
        raise SpectralError(
            f"RBW {rbw:.6g} Hz is finer than the record allows "
            f"({sample_rate / num_samples:.6g} Hz)"
        )
    nperseg = segment_length(sample_rate, rbw)
    if num_samples < 2 * nperseg:
        raise SpectralError(
            f"{num_samples} samples are not enough for RBW {rbw:.6g} Hz "
            f"(need at least {2 * nperseg})"
        )
    segments = 1 + (num_samples - nperseg) // (nperseg - nperseg // 2)
    if segments < MIN_SEGMENTS:
        LOGGER.warning(
            "Only %d Welch segments for RBW %.6g Hz, "
            "expect per-bin variance above 1 dB",
            segments,
            rbw,
        )
    return nperseg


def estimate_psd(samples, sample_rate: float, rbw: float) -> Spectrum:
    """averaged periodogram, 50% overlapping Hann segments sized to the RBW"""

    samples = np.asarray(samples, dtype=complex)
    nperseg = check_resolution(len(samples), sample_rate, rbw)
    freqs, density = welch(
        samples,
        fs=sample_rate,
        window=WINDOW,
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    freqs = np.fft.fftshift(freqs)
    density = np.fft.fftshift(density)
    return Spectrum(bin_freqs=freqs, psd=power_to_db(density * rbw), rbw=rbw)


def empty_spectrum(sample_rate: float, rbw: float) -> Spectrum:
    """floor-level spectrum on the bin grid estimate_psd uses for this RBW"""

    nperseg = segment_length(sample_rate, rbw)
    freqs = np.fft.fftshift(np.fft.fftfreq(nperseg, d=1 / sample_rate))
    return Spectrum(bin_freqs=freqs, psd=np.full(nperseg, FLOOR_DB), rbw=rbw)


def segment_spectra(samples: np.ndarray, sample_rate: float, rbw: float) -> np.ndarray:
    """windowed segment FFTs scaled like estimate_psd, shape (..., segments, bins)

    The mean over segments of |X|^2 times the bin width is the Welch band
    power per bin; products X_a conj(X_b) give cross-spectra between streams.
    Bins are in the shifted (increasing frequency) order of estimate_psd.
    """

    samples = np.asarray(samples, dtype=complex)
    nperseg = check_resolution(samples.shape[-1], sample_rate, rbw)
    step = nperseg - nperseg // 2
    window = get_window(WINDOW, nperseg)
    segments = np.lib.stride_tricks.sliding_window_view(samples, nperseg, axis=-1)
    segments = segments[..., ::step, :] * window
    scale = np.sqrt(1.0 / (sample_rate * np.sum(window**2)))
    return np.fft.fftshift(np.fft.fft(segments, axis=-1), axes=-1) * scale


def band_mask(spectrum: Spectrum, band: BandDefinition) -> np.ndarray:
    """bins whose centre lies in [f_low, f_high)"""

    low, high = spectrum.span
    tolerance = spectrum.bin_width
    if band.f_low < low - tolerance or band.f_high > high + tolerance:
        raise SpectralError(
            f"band <{band.label}> [{band.f_low:.6g}, {band.f_high:.6g}] Hz "
            f"is outside the span [{low:.6g}, {high:.6g}] Hz"
        )
    mask = (spectrum.bin_freqs >= band.f_low) & (spectrum.bin_freqs < band.f_high)
    if not mask.any():
        raise SpectralError(f"band <{band.label}> contains no bins")
    return mask


def band_power(spectrum: Spectrum, band: BandDefinition) -> float:
    """linear power in mW integrated over a band"""
    return float(np.sum(spectrum.bin_powers[band_mask(spectrum, band)]))


def integrate_band(spectrum: Spectrum, band: BandDefinition) -> float:
    """power in dBm integrated over a band"""
    return power_to_db(band_power(spectrum, band))


def aclr(
    spectrum: Spectrum, in_band: BandDefinition, adjacent: BandDefinition
) -> float:
    """adjacent channel leakage ratio in dB"""
    return integrate_band(spectrum, in_band) - integrate_band(spectrum, adjacent)


def rebin(spectrum: Spectrum, rbw: float) -> Spectrum:
    """merge groups of adjacent bins into a coarser RBW, preserving band powers"""

    factor = int(round(rbw / spectrum.bin_width))
    if factor < 1:
        raise SpectralError(f"cannot re-bin to a finer RBW {rbw:.6g} Hz")
    num = len(spectrum.bin_freqs) // factor
    if not num:
        raise SpectralError(f"spectrum has fewer than {factor} bins")
    powers = spectrum.bin_powers[: num * factor].reshape(num, factor).sum(axis=1)
    freqs = spectrum.bin_freqs[: num * factor].reshape(num, factor).mean(axis=1)
    return Spectrum(
        bin_freqs=freqs,
        psd=power_to_db(powers * rbw / (factor * spectrum.bin_width)),
        rbw=rbw,
    )


def _check_grids(spectra: Sequence[Spectrum]):
    first = spectra[0]
    for other in spectra[1:]:
        if not first.same_grid(other):
            raise GridMismatchError("component spectra do not share a frequency grid")


def classify_regions(
    signal_psd: Spectrum,
    im3_psd: Spectrum,
    noise_psd: Spectrum,
) -> Tuple[SpectralRegion, ...]:
    """per-bin dominant component, ties resolved signal > IM3 > noise"""

    _check_grids((signal_psd, im3_psd, noise_psd))
    stacked = np.stack((signal_psd.psd, im3_psd.psd, noise_psd.psd))
    return tuple(REGION_ORDER[index] for index in np.argmax(stacked, axis=0))


def region_spans(
    spectrum: Spectrum,
    regions: Sequence[SpectralRegion],
) -> List[Tuple[float, float, SpectralRegion]]:
    """contiguous runs of equal regions as (f_low, f_high, region)"""

    if len(regions) != len(spectrum.bin_freqs):
        raise GridMismatchError("one region per bin required")

    half = spectrum.bin_width / 2
    spans = []
    start = 0
    for index in range(1, len(regions) + 1):
        if index == len(regions) or regions[index] != regions[start]:
            spans.append(
                (
                    float(spectrum.bin_freqs[start] - half),
                    float(spectrum.bin_freqs[index - 1] + half),
                    regions[start],
                )
            )
            start = index
    return spans


def band_region(
    signal_psd: Spectrum,
    im3_psd: Spectrum,
    noise_psd: Spectrum,
    band: BandDefinition,
) -> SpectralRegion:
    """dominant component of a band by integrated power"""

    if band.region is not None:
        return band.region
    _check_grids((signal_psd, im3_psd, noise_psd))
    powers = [
        band_power(spectrum, band) for spectrum in (signal_psd, im3_psd, noise_psd)
    ]
    return REGION_ORDER[int(np.argmax(powers))]


def component_spectra(
    pa: PaModel,
    branch_input,
    sample_rate: float,
    rbw: float,
    seed: int,
) -> ComponentSpectra:
    """spectra of x, alpha |x|^2 x, w and their sum for one branch"""

    samples = np.asarray(branch_input, dtype=complex)
    im3 = pa.alpha * distortion(samples)
    noise = pa_noise(pa, len(samples), seed)
    LOGGER.debug("Estimating component spectra of %d samples", len(samples))
    return ComponentSpectra(
        signal=estimate_psd(samples, sample_rate, rbw),
        im3=estimate_psd(im3, sample_rate, rbw),
        noise=estimate_psd(noise, sample_rate, rbw),
        total=estimate_psd(samples + im3 + noise, sample_rate, rbw),
    )
