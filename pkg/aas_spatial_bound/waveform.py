# -*- coding: utf-8 -*-

"""Baseband user signals, the third-order PA model and its IM3 decomposition."""

import cmath
import logging
import math

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import yaml

from scipy.signal import fftconvolve, firwin

from .exceptions import WaveformError
from .utils import FLOOR_DB, db_to_power, mean_power_dbm

LOGGER = logging.getLogger(__name__)

MIN_SAMPLES = 2**12
MIN_OVERSAMPLING = 4
FILTER_TAPS = 257
FILTER_KAISER_BETA = 8.0
POWER_TOLERANCE_DB = 0.1
IQ_SEPARATOR = b"---\n"


@dataclass(frozen=True)
class PaModel:
    """memoryless third-order PA: y = x + alpha |x|^2 x + w

    noise_power is the per-branch noise power in dBm over the whole
    simulation bandwidth (the sample rate); -inf disables the noise.
    """

    alpha: complex = -0.05
    noise_power: float = -math.inf

    def __post_init__(self):
        if not cmath.isfinite(self.alpha):
            raise WaveformError(f"alpha must be finite, got {self.alpha}")
        if math.isnan(self.noise_power) or self.noise_power == math.inf:
            raise WaveformError(f"invalid noise power {self.noise_power}")

    @property
    def noise_variance(self) -> float:
        """linear noise power in mW"""
        return db_to_power(self.noise_power)

    def noiseless(self, samples: np.ndarray) -> np.ndarray:
        """x + alpha |x|^2 x"""
        return samples + self.alpha * distortion(samples)


@dataclass(frozen=True, eq=False)
class UserSignal:
    """complex baseband samples of one user; unit variance is 0 dBm"""

    samples: np.ndarray
    sample_rate: float
    center_offset: float = 0.0
    power: float = 0.0
    bandwidth: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if not self.sample_rate > 0:
            raise WaveformError(f"sample rate must be positive, got {self.sample_rate}")
        if math.isfinite(self.power):
            measured = mean_power_dbm(samples)
            if abs(measured - self.power) > POWER_TOLERANCE_DB:
                raise WaveformError(
                    f"declared power {self.power:.2f} dBm does not match "
                    f"measured power {measured:.2f} dBm"
                )

    def __len__(self):
        return len(self.samples)

    @property
    def measured_power(self) -> float:
        """sample power in dBm"""
        return mean_power_dbm(self.samples)


@dataclass(frozen=True, eq=False)
class BranchAssignment:
    """per-user phase shifts (radians), shape (users, branches)

    Branch 1 (column 0) is the zero-phase reference for every user.
    """

    phases: np.ndarray

    def __post_init__(self):
        phases = np.atleast_2d(np.asarray(self.phases, dtype=float))
        if phases.ndim != 2 or phases.shape[1] < 1:
            raise WaveformError(
                f"phases must have shape (users, branches), got {phases.shape}"
            )
        if np.any(phases[:, 0] != 0):
            raise WaveformError("branch 1 phases must be zero for all users")
        object.__setattr__(self, "phases", phases)

    @classmethod
    def two_branch(cls, *delta_phis: float) -> "BranchAssignment":
        """two-element assignment with one delta phi per user on branch 2"""
        return cls(np.array([(0.0, delta_phi) for delta_phi in delta_phis]))

    @property
    def num_users(self) -> int:
        """K"""
        return self.phases.shape[0]

    @property
    def num_branches(self) -> int:
        """number of RF chains"""
        return self.phases.shape[1]


@dataclass(frozen=True, eq=False)
class Im3Decomposition:
    """branch output as linear, self-distortion, Type-A, Type-B and noise terms"""

    linear: np.ndarray
    self_distortion: np.ndarray
    cross_a: np.ndarray
    cross_b: np.ndarray
    noise: np.ndarray

    @property
    def distortion(self) -> np.ndarray:
        """SD + XA + XB, the cubic term before scaling with alpha"""
        return self.self_distortion + self.cross_a + self.cross_b

    def reconstruct(self, alpha: complex) -> np.ndarray:
        """linear + alpha (SD + XA + XB) + noise"""
        return self.linear + alpha * self.distortion + self.noise


def distortion(samples: np.ndarray) -> np.ndarray:
    """|x|^2 x"""
    return np.abs(samples) ** 2 * samples


@lru_cache(maxsize=32)
def band_limiting_filter(bandwidth: float, sample_rate: float) -> np.ndarray:
    """Kaiser windowed-sinc low-pass FIR with cutoff at half the bandwidth"""

    LOGGER.debug(
        "Designing %d-tap filter for bandwidth %.3g Hz at %.3g Hz",
        FILTER_TAPS,
        bandwidth,
        sample_rate,
    )
    taps = firwin(
        FILTER_TAPS,
        bandwidth / 2,
        window=("kaiser", FILTER_KAISER_BETA),
        fs=sample_rate,
    )
    taps.setflags(write=False)
    return taps


def generate_user_signal(
    bandwidth: float,
    sample_rate: float,
    num_samples: int,
    power: float,
    seed: int,
    center_offset: float = 0.0,
) -> UserSignal:
    """band-limited circularly-symmetric complex Gaussian at the requested power"""

    if not bandwidth > 0:
        raise WaveformError(f"bandwidth must be positive, got {bandwidth}")
    if sample_rate < MIN_OVERSAMPLING * bandwidth:
        raise WaveformError(
            f"sample rate {sample_rate:.6g} Hz is below {MIN_OVERSAMPLING}x "
            f"the bandwidth {bandwidth:.6g} Hz"
        )
    if num_samples < MIN_SAMPLES:
        raise WaveformError(f"need at least {MIN_SAMPLES} samples, got {num_samples}")
    if abs(center_offset) + bandwidth / 2 >= sample_rate / 2:
        raise WaveformError(f"center offset {center_offset:.6g} Hz leaves the band")

    if power == -math.inf:
        LOGGER.debug("Silent user signal with %d samples", num_samples)
        return UserSignal(
            samples=np.zeros(num_samples, dtype=complex),
            sample_rate=sample_rate,
            center_offset=center_offset,
            power=power,
            bandwidth=bandwidth,
            seed=seed,
        )

    rng = np.random.default_rng(seed)
    taps = band_limiting_filter(float(bandwidth), float(sample_rate))
    num_raw = num_samples + len(taps) - 1
    white = rng.standard_normal(num_raw) + 1j * rng.standard_normal(num_raw)
    shaped = fftconvolve(white, taps, mode="valid")

    if center_offset:
        time = np.arange(num_samples) / sample_rate
        shaped = shaped * np.exp(2j * math.pi * center_offset * time)

    shaped = shaped - shaped.mean()
    shaped *= math.sqrt(db_to_power(power) / np.mean(np.abs(shaped) ** 2))

    return UserSignal(
        samples=shaped,
        sample_rate=sample_rate,
        center_offset=center_offset,
        power=power,
        bandwidth=bandwidth,
        seed=seed,
    )


def pa_noise(pa: PaModel, num_samples: int, seed: int) -> np.ndarray:
    """i.i.d. circular complex Gaussian noise at the PA noise power"""

    variance = pa.noise_variance
    if not variance:
        return np.zeros(num_samples, dtype=complex)
    rng = np.random.default_rng(seed)
    scale = math.sqrt(variance / 2)
    real = rng.standard_normal(num_samples)
    imag = rng.standard_normal(num_samples)
    return scale * (real + 1j * imag)


def pa_output(pa: PaModel, branch_input, seed: int) -> np.ndarray:
    """y(n) = x(n) + alpha |x(n)|^2 x(n) + w(n), noise drawn from the given seed"""

    samples = np.asarray(branch_input, dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise WaveformError("branch input contains non-finite samples")
    return pa.noiseless(samples) + pa_noise(pa, len(samples), seed)


def branch_inputs(
    users: Sequence[Union[UserSignal, np.ndarray]],
    assignment: BranchAssignment,
) -> np.ndarray:
    """composite branch inputs sum_k u_k exp(j phase_kb), shape (branches, n)"""

    streams = np.stack(
        [
            user.samples if isinstance(user, UserSignal) else np.asarray(user)
            for user in users
        ]
    )
    if streams.shape[0] != assignment.num_users:
        raise WaveformError(
            f"{streams.shape[0]} user streams "
            f"for {assignment.num_users} phase assignments"
        )
    return np.einsum("kb,kn->bn", np.exp(1j * assignment.phases), streams)


def decompose_two_user(
    pa: PaModel,
    u1: UserSignal,
    u2: UserSignal,
    phases: BranchAssignment,
    branch: int,
    seed: int = 0,
) -> Im3Decomposition:
    """split the output of branch 1 or 2 into its linear, IM3 and noise terms

    Type-A products appear twice in the expansion of |a + b|^2 (a + b), the
    group carries that multiplicity.
    """

    if len(u1) != len(u2):
        raise WaveformError(f"length mismatch: {len(u1)} != {len(u2)}")
    if u1.sample_rate != u2.sample_rate:
        raise WaveformError(
            f"sample rate mismatch: {u1.sample_rate} != {u2.sample_rate}"
        )
    if branch not in (1, 2):
        raise WaveformError(f"branch must be 1 or 2, got {branch}")
    if phases.num_users != 2:
        raise WaveformError(f"expected two users, got {phases.num_users}")

    phi1, phi2 = phases.phases[:, branch - 1]
    first = u1.samples * cmath.exp(1j * phi1)
    second = u2.samples * cmath.exp(1j * phi2)
    power1 = np.abs(u1.samples) ** 2
    power2 = np.abs(u2.samples) ** 2

    return Im3Decomposition(
        linear=first + second,
        self_distortion=power1 * first + power2 * second,
        cross_a=2 * (power2 * first + power1 * second),
        cross_b=(
            u1.samples**2 * np.conj(u2.samples) * cmath.exp(1j * (2 * phi1 - phi2))
            + u2.samples**2 * np.conj(u1.samples) * cmath.exp(1j * (2 * phi2 - phi1))
        ),
        noise=pa_noise(pa, len(u1), seed),
    )


def write_iq(path: Union[str, Path], signal: UserSignal) -> Path:
    """write interleaved float64 I/Q after a small YAML header"""

    path = Path(path).resolve()
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "sample_rate_hz": float(signal.sample_rate),
        "center_offset_hz": float(signal.center_offset),
        "power_dbm": float(signal.power),
        "bandwidth_hz": None if signal.bandwidth is None else float(signal.bandwidth),
        "seed": signal.seed,
        "num_samples": len(signal),
    }
    LOGGER.info("Writing %d I/Q samples to <%s>", len(signal), path)
    with path.open("wb") as file_obj:
        file_obj.write(yaml.safe_dump(header, sort_keys=True).encode("utf-8"))
        file_obj.write(IQ_SEPARATOR)
        interleaved = np.empty(2 * len(signal), dtype="<f8")
        interleaved[0::2] = signal.samples.real
        interleaved[1::2] = signal.samples.imag
        file_obj.write(interleaved.tobytes())
    return path


def read_iq(path: Union[str, Path]) -> UserSignal:
    """read a file written by write_iq"""

    path = Path(path).resolve()
    LOGGER.info("Reading I/Q samples from <%s>", path)
    content = path.read_bytes()
    head, separator, body = content.partition(IQ_SEPARATOR)
    if not separator:
        raise WaveformError(f"<{path}> has no I/Q header")
    header = yaml.safe_load(head.decode("utf-8"))
    interleaved = np.frombuffer(body, dtype="<f8")
    samples = interleaved[0::2] + 1j * interleaved[1::2]
    power = header.get("power_dbm", FLOOR_DB)
    return UserSignal(
        samples=samples,
        sample_rate=header["sample_rate_hz"],
        center_offset=header.get("center_offset_hz", 0.0),
        power=power,
        bandwidth=header.get("bandwidth_hz"),
        seed=header.get("seed"),
    )
