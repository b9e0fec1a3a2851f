# -*- coding: utf-8 -*-

""" util functions """

import dataclasses
import enum
import json
import logging
import math
import os

from pathlib import Path
from types import GeneratorType
from typing import Union

import numpy as np

from .exceptions import DomainError

LOGGER = logging.getLogger(__name__)

FLOOR_DB = -400.0
NULL_AMPLITUDE = 1e-12
ROLE_KEYS = {"user": 0, "noise": 1, "draw": 2}


def _unwrap(result, scalar):
    return float(result) if scalar else result


def as_angles(values, name: str = "angle") -> np.ndarray:
    """convert to a float array and reject non-finite entries"""

    array = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(array)):
        raise DomainError(f"non-finite {name}: {values!r}")
    return array


def wrap_degrees(phi):
    """wrap angles in degrees into (-180, 180], leaving in-range values untouched"""

    scalar = np.ndim(phi) == 0
    phi = as_angles(phi)
    wrapped = 180.0 - np.mod(180.0 - phi, 360.0)
    result = np.where((phi > 180.0) | (phi <= -180.0), wrapped, phi)
    return _unwrap(result, scalar)


def wrap_radians(phase):
    """wrap phases in radians into (-pi, pi], leaving in-range values untouched"""

    scalar = np.ndim(phase) == 0
    phase = as_angles(phase, "phase")
    wrapped = math.pi - np.mod(math.pi - phase, 2 * math.pi)
    result = np.where((phase > math.pi) | (phase <= -math.pi), wrapped, phase)
    return _unwrap(result, scalar)


def angle_grid(start: float, stop: float, step: float) -> np.ndarray:
    """uniform grid from start to stop (inclusive) in degrees"""

    if step <= 0 or stop < start:
        raise DomainError(f"invalid angle grid {start}:{stop}:{step}")
    num = int(round((stop - start) / step)) + 1
    return start + step * np.arange(num, dtype=float)


def power_to_db(power):
    """linear power to dB, with the floor sentinel for zero power"""

    scalar = np.ndim(power) == 0
    power = np.asarray(power, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        result = np.where(power > 0, 10 * np.log10(power), FLOOR_DB)
    return _unwrap(result, scalar)


def amplitude_to_db(amplitude, null: float = NULL_AMPLITUDE):
    """field amplitude to dB, with the floor sentinel at nulls"""

    scalar = np.ndim(amplitude) == 0
    amplitude = np.abs(np.asarray(amplitude))
    with np.errstate(divide="ignore", invalid="ignore"):
        result = np.where(amplitude > null, 20 * np.log10(amplitude), FLOOR_DB)
    return _unwrap(result, scalar)


def db_to_power(level):
    """dB to linear power; the floor sentinel and -inf map to zero"""

    scalar = np.ndim(level) == 0
    level = np.asarray(level, dtype=float)
    with np.errstate(over="ignore"):
        result = np.where(level <= FLOOR_DB, 0.0, 10 ** (level / 10))
    return _unwrap(result, scalar)


def mean_power_dbm(samples) -> float:
    """average power of a complex sample stream in dBm (unit variance = 0 dBm)"""

    samples = np.asarray(samples)
    if not samples.size:
        return FLOOR_DB
    return power_to_db(float(np.mean(np.abs(samples) ** 2)))


def derive_seed(master_seed: int, *keys: Union[int, str]) -> int:
    """derive an independent, schedule-free seed from a master seed and keys"""

    entropy = [int(master_seed)]
    for key in keys:
        entropy.append(ROLE_KEYS[key] if isinstance(key, str) else int(key))
    sequence = np.random.SeedSequence(entropy)
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _json_default(obj):
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if isinstance(obj, enum.Enum):
        return obj.name
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    if isinstance(obj, os.PathLike):
        return os.fspath(obj)
    if isinstance(obj, (set, frozenset, range, GeneratorType)) or hasattr(
        obj, "__iter__"
    ):
        return list(obj)
    return repr(obj)


def serialize_json(obj, file=None, **kwargs):
    """
    safely serialze JSON, turning arrays and iterables into lists, dataclasses
    into dicts, and everything else into their representation
    """

    kwargs.setdefault("default", _json_default)

    if isinstance(file, (str, bytes, os.PathLike)):
        LOGGER.info("opening file <%s> and writing JSON content", file)

        path = Path(os.fsdecode(file)).resolve()
        path.parent.mkdir(parents=True, exist_ok=True)

        with path.open("w") as json_file:
            json.dump(obj, json_file, **kwargs)
            json_file.write("\n")
            return None

    if file is not None:
        LOGGER.debug("writing JSON content to opened file pointer <%s>", file)
        return json.dump(obj, file, **kwargs)

    return json.dumps(obj, **kwargs)
