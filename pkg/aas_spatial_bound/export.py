# -*- coding: utf-8 -*-

"""Output directory layout and artifact writers."""

import csv
import logging
import os
import re

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

from pytility import normalize_space

from .envelope import AngularCut
from .oracle import SweepResult
from .spectral import Spectrum
from .utils import serialize_json

try:
    # pylint: disable=redefined-builtin
    from smart_open import open
except ImportError:
    pass

LOGGER = logging.getLogger(__name__)

SUBDIRS = ("cuts", "spectra", "reports")
SLUG_REGEX = re.compile(r"[^a-z0-9]+")
VALUE_FORMAT = "{:.6f}"
FREQUENCY_FORMAT = "{:.1f}"

PathLike = Union[str, os.PathLike]


def slugify(text: str) -> str:
    """lowercase file name fragment"""
    return SLUG_REGEX.sub("-", normalize_space(text).lower()).strip("-") or "unnamed"


@dataclass(frozen=True)
class OutputLayout:
    """<base>/{cuts,spectra,reports}/<scenario>_s<seed>_<what>.<ext>"""

    base: Path
    scenario: str
    seed: int

    def path(self, kind: str, what: str, ext: str) -> Path:
        """file path of one artifact"""
        if kind not in SUBDIRS:
            raise ValueError(f"unknown output kind <{kind}>")
        name = f"{slugify(self.scenario)}_s{self.seed}_{slugify(what)}.{ext}"
        return Path(self.base).resolve() / kind / name

    def cut(self, what: str) -> Path:
        """CSV path in cuts/"""
        return self.path("cuts", what, "csv")

    def spectrum(self, what: str) -> Path:
        """CSV path in spectra/"""
        return self.path("spectra", what, "csv")

    def report(self, what: str) -> Path:
        """JSON path in reports/"""
        return self.path("reports", what, "json")


def _prepare(path: PathLike) -> Path:
    path = Path(path).resolve()
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _format(value: float) -> str:
    return VALUE_FORMAT.format(value)


def write_cut_csv(path: PathLike, cut: AngularCut) -> Path:
    """columns angle_deg, value_db, label"""

    path = _prepare(path)
    LOGGER.info("Writing cut <%s> to <%s>", cut.label, path)
    with open(os.fspath(path), "w") as out_file:
        writer = csv.writer(out_file, lineterminator="\n")
        writer.writerow(("angle_deg", "value_db", "label"))
        for angle, value in zip(cut.angles, cut.values):
            writer.writerow((_format(angle), _format(value), cut.label))
    return path


def read_cut_csv(path: PathLike) -> AngularCut:
    """inverse of write_cut_csv"""

    LOGGER.info("Reading cut from <%s>", path)
    with open(os.fspath(path)) as in_file:
        rows = list(csv.DictReader(in_file))
    return AngularCut(
        angles=[float(row["angle_deg"]) for row in rows],
        values=[float(row["value_db"]) for row in rows],
        label=rows[0]["label"] if rows else "",
    )


def write_spectrum_csv(
    path: PathLike,
    spectrum: Spectrum,
    carrier_hz: Optional[float] = None,
) -> Path:
    """a comment row with RBW and carrier, then columns freq_hz, psd_dbm_per_rbw"""

    path = _prepare(path)
    carrier = "baseband" if carrier_hz is None else FREQUENCY_FORMAT.format(carrier_hz)
    LOGGER.info("Writing spectrum to <%s>", path)
    with open(os.fspath(path), "w") as out_file:
        out_file.write(
            f"# rbw_hz={FREQUENCY_FORMAT.format(spectrum.rbw)}, carrier_hz={carrier}\n"
        )
        writer = csv.writer(out_file, lineterminator="\n")
        writer.writerow(("freq_hz", "psd_dbm_per_rbw"))
        for freq, level in zip(spectrum.bin_freqs, spectrum.psd):
            writer.writerow((FREQUENCY_FORMAT.format(freq), _format(level)))
    return path


def write_sweep_csv(path: PathLike, sweep: SweepResult) -> Path:
    """columns angle_deg, band_label, max_dbm, plus a JSON metadata sidecar"""

    path = _prepare(path)
    LOGGER.info("Writing sweep maxima to <%s>", path)
    maxima = sweep.max
    with open(os.fspath(path), "w") as out_file:
        writer = csv.writer(out_file, lineterminator="\n")
        writer.writerow(("angle_deg", "band_label", "max_dbm"))
        for index, band in enumerate(sweep.bands):
            for angle, value in zip(sweep.angles, maxima[:, index]):
                writer.writerow((_format(angle), band.label, _format(value)))
    write_report(path.with_suffix(".json"), sweep.metadata)
    return path


def write_report(path: PathLike, obj: Any) -> Path:
    """deterministic JSON: sorted keys, no timestamps"""

    path = _prepare(path)
    serialize_json(obj, file=path, sort_keys=True, indent=2)
    return path
