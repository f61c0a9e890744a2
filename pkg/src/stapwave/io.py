"""Stable on-disk formats: waveform, filter, trace, spectra, audits, manifests.

All numeric CSV columns are written with shortest round-trip precision so a
write/read cycle reproduces float64 values exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .analysis import AuditReport, ResponseMap
from .design import DesignTrace
from .waveform import Waveform

WAVEFORM_HEADER = ["antenna", "sample", "re", "im"]
TRACE_HEADER = ["outer_iter", "inner_iter", "cpu_seconds", "sinr_db", "flag"]
ESD_HEADER = ["antenna", "freq", "esd_db"]
STCA_HEADER = ["azimuth_deg", "normalized_doppler", "power_db"]
FILTER_HEADER = ["pulse", "sample", "receiver", "re", "im"]


def write_waveform_csv(path, waveform: Waveform) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(WAVEFORM_HEADER)
        for n, code in enumerate(waveform.codes, start=1):
            for l, value in enumerate(code, start=1):
                writer.writerow([n, l, repr(float(value.real)), repr(float(value.imag))])


def read_waveform_csv(path) -> Waveform:
    path = Path(path)
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != WAVEFORM_HEADER:
            raise ValueError(f"{path}: expected header {WAVEFORM_HEADER}, got {header}")
        cells = {}
        for row in reader:
            if not row:
                continue
            antenna, sample = int(row[0]), int(row[1])
            cells[(antenna, sample)] = complex(float(row[2]), float(row[3]))
    if not cells:
        raise ValueError(f"{path}: no samples")
    n_tx = max(a for a, _ in cells)
    length = max(s for _, s in cells)
    if len(cells) != n_tx * length:
        raise ValueError(f"{path}: missing samples for a full {n_tx} x {length} grid")
    codes = np.zeros((n_tx, length), dtype=np.complex128)
    for (antenna, sample), value in cells.items():
        codes[antenna - 1, sample - 1] = value
    return Waveform(codes)


def write_filter_csv(path, weights: np.ndarray, n_pulses: int, n_rx: int) -> None:
    length = weights.size // (n_pulses * n_rx)
    grid = weights.reshape(n_pulses, length, n_rx)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FILTER_HEADER)
        for m in range(n_pulses):
            for l in range(length):
                for r in range(n_rx):
                    value = grid[m, l, r]
                    writer.writerow([m + 1, l + 1, r + 1,
                                     repr(float(value.real)), repr(float(value.imag))])


def write_trace_csv(path, trace: DesignTrace, every: int = 1) -> None:
    """Export the stable trace columns; inner rows may be thinned."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for row in trace.rows:
            if row.inner_iter and every > 1 and row.inner_iter % every:
                continue
            writer.writerow([row.outer_iter, row.inner_iter,
                             repr(row.cpu_seconds), repr(row.sinr_db), row.flag])


def write_esd_csv(path, freqs: np.ndarray, esd_db_rows: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ESD_HEADER)
        for n, row in enumerate(esd_db_rows, start=1):
            for f, value in zip(freqs, row):
                writer.writerow([n, repr(float(f)), repr(float(value))])


def write_stca_csv(path, grid: ResponseMap) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(STCA_HEADER)
        for i, az in enumerate(grid.azimuth_deg):
            for j, f in enumerate(grid.doppler):
                writer.writerow([repr(float(az)), repr(float(f)),
                                 repr(float(grid.power_db[i, j]))])


def write_audit(json_path, text_path, report: AuditReport) -> None:
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(report.format_text() + "\n")


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_of_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
