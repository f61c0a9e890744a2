"""Stopband energy matrices, space-frequency sectors, and spectral reports.

Constraint arithmetic always uses the closed-form band matrices; sampled
spectra are only for plots and exports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .scenario import BandSpec, ScenarioConfig, SectorSpec
from .waveform import Waveform


def band_matrix(f_lo: float, f_hi: float, code_length: int) -> np.ndarray:
    """Hermitian Toeplitz matrix whose quadratic form is the in-band energy.

    Entry (m, l) is the integral of exp(j 2 pi f (m - l)) over [f_lo, f_hi]:
    the band width on the diagonal and the usual complex-exponential
    difference quotient off it.  The full band [0, 1] gives the identity.
    """
    if not 0.0 <= f_lo < f_hi <= 1.0:
        raise ValueError("need 0 <= f_lo < f_hi <= 1")
    lag = np.arange(1, code_length)
    col = np.empty(code_length, dtype=np.complex128)
    col[0] = f_hi - f_lo
    col[1:] = (np.exp(2j * np.pi * f_hi * lag) - np.exp(2j * np.pi * f_lo * lag)) \
        / (2j * np.pi * lag)
    return sla.toeplitz(col, col.conj())


def sector_matrix(theta_lo: float, theta_hi: float, d_tx: float, n_tx: int
                  ) -> np.ndarray:
    """Transmit-array energy matrix of an angular sector.

    The integral runs over the sine of the angle between the sector edges,
    which keeps the closed form Toeplitz in the element index.  Spacing is in
    wavelengths.
    """
    if not -math.pi / 2 <= theta_lo < theta_hi <= math.pi / 2:
        raise ValueError("need -pi/2 <= theta_lo < theta_hi <= pi/2")
    v_lo, v_hi = math.sin(theta_lo), math.sin(theta_hi)
    lag = np.arange(1, n_tx)
    col = np.empty(n_tx, dtype=np.complex128)
    col[0] = v_hi - v_lo
    col[1:] = (np.exp(2j * np.pi * v_hi * -lag * d_tx)
               - np.exp(2j * np.pi * v_lo * -lag * d_tx)) / (2j * np.pi * -lag * d_tx)
    return sla.toeplitz(col, col.conj())


def space_frequency_matrix(band: np.ndarray, sector: np.ndarray) -> np.ndarray:
    """Joint band/sector energy matrix acting on the sample-major code vector."""
    return np.kron(band, sector)


@dataclass(frozen=True)
class StopBand:
    """A stopband with its energy matrix and linear cap."""

    f_lo: float
    f_hi: float
    cap: float
    matrix: np.ndarray


@dataclass(frozen=True)
class SpaceFrequencySector:
    """A stopband paired with an angular sector, coupling all antennas."""

    band: StopBand
    theta_lo: float
    theta_hi: float
    array_matrix: np.ndarray
    matrix: np.ndarray          # band.matrix (x) array_matrix
    cap: float


def stop_bands(cfg: ScenarioConfig) -> list[StopBand]:
    return [StopBand(b.f_lo, b.f_hi, b.cap, band_matrix(b.f_lo, b.f_hi, cfg.code_length))
            for b in cfg.bands]


def space_frequency_sectors(cfg: ScenarioConfig) -> list[SpaceFrequencySector]:
    out = []
    for band_spec, sec in zip(cfg.bands, cfg.sectors):
        band = StopBand(band_spec.f_lo, band_spec.f_hi, band_spec.cap,
                        band_matrix(band_spec.f_lo, band_spec.f_hi, cfg.code_length))
        array = sector_matrix(sec.theta_lo_rad, sec.theta_hi_rad, cfg.d_tx, cfg.n_tx)
        out.append(SpaceFrequencySector(
            band=band, theta_lo=sec.theta_lo_rad, theta_hi=sec.theta_hi_rad,
            array_matrix=array,
            matrix=space_frequency_matrix(band.matrix, array),
            cap=band_spec.cap))
    return out


# ---------------------------------------------------------------------------
# spectra

def frequency_response(code_length: int, freqs: np.ndarray) -> np.ndarray:
    """Matrix of sampled complex exponentials, one row per frequency."""
    freqs = np.asarray(freqs, dtype=float)
    return np.exp(2j * np.pi * np.outer(freqs, np.arange(code_length)))


def esd(code: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Energy spectral density of one code at the given normalized frequencies."""
    code = np.asarray(code, dtype=np.complex128)
    return np.abs(frequency_response(code.size, freqs) @ code.conj()) ** 2


def esd_grid(code_length: int, oversample: int = 4) -> np.ndarray:
    points = oversample * code_length
    return np.arange(points) / points


def leakage(code: np.ndarray, band: np.ndarray) -> float:
    """In-band energy of a code through a stopband matrix."""
    code = np.asarray(code, dtype=np.complex128)
    return float(np.vdot(code, band @ code).real)


# ---------------------------------------------------------------------------
# feasibility precheck

@dataclass(frozen=True)
class PrecheckEntry:
    index: int
    floor: float        # smallest reachable in-band energy at the required energy
    cap: float
    feasible: bool


@dataclass(frozen=True)
class PrecheckReport:
    entries: tuple[PrecheckEntry, ...]
    feasible: bool

    def format_text(self) -> str:
        lines = []
        for e in self.entries:
            verdict = "ok" if e.feasible else "INFEASIBLE"
            lines.append(f"constraint {e.index}: energy floor {e.floor:.6e} "
                         f"vs cap {e.cap:.6e} -> {verdict}")
        lines.append("overall: " + ("feasible" if self.feasible else "INFEASIBLE"))
        return "\n".join(lines)


def feasibility_precheck(cfg: ScenarioConfig, mode: str = "bands") -> PrecheckReport:
    """Necessary-condition screen before optimization.

    For every constraint the smallest in-band energy any code of the required
    energy can reach is the bottom eigenvalue of the energy matrix times that
    energy.  A floor above the cap certifies infeasibility; passing the screen
    does not certify feasibility under the PAPR bound.
    """
    entries = []
    if mode == "sectors":
        for i, sec in enumerate(space_frequency_sectors(cfg)):
            floor = float(np.linalg.eigvalsh(sec.matrix)[0]) * cfg.total_energy
            entries.append(PrecheckEntry(i, floor, sec.cap, floor <= sec.cap))
    else:
        for i, band in enumerate(stop_bands(cfg)):
            floor = float(np.linalg.eigvalsh(band.matrix)[0]) * cfg.per_antenna_energy
            entries.append(PrecheckEntry(i, floor, band.cap, floor <= band.cap))
    return PrecheckReport(tuple(entries), all(e.feasible for e in entries))
