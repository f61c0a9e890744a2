"""Transmit code matrix and its two vector layouts.

The solver works with two flattenings of the N_t x L code matrix: the
sample-major stacking (spatial snapshots per code sample, the layout the
space-time response acts on) and the antenna-major stacking (one code after
another, the layout the per-antenna block solvers use).  The two are related
by a fixed index permutation which is never materialized as a matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def antenna_major_index(n_tx: int, code_length: int) -> np.ndarray:
    """Gather index turning a sample-major vector into an antenna-major one.

    ``x_antenna = x_sample[antenna_major_index(n_tx, L)]``
    """
    j = np.arange(n_tx * code_length)
    antenna, sample = divmod(j, code_length)
    return sample * n_tx + antenna


def sample_major_index(n_tx: int, code_length: int) -> np.ndarray:
    """Inverse permutation of :func:`antenna_major_index`."""
    i = np.arange(n_tx * code_length)
    sample, antenna = divmod(i, n_tx)
    return antenna * code_length + sample


def papr(code: np.ndarray) -> float:
    """Peak-to-average power ratio of a code sequence."""
    power = np.abs(np.asarray(code)) ** 2
    mean = power.mean()
    if mean == 0.0:
        return np.inf
    return float(power.max() / mean)


@dataclass(frozen=True)
class Waveform:
    """N_t x L transmit code matrix; row n holds the code of antenna n."""

    codes: np.ndarray

    def __post_init__(self):
        codes = np.atleast_2d(np.asarray(self.codes, dtype=np.complex128))
        if codes.ndim != 2:
            raise ValueError("waveform matrix must be 2-D (antennas x samples)")
        object.__setattr__(self, "codes", codes)

    @property
    def n_tx(self) -> int:
        return self.codes.shape[0]

    @property
    def code_length(self) -> int:
        return self.codes.shape[1]

    @property
    def sample_major(self) -> np.ndarray:
        """Column-stacked vector: entry ``l * n_tx + n`` is antenna n, sample l."""
        return self.codes.reshape(-1, order="F")

    @property
    def antenna_major(self) -> np.ndarray:
        """Antenna-stacked vector: the codes concatenated one after another."""
        return self.codes.reshape(-1)

    @classmethod
    def from_sample_major(cls, stacked: np.ndarray, n_tx: int) -> "Waveform":
        stacked = np.asarray(stacked, dtype=np.complex128)
        if stacked.size % n_tx:
            raise ValueError("stacked length is not a multiple of the antenna count")
        return cls(stacked.reshape(n_tx, -1, order="F"))

    def energy_per_antenna(self) -> np.ndarray:
        return np.sum(np.abs(self.codes) ** 2, axis=1)

    def papr_per_antenna(self) -> np.ndarray:
        return np.array([papr(row) for row in self.codes])
