"""Steering vectors, the factored space-time response, and the clutter and
target quadratic forms consumed by the optimizers.

The space-time response of a scatterer is the Kronecker product of a temporal
steering vector over the pulses, a fast-time shift selecting the iso-range
ring, and the rank-one transmit/receive array coupling.  It is kept in
factored form throughout: applying it to a stacked code vector costs a couple
of small matrix products instead of a dense (L M N_r) x (L N_t) multiply.

Both layouts of the code vector appear here.  Covariances and quadratic forms
act on the sample-major stacking; the per-antenna block decomposition used by
the coordinate-descent solvers lives in the antenna-major stacking, reached by
a pure index permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import solve_pd
from .scenario import ClutterPatch, ScenarioConfig
from .waveform import Waveform, antenna_major_index


# ---------------------------------------------------------------------------
# steering

def tx_steering(cfg: ScenarioConfig, azimuth: float) -> np.ndarray:
    """Transmit ULA steering vector; spacing is in wavelengths."""
    n = np.arange(cfg.n_tx)
    return np.exp(2j * np.pi * cfg.d_tx * n * np.sin(azimuth))


def rx_steering(cfg: ScenarioConfig, azimuth: float) -> np.ndarray:
    n = np.arange(cfg.n_rx)
    return np.exp(2j * np.pi * cfg.d_rx * n * np.sin(azimuth))


def temporal_steering(doppler: float, n_pulses: int) -> np.ndarray:
    """Steering over the pulse train at a normalized Doppler in [-0.5, 0.5]."""
    if abs(doppler) > 0.5 + 1e-12:
        raise ValueError("normalized Doppler must lie in [-0.5, 0.5]")
    return np.exp(2j * np.pi * doppler * np.arange(n_pulses))


def doppler_taper(mean_doppler: float, spread: float, n_pulses: int) -> np.ndarray:
    """Pulse-to-pulse correlation of a scatterer with uniform Doppler jitter.

    Entry (m, m') is exp(j 2 pi f (m - m')) sinc(spread (m - m')), the closed
    form of averaging d(w) d(w)^H over a Doppler uniform within +-spread/2 of
    the mean.  With zero spread this is exactly the rank-one d d^H.
    """
    m = np.arange(n_pulses)
    diff = m[:, None] - m[None, :]
    return np.exp(2j * np.pi * mean_doppler * diff) * np.sinc(spread * diff)


def shift_columns(block: np.ndarray, shift: int) -> np.ndarray:
    """Right-multiply by the fast-time shift matrix, as an index move.

    Column j of the result is column j - shift of the input when in range and
    zero otherwise; shifts of magnitude >= L yield the zero block.
    """
    out = np.zeros_like(block)
    length = block.shape[-1]
    if abs(shift) >= length:
        return out
    if shift >= 0:
        out[..., shift:] = block[..., :length - shift]
    else:
        out[..., :length + shift] = block[..., -shift:]
    return out


# ---------------------------------------------------------------------------
# factored space-time response

@dataclass(frozen=True)
class SpaceTimeOperator:
    """Factored response d(w) (x) J_p^T (x) A(theta), never densified in the solvers.

    ``temporal`` is the pulse steering (length M), ``coupling`` the rank-one
    N_r x N_t array map b(theta) a^T(theta), and ``ring`` the fast-time shift
    of the iso-range ring.
    """

    temporal: np.ndarray
    coupling: np.ndarray
    ring: int = 0

    @property
    def n_pulses(self) -> int:
        return self.temporal.shape[0]

    @property
    def n_rx(self) -> int:
        return self.coupling.shape[0]

    @property
    def n_tx(self) -> int:
        return self.coupling.shape[1]

    def apply(self, stacked: np.ndarray) -> np.ndarray:
        """Map a sample-major code vector to the received space-time snapshot."""
        snapshot = self.apply_spatial(stacked)
        return np.kron(self.temporal, snapshot)

    def apply_spatial(self, stacked: np.ndarray) -> np.ndarray:
        """Apply only the per-pulse factor J_p^T (x) A."""
        codes = np.reshape(stacked, (self.n_tx, -1), order="F")
        mixed = shift_columns(self.coupling @ codes, self.ring)
        return mixed.reshape(-1, order="F")

    def adjoint(self, snapshot: np.ndarray) -> np.ndarray:
        """Apply the conjugate transpose to a length L M N_r snapshot."""
        stacked = self.adjoint_per_pulse(snapshot)
        return stacked @ self.temporal.conj()

    def adjoint_per_pulse(self, snapshot: np.ndarray) -> np.ndarray:
        """Per-pulse adjoints of J_p^T (x) A, returned as an (L N_t) x M array."""
        m, n_rx = self.n_pulses, self.n_rx
        length = snapshot.size // (m * n_rx)
        pulses = snapshot.reshape(m, length, n_rx)           # pulse, sample, receiver
        mixed = np.einsum("rt,mlr->mtl", self.coupling.conj(), pulses)
        mixed = shift_columns(mixed, -self.ring)             # right-multiply by J_p^T^H
        return mixed.transpose(2, 1, 0).reshape(-1, m)       # sample-major rows, pulse columns

    def dense(self, code_length: int) -> np.ndarray:
        """Materialized operator, intended for small cross-checks only."""
        shift_t = np.eye(code_length, k=-self.ring)          # J_p transposed
        return np.kron(self.temporal[:, None], np.kron(shift_t, self.coupling))


def operator_at(cfg: ScenarioConfig, azimuth: float, doppler: float,
                ring: int = 0) -> SpaceTimeOperator:
    coupling = np.outer(rx_steering(cfg, azimuth), tx_steering(cfg, azimuth))
    return SpaceTimeOperator(temporal_steering(doppler, cfg.n_pulses), coupling, ring)


def target_operator(cfg: ScenarioConfig) -> SpaceTimeOperator:
    return operator_at(cfg, cfg.target.azimuth_rad, cfg.target.normalized_doppler)


def patch_operator(cfg: ScenarioConfig, patch: ClutterPatch) -> SpaceTimeOperator:
    return operator_at(cfg, patch.azimuth_rad, patch.mean_doppler, patch.ring_index)


def target_response(cfg: ScenarioConfig, stacked: np.ndarray) -> np.ndarray:
    """Space-time snapshot of the target for a given code vector."""
    return target_operator(cfg).apply(stacked)


# ---------------------------------------------------------------------------
# covariances and quadratic forms

def clutter_covariance(cfg: ScenarioConfig, patches: list[ClutterPatch],
                       stacked: np.ndarray) -> np.ndarray:
    """Signal-dependent clutter covariance for a fixed code vector.

    Patches with zero Doppler spread contribute rank-one terms; spread patches
    contribute the Kronecker product of the pulse taper with the spatial
    snapshot outer product.  Accumulation order is fixed (rings ascending,
    patches ascending) so results are reproducible bit for bit.
    """
    dim = cfg.code_length * cfg.n_pulses * cfg.n_rx
    cov = np.zeros((dim, dim), dtype=np.complex128)
    for patch in patches:
        op = patch_operator(cfg, patch)
        snapshot = op.apply_spatial(stacked)
        spatial = np.outer(snapshot, snapshot.conj())
        if patch.doppler_spread > 0.0:
            taper = doppler_taper(patch.mean_doppler, patch.doppler_spread,
                                  cfg.n_pulses)
            cov += patch.power * np.kron(taper, spatial)
        else:
            temporal = np.outer(op.temporal, op.temporal.conj())
            cov += patch.power * np.kron(temporal, spatial)
    return cov


def noise_covariance(cfg: ScenarioConfig) -> np.ndarray:
    dim = cfg.code_length * cfg.n_pulses * cfg.n_rx
    return cfg.noise_power * np.eye(dim, dtype=np.complex128)


def interference_covariance(cfg: ScenarioConfig, patches: list[ClutterPatch],
                            stacked: np.ndarray) -> np.ndarray:
    """Clutter plus white receiver noise."""
    cov = clutter_covariance(cfg, patches, stacked)
    cov[np.diag_indices_from(cov)] += cfg.noise_power
    return cov


def clutter_quadratic(cfg: ScenarioConfig, patches: list[ClutterPatch],
                      filt: np.ndarray) -> np.ndarray:
    """Quadratic form in the code vector equal to the filtered clutter power.

    For every code vector s, ``s^H Q s`` equals ``w^H R_c(s) w`` with the same
    Doppler taper convention as :func:`clutter_covariance`.  Built from the
    adjoint applications of the factored response; nothing is densified.
    """
    dim = cfg.code_length * cfg.n_tx
    quad = np.zeros((dim, dim), dtype=np.complex128)
    for patch in patches:
        op = patch_operator(cfg, patch)
        per_pulse = op.adjoint_per_pulse(filt)               # (L N_t) x M
        if patch.doppler_spread > 0.0:
            taper = doppler_taper(patch.mean_doppler, patch.doppler_spread,
                                  cfg.n_pulses)
            quad += patch.power * (per_pulse @ taper.T @ per_pulse.conj().T)
        else:
            ray = per_pulse @ op.temporal.conj()
            quad += patch.power * np.outer(ray, ray.conj())
    return quad


def target_quadratic(cfg: ScenarioConfig, filt: np.ndarray) -> np.ndarray:
    """Rank-one quadratic form giving the filtered target power."""
    ray = target_operator(cfg).adjoint(filt)
    return np.outer(ray, ray.conj())


def filtered_noise_power(cfg: ScenarioConfig, filt: np.ndarray) -> float:
    return float(cfg.noise_power * np.vdot(filt, filt).real)


@dataclass(frozen=True)
class SinrForms:
    """The three pieces of the output SINR as functions of the code vector."""

    target: np.ndarray    # numerator quadratic form
    clutter: np.ndarray   # denominator quadratic form
    noise: float          # filtered noise power, constant in the code

    def ratio(self, stacked: np.ndarray) -> float:
        num = float(np.vdot(stacked, self.target @ stacked).real)
        den = float(np.vdot(stacked, self.clutter @ stacked).real) + self.noise
        return num / den


def sinr_forms(cfg: ScenarioConfig, patches: list[ClutterPatch],
               filt: np.ndarray) -> SinrForms:
    return SinrForms(
        target=target_quadratic(cfg, filt),
        clutter=clutter_quadratic(cfg, patches, filt),
        noise=filtered_noise_power(cfg, filt),
    )


def sinr_surrogate(cfg: ScenarioConfig, patches: list[ClutterPatch],
                   stacked: np.ndarray,
                   interference: np.ndarray | None = None
                   ) -> tuple[np.ndarray, np.ndarray, float]:
    """Tangent concave lower bound of the filter-optimized SINR.

    Returns ``(quad, lin, offset)`` such that ``-s^H quad s + 2 Re(lin^H s) +
    offset`` touches the optimal SINR at the expansion point and never exceeds
    it elsewhere.  The expansion direction is the optimal receive filter at
    the expansion point, so ``quad`` reuses the clutter quadratic machinery.
    """
    if interference is None:
        interference = interference_covariance(cfg, patches, stacked)
    op = target_operator(cfg)
    direction = solve_pd(interference, op.apply(stacked))
    quad = clutter_quadratic(cfg, patches, direction)
    lin = op.adjoint(direction)
    offset = -float(cfg.noise_power * np.vdot(direction, direction).real)
    return quad, lin, offset


# ---------------------------------------------------------------------------
# antenna-major block decomposition

def to_antenna_major_matrix(matrix: np.ndarray, n_tx: int, code_length: int
                            ) -> np.ndarray:
    """Conjugate the quadratic form by the layout permutation."""
    idx = antenna_major_index(n_tx, code_length)
    return matrix[np.ix_(idx, idx)]


def to_antenna_major_vector(vec: np.ndarray, n_tx: int, code_length: int
                            ) -> np.ndarray:
    return vec[antenna_major_index(n_tx, code_length)]


def diagonal_block(matrix_bar: np.ndarray, block: int, code_length: int
                   ) -> np.ndarray:
    lo = block * code_length
    return matrix_bar[lo:lo + code_length, lo:lo + code_length]


def cross_coupling(matrix_bar: np.ndarray, codes: np.ndarray, block: int
                   ) -> np.ndarray:
    """Linear term collecting the interaction of one code with all others.

    With the quadratic form in antenna-major layout and the current codes of
    the other antennas held fixed, the objective restricted to antenna n is
    ``s_n^H B_nn s_n + 2 Re(b_n^H s_n)`` plus a constant; this returns b_n.
    """
    code_length = codes.shape[1]
    lo = block * code_length
    rows = matrix_bar[lo:lo + code_length, :]
    total = rows @ codes.reshape(-1)
    own = diagonal_block(matrix_bar, block, code_length) @ codes[block]
    return total - own
