"""Cyclic joint design of transmit codes and receive filters.

One outer iteration refits the optimal receive filter to the current codes,
then improves the codes at fixed filter.  Two code updates are provided: a
ratio-lifting update that turns the SINR fraction into a parametric quadratic
(solved by Gauss-Seidel sweeps over the antennas, one splitting solve per
antenna), and a tangent-surrogate update that lower-bounds the
filter-optimized SINR by a concave quadratic and sweeps that instead.

Block updates never accept a candidate that is worse than the incumbent when
both satisfy the energy caps, so the reported SINR sequence is nondecreasing
once the iterates are feasible.  Output codes always carry exact energy and
peak power by construction of the projection.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .admm import (AdmmState, DENSE_EIG_DIM_LIMIT, FEASIBILITY_REL_TOL,
                   QuadraticCaps, build_block_problem, papr_project, run_admm)
from .filters import mvdr_filter, output_sinr, to_db
from .linalg import extreme_eigenvalues
from .model import (SinrForms, cross_coupling, diagonal_block,
                    interference_covariance, sinr_forms, sinr_surrogate,
                    target_response, to_antenna_major_matrix,
                    to_antenna_major_vector)
from .scenario import ConfigError, ScenarioConfig, build_clutter_geometry, \
    initial_waveform
from .spectral import space_frequency_sectors, stop_bands
from .waveform import Waveform, papr


class DesignError(RuntimeError):
    """Raised when a design run reaches a non-recoverable numeric state."""


@dataclass
class TraceRow:
    outer_iter: int
    inner_iter: int              # 0 for rows written after the filter refit
    cpu_seconds: float
    sinr_db: float
    flag: str
    leakage: np.ndarray          # per block, per constraint
    papr: np.ndarray             # per block


@dataclass
class DesignTrace:
    rows: list[TraceRow] = field(default_factory=list)
    residual_form: str = "stacked"   # consensus gaps are stacked before the norm

    def outer_rows(self) -> list[TraceRow]:
        return [r for r in self.rows if r.inner_iter == 0]


@dataclass
class DesignResult:
    waveform: Waveform
    filter: np.ndarray
    trace: DesignTrace
    baseline_sinr_db: float      # initializer with its own optimal filter
    final_sinr_db: float
    converged: bool
    flags: tuple[str, ...]
    algorithm: str
    mode: str
    config: ScenarioConfig


# ---------------------------------------------------------------------------
# ratio lifting

def dinkelbach_shift(forms: SinrForms, ratio: float, total_energy: float,
                     dense_dim_limit: int = DENSE_EIG_DIM_LIMIT
                     ) -> tuple[np.ndarray, float, str]:
    """Quadratic of the lifted ratio objective, shifted to be PSD.

    On the fixed-energy sphere the shift only adds a constant, so the argmax
    is untouched.  Past the dense size limit the smallest eigenvalue is
    replaced by a Frobenius bound and the row is flagged.
    """
    dim = forms.target.shape[0]
    matrix = forms.target - ratio * forms.clutter
    matrix[np.diag_indices_from(matrix)] -= ratio * forms.noise / total_energy
    if dim <= dense_dim_limit:
        bottom = extreme_eigenvalues(matrix)[0]
        eta = max(0.0, -bottom) + 1e-8 * (1.0 + abs(bottom))
        flag = ""
    else:
        eta = float(np.linalg.norm(matrix)) * (1.0 + 1e-8)
        flag = "shift_bound"
    matrix[np.diag_indices_from(matrix)] += eta
    return matrix, eta, flag


def _normalize_scale(matrix: np.ndarray) -> np.ndarray:
    """Rescale a PSD objective quadratic to unit mean eigenvalue.

    A positive rescaling keeps every block argmax, so this only conditions
    the splitting solver: the consensus copy of the objective ends up on the
    same numeric scale as the unit-ball cap copies, instead of drowning below
    the inner ascent tolerance when the caps are tight.
    """
    scale = float(np.trace(matrix).real) / matrix.shape[0]
    if scale <= 0.0:
        return matrix
    return matrix / scale


def surrogate_shift(quad: np.ndarray, dense_dim_limit: int = DENSE_EIG_DIM_LIMIT
                    ) -> tuple[np.ndarray, float, str]:
    """Flip the concave surrogate quadratic into a PSD maximization target."""
    dim = quad.shape[0]
    if dim <= dense_dim_limit:
        mu = extreme_eigenvalues(quad)[1] * (1.0 + 1e-8)
        flag = ""
    else:
        mu = float(np.trace(quad).real) * (1.0 + 1e-8)
        flag = "shift_bound"
    shifted = -quad
    shifted[np.diag_indices_from(shifted)] += mu
    return shifted, mu, flag


# ---------------------------------------------------------------------------
# block layout: per-antenna sweeps, or one coupled block in sector mode

@dataclass(frozen=True)
class _Layout:
    mode: str
    n_tx: int
    code_length: int
    n_blocks: int
    block_length: int
    block_energy: float
    papr_bound: float

    def to_solver_matrix(self, matrix: np.ndarray) -> np.ndarray:
        if self.mode == "bands":
            return to_antenna_major_matrix(matrix, self.n_tx, self.code_length)
        return matrix

    def to_solver_vector(self, vec: np.ndarray) -> np.ndarray:
        if self.mode == "bands":
            return to_antenna_major_vector(vec, self.n_tx, self.code_length)
        return vec

    def stacked(self, codes: np.ndarray) -> np.ndarray:
        if self.mode == "bands":
            return Waveform(codes).sample_major
        return codes[0]

    def waveform(self, codes: np.ndarray) -> Waveform:
        if self.mode == "bands":
            return Waveform(codes.copy())
        return Waveform.from_sample_major(codes[0], self.n_tx)


def _make_layout(cfg: ScenarioConfig, mode: str) -> _Layout:
    if mode == "bands":
        return _Layout(mode, cfg.n_tx, cfg.code_length, cfg.n_tx, cfg.code_length,
                       cfg.per_antenna_energy, cfg.papr_bound)
    return _Layout(mode, cfg.n_tx, cfg.code_length, 1, cfg.code_length * cfg.n_tx,
                   cfg.total_energy, cfg.papr_bound)


@dataclass
class _Context:
    cfg: ScenarioConfig
    layout: _Layout
    patches: list
    caps: QuadraticCaps
    raw_caps: list          # (matrix, cap) pairs in the block basis, for audits
    states: list[AdmmState]

    def audit_arrays(self, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.layout.mode == "bands":
            rows = codes
        else:
            rows = self.layout.stacked(codes)[None, :]
        leak = np.array([[float(np.vdot(row, m @ row).real) for m, _ in self.raw_caps]
                         for row in rows])
        peaks = np.array([papr(row) for row in rows])
        return leak, peaks


def _make_context(cfg: ScenarioConfig, mode: str) -> _Context:
    layout = _make_layout(cfg, mode)
    if mode == "bands":
        raw = [(b.matrix, b.cap) for b in stop_bands(cfg)]
    else:
        raw = [(s.matrix, s.cap) for s in space_frequency_sectors(cfg)]
    caps = QuadraticCaps.from_caps(raw)
    states = [AdmmState() for _ in range(layout.n_blocks)]
    return _Context(cfg, layout, build_clutter_geometry(cfg), caps, raw, states)


# ---------------------------------------------------------------------------
# Gauss-Seidel sweep with a monotonicity safeguard

def _choose(prob, incumbent: np.ndarray, candidate: np.ndarray) -> np.ndarray:
    """Keep the better of incumbent and splitting output.

    Feasible beats infeasible; among feasible codes the block objective
    decides; among infeasible ones the smaller cap violation wins, breaking
    ties toward the candidate so infeasible starts keep moving.
    """
    inc_violation = prob.caps.max_violation(incumbent)
    cand_violation = prob.caps.max_violation(candidate)
    inc_ok = inc_violation <= FEASIBILITY_REL_TOL
    cand_ok = cand_violation <= FEASIBILITY_REL_TOL
    if inc_ok and cand_ok:
        return candidate if prob.objective(candidate) >= prob.objective(incumbent) \
            else incumbent
    if cand_ok:
        return candidate
    if inc_ok:
        return incumbent
    return candidate if cand_violation <= inc_violation else incumbent


def _sweep(ctx: _Context, codes: np.ndarray, quad_bar: np.ndarray,
           extra_lin_bar: np.ndarray | None) -> tuple[np.ndarray, bool]:
    cfg = ctx.cfg
    layout = ctx.layout
    stalled = False
    for n in range(layout.n_blocks):
        quad_nn = diagonal_block(quad_bar, n, layout.block_length)
        lin = cross_coupling(quad_bar, codes, n)
        if extra_lin_bar is not None:
            lo = n * layout.block_length
            lin = lin + extra_lin_bar[lo:lo + layout.block_length]
        prob = build_block_problem(quad_nn, lin, ctx.caps, layout.block_energy,
                                   layout.papr_bound, cfg.solver.penalty)
        run = run_admm(prob, codes[n].copy(), ctx.states[n], cfg.solver.admm_tol,
                       cfg.solver.admm_max_iter, cfg.solver.mm_inner_max_iter)
        codes[n] = _choose(prob, codes[n], run.code)
        stalled = stalled or run.stalled
    return codes, stalled


# ---------------------------------------------------------------------------
# code updates at fixed filter

def dinkelbach_update(ctx: _Context, codes: np.ndarray, forms: SinrForms
                      ) -> tuple[np.ndarray, list[float], set[str]]:
    """Repeatedly lift the ratio at the current value and sweep the blocks.

    Returns the ratio history, whose first entry is the ratio at entry; the
    sequence is nondecreasing up to round-off thanks to the sweep safeguard.
    """
    cfg = ctx.cfg
    ratio = forms.ratio(ctx.layout.stacked(codes))
    history = [ratio]
    flags: set[str] = set()
    for _ in range(cfg.solver.dk_max_iter):
        shifted, _, flag = dinkelbach_shift(forms, ratio, cfg.total_energy)
        if flag:
            flags.add(flag)
        quad_bar = ctx.layout.to_solver_matrix(_normalize_scale(shifted))
        for _ in range(cfg.solver.cd_sweeps):
            codes, stalled = _sweep(ctx, codes, quad_bar, None)
            if stalled:
                flags.add("stall")
        new_ratio = forms.ratio(ctx.layout.stacked(codes))
        history.append(new_ratio)
        done = (new_ratio == 0.0 and ratio == 0.0) or (
            new_ratio > 0.0 and abs(new_ratio - ratio) / new_ratio < cfg.solver.inner_tol)
        ratio = new_ratio
        if done:
            break
    return codes, history, flags


def surrogate_update(ctx: _Context, codes: np.ndarray,
                     interference: np.ndarray | None = None
                     ) -> tuple[np.ndarray, set[str]]:
    """One or more tangent-surrogate maximization steps at the current point."""
    cfg = ctx.cfg
    flags: set[str] = set()
    for step in range(cfg.solver.mm_steps):
        stacked = ctx.layout.stacked(codes)
        quad, lin, _ = sinr_surrogate(cfg, ctx.patches, stacked,
                                      interference if step == 0 else None)
        shifted, _, flag = surrogate_shift(quad)
        if flag:
            flags.add(flag)
        scale = float(np.trace(shifted).real) / shifted.shape[0]
        if scale > 0.0:
            shifted = shifted / scale
            lin = lin / scale
        quad_bar = ctx.layout.to_solver_matrix(shifted)
        lin_bar = ctx.layout.to_solver_vector(lin)
        for _ in range(cfg.solver.cd_sweeps):
            codes, stalled = _sweep(ctx, codes, quad_bar, lin_bar)
            if stalled:
                flags.add("stall")
    return codes, flags


# ---------------------------------------------------------------------------
# driver

def _feasible_start(ctx: _Context, codes: np.ndarray) -> np.ndarray:
    """Project the initializer onto exact energy and peak power if needed."""
    layout = ctx.layout
    for n in range(layout.n_blocks):
        energy = float(np.vdot(codes[n], codes[n]).real)
        if (abs(energy - layout.block_energy) > 1e-12 * layout.block_energy
                or papr(codes[n]) > layout.papr_bound * (1.0 + 1e-12)):
            codes[n] = papr_project(codes[n], layout.block_energy, layout.papr_bound)
    return codes


def _design(cfg: ScenarioConfig, mode: str, algorithm: str | None) -> DesignResult:
    algorithm = algorithm or cfg.solver.algorithm
    if algorithm not in ("dk_admm", "mm_admm"):
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    ctx = _make_context(cfg, mode)
    layout = ctx.layout

    initial = initial_waveform(cfg)
    if mode == "bands":
        codes = initial.codes.copy()
    else:
        codes = initial.sample_major[None, :].copy()
    codes = _feasible_start(ctx, codes)

    start = time.perf_counter()
    trace = DesignTrace()
    all_flags: set[str] = set()
    amplitude_sq = cfg.target.amplitude ** 2

    stacked = layout.stacked(codes)
    cov = interference_covariance(cfg, ctx.patches, stacked)
    steering = target_response(cfg, stacked)
    weights = mvdr_filter(cov, steering)
    sinr_prev = output_sinr(weights, steering, cov, amplitude_sq)
    baseline_db = to_db(sinr_prev)

    converged = False
    for outer in range(1, cfg.solver.max_outer_iter + 1):
        if algorithm == "dk_admm":
            forms = sinr_forms(cfg, ctx.patches, weights)
            codes, history, flags = dinkelbach_update(ctx, codes, forms)
            leak, peaks = ctx.audit_arrays(codes)
            for l, ratio in enumerate(history[1:], start=1):
                trace.rows.append(TraceRow(
                    outer, l, time.perf_counter() - start,
                    to_db(amplitude_sq * ratio), ",".join(sorted(flags)),
                    leak, peaks))
        else:
            codes, flags = surrogate_update(ctx, codes, interference=cov)
        all_flags |= flags

        stacked = layout.stacked(codes)
        cov = interference_covariance(cfg, ctx.patches, stacked)
        steering = target_response(cfg, stacked)
        weights = mvdr_filter(cov, steering)
        sinr_now = output_sinr(weights, steering, cov, amplitude_sq)
        if not math.isfinite(sinr_now) or sinr_now <= 0.0:
            raise DesignError(
                f"design aborted at outer iteration {outer}: SINR became "
                f"{sinr_now!r}; check the scenario conditioning")

        leak, peaks = ctx.audit_arrays(codes)
        trace.rows.append(TraceRow(outer, 0, time.perf_counter() - start,
                                   to_db(sinr_now), ",".join(sorted(flags)),
                                   leak, peaks))
        if abs(sinr_now - sinr_prev) / sinr_now < cfg.solver.outer_tol:
            sinr_prev = sinr_now
            converged = True
            break
        sinr_prev = sinr_now

    return DesignResult(
        waveform=layout.waveform(codes),
        filter=weights,
        trace=trace,
        baseline_sinr_db=baseline_db,
        final_sinr_db=to_db(sinr_prev),
        converged=converged,
        flags=tuple(sorted(all_flags)),
        algorithm=algorithm,
        mode=mode,
        config=cfg,
    )


def cyclic_design(cfg: ScenarioConfig, algorithm: str | None = None) -> DesignResult:
    """Joint design under per-antenna stopband caps."""
    return _design(cfg, "bands", algorithm)


def space_frequency_design(cfg: ScenarioConfig, algorithm: str | None = None
                           ) -> DesignResult:
    """Joint design under caps that couple the antennas through angular sectors.

    The energy and peak-power constraints then apply to the full stacked code
    vector and the coordinate sweep degenerates to a single block.
    """
    if not cfg.sectors:
        raise ConfigError("space-frequency design needs sectors in the config")
    return _design(cfg, "sectors", algorithm)
