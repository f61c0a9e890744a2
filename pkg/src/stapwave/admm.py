"""Splitting solver for the per-antenna code subproblem.

Each coordinate-descent block maximizes a concave-shifted quadratic plus a
linear term over codes with fixed energy, bounded peak power, and quadratic
in-band energy caps.  The caps and the quadratic are split off through
consensus variables: one copy per cap constrained to the unit ball, and one
copy of the matrix-square-root image of the code that carries the quadratic
term through a scalar slack.  Scaled dual ascent ties the copies together.

The code update inside each splitting iteration is itself a small
minorize-maximize loop whose inner step is a closed-form projection onto the
energy/peak-power set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import extreme_eigenvalues, psd_sqrt

ASCENT_REL_TOL = 1e-8          # inner ascent stop on the projection objective
FEASIBILITY_REL_TOL = 1e-6     # accepted relative slack on the energy caps
DENSE_EIG_DIM_LIMIT = 512      # above this, eigenvalue shifts use norm bounds


def papr_project(direction: np.ndarray, energy: float, papr_bound: float
                 ) -> np.ndarray:
    """Maximize Re(s^H u) over codes with fixed energy and bounded PAPR.

    Phases align with the phases of ``direction``.  Magnitudes follow the
    capped water-filling profile: entries with large |u| sit at the peak-power
    cap, the rest share the remaining energy proportionally to |u|.  A zero
    direction returns the constant-modulus all-real code.
    """
    if energy <= 0.0:
        raise ValueError("energy must be positive")
    length = direction.size
    if not 1.0 <= papr_bound <= length:
        raise ValueError("PAPR bound must lie in [1, code length]")
    cap = math.sqrt(papr_bound * energy / length)
    mags = np.abs(direction)
    if not np.any(mags > 0.0):
        return np.full(length, math.sqrt(energy / length), dtype=np.complex128)
    phases = np.where(mags > 0.0, direction / np.where(mags > 0.0, mags, 1.0), 1.0)

    order = np.argsort(-mags, kind="stable")
    sorted_mags = mags[order]
    profile = np.empty(length)
    for n_capped in range(length + 1):
        remaining = max(energy - n_capped * cap * cap, 0.0)
        tail = sorted_mags[n_capped:]
        tail_norm = math.sqrt(float(np.sum(tail * tail)))
        if tail_norm == 0.0:
            profile[:n_capped] = cap
            count = length - n_capped
            profile[n_capped:] = math.sqrt(remaining / count) if count else 0.0
            break
        scale = math.sqrt(remaining) / tail_norm
        if scale * tail[0] <= cap * (1.0 + 1e-15):
            profile[:n_capped] = cap
            profile[n_capped:] = scale * tail
            break

    out = np.empty(length, dtype=np.complex128)
    out[order] = profile
    out *= phases
    norm = np.linalg.norm(out)
    if norm > 0.0:
        out *= math.sqrt(energy) / norm
    return out


@dataclass(frozen=True)
class QuadraticCaps:
    """Energy-cap constraints normalized to the unit ball, with square roots."""

    matrices: tuple[np.ndarray, ...]
    sqrts: tuple[np.ndarray, ...]

    @classmethod
    def from_caps(cls, pairs: list[tuple[np.ndarray, float]]) -> "QuadraticCaps":
        mats = tuple(np.asarray(m) / cap for m, cap in pairs)
        return cls(mats, tuple(psd_sqrt(m) for m in mats))

    def __len__(self) -> int:
        return len(self.matrices)

    def max_violation(self, code: np.ndarray) -> float:
        """Largest normalized cap excess; non-positive means feasible."""
        if not self.matrices:
            return 0.0
        return max(float(np.vdot(code, m @ code).real) - 1.0 for m in self.matrices)


@dataclass(frozen=True)
class BlockProblem:
    """One coordinate block: quadratic, linear term, caps, and power limits."""

    quad: np.ndarray            # Hermitian PSD block of the shifted objective
    quad_sqrt: np.ndarray
    lin: np.ndarray             # cross-coupling plus any surrogate linear term
    caps: QuadraticCaps
    energy: float
    papr_bound: float
    penalty: float
    ascent_map: np.ndarray      # PSD matrix driving the inner ascent direction

    def objective(self, code: np.ndarray) -> float:
        quad_val = float(np.vdot(code, self.quad @ code).real)
        return quad_val + 2.0 * float(np.vdot(self.lin, code).real)


def build_block_problem(quad: np.ndarray, lin: np.ndarray, caps: QuadraticCaps,
                        energy: float, papr_bound: float, penalty: float,
                        dense_dim_limit: int = DENSE_EIG_DIM_LIMIT) -> BlockProblem:
    """Precompute the square root and ascent shift for one block.

    The code update maximizes ``s^H Y s + 2 Re(s^H v)`` with Y a negative
    multiple of (quad + sum of caps); shifting Y by its smallest eigenvalue
    makes the ascent map PSD.  Past the dense size limit the shift falls back
    to a trace bound, which only shortens the ascent steps.
    """
    stack = quad + sum(c for c in caps.matrices) if len(caps) else quad
    if quad.shape[0] <= dense_dim_limit:
        top = extreme_eigenvalues(stack)[1]
    else:
        top = float(np.trace(stack).real)
    ascent_map = 0.5 * penalty * (top * np.eye(quad.shape[0]) - stack)
    return BlockProblem(
        quad=quad, quad_sqrt=psd_sqrt(quad), lin=np.asarray(lin),
        caps=caps, energy=energy, papr_bound=papr_bound, penalty=penalty,
        ascent_map=ascent_map)


@dataclass
class AdmmState:
    """Consensus copies and scaled duals, carried across outer iterations."""

    z: np.ndarray | None = None
    t: float = 0.0
    g: list[np.ndarray] = field(default_factory=list)
    c: list[np.ndarray] = field(default_factory=list)
    d: np.ndarray | None = None
    residual_history: list[float] = field(default_factory=list)

    def ensure(self, prob: BlockProblem, code: np.ndarray) -> None:
        if self.z is not None:
            return
        self.z = prob.quad_sqrt @ code
        self.t = float(np.vdot(self.z, self.z).real)
        self.g = [unit_ball_project(s @ code) for s in prob.caps.sqrts]
        self.c = [np.zeros_like(code) for _ in prob.caps.sqrts]
        self.d = np.zeros_like(code)


def unit_ball_project(vec: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vec)
    if norm <= 1.0:
        return vec.copy()
    return vec / norm


def slack_update(q: np.ndarray, penalty: float) -> tuple[np.ndarray, float]:
    """Joint update of the quadratic copy and its scalar slack.

    The copy minimizes (penalty/2) ||z - q||^2 - ||z||^2, which is strongly
    convex exactly when the penalty exceeds 2; the slack then sits at ||z||^2.
    """
    z = penalty * q / (penalty - 2.0)
    return z, float(np.vdot(z, z).real)


def ascend_code(prob: BlockProblem, code: np.ndarray, state: AdmmState,
                max_iter: int) -> np.ndarray:
    """Inner minorize-maximize loop of the code update.

    Each pass projects the current ascent direction onto the energy/peak-power
    set; the surrogate objective is nondecreasing and the loop stops when the
    projection objective stalls.
    """
    drive = 0.5 * prob.penalty * (prob.quad_sqrt @ (state.z + state.d))
    for sqrt_k, g_k, c_k in zip(prob.caps.sqrts, state.g, state.c):
        drive += 0.5 * prob.penalty * (sqrt_k @ (g_k + c_k))
    drive += prob.lin

    previous = None
    for _ in range(max_iter):
        direction = prob.ascent_map @ code + drive
        code = papr_project(direction, prob.energy, prob.papr_bound)
        value = float(np.vdot(code, direction).real)
        if previous is not None and abs(value - previous) <= ASCENT_REL_TOL * (1.0 + abs(value)):
            break
        previous = value
    return code


@dataclass
class AdmmRun:
    code: np.ndarray
    converged: bool
    iterations: int
    residual: float
    stalled: bool


def run_admm(prob: BlockProblem, code: np.ndarray, state: AdmmState,
             tol: float, max_iter: int, ascent_max_iter: int) -> AdmmRun:
    """Iterate the splitting updates until the stacked consensus gap is small.

    Energy and peak power hold for every iterate by construction of the
    projection.  If the gap never reaches the tolerance, the best iterate
    seen is returned instead of the last one: the best feasible iterate by
    block objective, or failing any feasible one, the least infeasible.
    """
    state.ensure(prob, code)
    best_feasible = None
    best_feasible_obj = -np.inf
    least_violating = None
    least_violation = np.inf
    converged = False
    residual = np.inf
    iterations = 0

    for iterations in range(1, max_iter + 1):
        code = ascend_code(prob, code, state, ascent_max_iter)
        image = prob.quad_sqrt @ code
        state.z, state.t = slack_update(image - state.d, prob.penalty)
        cap_images = [s @ code for s in prob.caps.sqrts]
        gaps = [state.z - image]
        for k, cap_image in enumerate(cap_images):
            state.g[k] = unit_ball_project(cap_image - state.c[k])
            state.c[k] += state.g[k] - cap_image
            gaps.append(state.g[k] - cap_image)
        state.d += state.z - image

        violation = 0.0
        if cap_images:
            violation = max(float(np.vdot(ci, ci).real) for ci in cap_images) - 1.0
        objective = float(np.vdot(image, image).real) \
            + 2.0 * float(np.vdot(prob.lin, code).real)
        if violation <= FEASIBILITY_REL_TOL and objective > best_feasible_obj:
            best_feasible = code
            best_feasible_obj = objective
        if violation < least_violation:
            least_violating = code
            least_violation = violation

        residual = math.sqrt(sum(float(np.vdot(gap, gap).real) for gap in gaps))
        state.residual_history.append(residual)
        if residual < tol:
            converged = True
            break

    if converged:
        return AdmmRun(code, True, iterations, residual, stalled=False)
    fallback = best_feasible if best_feasible is not None else least_violating
    if fallback is None:
        fallback = code
    return AdmmRun(fallback, False, iterations, residual, stalled=True)
