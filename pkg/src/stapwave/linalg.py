"""Small Hermitian-matrix helpers shared across the solver modules."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Hermitian square root with negative round-off eigenvalues clipped at 0."""
    vals, vecs = np.linalg.eigh(hermitian_part(matrix))
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def extreme_eigenvalues(matrix: np.ndarray) -> tuple[float, float]:
    vals = np.linalg.eigvalsh(hermitian_part(matrix))
    return float(vals[0]), float(vals[-1])


def solve_pd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a Hermitian positive-definite system via Cholesky factorization."""
    try:
        factor = sla.cho_factor(matrix, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ValueError("matrix is not positive definite") from exc
    return sla.cho_solve(factor, rhs, check_finite=False)
