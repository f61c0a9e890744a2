"""Receive-filter synthesis and SINR evaluation."""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla


def mvdr_filter(interference: np.ndarray, steering: np.ndarray) -> np.ndarray:
    """Minimum-variance distortionless-response weights.

    Solves the Hermitian positive-definite system directly instead of forming
    an inverse; the solve residual is checked against the steering norm.
    """
    try:
        factor = sla.cho_factor(interference, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ValueError("interference covariance is not positive definite") from exc
    weights = sla.cho_solve(factor, steering, check_finite=False)
    residual = np.linalg.norm(interference @ weights - steering)
    if residual > 1e-8 * np.linalg.norm(steering):
        raise ValueError("ill-conditioned interference covariance: residual too large")
    return weights


def output_sinr(weights: np.ndarray, steering: np.ndarray,
                interference: np.ndarray, amplitude_sq: float = 1.0) -> float:
    """Filter-explicit SINR on a linear scale."""
    num = amplitude_sq * abs(np.vdot(weights, steering)) ** 2
    den = float(np.vdot(weights, interference @ weights).real)
    if den <= 0.0:
        raise ValueError("filtered interference power must be positive")
    return float(num / den)


def optimal_sinr(interference: np.ndarray, steering: np.ndarray,
                 amplitude_sq: float = 1.0) -> float:
    """SINR attained by the optimal linear receive filter."""
    factor = sla.cho_factor(interference, lower=True, check_finite=False)
    solved = sla.cho_solve(factor, steering, check_finite=False)
    return float(amplitude_sq * np.vdot(steering, solved).real)


def to_db(value: float) -> float:
    if value <= 0.0:
        return -math.inf
    return 10.0 * math.log10(value)
