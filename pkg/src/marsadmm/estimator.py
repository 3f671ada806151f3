"""Recursive momentum gradient estimator and the assembled step direction.

The estimator blends the current batch gradient with a transported correction
of its previous value,

    v_k = grad_S(x_k) + (1 - alpha_k) * T(v_{k-1} - grad_S(x_{k-1})),

where both batch gradients use the SAME sample set, T is the manifold's
vector transport, and grad_S denotes the tangent projection of the mean
ambient batch gradient. alpha = 1 reduces to the plain stochastic gradient.
Each update costs two gradient evaluations per sample, which is what
sfo_count tracks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["EstimatorState", "init_estimator", "update_estimator", "augmented_grad", "estimation_error"]


@dataclass
class EstimatorState:
    grad_est: np.ndarray  # tangent at carrier
    carrier: np.ndarray
    sfo_count: int


def _riem_grad(problem, x, batch) -> np.ndarray:
    return problem.manifold.project_tangent(x, problem.sample_euclidean_grad(x, batch))


def init_estimator(problem, x, batch) -> EstimatorState:
    """First estimate: the projected batch gradient at the starting point."""
    v = _riem_grad(problem, x, batch)
    return EstimatorState(grad_est=v, carrier=np.array(x, dtype=float, copy=True), sfo_count=len(batch))


def update_estimator(state: EstimatorState, problem, x_prev, x_curr, batch, alpha: float) -> EstimatorState:
    """Advance the estimate from x_prev to x_curr using one shared batch."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not np.array_equal(state.carrier, np.asarray(x_prev, dtype=float)):
        raise ValueError("carrier mismatch: state is not based at x_prev")
    manifold = problem.manifold
    g_curr = _riem_grad(problem, x_curr, batch)
    g_prev = _riem_grad(problem, x_prev, batch)
    if alpha < 1.0:
        correction = manifold.transport(x_prev, x_curr, state.grad_est - g_prev)
        v = g_curr + (1.0 - alpha) * correction
    else:
        v = g_curr
    # cheap re-projection each update keeps tangency drift from transport chains bounded
    v = manifold.project_tangent(x_curr, v)
    return EstimatorState(
        grad_est=v,
        carrier=np.array(x_curr, dtype=float, copy=True),
        sfo_count=state.sfo_count + 2 * len(batch),
    )


def augmented_grad(problem, x, v, y, lam, rho: float) -> np.ndarray:
    """Step direction: v plus the exactly-computed penalty and dual pull.

        G = v + P_x( A^T (rho (A x - y) - lambda) )
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    residual = problem.apply_A(x) - y
    ambient = problem.apply_At(rho * residual - lam)
    return v + problem.manifold.project_tangent(x, ambient)


def estimation_error(problem, state: EstimatorState) -> float:
    """Distance from the estimate to the exact projected gradient.

    Costs a full pass over the dataset; diagnostics only, never called on the
    solver's hot path.
    """
    exact = problem.manifold.project_tangent(
        state.carrier, problem.full_euclidean_grad(state.carrier)
    )
    return float(np.linalg.norm((state.grad_est - exact).ravel()))
