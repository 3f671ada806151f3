"""Riemannian stochastic subgradient baseline.

One retracted step per iteration along a stochastic subgradient of the whole
objective x -> F(x) + g(A x), with a 1/sqrt(k) stepsize. Shares the trace
schema and the seed-splitting rule with the main solver so paired comparisons
line up column for column; splitting columns (rho, beta, lambda_norm) and the
stationarity residuals don't apply and hold NaN.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .problems import CompositeProblem
from .solver import INIT_STREAM, SUBGRAD_BATCH_STREAM, seed_stream
from .trace import IterationRecord

__all__ = ["SubgradConfig", "subgrad_step", "run_subgrad"]


@dataclass
class SubgradConfig:
    eta0: float = 0.001
    batch_size: int = 50
    max_iters: int = 1500
    seed: int = 0
    obj_tol: float | None = 1e-6
    residual_check_every: int = 10

    def __post_init__(self):
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        for name in ("batch_size", "max_iters", "residual_check_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


def subgrad_step(problem: CompositeProblem, x, eta: float, batch) -> np.ndarray:
    """Retract along the projected stochastic subgradient of F + g(A .)."""
    ambient = problem.sample_euclidean_grad(x, batch)
    ambient = ambient + problem.apply_At(problem.penalty.subgradient(problem.apply_A(x)))
    direction = problem.manifold.project_tangent(x, ambient)
    return problem.manifold.retract(x, -eta * direction)


def run_subgrad(
    problem: CompositeProblem,
    cfg: SubgradConfig,
    x0=None,
    target_objective: float | None = None,
    measure_time: bool = True,
) -> list[IterationRecord]:
    """Iterate to max_iters, to the obj_tol plateau, or until the objective at
    a diagnostic row reaches ``target_objective`` (used for paired budget
    comparisons against the main solver). Returns the trace."""
    manifold = problem.manifold
    if x0 is None:
        x = manifold.random_point(seed_stream(cfg.seed, INIT_STREAM))
    else:
        x = manifold.check_point(np.array(x0, dtype=float, copy=True))
    started = time.perf_counter()
    batch_rng = seed_stream(cfg.seed, SUBGRAD_BATCH_STREAM)

    def wall() -> float:
        return time.perf_counter() - started if measure_time else 0.0

    def record(k: int, sfo: int, objective: float, eta: float) -> IterationRecord:
        return IterationRecord(
            iter=k,
            sfo_count=sfo,
            diag_sfo=0,
            wall_seconds=wall(),
            objective=objective,
            r_feas=math.nan,  # no splitting variable here
            r_grad=math.nan,
            r_subdiff=math.nan,
            rho=math.nan,
            eta=eta,
            beta=math.nan,
            lambda_norm=math.nan,
        )

    sfo = 0
    eta1 = cfg.eta0 / math.sqrt(2.0)
    trace = [record(1, sfo, problem.objective(x), eta1)]
    check_tol = cfg.obj_tol is not None and math.isfinite(cfg.obj_tol)
    prev_objective = trace[0].objective
    for k in range(1, cfg.max_iters):
        eta_k = cfg.eta0 / math.sqrt(k + 1)
        batch = batch_rng.integers(0, problem.n_samples, size=cfg.batch_size)
        x = subgrad_step(problem, x, eta_k, batch)
        sfo += cfg.batch_size
        k_new = k + 1
        diagnostics = (k == cfg.max_iters - 1) or (k_new % cfg.residual_check_every == 0)
        objective = problem.objective(x) if diagnostics else math.nan
        eta_new = cfg.eta0 / math.sqrt(k_new + 1)
        trace.append(record(k_new, sfo, objective, eta_new))
        if diagnostics:
            if target_objective is not None and objective <= target_objective:
                break
            if check_tol:
                if abs(objective - prev_objective) <= cfg.obj_tol:
                    break
                prev_objective = objective
    return trace
