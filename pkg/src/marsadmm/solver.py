"""Single-loop stochastic ADMM on a manifold with an adaptive dual stepsize.

Solves min F(x) + g(y) subject to A x = y with x constrained to a sphere or
Stiefel manifold. Each iteration takes one proximal step in y, one retracted
step in x along a momentum variance-reduced direction, and one dual step
whose stepsize is capped so the dual iterate stays inside an a-priori norm
bound. That bound doubles as a runtime certificate: together with a primal
feasibility inequality it is checked every iteration (strict_checks), and a
violation raises InvariantViolation because it can only come from a bug.

Iterates are indexed from 1; the trace holds one row per iterate, row 1 being
the initialization. Schedules grow/decay as cube-root powers of the iterate
index. Full-gradient diagnostics (objective, stationarity residuals) run
every residual_check_every iterations and on the final row; other rows carry
NaN in those columns. Diagnostic oracle cost is tracked in diag_sfo, never in
sfo_count.

Randomness: everything derives from ``seed`` through ``seed_stream(seed,
role)``, one independent stream per role (data generation, initial point,
batch sampling per solver). Two runs with equal seeds are bit-identical in
every algorithmic column.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .estimator import EstimatorState, augmented_grad, init_estimator, update_estimator
from .problems import CompositeProblem
from .trace import IterationRecord

__all__ = [
    "DATA_STREAM",
    "INIT_STREAM",
    "ADMM_BATCH_STREAM",
    "SUBGRAD_BATCH_STREAM",
    "seed_stream",
    "InvariantViolation",
    "SolverConfig",
    "guarantee_condition_warnings",
    "SolverState",
    "KktResiduals",
    "schedule",
    "y_update",
    "x_update",
    "dual_stepsize",
    "lambda_update",
    "kkt_residuals",
    "kkt_from_state",
    "init_state",
    "step",
    "run",
]

PI2_OVER_6 = math.pi**2 / 6.0

# role tags for the seed-splitting rule: (seed, role) -> independent stream
DATA_STREAM = 0
INIT_STREAM = 1
ADMM_BATCH_STREAM = 2
SUBGRAD_BATCH_STREAM = 3


def seed_stream(seed: int, role: int) -> np.random.Generator:
    """The package's only seed-derivation rule."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(role)]))


class InvariantViolation(RuntimeError):
    """A runtime-checkable inequality failed; indicates an implementation bug."""


@dataclass
class SolverConfig:
    c_rho: float = 50.0
    c_eta: float = 0.01
    c_alpha: float = 0.8
    c_beta: float = 0.75
    beta1: float = 50.0
    batch_size: int = 50
    max_iters: int = 1500
    seed: int = 0
    obj_tol: float | None = 1e-6
    residual_check_every: int = 10
    reorth_every: int = 100  # cadence of orthonormality cleanup on the iterate
    strict_checks: bool = True

    def __post_init__(self):
        for name in ("c_rho", "c_eta", "c_beta", "beta1"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.c_alpha <= 1.0:
            raise ValueError("c_alpha must lie in (0, 1]")
        for name in ("batch_size", "max_iters", "residual_check_every", "reorth_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


def guarantee_condition_warnings(cfg: SolverConfig) -> list[str]:
    """Soft checks from the convergence analysis.

    Violations void the decay-rate guarantees but not correctness, so they
    warn instead of failing.
    """
    notes = []
    if cfg.c_alpha < 0.8:
        notes.append(f"c_alpha={cfg.c_alpha} below the analyzed range [0.8, 1]")
    if cfg.c_beta > cfg.c_rho / 3.0:
        notes.append(f"c_beta={cfg.c_beta} exceeds c_rho/3={cfg.c_rho / 3.0}")
    if cfg.c_rho < 2.0 * math.sqrt(2.0):
        notes.append(f"c_rho={cfg.c_rho} below 2*sqrt(2)")
    return notes


def schedule(cfg: SolverConfig, k: int) -> tuple[float, float, float]:
    """(rho_k, eta_k, alpha_{k+1}) at iterate k >= 1: cube-root power laws."""
    if k < 1:
        raise ValueError("iterate index starts at 1")
    cbrt = float(np.cbrt(k))
    return cfg.c_rho * cbrt, cfg.c_eta / cbrt, cfg.c_alpha / (cbrt * cbrt)


def y_update(problem: CompositeProblem, x, lam, rho: float) -> np.ndarray:
    """Exact minimization of the augmented Lagrangian in y (one prox)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return problem.prox_g(problem.apply_A(x) - lam / rho, rho)


def x_update(manifold, x, eta: float, direction) -> np.ndarray:
    """Retracted step along the negative assembled direction."""
    return manifold.retract(x, -eta * np.asarray(direction))


def dual_stepsize(cfg: SolverConfig, k: int, init_residual: float, next_residual: float) -> float:
    """min of the residual-tracking branch and the summable cap.

    Degenerate cases take the cap branch: a zero current residual makes the
    tracking branch infinite, and a zero INITIAL residual would freeze the
    dual forever (callers warn once about the latter).
    """
    if k < 1:
        raise ValueError("iterate index starts at 1")
    capped = cfg.c_beta / (float(np.cbrt(k)) * math.log(k + 2) ** 2)
    if init_residual <= 0.0 or next_residual <= 0.0:
        return capped
    tracking = cfg.beta1 * init_residual / (next_residual * (k + 2) ** 2 * math.log(k + 3))
    return min(tracking, capped)


def lambda_update(lam, beta: float, residual, cap: float | None = None) -> np.ndarray:
    """lam - beta * residual, with the a-priori norm certificate asserted.

    ``cap`` is the certificate bound; pass None when the certificate is void
    (degenerate initialization) to skip the assertion.
    """
    new = lam - beta * np.asarray(residual)
    if cap is not None:
        norm = float(np.linalg.norm(new.ravel()))
        if norm > cap + 1e-12 * (1.0 + cap):
            raise InvariantViolation(
                f"dual norm {norm:.6e} exceeds its certificate {cap:.6e}"
            )
    return new


@dataclass(frozen=True)
class KktResiduals:
    r_grad: float
    r_subdiff: float
    r_feas: float
    lambda_bar: np.ndarray


def kkt_residuals(problem: CompositeProblem, x, y, lam_prev, rho_prev: float) -> KktResiduals:
    """Stationarity residuals at iterate k >= 2.

    Uses the shifted multiplier lam_bar = lam_{k-1} - rho_{k-1} (A x_k - y_k);
    r_grad needs one full gradient pass (diagnostics only).
    """
    residual = problem.apply_A(x) - y
    lam_bar = lam_prev - rho_prev * residual
    r_feas = float(np.linalg.norm(residual.ravel()))
    ambient = problem.full_euclidean_grad(x) - problem.apply_At(lam_bar)
    r_grad = float(np.linalg.norm(problem.manifold.project_tangent(x, ambient).ravel()))
    r_subdiff = problem.dist_to_subdiff_g(y, -lam_bar)
    return KktResiduals(r_grad=r_grad, r_subdiff=r_subdiff, r_feas=r_feas, lambda_bar=lam_bar)


def kkt_from_state(state: "SolverState", problem: CompositeProblem) -> KktResiduals:
    """Residuals at the state's current iterate; needs a completed step (k >= 2)."""
    if state.k < 2 or state.lam_prev is None or state.rho_prev is None:
        raise ValueError("KKT residuals are defined from iterate 2 on")
    return kkt_residuals(problem, state.x, state.y, state.lam_prev, state.rho_prev)


@dataclass
class SolverState:
    k: int
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    est: EstimatorState
    init_residual: float
    lambda_cap: float
    cert_active: bool
    batch_rng: np.random.Generator
    beta: float  # stepsize that produced the current lam
    x_prev: np.ndarray | None = None
    lam_prev: np.ndarray | None = None
    rho_prev: float | None = None
    dual_step_sum: float = 0.0  # running sum of beta_k * ||A x_k - y_k||
    diag_sfo: int = 0
    retractions: int = 0
    measure_time: bool = True
    started: float = 0.0
    trace: list[IterationRecord] = field(default_factory=list)


def _wall(state: SolverState) -> float:
    return time.perf_counter() - state.started if state.measure_time else 0.0


def _norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a).ravel()))


def init_state(
    problem: CompositeProblem,
    cfg: SolverConfig,
    x0=None,
    measure_time: bool = True,
) -> SolverState:
    """Build the iterate at index 1 and its trace row.

    x1 is random (init stream) unless ``x0`` overrides it; y1 is one proximal
    step from A x1; the dual starts at zero.
    """
    for note in guarantee_condition_warnings(cfg):
        warnings.warn(note, UserWarning)
    manifold = problem.manifold
    if x0 is None:
        x = manifold.random_point(seed_stream(cfg.seed, INIT_STREAM))
    else:
        x = manifold.check_point(np.array(x0, dtype=float, copy=True))
    started = time.perf_counter()
    rho1, eta1, _ = schedule(cfg, 1)
    ax = problem.apply_A(x)
    lam = np.zeros_like(ax)
    y = problem.prox_g(ax, rho1)
    r1 = _norm(ax - y)
    cert_active = r1 > 0.0
    if not cert_active:
        warnings.warn(
            "initial residual ||A x1 - y1|| is zero: the residual-tracking dual branch "
            "is disabled and the dual norm certificate is void for this run",
            RuntimeWarning,
        )
    batch_rng = seed_stream(cfg.seed, ADMM_BATCH_STREAM)
    batch = batch_rng.integers(0, problem.n_samples, size=cfg.batch_size)
    est = init_estimator(problem, x, batch)
    state = SolverState(
        k=1,
        x=x,
        y=y,
        lam=lam,
        est=est,
        init_residual=r1,
        lambda_cap=PI2_OVER_6 * cfg.beta1 * r1,  # ||lam1|| = 0
        cert_active=cert_active,
        batch_rng=batch_rng,
        beta=cfg.beta1,
        measure_time=measure_time,
        started=started,
    )
    state.trace.append(
        IterationRecord(
            iter=1,
            sfo_count=est.sfo_count,
            diag_sfo=0,
            wall_seconds=_wall(state),
            objective=problem.objective(x),
            r_feas=r1,
            r_grad=math.nan,
            r_subdiff=math.nan,
            rho=rho1,
            eta=eta1,
            beta=cfg.beta1,
            lambda_norm=0.0,
        )
    )
    return state


def _check_y_exactness(problem, ax, y_old, y_new, lam, rho) -> None:
    """The prox step may never increase the partial augmented Lagrangian."""

    def partial(yy):
        d = ax - yy
        return problem.penalty.value(yy) - float(np.vdot(lam, d)) + 0.5 * rho * float(np.vdot(d, d))

    new, old = partial(y_new), partial(y_old)
    if new > old + 1e-10 * (1.0 + abs(old)):
        raise InvariantViolation(f"y step increased the augmented Lagrangian: {old} -> {new}")


def step(state: SolverState, problem: CompositeProblem, cfg: SolverConfig, force_diagnostics: bool = False) -> SolverState:
    """Advance one iteration (y, x, beta, lambda, then the estimator) in place."""
    k = state.k
    manifold = problem.manifold
    rho_k, eta_k, alpha_next = schedule(cfg, k)

    ax_k = problem.apply_A(state.x)
    y_next = problem.prox_g(ax_k - state.lam / rho_k, rho_k)
    if cfg.strict_checks:
        _check_y_exactness(problem, ax_k, state.y, y_next, state.lam, rho_k)

    direction = augmented_grad(problem, state.x, state.est.grad_est, y_next, state.lam, rho_k)
    x_next = x_update(manifold, state.x, eta_k, direction)
    state.retractions += 1
    if state.retractions % cfg.reorth_every == 0:
        x_next = manifold.project_point(x_next)

    residual_next = problem.apply_A(x_next) - y_next
    r_next = _norm(residual_next)
    beta_next = dual_stepsize(cfg, k, state.init_residual, r_next)
    cap = state.lambda_cap if (cfg.strict_checks and state.cert_active) else None
    lam_next = lambda_update(state.lam, beta_next, residual_next, cap=cap)

    state.dual_step_sum += beta_next * r_next
    if cfg.strict_checks:
        if state.cert_active:
            budget = PI2_OVER_6 * cfg.beta1 * state.init_residual
            if state.dual_step_sum > budget + 1e-12 * (1.0 + budget):
                raise InvariantViolation(
                    f"dual step sum {state.dual_step_sum:.6e} exceeds its budget {budget:.6e}"
                )
        # primal feasibility inequality, with the measured dual norm (tighter
        # than the a-priori certificate and valid in every regime)
        lip = problem.penalty.lipschitz_bound(y_next.size)
        bound = (lip + _norm(state.lam)) / rho_k + problem.a_norm * _norm(x_next - state.x) + 1e-8
        if r_next > bound:
            raise InvariantViolation(
                f"feasibility inequality violated at iterate {k + 1}: {r_next:.6e} > {bound:.6e}"
            )

    batch = state.batch_rng.integers(0, problem.n_samples, size=cfg.batch_size)
    est_next = update_estimator(state.est, problem, state.x, x_next, batch, alpha_next)

    x_prev, lam_prev = state.x, state.lam
    state.k = k + 1
    state.x, state.y, state.lam = x_next, y_next, lam_next
    state.x_prev, state.lam_prev, state.rho_prev = x_prev, lam_prev, rho_k
    state.est = est_next
    state.beta = beta_next

    k_new = k + 1
    diagnostics = force_diagnostics or (k_new % cfg.residual_check_every == 0)
    rho_new, eta_new, _ = schedule(cfg, k_new)
    objective = r_grad = r_subdiff = math.nan
    if diagnostics:
        objective = problem.objective(x_next)
        kkt = kkt_residuals(problem, x_next, y_next, lam_prev, rho_k)
        state.diag_sfo += problem.n_samples
        r_grad, r_subdiff = kkt.r_grad, kkt.r_subdiff
        if cfg.strict_checks:
            # exact y-step optimality bounds the subdifferential residual by the x movement
            sub_bound = rho_k * problem.a_norm * _norm(x_next - x_prev) + 1e-8
            if kkt.r_subdiff > sub_bound:
                raise InvariantViolation(
                    f"subdifferential residual {kkt.r_subdiff:.6e} exceeds {sub_bound:.6e}"
                )
    state.trace.append(
        IterationRecord(
            iter=k_new,
            sfo_count=est_next.sfo_count,
            diag_sfo=state.diag_sfo,
            wall_seconds=_wall(state),
            objective=objective,
            r_feas=r_next,
            r_grad=r_grad,
            r_subdiff=r_subdiff,
            rho=rho_new,
            eta=eta_new,
            beta=beta_next,
            lambda_norm=_norm(lam_next),
        )
    )
    return state


def run(
    problem: CompositeProblem,
    cfg: SolverConfig,
    x0=None,
    measure_time: bool = True,
) -> list[IterationRecord]:
    """Iterate to max_iters or until the objective change between consecutive
    diagnostic evaluations drops to obj_tol. Returns the trace; the final row
    always carries diagnostics."""
    state = init_state(problem, cfg, x0=x0, measure_time=measure_time)
    check_tol = cfg.obj_tol is not None and math.isfinite(cfg.obj_tol)
    prev_objective = state.trace[0].objective
    for k in range(1, cfg.max_iters):
        step(state, problem, cfg, force_diagnostics=(k == cfg.max_iters - 1))
        objective = state.trace[-1].objective
        if check_tol and not math.isnan(objective):
            if abs(objective - prev_objective) <= cfg.obj_tol:
                break
            prev_objective = objective
    return state.trace
