"""Fast self-contained invariant battery behind ``marsadmm check``.

Every check returns (name, passed, detail). The battery avoids large
problems so the whole run stays under a few seconds; the in-solver strict
checks (dual cap, feasibility inequality, prox optimality) do most of the
work simply by not raising.
"""

from __future__ import annotations

import io
import math
import warnings

import numpy as np

from .baselines import SubgradConfig, run_subgrad
from .data import gen_classifier_data, gen_spca_data
from .manifolds import Sphere, Stiefel
from .problems import make_sphere_classifier, make_spca
from .solver import (
    ADMM_BATCH_STREAM,
    InvariantViolation,
    SolverConfig,
    run,
    schedule,
    seed_stream,
)
from .trace import read_trace, write_trace

__all__ = ["run_battery"]


def _check_sphere_geometry(seed: int):
    rng = seed_stream(seed, ADMM_BATCH_STREAM)
    sph = Sphere(12)
    worst = 0.0
    for _ in range(200):
        x = sph.random_point(rng)
        u = sph.random_tangent(rng, x)
        worst = max(worst, sph.tangent_defect(x, sph.project_tangent(x, u)))
        worst = max(worst, float(np.linalg.norm(sph.retract(x, np.zeros_like(x)) - x)))
        y = sph.random_point(rng)
        v = sph.project_tangent(x, u)
        w = sph.transport(x, y, v)
        worst = max(worst, abs(np.linalg.norm(w) - np.linalg.norm(v)))
        worst = max(worst, sph.tangent_defect(y, w))
    return worst <= 1e-10, f"worst defect {worst:.3e}"


def _check_stiefel_geometry(seed: int):
    rng = seed_stream(seed, ADMM_BATCH_STREAM)
    st = Stiefel(8, 3)
    worst = 0.0
    for _ in range(200):
        x = st.random_point(rng)
        u = rng.standard_normal(st.ambient_shape)
        t = st.project_tangent(x, u)
        worst = max(worst, st.tangent_defect(x, t))
        worst = max(worst, float(np.linalg.norm(st.project_tangent(x, t) - t)))
        worst = max(worst, st.point_defect(st.retract(x, 0.01 * t)))
    return worst <= 1e-10, f"worst defect {worst:.3e}"


def _check_schedule():
    cfg = SolverConfig()
    rho8, eta8, alpha8 = schedule(cfg, 8)
    rho27, _, _ = schedule(cfg, 27)
    ok = (
        math.isclose(rho8, cfg.c_rho * 2.0, rel_tol=0, abs_tol=0)
        and math.isclose(eta8, cfg.c_eta / 2.0, rel_tol=0, abs_tol=0)
        and math.isclose(alpha8, cfg.c_alpha / 4.0, rel_tol=0, abs_tol=0)
        and math.isclose(rho27, cfg.c_rho * 3.0, rel_tol=0, abs_tol=0)
    )
    return ok, f"schedule(8)={rho8, eta8, alpha8}"


def _strict_run(problem, seed: int, max_iters: int = 120):
    cfg = SolverConfig(seed=seed, max_iters=max_iters, batch_size=20,
                       obj_tol=None, strict_checks=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run(problem, cfg, measure_time=False)


def _check_strict_spca(seed: int):
    data = gen_spca_data(20, 120, seed_stream(seed, 0)).features
    try:
        trace = _strict_run(make_spca(data, 0.4, 3), seed)
    except InvariantViolation as exc:
        return False, str(exc)
    return len(trace) == 120, f"{len(trace)} rows"


def _check_strict_classifier(seed: int):
    ds = gen_classifier_data(10, 400, 1.0, seed_stream(seed, 0))
    try:
        trace = _strict_run(make_sphere_classifier(ds.features, ds.labels, 0.25), seed)
    except InvariantViolation as exc:
        return False, str(exc)
    return len(trace) == 120, f"{len(trace)} rows"


def _check_strict_unpenalized(seed: int):
    data = gen_spca_data(20, 120, seed_stream(seed, 0)).features
    try:
        trace = _strict_run(make_spca(data, 0.0, 3), seed)
    except InvariantViolation as exc:
        return False, str(exc)
    return len(trace) == 120, f"{len(trace)} rows"


def _check_determinism(seed: int):
    data = gen_spca_data(15, 80, seed_stream(seed, 0)).features
    problem = make_spca(data, 0.4, 2)
    cfg = SolverConfig(seed=seed, max_iters=60, batch_size=10, obj_tol=None)
    a = run(problem, cfg, measure_time=False)
    b = run(problem, cfg, measure_time=False)
    same = a == b
    return same, "traces identical" if same else "traces differ"


def _check_trace_roundtrip(seed: int):
    data = gen_spca_data(15, 80, seed_stream(seed, 0)).features
    trace = run(make_spca(data, 0.4, 2),
                SolverConfig(seed=seed, max_iters=30, batch_size=10, obj_tol=None),
                measure_time=False)
    buf = io.StringIO()
    write_trace(trace, buf)
    buf.seek(0)
    back = read_trace(buf)
    ok = len(back) == len(trace) and all(
        ra == rb or (_nan_eq(ra, rb)) for ra, rb in zip(trace, back)
    )
    return ok, "round trip exact" if ok else "round trip mismatch"


def _nan_eq(ra, rb) -> bool:
    for fa, fb in zip(ra.__dict__.values(), rb.__dict__.values()):
        if isinstance(fa, float) and isinstance(fb, float):
            if math.isnan(fa) and math.isnan(fb):
                continue
            if fa != fb:
                return False
        elif fa != fb:
            return False
    return True


def _check_baseline(seed: int):
    data = gen_spca_data(15, 80, seed_stream(seed, 0)).features
    problem = make_spca(data, 0.4, 2)
    trace = run_subgrad(problem, SubgradConfig(seed=seed, max_iters=60, batch_size=10,
                                               obj_tol=None), measure_time=False)
    etas = [r.eta for r in trace]
    ok = len(trace) == 60 and all(b < a for a, b in zip(etas, etas[1:]))
    return ok, f"{len(trace)} rows, stepsize strictly decreasing: {ok}"


def run_battery(seed: int = 0) -> list[tuple[str, bool, str]]:
    battery = [
        ("sphere geometry identities", lambda: _check_sphere_geometry(seed)),
        ("stiefel geometry identities", lambda: _check_stiefel_geometry(seed)),
        ("cube-root schedules at exact cubes", _check_schedule),
        ("strict invariants, sparse pca", lambda: _check_strict_spca(seed)),
        ("strict invariants, classifier", lambda: _check_strict_classifier(seed)),
        ("strict invariants, no penalty", lambda: _check_strict_unpenalized(seed)),
        ("seeded determinism", lambda: _check_determinism(seed)),
        ("trace write/read round trip", lambda: _check_trace_roundtrip(seed)),
        ("subgradient baseline stepsize", lambda: _check_baseline(seed)),
    ]
    results = []
    for name, fn in battery:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
