"""Benchmark command line.

Subcommands
-----------
spca / classify
    Run one solver over a list of seeds on a synthetic (or LIBSVM-file)
    problem; write one trace CSV per seed plus summary.csv and metadata.json.
classify
compare
    Run the ADMM solver first, then the subgradient baseline with
    target-objective stopping at the ADMM final value, seed by seed.
check
    Fast invariant battery; prints one PASS/FAIL line per check.
report
    Render figures from a finished run directory.

Configuration precedence: built-in defaults < --config JSON < flags. All
randomness flows from the seed list through ``seed_stream(seed, role)`` with
one role per consumer (data, init, each solver's batches), so every artifact
is reproducible from metadata.json alone.

Exit codes: 0 success, 1 configuration/input error, 2 runtime invariant
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .baselines import SubgradConfig, run_subgrad
from .data import gen_classifier_data, gen_spca_data, parse_libsvm
from .problems import make_sphere_classifier, make_spca
from .solver import DATA_STREAM, InvariantViolation, SolverConfig, run, seed_stream
from .trace import TRACE_FIELDS, write_trace

__all__ = ["main", "build_parser", "resolve_config"]

_PROBLEM_DEFAULTS = {
    "spca": {"kind": "spca", "n": 50, "m": 500, "p": 5, "mu": 0.4, "data": None},
    "classify": {"kind": "classify", "m": 10, "N": 50000, "mu": 0.25, "sigma2": 1.0, "data": None},
}

_SOLVER_FIELDS = {
    "mars_admm": ("c_rho", "c_eta", "c_alpha", "c_beta", "beta1", "batch_size",
                  "max_iters", "obj_tol", "residual_check_every"),
    "rsubgrad": ("eta0", "batch_size", "max_iters", "obj_tol", "residual_check_every"),
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"error: {message}")


def _parse_seeds(text: str) -> list[int]:
    """'10' means seeds 0..9; '0,3,7' (any comma) means exactly those seeds."""
    text = text.strip()
    if "," in text:
        seeds = [int(tok) for tok in text.split(",") if tok.strip()]
    else:
        count = int(text)
        if count < 1:
            raise ValueError("seed count must be >= 1")
        seeds = list(range(count))
    if not seeds:
        raise ValueError("empty seed list")
    if any(s < 0 for s in seeds):
        raise ValueError("seeds must be nonnegative")
    return seeds


def _add_common_flags(sub):
    sub.add_argument("--config", help="JSON config file; flags override it")
    sub.add_argument("--seeds", help="count ('10' -> 0..9) or comma list ('0,3,7')")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    sub.add_argument("--figures", action="store_true", help="render figures after the run")
    sub.add_argument("--data", help="LIBSVM file instead of synthetic data")
    sub.add_argument("--max-iters", type=int, dest="max_iters")
    sub.add_argument("--obj-tol", type=float, dest="obj_tol")
    sub.add_argument("--batch", type=int, dest="batch_size")
    sub.add_argument("--residual-check-every", type=int, dest="residual_check_every")
    sub.add_argument("--c-rho", type=float, dest="c_rho")
    sub.add_argument("--c-eta", type=float, dest="c_eta")
    sub.add_argument("--c-alpha", type=float, dest="c_alpha")
    sub.add_argument("--c-beta", type=float, dest="c_beta")
    sub.add_argument("--beta1", type=float, dest="beta1")
    sub.add_argument("--eta0", type=float, dest="eta0")


def _add_spca_flags(sub):
    sub.add_argument("--n", type=int, help="ambient dimension (rows of the data matrix)")
    sub.add_argument("--m", type=int, help="number of samples (columns)")
    sub.add_argument("--p", type=int, help="number of components")
    sub.add_argument("--mu", type=float, help="l1 weight")


def _add_classify_flags(sub):
    sub.add_argument("--m", type=int, help="feature dimension")
    sub.add_argument("--N", type=int, help="number of samples")
    sub.add_argument("--mu", type=float, help="l1 weight")
    sub.add_argument("--sigma2", type=float, help="label noise variance")


def build_parser() -> _Parser:
    parser = _Parser(prog="marsadmm", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("spca", help="sparse PCA benchmark")
    _add_spca_flags(sp)
    sp.add_argument("--solver", choices=("mars_admm", "rsubgrad"), default=None)
    _add_common_flags(sp)

    cl = subs.add_parser("classify", help="sphere-constrained classifier benchmark")
    _add_classify_flags(cl)
    cl.add_argument("--solver", choices=("mars_admm", "rsubgrad"), default=None)
    _add_common_flags(cl)

    cp = subs.add_parser("compare", help="ADMM vs subgradient, target-objective stopping")
    cp.add_argument("--problem", choices=("spca", "classify"), default="spca")
    _add_spca_flags(cp)
    cp.add_argument("--N", type=int, help="number of samples (classify)")
    cp.add_argument("--sigma2", type=float, help="label noise variance (classify)")
    _add_common_flags(cp)

    ck = subs.add_parser("check", help="run the invariant battery")
    ck.add_argument("--seed", type=int, default=0)

    rp = subs.add_parser("report", help="render figures for a run directory")
    rp.add_argument("run_dir")
    rp.add_argument("--out", help="figure output directory (default: run_dir)")
    return parser


def _merge_section(defaults: dict, config_section: dict, section: str) -> dict:
    merged = dict(defaults)
    for key, value in config_section.items():
        if key == "kind":
            continue
        if key not in merged:
            raise ValueError(f"unknown {section} config key: {key!r}")
        merged[key] = value
    return merged


def resolve_config(args: argparse.Namespace) -> dict:
    """Fold defaults, the JSON config file, and flags into one resolved dict."""
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - {"problem", "solver", "seeds", "output_dir", "jobs"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

    if args.command == "compare":
        problem_kind = args.problem
        if "problem" in file_cfg and "kind" in file_cfg["problem"]:
            # an explicit --problem flag beats the file
            if "--problem" not in sys.argv:
                problem_kind = file_cfg["problem"]["kind"]
    else:
        problem_kind = args.command
        file_kind = file_cfg.get("problem", {}).get("kind", problem_kind)
        if file_kind != problem_kind:
            raise ValueError(f"config problem kind {file_kind!r} does not match subcommand")

    problem = _merge_section(_PROBLEM_DEFAULTS[problem_kind],
                             file_cfg.get("problem", {}), "problem")
    for key in problem:
        if key != "kind" and getattr(args, key, None) is not None:
            problem[key] = getattr(args, key)
    if problem["mu"] < 0:
        raise ValueError("mu must be nonnegative")

    solver_kind = file_cfg.get("solver", {}).get("kind", "mars_admm")
    if getattr(args, "solver", None):
        solver_kind = args.solver
    if args.command == "compare":
        solver_kind = "mars_admm"  # compare always runs both; baseline flags still apply

    solvers = {}
    kinds = ("mars_admm", "rsubgrad") if args.command == "compare" else (solver_kind,)
    for kind in kinds:
        defaults = {f: getattr(SolverConfig() if kind == "mars_admm" else SubgradConfig(), f)
                    for f in _SOLVER_FIELDS[kind]}
        section = file_cfg.get("solver", {})
        section = {k: v for k, v in section.items() if k in defaults or k == "kind"}
        merged = _merge_section(defaults, section, "solver")
        for f in _SOLVER_FIELDS[kind]:
            if getattr(args, f, None) is not None:
                merged[f] = getattr(args, f)
        solvers[kind] = merged

    seeds = file_cfg.get("seeds", [0])
    if getattr(args, "seeds", None):
        seeds = _parse_seeds(args.seeds)
    if not isinstance(seeds, list) or not seeds:
        raise ValueError("seeds must be a nonempty list")
    seeds = [int(s) for s in seeds]

    out = file_cfg.get("output_dir", f"runs/{args.command}")
    if getattr(args, "out", None):
        out = args.out

    jobs = file_cfg.get("jobs", None)
    if getattr(args, "jobs", None) is not None:
        jobs = args.jobs
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ValueError("jobs must be >= 1")

    return {
        "command": args.command,
        "problem": problem,
        "solvers": solvers,
        "seeds": seeds,
        "output_dir": out,
        "jobs": int(jobs),
        "figures": bool(getattr(args, "figures", False)),
    }


def _build_problem(problem_cfg: dict, seed: int):
    """Construct the composite problem for one seed (data stream derives here)."""
    kind = problem_cfg["kind"]
    if problem_cfg.get("data"):
        dataset = parse_libsvm(Path(problem_cfg["data"]).read_text(encoding="utf-8"))
        if kind == "spca":
            return make_spca(dataset.features.T, problem_cfg["mu"], problem_cfg["p"])
        return make_sphere_classifier(dataset.features, dataset.labels, problem_cfg["mu"])
    data_rng = seed_stream(seed, DATA_STREAM)
    if kind == "spca":
        dataset = gen_spca_data(problem_cfg["n"], problem_cfg["m"], data_rng)
        return make_spca(dataset.features, problem_cfg["mu"], problem_cfg["p"])
    dataset = gen_classifier_data(problem_cfg["m"], problem_cfg["N"],
                                  problem_cfg["sigma2"], data_rng)
    return make_sphere_classifier(dataset.features, dataset.labels, problem_cfg["mu"])


def _final_diag_row(trace):
    return trace[-1]


def _run_single(task: dict) -> dict:
    """Worker entry point: one (solver, seed) run; writes the trace CSV."""
    problem = _build_problem(task["problem"], task["seed"])
    kind = task["solver_kind"]
    params = task["solver"]
    if kind == "mars_admm":
        cfg = SolverConfig(seed=task["seed"], **params)
        trace = run(problem, cfg)
    else:
        cfg = SubgradConfig(seed=task["seed"], **params)
        trace = run_subgrad(problem, cfg, target_objective=task.get("target_objective"))
    label = task.get("label")
    name = f"trace_{label}_seed{task['seed']}.csv" if label else f"trace_seed{task['seed']}.csv"
    path = Path(task["out"]) / name
    write_trace(trace, path)
    last = _final_diag_row(trace)
    return {
        "solver": kind,
        "seed": task["seed"],
        "file": name,
        "final_objective": last.objective,
        "final_r_feas": last.r_feas,
        "final_r_grad": last.r_grad,
        "final_r_subdiff": last.r_subdiff,
        "wall_seconds": last.wall_seconds,
        "sfo_count": last.sfo_count,
        "diag_sfo": last.diag_sfo,
        "iters": last.iter,
    }


def _run_tasks(tasks: list[dict], jobs: int) -> list[dict]:
    if jobs == 1 or len(tasks) == 1:
        return [_run_single(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(_run_single, tasks))


_SUMMARY_STATS = ("final_objective", "final_r_feas", "final_r_grad",
                  "final_r_subdiff", "wall_seconds", "sfo_count")


def _write_summary(results: list[dict], out_dir: Path) -> None:
    header = ["solver", "n_seeds"]
    for stat in _SUMMARY_STATS:
        header += [f"{stat}_mean", f"{stat}_std"]
    rows = []
    for kind in sorted({r["solver"] for r in results}):
        batch = [r for r in results if r["solver"] == kind]
        row = [kind, len(batch)]
        for stat in _SUMMARY_STATS:
            vals = np.array([b[stat] for b in batch], dtype=float)
            row += [f"{vals.mean():.17g}", f"{vals.std(ddof=0):.17g}"]
        rows.append(row)
    with open(out_dir / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _version_string() -> str:
    from importlib import metadata

    try:
        base = metadata.version("marsadmm")
    except metadata.PackageNotFoundError:
        base = "unknown"
    try:
        described = subprocess.run(
            ["git", "-C", str(Path(__file__).resolve().parent), "describe",
             "--tags", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
        )
        if described.returncode == 0 and described.stdout.strip():
            return f"{base}+{described.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


def _write_metadata(resolved: dict, results: list[dict], out_dir: Path) -> None:
    doc = {
        "version": _version_string(),
        "config": {k: v for k, v in resolved.items() if k != "figures"},
        "runs": results,
    }
    with open(out_dir / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _cmd_run(resolved: dict) -> int:
    out_dir = Path(resolved["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (kind,) = resolved["solvers"].keys()
    tasks = [
        {
            "problem": resolved["problem"],
            "solver_kind": kind,
            "solver": resolved["solvers"][kind],
            "seed": seed,
            "out": str(out_dir),
            "label": None,
        }
        for seed in resolved["seeds"]
    ]
    results = _run_tasks(tasks, resolved["jobs"])
    _write_summary(results, out_dir)
    _write_metadata(resolved, results, out_dir)
    if resolved["figures"]:
        from .report import render_run_figures

        render_run_figures(out_dir)
    summary = {r["seed"]: r["final_objective"] for r in results}
    print(f"wrote {len(results)} trace(s) to {out_dir}; "
          f"final objective mean {np.mean(list(summary.values())):.6g}")
    return 0


def _cmd_compare(resolved: dict) -> int:
    out_dir = Path(resolved["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    admm_tasks = [
        {
            "problem": resolved["problem"],
            "solver_kind": "mars_admm",
            "solver": resolved["solvers"]["mars_admm"],
            "seed": seed,
            "out": str(out_dir),
            "label": "mars_admm",
        }
        for seed in resolved["seeds"]
    ]
    admm_results = _run_tasks(admm_tasks, resolved["jobs"])
    targets = {r["seed"]: r["final_objective"] for r in admm_results}
    base_tasks = [
        {
            "problem": resolved["problem"],
            "solver_kind": "rsubgrad",
            "solver": resolved["solvers"]["rsubgrad"],
            "seed": seed,
            "out": str(out_dir),
            "label": "rsubgrad",
            "target_objective": targets[seed],
        }
        for seed in resolved["seeds"]
    ]
    base_results = _run_tasks(base_tasks, resolved["jobs"])
    results = admm_results + base_results
    _write_summary(results, out_dir)
    _write_metadata(resolved, results, out_dir)
    if resolved["figures"]:
        from .report import render_run_figures

        render_run_figures(out_dir)
    reached = sum(1 for r in base_results if r["final_objective"] <= targets[r["seed"]])
    print(f"wrote {len(results)} trace(s) to {out_dir}; baseline reached the "
          f"ADMM objective in {reached}/{len(base_results)} seed(s)")
    return 0


def _cmd_check(seed: int) -> int:
    from . import checks

    failures = 0
    for name, ok, detail in checks.run_battery(seed):
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if detail and not ok:
            line += f"  ({detail})"
        print(line)
        failures += 0 if ok else 1
    print(f"{failures} failure(s)" if failures else "all checks passed")
    return 2 if failures else 0


def _cmd_report(args: argparse.Namespace) -> int:
    from .report import render_run_figures

    written = render_run_figures(args.run_dir, out_dir=args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return 0 if not exc.code else 1
    try:
        if args.command == "check":
            return _cmd_check(args.seed)
        if args.command == "report":
            return _cmd_report(args)
        resolved = resolve_config(args)
        if args.command == "compare":
            return _cmd_compare(resolved)
        return _cmd_run(resolved)
    except InvariantViolation as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
