"""Command-line front end.

    lorentzlab <curvature|scan-cx|killing|warped|geodesic> --spec FILE --out FILE
               [--point X ...] [--resolution N] [--seed N] [--samples N]
               [--csv FILE] [--timing]

Exit codes: 0 success, 1 analysis rejected, 2 input error, 3 numerical-domain error.
Reports are JSON with sorted keys; wall-clock timing is only included with
``--timing`` so that reruns are byte-identical by default.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .detectors import warped_criterion
from .errors import InputError, LorentzLabError, NumericalDomainError
from .geodesics import energy_drift, integrate_geodesic
from .killing import (
    combine,
    geodesic_orbit_residual,
    gram_matrices,
    killing_residual,
    lightlike_check,
    lightlike_killing_search,
)
from .metric import constant_curvature_residual, curvature_at, metric_at
from .scan import scan_cx, span_e
from .specfile import LoadedSpec, load_spec
from .tolerances import using

EXIT_OK, EXIT_REJECTED, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3
COMMANDS = ("curvature", "scan-cx", "killing", "warped", "geodesic")


class Outcome:
    def __init__(self, results: dict, parameters: dict, table: list[list] | None = None, rejected: bool = False):
        self.results = results
        self.parameters = parameters
        self.table = table
        self.rejected = rejected


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not np.isfinite(f):
            return str(f)
        return f
    return obj


def _point(spec: LoadedSpec, args) -> np.ndarray:
    if args.point is not None:
        p = np.array(args.point, dtype=float)
        if p.shape != (spec.metric.dim,):
            raise InputError(f"--point needs {spec.metric.dim} values")
        return p
    if spec.point is not None:
        return spec.point
    return spec.metric.center()


def _grid(spec: LoadedSpec, seed: int, count: int = 12) -> np.ndarray:
    if spec.grid is not None:
        return spec.grid
    rng = np.random.default_rng(seed)
    return spec.metric.sample_points(count, rng, shrink=0.8)


# ---------------------------------------------------------------------------
# commands


def cmd_curvature(spec: LoadedSpec, args) -> Outcome:
    p = _point(spec, args)
    spec.metric.require_in_box(p)
    metric_at(spec.metric, p)
    cb = curvature_at(spec.metric, p)
    results: dict = {
        "point": p,
        "metric": cb.g,
        "christoffel": cb.gamma,
        "riemann": cb.riemann,
        "ricci_scalar": float(np.einsum("ij,kikj->", cb.g_inv, cb.riemann)),
    }
    if spec.metric.dim >= 2:
        k_mean, spread = constant_curvature_residual(spec.metric, p, samples=args.samples, seed=args.seed, cb=cb)
        results.update(K_mean=k_mean, spread=spread)
    table = [["l", "i", "j", "k", "value"]]
    for idx in zip(*np.nonzero(np.abs(cb.riemann) > 1e-14)):
        table.append([*map(int, idx), float(cb.riemann[idx])])
    return Outcome(results, {"point": p, "samples": args.samples, "seed": args.seed}, table)


def cmd_scan_cx(spec: LoadedSpec, args) -> Outcome:
    p = _point(spec, args)
    spec.metric.require_in_box(p)
    rep = scan_cx(spec.metric, p, args.resolution)
    dim, basis = span_e(rep)
    results = rep.to_dict()
    results["span_basis"] = basis
    table = [["index"] + [f"angle{i}" for i in range(rep.grid_angles.shape[1])] + ["residual"]]
    for i, (a, r) in enumerate(zip(rep.grid_angles, rep.grid_residuals)):
        table.append([i, *map(float, a), float(r)])
    return Outcome(results, {"point": p, "resolution": args.resolution, "seed": args.seed}, table)


def cmd_killing(spec: LoadedSpec, args) -> Outcome:
    fields = list(spec.killing_basis or []) + list(spec.vector_fields)
    if not fields:
        raise InputError("killing needs a killing_basis or vector_fields in the spec file")
    grid = _grid(spec, args.seed)
    per_field = []
    all_killing = True
    for f in fields:
        res = killing_residual(spec.metric, f, grid)
        ok = res < spec.tolerances.killing_zero
        all_killing &= ok
        per_field.append({"name": f.name, "residual": res, "killing": ok, "lightlike": lightlike_check(spec.metric, f, grid)})
    results: dict = {"fields": per_field, "grid_size": len(grid)}
    table = [["field", "residual", "killing"]] + [[d["name"], d["residual"], d["killing"]] for d in per_field]
    if not all_killing:
        results["search"] = None
        results["note"] = "search skipped: some fields are not Killing on the grid"
        return Outcome(results, {"seed": args.seed, "trials": args.trials}, table, rejected=True)
    found = lightlike_killing_search(spec.metric, fields, grid, trials=args.trials, seed=args.seed)
    q = gram_matrices(spec.metric, fields, grid)
    vals = np.stack([f.values(grid) for f in fields], axis=1)
    out = []
    for c in found:
        v = np.einsum("a,pai->pi", c, vals)
        norms = np.linalg.norm(v, axis=1)
        field = combine(fields, c)
        orbit = max(
            (geodesic_orbit_residual(spec.metric, field, p) for p, nv in zip(grid, norms) if nv > 0), default=0.0
        )
        out.append(
            {
                "coefficients": c,
                "max_abs_gvv": float(np.max(np.abs(np.einsum("a,pab,b->p", c, q, c)))),
                "min_norm": float(norms.min()),
                "orbit_residual": orbit,
            }
        )
    results["search"] = out
    results["search_empty"] = not out
    return Outcome(results, {"seed": args.seed, "trials": args.trials}, table)


def cmd_warped(spec: LoadedSpec, args) -> Outcome:
    if spec.product is None:
        raise InputError("warped needs a product_split (or a warped/catalog metric)")
    if not spec.hypersurfaces:
        raise InputError("warped needs hypersurfaces")
    grid = _grid(spec, args.seed, count=6)
    hyps = [(im, at) if at is not None else im for im, at in spec.hypersurfaces]
    v = warped_criterion(spec.product, hyps, grid, tol=spec.tolerances, curvature_samples=args.samples, seed=args.seed)
    res = v.to_dict()
    table = [["check", "passed", "value"]]
    for key in ("base_geodesic", "fiber_umbilical", "holonomy_homothetic", "fiber_constant_curvature", "block_orthogonal"):
        table.append([key, res[key]["passed"], res[key]["value"]])
    for h in res["hypersurfaces"]:
        table.append([f"hypersurface:{h['name']}", h["passed"], h["value"]])
    return Outcome(res, {"seed": args.seed, "samples": args.samples, "grid": grid}, table, rejected=v.verdict == "not_warped")


def cmd_geodesic(spec: LoadedSpec, args) -> Outcome:
    geo = dict(spec.geodesic or {})
    n = spec.metric.dim
    for key in ("x0", "v0"):
        val = getattr(args, key)
        if val is not None:
            if len(val) != n:
                raise InputError(f"--{key} needs {n} values")
            geo[key] = np.array(val, dtype=float)
    if args.s_max is not None:
        geo["s_max"] = args.s_max
    if args.step is not None:
        geo["step"] = args.step
    if "x0" not in geo or "v0" not in geo or "s_max" not in geo:
        raise InputError("geodesic needs x0, v0 and s_max (spec file 'geodesic' section or flags)")
    spec.metric.require_in_box(geo["x0"])
    states = integrate_geodesic(spec.metric, geo["x0"], geo["v0"], geo["s_max"], geo.get("step"))
    drift = energy_drift(spec.metric, states)
    g0 = spec.metric.values(states[0].x)
    e0 = float(states[0].v @ g0 @ states[0].v)
    table = [["s"] + [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)]]
    for st in states:
        table.append([st.s, *map(float, st.x), *map(float, st.v)])
    results = {"end_x": states[-1].x, "end_v": states[-1].v, "energy": e0, "energy_drift": drift, "steps": len(states) - 1}
    params = {"x0": geo["x0"], "v0": geo["v0"], "s_max": geo["s_max"], "step": geo.get("step"), "seed": args.seed}
    return Outcome(results, params, table)


HANDLERS = {
    "curvature": cmd_curvature,
    "scan-cx": cmd_scan_cx,
    "killing": cmd_killing,
    "warped": cmd_warped,
    "geodesic": cmd_geodesic,
}


# ---------------------------------------------------------------------------
# plumbing


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_text(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lorentzlab", description="Numerical checks on Lorentz manifolds.")
    p.add_argument("--version", action="version", version=f"lorentzlab {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", required=True, help="manifold spec file (JSON)")
    p.add_argument("--out", required=True, help="report file (JSON)")
    p.add_argument("--point", type=float, nargs="+", help="chart point for curvature / scan-cx")
    p.add_argument("--resolution", type=int, default=32, help="scan-cx points per circle (>= 16)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200, help="random planes for curvature spreads")
    p.add_argument("--trials", type=int, default=64, help="random starts for the lightlike Killing search")
    p.add_argument("--x0", type=float, nargs="+")
    p.add_argument("--v0", type=float, nargs="+")
    p.add_argument("--s-max", dest="s_max", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--csv", help="also write a plot-ready CSV table")
    p.add_argument("--timing", action="store_true", help="include wall-clock timing (breaks byte-determinism)")
    return p


def _threads_from_env() -> int | None:
    raw = os.environ.get("LORENTZLAB_THREADS")
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"LORENTZLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"LORENTZLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse usage errors
        return EXIT_INPUT if e.code else EXIT_OK
    out = Path(args.out)
    report: dict = {"tool": "lorentzlab", "version": __version__, "analysis": args.command}
    start = time.perf_counter()
    code = EXIT_OK
    outcome = None
    try:
        threads = _threads_from_env()
        if args.resolution < 16:
            raise InputError("--resolution must be at least 16")
        if args.samples < 10:
            raise InputError("--samples must be at least 10")
        spec = load_spec(args.spec)
        report["input_digest"] = spec.digest
        with using(spec.tolerances):
            outcome = HANDLERS[args.command](spec, args)
        report["parameters"] = {**outcome.parameters, "threads": threads}
        report["tolerances"] = spec.tolerances.as_dict()
        report["results"] = outcome.results
        report["status"] = "rejected" if outcome.rejected else "ok"
        code = EXIT_REJECTED if outcome.rejected else EXIT_OK
    except FileNotFoundError as e:
        report.update(status="error", error={"type": "InputError", "message": f"cannot read spec file: {e.filename}"})
        code = EXIT_INPUT
    except InputError as e:
        report.update(status="error", error={"type": type(e).__name__, "message": str(e)})
        code = EXIT_INPUT
    except NumericalDomainError as e:
        report.update(status="error", error={"type": type(e).__name__, "message": str(e)})
        code = EXIT_DOMAIN
    except LorentzLabError as e:  # pragma: no cover - every library error is one of the two above
        report.update(status="error", error={"type": type(e).__name__, "message": str(e)})
        code = EXIT_INPUT
    if args.timing:
        report["timing"] = {"wall_seconds": time.perf_counter() - start}
    _write_atomic(out, _dump(report))
    if outcome is not None and outcome.table is not None and args.csv:
        _write_atomic(Path(args.csv), _csv_text(outcome.table))
    if code in (EXIT_INPUT, EXIT_DOMAIN):
        print(f"lorentzlab: {report['error']['type']}: {report['error']['message']}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
