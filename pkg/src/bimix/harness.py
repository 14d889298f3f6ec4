"""Command-line entry point: argument parsing, config files and JSON/CSV output."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from enum import Enum
from pathlib import Path

import numpy as np

from . import convergence, effective, expansion, geometry, graphs, oracle, validation
from .interactions import MixtureParams

SCHEMA = 1
EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Parser whose errors exit with status 1 and print usage."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# output helpers

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def dumps_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def rows_to_csv(rows: list[dict], header=None) -> str:
    buf = io.StringIO()
    cols = list(header) if header else (list(rows[0]) if rows else [])
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# config handling

def read_config(path: str) -> dict[str, str]:
    """Parse a flat key=value file; '#' starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise UsageError(f"{path}:{lineno}: empty key")
        cfg[key.replace("-", "_")] = val
    return cfg


def _merge_config(args, parser_actions: dict, cfg: dict[str, str]):
    """Fill unset flags from the config file; flags given on the command line win."""
    for key, val in cfg.items():
        if key not in parser_actions:
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key, None) is not None:
            continue
        action = parser_actions[key]
        try:
            conv = action.type(val) if action.type else val
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for config key {key!r}: {val!r}") from exc
        if action.choices and conv not in action.choices:
            raise UsageError(f"bad value for config key {key!r}: {val!r}")
        setattr(args, key, conv)


# ---------------------------------------------------------------------------
# parameter plumbing

PARAM_DEFAULTS = {"R": 1.0, "r": 0.1, "zR": 0.0, "zr": 0.0, "model": "penetrable"}


def _params(args, **over) -> MixtureParams:
    vals = {k: (getattr(args, k, None) if getattr(args, k, None) is not None else v)
            for k, v in PARAM_DEFAULTS.items()}
    vals.update(over)
    box = None
    if getattr(args, "L", None) is not None:
        box = geometry.BoxSpec(args.L, getattr(args, "boundary", None) or "periodic")
    return MixtureParams(vals["R"], vals["r"], vals["zR"], vals["zr"], model=vals["model"], box=box)


def _opt(args, name, default):
    v = getattr(args, name, None)
    return default if v is None else v


def _seed(args, default=0) -> int:
    return _opt(args, "seed", default)


def _parse_range(spec: str) -> np.ndarray:
    """'lo:hi:n' (inclusive, n points) or a comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be lo:hi:n, got {spec!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise UsageError("range needs n >= 1")
        return np.linspace(lo, hi, n)
    return np.array([float(s) for s in spec.split(",") if s.strip()])


def _parse_points(spec: str) -> np.ndarray:
    """'x,y,z;x,y,z;...' into an (n, d) array."""
    try:
        pts = np.array([[float(c) for c in p.split(",")] for p in spec.split(";") if p.strip()])
    except ValueError as exc:
        raise UsageError(f"cannot parse points {spec!r}") from exc
    if pts.ndim != 2:
        raise UsageError("points must all have the same dimension")
    return pts


def simplex_points(k: int, side: float) -> np.ndarray:
    """Vertices of a regular (k-1)-simplex with the given edge length, embedded in R^3 (k <= 4)."""
    if not 1 <= k <= 4:
        raise UsageError("regular placement available for 1 <= k <= 4 in three dimensions")
    E = np.eye(k) * side / math.sqrt(2.0)
    E -= E.mean(axis=0)
    # rotate the (k-1)-dimensional affine hull into the first coordinates
    _, _, vt = np.linalg.svd(E)
    P = E @ vt[: max(k - 1, 1)].T
    out = np.zeros((k, 3))
    out[:, : P.shape[1]] = P
    return out


# ---------------------------------------------------------------------------
# subcommand handlers; each returns (payload dict or text, exit code)

def cmd_geometry(args):
    what = args.what
    if what == "lens":
        return {"rho": args.rho, "dist": args.dist, "volume": geometry.lens_volume(args.rho, args.dist)}, EXIT_OK
    if what == "corona":
        p = _params(args)
        return {"R": p.R, "r": p.r, "corona_volume": geometry.corona_volume(p.R, p.r),
                "shell_fraction": geometry.shell_fraction(p.r / p.R)}, EXIT_OK
    # intersect
    if not args.centers:
        raise UsageError("geometry intersect needs --centers")
    pts = _parse_points(args.centers)
    radius = _opt(args, "radius", 1.0)
    samples = _opt(args, "samples", 200_000)
    est = geometry.k_intersection_volume([geometry.BallSpec(c, radius) for c in pts], samples, _seed(args))
    out = {"centers": pts, "radius": radius, "volume": est.value, "stderr": est.stderr,
           "samples": est.n, "seed": _seed(args)}
    if len(pts) == 2:
        out["exact"] = geometry.lens_volume(radius, float(np.linalg.norm(pts[0] - pts[1])))
    return out, EXIT_OK


def cmd_graphs(args):
    n = args.n
    if args.what == "partition-check":
        if n is None:
            raise UsageError("graphs partition-check needs --n")
        rep = graphs.partition_check(n)
        return {"n": n, **rep}, (EXIT_OK if rep["passed"] else EXIT_VIOLATION)
    cls = _opt(args, "cls", "connected")
    if cls in ("connected", "trees"):
        if n is None:
            raise UsageError("graphs count needs --n")
        fn = graphs.enumerate_connected if cls == "connected" else graphs.enumerate_trees
        return {"class": cls, "n": n, "count": len(fn(n))}, EXIT_OK
    m, r = args.m, args.r_clouds
    if m is None or r is None:
        raise UsageError(f"class {cls} needs --m and --r")
    gs = graphs.enumerate_bipartite_star(m, r, connected_only=True, trees_only=(cls == "star-trees"))
    return {"class": cls, "m": m, "r": r, "count": len(gs)}, EXIT_OK


def cmd_effective(args):
    p = _params(args)
    samples = _opt(args, "samples", 100_000)
    if args.what == "zhat":
        res = effective.zhat(p, mode=args.mode, truncation=args.truncation, samples=samples, seed=_seed(args))
        return {"params": _param_dict(p), **res.to_dict(), "seed": _seed(args), "samples": samples}, EXIT_OK
    k = _opt(args, "k", 2)
    if args.centers:
        xs = _parse_points(args.centers)
    else:
        if args.dist is None:
            raise UsageError("effective w needs --dist or --centers")
        xs = simplex_points(k, args.dist)
    if len(xs) < 2:
        raise UsageError("W needs at least two spheres")
    if p.model.value == "penetrable" and args.mode != "cloud_series":
        w = effective.w_J_penetrable(xs, p, samples, _seed(args))
        how = "exact_volume" if w.samples == 0 else "mc_volume"
    else:
        w = effective.w_J_cloud_series(xs, p, args.truncation, samples, _seed(args))
        how = "cloud_series"
    return {"params": _param_dict(p), "centers": xs, **w.to_dict(), "method": how, "seed": _seed(args)}, EXIT_OK


def _param_dict(p: MixtureParams) -> dict:
    return {"R": p.R, "r": p.r, "zR": p.z_R, "zr": p.z_r, "model": p.model.value,
            "L": p.box.L if p.box else None}


def cmd_coeff(args):
    p = _params(args)
    samples = _opt(args, "samples", 200_000)
    m = _opt(args, "m", 2)
    if args.derivative:
        c = expansion.db_m_dzr(m, p, samples, _seed(args), method=_opt(args, "method", "hypergraph"))
    else:
        c = expansion.b_m(m, p, samples, _seed(args), method=_opt(args, "method", "partition"))
    out = {"params": _param_dict(p), **c.to_dict(), "derivative": bool(args.derivative)}
    if m == 2 and p.model.value == "penetrable":
        out["quadrature"] = expansion.db2_quadrature(p) if args.derivative else expansion.b2_quadrature(p)
    return out, EXIT_OK


def _series_payload(name, res, p, args):
    return {"quantity": name, "params": _param_dict(p), "zhat": effective.zhat(p).value,
            "seed": _seed(args), **res.to_dict()}


def _series_rows(name, res):
    head = [{"quantity": name, "m": "offset", "value": res.offset, "stderr": 0.0}] if res.offset else []
    return head + [{"quantity": name, "m": m, "value": v, "stderr": s} for m, v, s in res.terms] + \
           [{"quantity": name, "m": "total", "value": res.total, "stderr": res.total_stderr}]


def _run_series(args, names):
    p = _params(args)
    M = _opt(args, "M", 3)
    samples = args.samples
    coeffs = expansion.coefficients(p, M, samples, _seed(args))
    results = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", expansion.CriterionWarning)
        for name in names:
            if name == "pressure":
                results[name] = expansion.pressure_series(p, M, seed=_seed(args), force=True, coeffs=coeffs)
            elif name == "rho_R":
                results[name] = expansion.rho_R(p, M, seed=_seed(args), force=True, coeffs=coeffs)
            elif name == "rho_r" and p.model.value == "penetrable":
                d = expansion.coefficients(p, M, samples, _seed(args), derivative=True)
                results[name] = expansion.rho_r(p, M, seed=_seed(args), force=True, coeffs=coeffs, dcoeffs=d)
    inside = all(r.criterion_satisfied for r in results.values())
    code = EXIT_OK if inside or args.force else EXIT_VIOLATION
    if _opt(args, "format", "json") == "csv":
        rows = [row for n, r in results.items() for row in _series_rows(n, r)]
        return rows_to_csv(rows, ("quantity", "m", "value", "stderr")), code
    if not inside:
        warnings.warn("activities outside the proven convergence region", expansion.CriterionWarning)
    payload = {n: _series_payload(n, r, p, args) for n, r in results.items()}
    payload["criterion_satisfied"] = inside
    return payload, code


def cmd_pressure(args):
    return _run_series(args, ["pressure"])


def cmd_density(args):
    return _run_series(args, ["rho_R", "rho_r"])


def _parse_params_kv(spec: str | None) -> dict:
    if not spec:
        return {}
    out = {}
    for part in spec.split(","):
        if "=" not in part:
            raise UsageError(f"--params expects key=value pairs, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_convergence(args):
    if args.what == "sweep":
        zr = _parse_range(_opt(args, "zr_range", "0:0.2:41"))
        Rs = _parse_range(_opt(args, "R_list", "1.0"))
        rs = _parse_range(_opt(args, "r_list", "0.1"))
        crit = tuple(s.strip() for s in _opt(args, "criteria", "easy,kp").split(","))
        rows = convergence.region_sweep(zr, Rs, rs, crit)
        if _opt(args, "format", "csv") == "json":
            return {"rows": rows}, EXIT_OK
        return convergence.sweep_csv(rows), EXIT_OK
    # check
    kv = _parse_params_kv(args.params)
    for k, v in kv.items():
        if k not in ("R", "r", "zR", "zr", "zhat", "model", "a", "A", "b", "c"):
            raise UsageError(f"unknown parameter {k!r} in --params")
        if getattr(args, k, None) is None:
            setattr(args, k, v if k == "model" else float(v))
    p = _params(args)
    crit = convergence.Criterion(_opt(args, "criterion", "easy"))
    if crit is convergence.Criterion.SUFF_HS:
        try:
            # the precondition does not depend on zhat; test it before computing the activity
            convergence.witness_search_hs(p, 0.0)
        except convergence.PreconditionError as exc:
            return {"criterion": crit.value, "satisfied": False, "error": str(exc),
                    "params": _param_dict(p)}, EXIT_VIOLATION
    zh = args.zhat if args.zhat is not None else effective.zhat(p).value
    if crit is convergence.Criterion.EASY:
        w = convergence.check_easy(p, zh)
    elif crit in (convergence.Criterion.KP, convergence.Criterion.KP_BOUND):
        if args.a is None or args.A is None:
            kp = convergence.max_zR_kp(p)
            w = convergence.ConvergenceWitness(crit, {}, p.z_R <= kp, admissible_zR=kp)
        else:
            w = convergence.check_kp_u1u2(p, args.a, args.A)
    elif crit is convergence.Criterion.THM_COL1:
        if args.a is None or args.A is None:
            raise UsageError("thm_col1 needs --a and --A")
        w = convergence.check_col1(p, zh, args.a, args.A)
    elif crit in (convergence.Criterion.HS, convergence.Criterion.HSPER):
        if None in (args.a, args.b, args.c):
            raise UsageError(f"{crit.value} needs --a, --b and --c")
        w = convergence.check_hs(p, zh, args.a, args.b, args.c, strict=crit is convergence.Criterion.HS)
    elif crit is convergence.Criterion.SUFF_HS:
        try:
            w = convergence.witness_search_hs(p, zh)
        except convergence.PreconditionError as exc:
            return {"criterion": crit.value, "satisfied": False, "error": str(exc),
                    "params": _param_dict(p), "zhat": zh}, EXIT_VIOLATION
    else:
        b = convergence.pair_criterion_bound(p)
        w = convergence.ConvergenceWitness(crit, {}, zh <= b["zhat"], b["zhat"], b["zR"], b)
    out = {"params": _param_dict(p), "zhat": zh, **w.to_dict()}
    return out, (EXIT_OK if w.satisfied else EXIT_VIOLATION)


def cmd_validate(args):
    if args.what == "oracle":
        ok, detail = validation.check_desk(
            seed=_seed(args, 42), samples=_opt(args, "samples", 100_000),
            L=_opt(args, "L", validation.DESK["L"]), zr=_opt(args, "zr", validation.DESK["zr"]),
            zR=_opt(args, "zR", validation.DESK["zR"]), N1_max=_opt(args, "n1max", 6),
            N2_max=_opt(args, "n2max", 40), workers=_opt(args, "workers", 1))
        return {"check": "oracle", "passed": ok, "seed": _seed(args, 42), **detail}, \
            (EXIT_OK if ok else EXIT_VIOLATION)
    only = None
    if args.only:
        only = {int(s) for s in args.only.split(",")}
    cfg = {k: getattr(args, k) for k in ("L", "zr", "zR", "seed", "samples") if getattr(args, k, None) is not None}
    results = validation.validate_all(cfg, only)
    ok = all(r.passed for r in results)
    return {"passed": ok, "seed": cfg.get("seed"), "criteria": [r.to_dict() for r in results]}, \
        (EXIT_OK if ok else EXIT_VIOLATION)


HANDLERS = {"geometry": cmd_geometry, "graphs": cmd_graphs, "effective": cmd_effective, "coeff": cmd_coeff,
            "pressure": cmd_pressure, "density": cmd_density, "convergence": cmd_convergence,
            "validate": cmd_validate}


# ---------------------------------------------------------------------------
# parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", default=None, help="flat key=value file; flags override it")
    g.add_argument("--out", default=None, help="output path (default stdout)")
    g.add_argument("--format", choices=("json", "csv"), default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--workers", type=int, default=None)
    return p


def _mixture(p: argparse.ArgumentParser, box: bool = False):
    p.add_argument("--model", choices=("penetrable", "colloid"), default=None)
    p.add_argument("--R", type=float, default=None, help="large radius (default 1)")
    p.add_argument("--r", type=float, default=None, help="small radius (default 0.1)")
    p.add_argument("--zR", type=float, default=None, help="large-sphere activity")
    p.add_argument("--zr", type=float, default=None, help="small-sphere activity")
    if box:
        p.add_argument("--L", type=float, default=None, help="periodic box side")
        p.add_argument("--boundary", choices=("periodic", "free"), default=None)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="bimix", description="Cluster expansion tools for binary sphere mixtures.")
    sub = top.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    g = sub.add_parser("geometry", parents=[common], help="sphere intersection volumes")
    g.add_argument("what", choices=("lens", "intersect", "corona"))
    g.add_argument("--rho", type=float, default=None)
    g.add_argument("--dist", type=float, default=None)
    g.add_argument("--centers", default=None, help="x,y,z;x,y,z;...")
    g.add_argument("--radius", type=float, default=None)
    g.add_argument("--samples", type=int, default=None)
    _mixture(g)

    gr = sub.add_parser("graphs", parents=[common], help="graph enumeration and checks")
    gr.add_argument("what", choices=("count", "partition-check"))
    gr.add_argument("--n", type=int, default=None)
    gr.add_argument("--class", dest="cls", choices=("connected", "trees", "star-connected", "star-trees"),
                    default=None)
    gr.add_argument("--m", type=int, default=None)
    gr.add_argument("--r", dest="r_clouds", type=int, default=None, help="number of cloud vertices")

    e = sub.add_parser("effective", parents=[common], help="effective activity and potentials")
    e.add_argument("what", choices=("zhat", "w"))
    _mixture(e, box=True)
    e.add_argument("--mode", choices=[m.value for m in effective.ActivityMode] + ["cloud_series"], default=None)
    e.add_argument("--truncation", type=int, default=None)
    e.add_argument("--samples", type=int, default=None)
    e.add_argument("--k", type=int, default=None, help="number of large spheres (regular placement)")
    e.add_argument("--dist", type=float, default=None, help="center spacing for the regular placement")
    e.add_argument("--centers", default=None, help="explicit centers x,y,z;x,y,z;...")

    c = sub.add_parser("coeff", parents=[common], help="cluster coefficients")
    c.add_argument("what", choices=("bm",))
    c.add_argument("--m", type=int, default=None)
    c.add_argument("--samples", type=int, default=None)
    c.add_argument("--method", choices=("partition", "hypergraph"), default=None)
    c.add_argument("--derivative", action="store_true", help="z_r-derivative instead of the coefficient")
    _mixture(c)

    for name in ("pressure", "density"):
        s = sub.add_parser(name, parents=[common], help=f"{name} series")
        _mixture(s)
        s.add_argument("--M", type=int, default=None, help="truncation order (default 3)")
        s.add_argument("--samples", type=int, default=None)
        s.add_argument("--force", action="store_true", help="exit 0 even outside the convergence region")

    cv = sub.add_parser("convergence", parents=[common], help="convergence criteria")
    cv.add_argument("what", choices=("check", "sweep"))
    _mixture(cv)
    cv.add_argument("--criterion", choices=[x.value for x in convergence.Criterion], default=None)
    cv.add_argument("--params", default=None, help="key=value,... overlay (R, r, zR, zr, zhat, a, A, b, c)")
    cv.add_argument("--zhat", type=float, default=None)
    for k in ("a", "A", "b", "c"):
        cv.add_argument(f"--{k}", type=float, default=None)
    cv.add_argument("--zr-range", dest="zr_range", default=None, help="sweep: lo:hi:n or list")
    cv.add_argument("--R-list", dest="R_list", default=None)
    cv.add_argument("--r-list", dest="r_list", default=None)
    cv.add_argument("--criteria", default=None)

    v = sub.add_parser("validate", parents=[common], help="oracle comparison and acceptance battery")
    v.add_argument("what", choices=("oracle", "all"))
    v.add_argument("--L", type=float, default=None)
    v.add_argument("--zr", type=float, default=None)
    v.add_argument("--zR", type=float, default=None)
    v.add_argument("--n1max", type=int, default=None)
    v.add_argument("--n2max", type=int, default=None)
    v.add_argument("--samples", type=int, default=None)
    v.add_argument("--only", default=None, help="comma list of criterion ids")
    return top


def _preprocess(argv: list[str]) -> list[str]:
    # the sweep takes --zr as a range; route it to the range option
    if len(argv) >= 2 and argv[0] == "convergence" and argv[1] == "sweep":
        return ["--zr-range" if a == "--zr" else a for a in argv]
    return argv


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_preprocess(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            subparser = parser._subparsers._group_actions[0].choices[args.command]
            actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
            _merge_config(args, actions, read_config(args.config))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result, code = HANDLERS[args.command](args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bimix: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # any failure inside a command is reported, not traced
        print(f"bimix: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if isinstance(result, str):
        _emit(result, args.out)
    else:
        payload = {"schema": SCHEMA, "command": args.command, **result}
        payload.setdefault("seed", getattr(args, "seed", None))
        if _opt(args, "format", "json") == "csv" and not isinstance(result, str):
            rows = [{k: v for k, v in payload.items() if not isinstance(v, (dict, list))}]
            _emit(rows_to_csv(rows), args.out)
        else:
            _emit(dumps_json(payload), args.out)
    return code


def main():
    sys.exit(run())
