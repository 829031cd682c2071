"""Command-line experiment runner.

Subcommands: critical-points, minimize, heteroclinic, graph, gamma, figure.
Traces and paths go to CSV, summaries to JSON.  Exit codes: 0 success,
2 usage error, 3 numerical non-convergence (with a FlowTrace dump).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .critical import NoCriticalPointsError, check_admissibility, find_critical_points
from .experiments import (
    DEFAULT_EPS,
    DEFAULT_NODES,
    ExperimentConfig,
    resolve_point,
    run_figure,
    run_minimization,
    triple_well_graph,
)
from .flow import NonFiniteObjectiveError
from .gamma import eval_I0, optimize_support
from .heteroclinic import (
    EscapeError,
    NotConvergedError,
    build_transition_graph,
    gradient_connection,
    hamiltonian_connection_adaptive,
)
from .potentials import get_potential


def _read_config(path: str) -> dict:
    """Flat key=value file; '#' starts a comment."""
    out = {}
    with open(path) as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Config file values fill in flags the user left at their defaults."""
    if not getattr(args, "config", None):
        return args
    cfg = _read_config(args.config)
    casts = {"eps": float, "nodes": int, "seed": int, "grid": int, "maxiter": int}
    for key, raw in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"unknown config key {key!r}")
        if getattr(args, attr) == _DEFAULTS.get(attr, object()):
            setattr(args, attr, casts.get(attr, str)(raw))
    return args


_DEFAULTS = {
    "potential": "triple-well",
    "eps": DEFAULT_EPS,
    "nodes": DEFAULT_NODES,
    "objective": "I",
    "out": ".",
    "seed": 0,
    "grid": 40,
    "maxiter": 30_000,
}


def _add_common(sp):
    sp.add_argument("--potential", default=_DEFAULTS["potential"])
    sp.add_argument("--out", default=_DEFAULTS["out"])
    sp.add_argument("--config", default=None, help="flat key=value config file")
    sp.add_argument("--seed", type=int, default=_DEFAULTS["seed"])


def _write_json(outdir, name, payload):
    os.makedirs(outdir, exist_ok=True)
    target = os.path.join(outdir, name)
    with open(target, "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    return target


def _parse_box(text: str, dim: int):
    vals = [float(v) for v in text.split(",")]
    if len(vals) == 2:
        return [(vals[0], vals[1])] * dim
    if len(vals) == 2 * dim:
        return [(vals[2 * i], vals[2 * i + 1]) for i in range(dim)]
    raise ValueError("box must be 'lo,hi' or per-axis 'lo1,hi1,lo2,hi2,...'")


def cmd_critical_points(args) -> int:
    p = get_potential(args.potential)
    box = _parse_box(args.box, p.dim)
    cps = find_critical_points(p, box, args.grid)
    report = check_admissibility(p, cps, args.radius)
    target = _write_json(args.out, "critical_points.json", json.loads(cps.to_json()))
    _write_json(
        args.out,
        "admissibility.json",
        {
            "finite": report.finite,
            "min_abs_eigenvalue": report.min_abs_eigenvalue,
            "coercivity_inf": report.coercivity_inf,
            "radius": report.radius,
            "admissible": report.admissible,
        },
    )
    print(target)
    return 0


def cmd_minimize(args) -> int:
    p = get_potential(args.potential)
    waypoints = []
    if args.start:
        waypoints.append(resolve_point(args.start, p))
    for tok in (args.waypoints.split(";") if args.waypoints else []):
        waypoints.append(resolve_point(tok, p))
    if args.end:
        waypoints.append(resolve_point(args.end, p))
    if len(waypoints) < 2:
        raise ValueError("need --from and --to (plus optional --waypoints)")
    schedule = [float(v) for v in args.continuation.split(",")] if args.continuation else None
    path, trace, report = run_minimization(
        p,
        waypoints,
        args.nodes,
        args.eps,
        args.objective,
        max_iter=args.maxiter,
        eps_schedule=schedule,
        jitter=args.jitter,
        seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    path.write_csv(os.path.join(args.out, "path.csv"))
    trace.write_csv(os.path.join(args.out, "trace.csv"))
    target = _write_json(
        args.out,
        "minimize_summary.json",
        {
            "objective": args.objective,
            "eps": args.eps,
            "nodes": args.nodes,
            "seed": args.seed,
            "report": report.to_dict(),
            "converged": trace.converged,
            "stop_reason": trace.stop_reason,
        },
    )
    print(target)
    return 0


def cmd_heteroclinic(args) -> int:
    p = get_potential(args.potential)
    box = _parse_box(args.box, p.dim)
    cps = find_critical_points(p, box, args.grid)
    i, d = cps.nearest(resolve_point(args.start, p))
    if d > 1e-6:
        raise ValueError(f"--from must name a critical point (nearest is {d:.2g} away)")
    src = cps[i]
    os.makedirs(args.out, exist_ok=True)
    if args.hamiltonian:
        j, d = cps.nearest(resolve_point(args.end, p))
        if d > 1e-6:
            raise ValueError("--to must name a critical point")
        wp = [resolve_point(t, p) for t in args.waypoints.split(";")] if args.waypoints else None
        orbit = hamiltonian_connection_adaptive(p, src, cps[j], M=args.nodes, waypoints=wp)
    else:
        eigval, eigvec = np.linalg.eigh(p.hessian(src.location))
        mode = int(np.argmin(eigval))
        orbit = gradient_connection(p, src, eigvec[:, mode], args.sign, cps, n_nodes=args.nodes)
    orbit.path.write_csv(os.path.join(args.out, "orbit.csv"))
    target = _write_json(
        args.out,
        "orbit_summary.json",
        {
            "kind": orbit.kind,
            "J": orbit.j_value,
            "source": orbit.source.to_dict(),
            "target": orbit.target.to_dict(),
            "energy_residual": orbit.energy_residual,
            "zero_energy_residual": orbit.zero_energy_residual,
            "gradient_residual": orbit.gradient_residual,
            "el_residual": orbit.el_residual,
        },
    )
    print(target)
    return 0


def cmd_graph(args) -> int:
    p = get_potential(args.potential)
    box = _parse_box(args.box, p.dim)
    cps = find_critical_points(p, box, args.grid)
    pairs = []
    for spec in args.hamiltonian.split(";") if args.hamiltonian else []:
        x, y = spec.split(":")
        i, _ = cps.nearest(resolve_point(x, p))
        j, _ = cps.nearest(resolve_point(y, p))
        pairs.append((i, j))
    graph = build_transition_graph(p, cps, hamiltonian_pairs=pairs, ham_M=args.nodes)
    os.makedirs(args.out, exist_ok=True)
    target = os.path.join(args.out, "transition_graph.json")
    with open(target, "w") as f:
        f.write(graph.to_json())
        f.write("\n")
    print(target)
    return 0


def cmd_gamma(args) -> int:
    p = get_potential(args.potential)
    graph = triple_well_graph(p, ham_M=args.nodes)
    tokens = args.route.split(",")
    seq = []
    for tok in tokens:
        i, d = graph.cps.nearest(resolve_point(tok, p))
        if d > 1e-6:
            raise ValueError(f"route entry {tok!r} is not a critical point")
        seq.append(graph.cps[i])
    bv = optimize_support(graph, seq[0], seq[-1], seq)
    report = eval_I0(graph, bv)
    target = _write_json(
        args.out,
        "gamma_summary.json",
        {"route": tokens, "bv_path": bv.to_dict(), "report": report.to_dict()},
    )
    print(target)
    return 0


def cmd_figure(args) -> int:
    cfg = ExperimentConfig(
        potential=args.potential,
        eps=args.eps,
        nodes=args.nodes,
        out=args.out,
        seed=args.seed,
        max_iter=args.maxiter,
    )
    if args.number == "all":
        numbers = list(range(1, 10))
    else:
        numbers = [int(args.number)]
    if len(numbers) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            futures = []
            for n in numbers:
                sub = ExperimentConfig(**{**cfg.__dict__, "out": os.path.join(args.out, f"figure{n}")})
                futures.append(ex.submit(run_figure, n, sub))
            for fut in futures:
                fut.result()
    else:
        for n in numbers:
            sub = ExperimentConfig(**{**cfg.__dict__, "out": os.path.join(args.out, f"figure{n}")})
            run_figure(n, sub)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ompath",
        description="Most-probable transition paths: action minimization and its small-temperature limit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("critical-points", help="locate and classify critical points")
    _add_common(sp)
    sp.add_argument("--box", default="-0.5,1.5")
    sp.add_argument("--grid", type=int, default=_DEFAULTS["grid"])
    sp.add_argument("--radius", type=float, default=3.0)
    sp.set_defaults(func=cmd_critical_points)

    sp = sub.add_parser("minimize", help="descend the action from a waypoint start")
    _add_common(sp)
    sp.add_argument("--eps", type=float, default=_DEFAULTS["eps"])
    sp.add_argument("--nodes", type=int, default=_DEFAULTS["nodes"])
    sp.add_argument("--from", dest="start", default="")
    sp.add_argument("--to", dest="end", default="")
    sp.add_argument("--waypoints", default="", help="semicolon-separated intermediate points")
    sp.add_argument("--objective", choices=["I", "J"], default=_DEFAULTS["objective"])
    sp.add_argument("--continuation", default="", help="comma-separated decreasing eps schedule")
    sp.add_argument("--maxiter", type=int, default=_DEFAULTS["maxiter"])
    sp.add_argument("--jitter", type=float, default=0.0)
    sp.set_defaults(func=cmd_minimize)

    sp = sub.add_parser("heteroclinic", help="compute a heteroclinic connection")
    _add_common(sp)
    sp.add_argument("--from", dest="start", required=True)
    sp.add_argument("--to", dest="end", default="")
    sp.add_argument("--sign", type=int, choices=[-1, 1], default=1)
    sp.add_argument("--hamiltonian", action="store_true")
    sp.add_argument("--waypoints", default="")
    sp.add_argument("--nodes", type=int, default=_DEFAULTS["nodes"])
    sp.add_argument("--box", default="-0.5,1.5")
    sp.add_argument("--grid", type=int, default=_DEFAULTS["grid"])
    sp.set_defaults(func=cmd_heteroclinic)

    sp = sub.add_parser("graph", help="build the transition graph")
    _add_common(sp)
    sp.add_argument("--box", default="-0.5,1.5")
    sp.add_argument("--grid", type=int, default=_DEFAULTS["grid"])
    sp.add_argument("--hamiltonian", default="", help="extra saddle pairs, e.g. 'S1:S2'")
    sp.add_argument("--nodes", type=int, default=_DEFAULTS["nodes"])
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("gamma", help="evaluate the limit functional on a route")
    _add_common(sp)
    sp.add_argument("--route", required=True, help="comma-separated critical points, e.g. S1,M0,S2")
    sp.add_argument("--nodes", type=int, default=_DEFAULTS["nodes"])
    sp.set_defaults(func=cmd_gamma)

    sp = sub.add_parser("figure", help="reproduce the data behind one figure (1..9)")
    _add_common(sp)
    sp.add_argument("number", help="figure number 1..9 or 'all'")
    sp.add_argument("--eps", type=float, default=_DEFAULTS["eps"])
    sp.add_argument("--nodes", type=int, default=_DEFAULTS["nodes"])
    sp.add_argument("--maxiter", type=int, default=_DEFAULTS["maxiter"])
    sp.add_argument("--jobs", type=int, default=1, help="parallel workers for 'all'")
    sp.set_defaults(func=cmd_figure)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args = _apply_config(args)
        return args.func(args)
    except (ValueError, NoCriticalPointsError, EscapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotConvergedError, NonFiniteObjectiveError) as exc:
        diag = {"error": str(exc), "diagnostics": getattr(exc, "diagnostics", {})}
        out = getattr(args, "out", ".")
        try:
            _write_json(out, "failure.json", diag)
        except OSError:
            pass
        print(json.dumps(diag), file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
