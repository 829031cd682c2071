"""Named configurations for the triple-well figure experiments.

Each figure runner writes CSV traces/paths and a JSON summary into an output
directory and returns the summary dict.  Plotting is left to whatever
consumes the CSV files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .critical import CriticalPoint, CriticalPointSet, classify_point, find_critical_points
from .flow import FlowConfig, FlowTrace, continuation_minimize, minimize
from .functionals import eval_I
from .gamma import compare_with_eps, eval_I0, optimize_support
from .heteroclinic import (
    TransitionGraph,
    build_transition_graph,
    gradient_connection,
    hamiltonian_connection_adaptive,
)
from .paths import DiscretePath
from .potentials import PotentialModel, TripleWell, get_potential

_SQ2 = np.sqrt(2.0)

TRIPLE_WELL_NAMED = {
    "M0": (0.0, 0.0),
    "M1": (1.0, 0.0),
    "M2": (0.0, 1.0),
    "S1": ((2.0 + _SQ2) / 6.0, (2.0 - _SQ2) / 6.0),
    "S2": ((2.0 - _SQ2) / 6.0, (2.0 + _SQ2) / 6.0),
}

DEFAULT_BOX = ((-0.5, 1.5), (-0.5, 1.5))
DEFAULT_EPS = 1e-3
DEFAULT_NODES = 4000
# Annealing schedule for the full-action experiments whose direct flow at the
# target temperature stalls in a wide-interface transient: each stage warm
# starts the next, sharpening the transition layers progressively.
DEFAULT_CONTINUATION = (0.1, 0.03, 0.01, 3e-3)


def named_points(p: PotentialModel) -> dict[str, CriticalPoint]:
    """Named critical points for the built-in potentials."""
    if isinstance(p, TripleWell):
        return {k: classify_point(p, np.array(v)) for k, v in TRIPLE_WELL_NAMED.items()}
    if p.dim == 1:
        return {
            "Mminus": classify_point(p, np.array([-1.0])),
            "S": classify_point(p, np.array([0.0])),
            "Mplus": classify_point(p, np.array([1.0])),
        }
    return {}


def resolve_point(token: str, p: PotentialModel) -> np.ndarray:
    """A named critical point or a comma-separated coordinate tuple."""
    names = named_points(p)
    if token in names:
        return names[token].location
    try:
        x = np.array([float(v) for v in token.split(",")], dtype=float)
    except ValueError:
        raise ValueError(f"cannot resolve point {token!r}") from None
    if x.shape != (p.dim,):
        raise ValueError(f"point {token!r} has wrong dimension for this potential")
    return x


def run_minimization(
    p: PotentialModel,
    waypoints,
    M: int,
    eps: float,
    objective: str,
    grad_tol: float = 1e-6,
    max_iter: int = 30_000,
    eps_schedule=None,
    jitter: float = 0.0,
    seed: int = 0,
) -> tuple[DiscretePath, FlowTrace, "eval_I"]:
    """Minimize one objective from a piecewise-linear waypoint start."""
    start = DiscretePath.from_waypoints(waypoints, M)
    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        interior = start.interior + jitter * rng.standard_normal(start.interior.shape)
        start = start.with_interior(interior)
    cfg = FlowConfig(objective=objective, eps=eps, grad_tol=grad_tol, max_iter=max_iter)
    if eps_schedule:
        path, trace = continuation_minimize(p, start, cfg, eps_schedule)
    else:
        path, trace = minimize(p, start, cfg)
    return path, trace, eval_I(p, path, eps)


def support_fraction(path: DiscretePath, locations, radius: float = 0.05) -> float:
    """Fraction of nodes within ``radius`` of any of the given locations."""
    locs = np.atleast_2d(np.asarray(locations, dtype=float))
    d = np.min(np.linalg.norm(path.nodes[:, None, :] - locs[None, :, :], axis=-1), axis=1)
    return float(np.mean(d <= radius))


def transition_fraction(path: DiscretePath, locations, radius: float = 0.05) -> float:
    """Fraction of the time interval spent outside every dwell neighbourhood."""
    return 1.0 - support_fraction(path, locations, radius)


@dataclass
class ExperimentConfig:
    """Resolved settings for one figure or minimize run."""

    potential: str = "triple-well"
    eps: float = DEFAULT_EPS
    nodes: int = DEFAULT_NODES
    objective: str = "I"
    start: str = ""
    end: str = ""
    waypoints: list = field(default_factory=list)
    out: str = "."
    seed: int = 0
    grad_tol: float = 1e-6
    max_iter: int = 30_000


def _write_json(outdir, name, payload):
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, name), "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def triple_well_graph(p, cps: CriticalPointSet | None = None, ham_M: int = 4000) -> TransitionGraph:
    """Transition graph of the triple well with the direct saddle-saddle edge."""
    if cps is None:
        cps = find_critical_points(p, DEFAULT_BOX, 40)
    names = named_points(p)
    i1, _ = cps.nearest(names["S1"].location)
    i2, _ = cps.nearest(names["S2"].location)
    return build_transition_graph(p, cps, hamiltonian_pairs=[(i1, i2)], ham_M=ham_M)


def continuation_schedule(eps: float) -> list[float]:
    """The default annealing schedule ending at the target temperature."""
    return [e for e in DEFAULT_CONTINUATION if e > eps] + [eps]


def _minimize_to_files(p, tag, waypoints, cfg: ExperimentConfig, objective, eps_schedule=None):
    path, trace, report = run_minimization(
        p,
        waypoints,
        cfg.nodes,
        cfg.eps,
        objective,
        grad_tol=cfg.grad_tol,
        max_iter=cfg.max_iter,
        eps_schedule=eps_schedule,
    )
    os.makedirs(cfg.out, exist_ok=True)
    path.write_csv(os.path.join(cfg.out, f"{tag}_path.csv"))
    trace.write_csv(os.path.join(cfg.out, f"{tag}_trace.csv"))
    return path, trace, report


# Waypoint routes used by the figure experiments.  The "via" routes thread
# the middle well; the "avoid" routes stay away from the origin.
def figure_routes(p) -> dict:
    n = {k: v.location for k, v in named_points(p).items()}
    return {
        "M1_M2_via_M0": [n["M1"], n["S1"], n["M0"], n["S2"], n["M2"]],
        "M1_M2_avoid": [n["M1"], n["S1"], n["S2"], n["M2"]],
        "S1_S2_via_M0": [n["S1"], n["M0"], n["S2"]],
        "S1_S2_avoid_a": [n["S1"], (0.5, 0.5), n["S2"]],
        "S1_S2_avoid_b": [n["S1"], (0.7, 0.7), n["S2"]],
        "S1_S2_avoid_c": [n["S1"], (0.45, 0.65), n["S2"]],
    }


def run_figure(n: int, cfg: ExperimentConfig) -> dict:
    """Reproduce the data behind figure n (1..9) of the triple-well study."""
    if n not in range(1, 10):
        raise ValueError("figure number must be in 1..9")
    p = get_potential(cfg.potential)
    routes = figure_routes(p) if isinstance(p, TripleWell) else {}
    names = named_points(p)
    summary: dict = {"figure": n, "potential": cfg.potential, "eps": cfg.eps, "nodes": cfg.nodes}

    if n == 1:
        xs = np.linspace(-0.5, 1.5, 201)
        grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
        vals = p.value(grid)
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "potential_grid.csv"), "w") as f:
            f.write("x1,x2,V\n")
            for (x1, x2), v in zip(grid, vals):
                f.write(f"{x1:.12g},{x2:.12g},{v:.17g}\n")
        cps = find_critical_points(p, DEFAULT_BOX, 40)
        with open(os.path.join(cfg.out, "critical_points.json"), "w") as f:
            f.write(cps.to_json())
        summary["critical_points"] = [c.to_dict() for c in cps]
        summary["saddle_contour_level"] = float(2.0 / 27.0)

    elif n == 2:
        cps = find_critical_points(p, DEFAULT_BOX, 40)
        os.makedirs(cfg.out, exist_ok=True)
        orbits = {}
        for sname in ("S1", "S2"):
            s_idx, _ = cps.nearest(names[sname].location)
            saddle = cps[s_idx]
            eigval, eigvec = np.linalg.eigh(p.hessian(saddle.location))
            mode = int(np.argmin(eigval))
            for sign in (+1, -1):
                orbit = gradient_connection(p, saddle, eigvec[:, mode], sign, cps)
                t_idx, _ = cps.nearest(orbit.target.location)
                tname = next(
                    k for k, v in names.items() if np.allclose(v.location, cps[t_idx].location, atol=1e-6)
                )
                tag = f"gradient_{sname}_{tname}"
                orbit.path.write_csv(os.path.join(cfg.out, f"{tag}.csv"))
                orbits[tag] = {"J": orbit.j_value, "kind": orbit.kind}
        i1, _ = cps.nearest(names["S1"].location)
        i2, _ = cps.nearest(names["S2"].location)
        mid = 0.5 * (cps[i1].location + cps[i2].location)
        ham = hamiltonian_connection_adaptive(
            p, cps[i1], cps[i2], M=cfg.nodes, waypoints=[mid + np.array([0.28, 0.28])]
        )
        ham.path.write_csv(os.path.join(cfg.out, "hamiltonian_S1_S2.csv"))
        orbits["hamiltonian_S1_S2"] = {
            "J": ham.j_value,
            "kind": ham.kind,
            "energy_residual": ham.energy_residual,
            "gradient_residual": ham.gradient_residual,
        }
        summary["orbits"] = orbits

    elif n == 3:
        res = {}
        for tag, route in (("green_via_M0", "M1_M2_via_M0"), ("blue_avoid_M0", "M1_M2_avoid")):
            path, trace, report = _minimize_to_files(p, tag, routes[route], cfg, "J")
            res[tag] = {"J_eps": report.j_eps, "I_eps": report.i_eps, "converged": trace.converged}
        summary["minimizers"] = res

    elif n in (4, 5):
        objective = "J" if n == 4 else "I"
        res = {}
        for tag in ("S1_S2_avoid_a", "S1_S2_avoid_b", "S1_S2_avoid_c"):
            path, trace, report = _minimize_to_files(p, f"{objective}_{tag}", routes[tag], cfg, objective)
            res[tag] = {"J_eps": report.j_eps, "I_eps": report.i_eps, "converged": trace.converged}
        summary["minimizers"] = res

    elif n in (6, 7):
        objective = "J" if n == 6 else "I"
        tag = f"{objective}_S1_S2_via_M0"
        path, trace, report = _minimize_to_files(p, tag, routes["S1_S2_via_M0"], cfg, objective)
        summary["minimizers"] = {
            tag: {
                "J_eps": report.j_eps,
                "I_eps": report.i_eps,
                "converged": trace.converged,
                "fraction_near_M0": support_fraction(path, [names["M0"].location]),
            }
        }
        if n == 7:
            cps = find_critical_points(p, DEFAULT_BOX, 40)
            graph = build_transition_graph(p, cps)
            seq = [cps[cps.nearest(names[k].location)[0]] for k in ("S1", "M0", "S2")]
            bv = optimize_support(graph, seq[0], seq[-1], seq)
            predicted = eval_I0(graph, bv)
            cmp = compare_with_eps((path, report), predicted, cfg.eps, support=bv)
            summary["gamma"] = {"predicted": predicted.to_dict(), "comparison": cmp.to_dict()}

    elif n == 8:
        tag = "J_M1_M2_via_all"
        path, trace, report = _minimize_to_files(p, tag, routes["M1_M2_via_M0"], cfg, "J")
        summary["minimizers"] = {
            tag: {
                "J_eps": report.j_eps,
                "I_eps": report.i_eps,
                "converged": trace.converged,
                "fraction_near_support": support_fraction(
                    path, [v.location for v in names.values()]
                ),
            }
        }

    elif n == 9:
        # The full-action run starts away from the middle well (its minimizer
        # also stays away) and is annealed down to the target temperature; a
        # direct flow at eps = 1e-3 stalls in a wide-interface transient.
        tag = "I_M1_M2_avoid"
        path, trace, report = _minimize_to_files(
            p, tag, routes["M1_M2_avoid"], cfg, "I", eps_schedule=continuation_schedule(cfg.eps)
        )
        dwell = [names["M1"].location, names["M2"].location]
        summary["minimizers"] = {
            tag: {
                "J_eps": report.j_eps,
                "I_eps": report.i_eps,
                "converged": trace.converged,
                "fraction_near_M1_M2": support_fraction(path, dwell),
                "transition_fraction": transition_fraction(path, dwell),
            }
        }
        graph = triple_well_graph(p, ham_M=cfg.nodes)
        order = ("M1", "S1", "M0", "S2", "M2")
        cand_names = [order, ("M1", "S1", "S2", "M2")]
        best = None
        for seq_names in cand_names:
            seq = [graph.cps[graph.cps.nearest(names[k].location)[0]] for k in seq_names]
            bv = optimize_support(graph, seq[0], seq[-1], seq)
            rep0 = eval_I0(graph, bv)
            if best is None or rep0.i0 < best[1].i0:
                best = (bv, rep0, list(seq_names))
        bv, predicted, seq_names = best
        cmp = compare_with_eps((path, report), predicted, cfg.eps, support=bv)
        summary["gamma"] = {
            "predicted_sequence": seq_names,
            "predicted": predicted.to_dict(),
            "comparison": cmp.to_dict(),
        }

    _write_json(cfg.out, f"figure{n}_summary.json", summary)
    return summary
