"""L2 gradient flow on path space, discretized linearly implicitly.

Each step treats the stiff second-difference part of the action gradient
implicitly (one SPD tridiagonal solve per spatial component) and every
potential-derivative term explicitly.  The stepsize controller rejects any
step that fails to decrease the objective.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solveh_banded

from .functionals import eval_objective, grad_objective
from .paths import DiscretePath
from .potentials import PotentialModel


class NonFiniteObjectiveError(RuntimeError):
    """The objective became non-finite during the flow."""


@dataclass
class FlowConfig:
    objective: str = "I"  # "I" or "J"
    eps: float = 1e-3
    tau0: float = 1e-3
    shrink: float = 0.5
    grow: float = 1.2
    tau_max: float = 1e3
    grad_tol: float = 1e-8  # L2 norm of the discrete gradient density
    max_iter: int = 20_000

    def __post_init__(self):
        if self.objective not in ("I", "J"):
            raise ValueError("objective must be 'I' or 'J'")
        if self.eps <= 0 or self.tau0 <= 0:
            raise ValueError("eps and tau0 must be positive")
        if not (0.0 < self.shrink < 1.0 < self.grow):
            raise ValueError("need 0 < shrink < 1 < grow")


@dataclass
class FlowTrace:
    """Per-step record of the flow; accepted objective values never increase."""

    iterations: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    converged: bool = False
    stop_reason: str = ""

    def record(self, it, obj, tau, gnorm, ok):
        self.iterations.append(it)
        self.objectives.append(obj)
        self.steps.append(tau)
        self.grad_norms.append(gnorm)
        self.accepted.append(ok)

    @property
    def accepted_objectives(self) -> list:
        return [o for o, ok in zip(self.objectives, self.accepted) if ok]

    @property
    def final_objective(self) -> float:
        acc = self.accepted_objectives
        return acc[-1] if acc else np.nan

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["iteration", "objective", "step", "gradnorm", "accepted"])
        for row in zip(
            self.iterations, self.objectives, self.steps, self.grad_norms, self.accepted
        ):
            w.writerow([row[0], f"{row[1]:.17g}", f"{row[2]:.6g}", f"{row[3]:.6g}", int(row[4])])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            f.write(self.to_csv())


def _grad_norm(g: np.ndarray, h: float) -> float:
    # L2 norm of the gradient density g/h: sqrt(h * sum |g/h|^2)
    return float(np.linalg.norm(g) / np.sqrt(h))


def minimize(
    p: PotentialModel, start: DiscretePath, cfg: FlowConfig
) -> tuple[DiscretePath, FlowTrace]:
    """Descend the discrete objective over interior nodes until the gradient
    norm falls below cfg.grad_tol or cfg.max_iter steps are spent."""
    if start.M < 3:
        raise ValueError("need at least 3 intervals")
    h = start.h
    m = start.M - 1  # interior nodes
    kappa = cfg.eps / h

    x_int = start.interior.copy()
    x0, x1 = start.left, start.right
    path = start
    obj = eval_objective(p, path, cfg.eps, cfg.objective)
    if not np.isfinite(obj):
        raise NonFiniteObjectiveError("objective non-finite at the starting path")

    trace = FlowTrace()
    tau = cfg.tau0
    it = 0
    while it < cfg.max_iter:
        it += 1
        g = grad_objective(p, path, cfg.eps, cfg.objective)
        gnorm = _grad_norm(g, h)
        if gnorm <= cfg.grad_tol:
            trace.converged = True
            trace.stop_reason = "gradient tolerance reached"
            break

        # explicit part of the gradient: everything but the second differences
        nonstiff = g - kappa * (2.0 * x_int - np.vstack([x0, x_int[:-1]]) - np.vstack([x_int[1:], x1]))
        accepted = False
        while True:
            rhs = x_int - tau * nonstiff
            rhs[0] += tau * kappa * x0
            rhs[-1] += tau * kappa * x1
            ab = np.zeros((2, m))
            ab[0, 1:] = -tau * kappa
            ab[1, :] = 1.0 + 2.0 * tau * kappa
            x_new = solveh_banded(ab, rhs)
            cand = path.with_interior(x_new)
            obj_new = eval_objective(p, cand, cfg.eps, cfg.objective)
            if not np.isfinite(obj_new):
                raise NonFiniteObjectiveError(
                    f"objective non-finite at iteration {it} (tau={tau:.3g})"
                )
            if obj_new <= obj:
                trace.record(it, obj_new, tau, gnorm, True)
                path, x_int, obj = cand, x_new, obj_new
                tau = min(tau * cfg.grow, cfg.tau_max)
                accepted = True
                break
            trace.record(it, obj_new, tau, gnorm, False)
            tau *= cfg.shrink
            if tau < 1e-15:
                break
        if not accepted:
            trace.stop_reason = "stepsize underflow: no decreasing step found"
            break
    else:
        trace.stop_reason = "max iterations reached"

    if not trace.stop_reason:
        trace.stop_reason = "max iterations reached"
    return path, trace


def continuation_minimize(
    p: PotentialModel,
    start: DiscretePath,
    cfg: FlowConfig,
    eps_schedule,
) -> tuple[DiscretePath, FlowTrace]:
    """Run minimize at each temperature of a decreasing schedule, warm-starting
    each stage from the previous solution.  Returns the last stage's trace."""
    eps_schedule = list(eps_schedule)
    if not eps_schedule:
        raise ValueError("eps_schedule must be nonempty")
    if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
        raise ValueError("eps_schedule must be strictly decreasing")
    path = start
    trace = None
    for e in eps_schedule:
        path, trace = minimize(p, path, replace(cfg, eps=e))
    return path, trace
