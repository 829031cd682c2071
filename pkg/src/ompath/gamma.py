"""The limiting functional on piecewise-constant paths over critical points.

A step path carries its jump cost (transition energies from the graph) and
an exact dwell-weighted Laplacian integral; their difference is the limit
value that small-temperature minimizers approach.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .critical import CriticalPoint
from .functionals import FunctionalReport
from .heteroclinic import TransitionGraph
from .paths import DiscretePath


@dataclass
class BVStepPath:
    """Piecewise-constant path on [0, 1] with values in the critical-point set.

    k jumps at 0 < t_1 < ... < t_k < 1 separate k+1 dwell segments with
    values v_0 .. v_k; consecutive values must differ.
    """

    jump_times: list[float]
    values: list[CriticalPoint]

    def __post_init__(self):
        if len(self.values) != len(self.jump_times) + 1:
            raise ValueError("need exactly one more value than jump times")
        ts = [0.0] + list(self.jump_times) + [1.0]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("jump times must be strictly increasing inside (0, 1)")
        for u, v in zip(self.values, self.values[1:]):
            if np.allclose(u.location, v.location):
                raise ValueError("consecutive values must be distinct")

    @property
    def dwell_durations(self) -> np.ndarray:
        ts = np.array([0.0] + list(self.jump_times) + [1.0])
        return np.diff(ts)

    def support_locations(self) -> np.ndarray:
        return np.array([v.location for v in self.values])

    def sample(self, s: np.ndarray) -> np.ndarray:
        """Right-continuous evaluation at times s."""
        idx = np.searchsorted(self.jump_times, s, side="right")
        locs = self.support_locations()
        return locs[idx]

    def to_dict(self) -> dict:
        return {
            "jump_times": list(self.jump_times),
            "values": [v.to_dict() for v in self.values],
        }


@dataclass
class GammaReport:
    """Limit value split into jump cost and dwell Laplacian integral."""

    jump_cost: float
    laplacian_integral: float

    @property
    def i0(self) -> float:
        return self.jump_cost - self.laplacian_integral

    def to_dict(self) -> dict:
        return {
            "jump_cost": self.jump_cost,
            "laplacian_integral": self.laplacian_integral,
            "I0": self.i0,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def eval_I0(graph: TransitionGraph, path: BVStepPath) -> GammaReport:
    """Evaluate the limit functional; the dwell integral is exact for steps.

    A missing transition-energy entry makes the jump cost infinite; the
    Laplacian part is still reported.
    """
    jump = 0.0
    for u, v in zip(path.values, path.values[1:]):
        i, di = graph.cps.nearest(u.location)
        j, dj = graph.cps.nearest(v.location)
        if max(di, dj) > 1e-8:
            raise ValueError("step-path values must belong to the graph's node set")
        jump += graph.phi_between(i, j)
    lap = float(
        np.sum(path.dwell_durations * np.array([v.laplacian for v in path.values]))
    )
    return GammaReport(jump_cost=jump, laplacian_integral=lap)


def optimize_support(
    graph: TransitionGraph,
    x_minus: CriticalPoint,
    x_plus: CriticalPoint,
    sequence: list[CriticalPoint],
    cluster_gap: float = 1e-6,
) -> BVStepPath:
    """Best jump times for a fixed visit sequence.

    All dwell time goes to the visited point(s) of maximal Laplacian (split
    equally on ties); the remaining jumps cluster with ``cluster_gap`` spacing
    to keep the times strictly ordered.
    """
    if not np.allclose(sequence[0].location, x_minus.location) or not np.allclose(
        sequence[-1].location, x_plus.location
    ):
        raise ValueError("sequence must start at x_minus and end at x_plus")
    if len(sequence) == 1:
        raise ValueError("single-point support has no jumps; build BVStepPath directly")

    laps = np.array([v.laplacian for v in sequence])
    winners = np.isclose(laps, laps.max())
    n_win = int(np.sum(winners))
    slack = cluster_gap * len(sequence)
    share = (1.0 - 2.0 * slack) / n_win

    durations = np.where(winners, share, cluster_gap)
    # normalize the tiny non-winner dwells into the available slack
    durations = durations / durations.sum()
    jump_times = list(np.cumsum(durations)[:-1])
    return BVStepPath(jump_times=jump_times, values=list(sequence))


@dataclass
class EpsComparison:
    """Gap between a finite-temperature minimizer and the predicted limit."""

    i_eps: float
    i0: float
    discrepancy: float
    support_score: float  # fraction of nodes within the capture distance of the support
    eps: float
    capture_distance: float = 0.05

    def to_dict(self) -> dict:
        return {
            "I_eps": self.i_eps,
            "I0": self.i0,
            "discrepancy": self.discrepancy,
            "support_score": self.support_score,
            "eps": self.eps,
            "capture_distance": self.capture_distance,
        }


def compare_with_eps(
    minimized: tuple[DiscretePath, FunctionalReport],
    predicted: GammaReport,
    eps: float,
    support: BVStepPath | None = None,
    capture_distance: float = 0.05,
) -> EpsComparison:
    """Report |I_eps - I0| and how much of the path sits on the predicted support."""
    path, report = minimized
    score = np.nan
    if support is not None:
        locs = support.support_locations()
        d = np.min(
            np.linalg.norm(path.nodes[:, None, :] - locs[None, :, :], axis=-1), axis=1
        )
        score = float(np.mean(d <= capture_distance))
    return EpsComparison(
        i_eps=report.i_eps,
        i0=predicted.i0,
        discrepancy=abs(report.i_eps - predicted.i0),
        support_score=score,
        eps=eps,
        capture_distance=capture_distance,
    )
