"""Heteroclinic connections and the transition-energy graph."""

import itertools

import numpy as np
import pytest

from ompath import (
    CustomPotential,
    DiscretePath,
    EscapeError,
    TransitionGraph,
    classify_point,
    CriticalPointSet,
    eval_J_infinite,
    gradient_connection,
    hamiltonian_connection,
    hamiltonian_connection_adaptive,
    verify_orbit,
)

TWO27 = 2.0 / 27.0


def _gradient_orbits(graph):
    return [o for o in graph.orbits if o.kind.startswith("gradient")]


class TestGradientOrbits:
    def test_four_saddle_shots(self, graph_tw):
        orbits = _gradient_orbits(graph_tw)
        assert len(orbits) == 4
        targets = sorted(tuple(np.round(o.target.location, 6)) for o in orbits)
        assert targets == [(0.0, 0.0), (0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]

    def test_sum_rule_two_over_27(self, graph_tw):
        for o in _gradient_orbits(graph_tw):
            assert abs(o.j_value - TWO27) <= 1e-3

    def test_action_identity(self, tw, graph_tw):
        # J equals the integral of |grad V|^2 along a zero-energy orbit
        for o in _gradient_orbits(graph_tw):
            rep = verify_orbit(tw, o)
            assert rep.action_identity_gap <= 1e-2
            assert rep.passed

    def test_residuals(self, graph_tw):
        for o in _gradient_orbits(graph_tw):
            assert o.energy_residual <= 1e-3
            assert o.gradient_residual <= 1e-3
            assert not o.endpoint_warning

    def test_endpoints_on_critical_points(self, graph_tw):
        for o in _gradient_orbits(graph_tw):
            assert max(o.endpoint_distances) <= 1e-5

    def test_time_reversal_keeps_action(self, tw, graph_tw):
        o = _gradient_orbits(graph_tw)[0]
        rev = o.reversed()
        assert eval_J_infinite(tw, rev.path).value == pytest.approx(o.j_value, abs=1e-12)
        assert rev.source is o.target and rev.target is o.source

    def test_source_must_be_saddle(self, tw, cps_tw, names_tw):
        m0 = classify_point(tw, names_tw["M0"].location)
        with pytest.raises(ValueError):
            gradient_connection(tw, m0, np.array([1.0, 0.0]), 1, cps_tw)

    def test_escape_detected(self):
        hill = CustomPotential(2, lambda x: -0.5 * x @ x, lambda x: -x)
        top = classify_point(hill, np.array([0.0, 0.0]))
        cps = CriticalPointSet([top])
        with pytest.raises(EscapeError):
            gradient_connection(hill, top, np.array([1.0, 0.0]), 1, cps, escape_radius=5.0)


@pytest.fixture(scope="module")
def saddle_orbit(graph_full):
    orbits = [o for o in graph_full.orbits if o.kind == "hamiltonian"]
    assert orbits, "expected a direct saddle-saddle connection"
    return orbits[0]


class TestHamiltonianConnection:
    def test_demonstrably_not_gradient(self, saddle_orbit):
        assert saddle_orbit.energy_residual <= 1e-3
        assert saddle_orbit.gradient_residual > 0.1

    def test_cost_below_the_two_step_route(self, saddle_orbit):
        # cheaper than passing through the middle well (2/27 + 2/27)
        assert 0.0 < saddle_orbit.j_value < 2 * TWO27

    def test_mesh_stability(self, tw, names_tw, saddle_orbit):
        s1 = classify_point(tw, names_tw["S1"].location)
        s2 = classify_point(tw, names_tw["S2"].location)
        mid = 0.5 * (s1.location + s2.location)
        coarse = hamiltonian_connection_adaptive(
            tw, s1, s2, M=1000, waypoints=[mid + np.array([0.28, 0.28])]
        )
        assert abs(coarse.j_value - saddle_orbit.j_value) <= 1e-3

    def test_input_validation(self, tw, names_tw):
        s1 = classify_point(tw, names_tw["S1"].location)
        s2 = classify_point(tw, names_tw["S2"].location)
        with pytest.raises(ValueError):
            hamiltonian_connection(
                tw, s1, s1, 6.0, 100, DiscretePath(np.zeros((101, 2)), a=-6, b=6)
            )
        with pytest.raises(ValueError):  # wrong interval
            start = DiscretePath.from_waypoints([s1.location, s2.location], 100, a=-1, b=1)
            hamiltonian_connection(tw, s1, s2, 6.0, 100, start)


class TestTransitionGraph:
    def test_phi_symmetric(self, graph_full):
        phi = graph_full.phi
        np.testing.assert_allclose(phi, phi.T, atol=1e-12)

    def test_phi_positive_off_diagonal(self, graph_full):
        phi = graph_full.phi
        n = phi.shape[0]
        off = phi[~np.eye(n, dtype=bool)]
        assert np.all(off > 1e-3)
        assert np.allclose(np.diag(phi), 0.0)

    def test_triangle_inequality(self, graph_full):
        phi = graph_full.phi
        n = phi.shape[0]
        for i, j, k in itertools.product(range(n), repeat=3):
            assert phi[i, j] <= phi[i, k] + phi[k, j] + 1e-12

    def test_phi_against_brute_force_enumeration(self, graph_full):
        # independent oracle: minimize the summed direct-connection costs over
        # every visit sequence of length <= 5
        n = len(graph_full.cps)
        w = np.full((n, n), np.inf)
        for e in graph_full.edges:
            w[e.i, e.j] = min(w[e.i, e.j], e.j_value)
            w[e.j, e.i] = min(w[e.j, e.i], e.j_value)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                best = w[i, j]
                for length in (1, 2, 3):
                    for mids in itertools.permutations(
                        [k for k in range(n) if k not in (i, j)], length
                    ):
                        seq = (i, *mids, j)
                        best = min(best, sum(w[a, b] for a, b in zip(seq, seq[1:])))
                assert graph_full.phi_between(i, j) == pytest.approx(best, abs=1e-12)

    def test_expected_transition_energies(self, graph_full, names_tw):
        cps = graph_full.cps
        idx = {k: cps.nearest(v.location)[0] for k, v in names_tw.items()}
        phi = graph_full.phi_between
        assert phi(idx["S1"], idx["M0"]) == pytest.approx(TWO27, abs=1e-3)
        assert phi(idx["M1"], idx["M0"]) == pytest.approx(2 * TWO27, abs=2e-3)
        j_ss = min(
            e.j_value
            for e in graph_full.edges
            if {e.i, e.j} == {idx["S1"], idx["S2"]} and e.kind == "hamiltonian"
        )
        expected = min(4 * TWO27, 2 * TWO27 + j_ss)
        assert phi(idx["M1"], idx["M2"]) == pytest.approx(expected, abs=2e-3)
        # the saddle-saddle channel is strictly the cheaper route
        assert expected < 4 * TWO27

    def test_json_export(self, graph_full):
        import json

        doc = json.loads(graph_full.to_json())
        assert len(doc["nodes"]) == len(graph_full.cps)
        assert len(doc["edges"]) == len(graph_full.edges)
        assert doc["phi"][0][0] == 0.0

    def test_lazy_phi(self, graph_full):
        g = TransitionGraph(cps=graph_full.cps, edges=list(graph_full.edges))
        assert g.phi is None
        val = g.phi_between(0, 1)
        assert g.phi is not None and np.isfinite(val)
