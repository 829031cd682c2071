"""Command-line interface: outputs, exit codes, determinism, config handling."""

import json

import numpy as np
import pytest

from ompath.cli import main


def run(argv):
    return main(argv)


class TestCriticalPoints:
    def test_writes_five_point_set(self, tmp_path):
        code = run(["critical-points", "--potential", "triple-well", "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "critical_points.json").read_text())
        assert len(doc) == 5
        assert sorted(d["index"] for d in doc) == [0, 0, 0, 1, 1]
        adm = json.loads((tmp_path / "admissibility.json").read_text())
        assert adm["admissible"] is True

    def test_unknown_potential_is_usage_error(self, tmp_path, capsys):
        assert run(["critical-points", "--potential", "bogus", "--out", str(tmp_path)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_empty_box_is_usage_error(self, tmp_path):
        code = run(
            ["critical-points", "--potential", "triple-well", "--box", "5,6", "--out", str(tmp_path)]
        )
        assert code == 2


class TestMinimize:
    ARGS = [
        "minimize",
        "--from",
        "S1",
        "--to",
        "S2",
        "--waypoints",
        "0.5,0.5",
        "--objective",
        "J",
        "--nodes",
        "400",
        "--maxiter",
        "2000",
    ]

    def test_writes_path_trace_summary(self, tmp_path):
        assert run(self.ARGS + ["--out", str(tmp_path)]) == 0
        assert (tmp_path / "path.csv").exists()
        assert (tmp_path / "trace.csv").exists()
        doc = json.loads((tmp_path / "minimize_summary.json").read_text())
        assert doc["converged"] is True
        assert doc["objective"] == "J"
        # coarse mesh: the layer is slightly under-resolved, so a loose check
        assert doc["report"]["J_eps"] == pytest.approx(0.0776, abs=5e-3)

    def test_deterministic_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run(self.ARGS + ["--jitter", "0.01", "--seed", "7", "--out", str(out)]) == 0
            outs.append((out / "minimize_summary.json").read_bytes())
        assert outs[0] == outs[1]

    def test_missing_endpoints_is_usage_error(self, tmp_path):
        assert run(["minimize", "--from", "S1", "--out", str(tmp_path)]) == 2

    def test_nonfinite_start_exits_3_with_dump(self, tmp_path):
        with np.errstate(over="ignore", invalid="ignore"):
            code = run(
                [
                    "minimize",
                    "--from",
                    "1e200,0",
                    "--to",
                    "0,0",
                    "--nodes",
                    "10",
                    "--out",
                    str(tmp_path),
                ]
            )
        assert code == 3
        doc = json.loads((tmp_path / "failure.json").read_text())
        assert "error" in doc

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            run(["frobnicate"])
        assert exc.value.code == 2


class TestHeteroclinic:
    def test_gradient_orbit_from_saddle(self, tmp_path):
        code = run(
            ["heteroclinic", "--from", "S1", "--sign", "-1", "--nodes", "500", "--out", str(tmp_path)]
        )
        assert code == 0
        doc = json.loads((tmp_path / "orbit_summary.json").read_text())
        assert doc["kind"].startswith("gradient")
        assert doc["J"] == pytest.approx(2.0 / 27.0, abs=1e-3)
        assert (tmp_path / "orbit.csv").exists()

    def test_from_must_be_critical(self, tmp_path):
        code = run(["heteroclinic", "--from", "0.4,0.4", "--out", str(tmp_path)])
        assert code == 2


class TestGraphAndGamma:
    def test_graph_json(self, tmp_path):
        code = run(["graph", "--nodes", "1000", "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "transition_graph.json").read_text())
        assert len(doc["nodes"]) == 5
        assert len(doc["edges"]) == 4  # gradient shots only
        phi = np.array([[np.inf if v is None else v for v in row] for row in doc["phi"]])
        np.testing.assert_allclose(phi, phi.T, atol=1e-12)

    def test_gamma_route_value(self, tmp_path):
        code = run(["gamma", "--route", "S1,M0,S2", "--nodes", "1000", "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "gamma_summary.json").read_text())
        # two transitions of 2/27 each, full dwell at the middle well
        assert doc["report"]["I0"] == pytest.approx(4.0 / 27.0 - 4.0, abs=2e-3)
        assert doc["report"]["jump_cost"] == pytest.approx(4.0 / 27.0, abs=2e-3)

    def test_gamma_bad_route(self, tmp_path):
        assert run(["gamma", "--route", "S1,0.4:0.4", "--out", str(tmp_path)]) == 2


class TestFigure:
    def test_figure_1_outputs(self, tmp_path):
        code = run(["figure", "1", "--out", str(tmp_path)])
        assert code == 0
        fdir = tmp_path / "figure1"
        assert (fdir / "potential_grid.csv").exists()
        assert (fdir / "critical_points.json").exists()
        doc = json.loads((fdir / "figure1_summary.json").read_text())
        assert doc["figure"] == 1
        assert len(doc["critical_points"]) == 5
        assert doc["saddle_contour_level"] == pytest.approx(2.0 / 27.0)

    def test_bad_figure_number(self, tmp_path):
        assert run(["figure", "12", "--out", str(tmp_path)]) == 2


class TestConfigFile:
    def test_config_fills_defaults(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eps = 0.5\nnodes = 50  # coarse\nobjective = J\n")
        out = tmp_path / "out"
        code = run(
            [
                "minimize",
                "--from",
                "S1",
                "--to",
                "S2",
                "--waypoints",
                "0.5,0.5",
                "--maxiter",
                "500",
                "--config",
                str(cfg),
                "--out",
                str(out),
            ]
        )
        assert code == 0
        doc = json.loads((out / "minimize_summary.json").read_text())
        assert doc["eps"] == 0.5
        assert doc["nodes"] == 50
        assert doc["objective"] == "J"

    def test_flags_beat_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eps = 0.5\n")
        out = tmp_path / "out"
        code = run(
            [
                "minimize",
                "--from",
                "S1",
                "--to",
                "S2",
                "--waypoints",
                "0.5,0.5",
                "--objective",
                "J",
                "--nodes",
                "50",
                "--maxiter",
                "500",
                "--eps",
                "0.25",
                "--config",
                str(cfg),
                "--out",
                str(out),
            ]
        )
        assert code == 0
        doc = json.loads((out / "minimize_summary.json").read_text())
        assert doc["eps"] == 0.25

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("wibble = 3\n")
        assert run(["critical-points", "--config", str(cfg), "--out", str(tmp_path)]) == 2
