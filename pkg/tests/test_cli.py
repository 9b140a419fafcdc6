"""Integration tests for the wecfarm command line."""

import json
from unittest.mock import patch

import pandas as pd
import pytest

from wecfarm_cli.main import _cli_overrides, _replay_argv, build_parser, run
from wecfarm_cli.studies import StudyResult

FAST_CONFIG = """
omega_min = 0.2
omega_max = 2.0
n_omega = 40
n_terms = 20
n_years = 2
threads = 1
show_progress = false
cache_enabled = false
"""


def write_config(workspace, design=""):
    path = workspace / "farm.toml"
    path.write_text(FAST_CONFIG + design)
    return path


@pytest.mark.unit
class TestParser:
    """Test suite for argument parsing helpers."""

    def test_backend_choices(self):
        args = build_parser().parse_args(["simulate", "--backend", "ms"])

        assert args.backend == "ms"

    def test_unknown_backend_exits(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["simulate", "--backend", "bem"])

    def test_p_limit_none_is_explicit(self):
        args = build_parser().parse_args(["optimize", "--p-limit", "none"])

        assert _cli_overrides(args)["p_limit"] == float("inf")

    def test_replay_argv_replaces_output(self):
        argv = _replay_argv(["simulate", "--out", "runs/a", "--force", "--seed", "3"], "runs/b")

        assert argv == ["simulate", "--seed", "3", "--out", "runs/b"]

    def test_no_command_prints_help(self):
        assert run([]) == 2


@pytest.mark.integration
class TestSiteCommand:
    """Test suite for the site subcommand."""

    def test_synth_then_check(self, temp_workspace):
        path = temp_workspace / "west.csv"

        assert run(["site", "--synth", "high-energy", "--seed", "7", "--years", "3", "-o", str(path)]) == 0
        assert pd.read_csv(path)["year"].nunique() == 3
        assert run(["site", "--check", str(path)]) == 0

    def test_tampered_climate_exits_2(self, temp_workspace):
        path = temp_workspace / "west.csv"
        run(["site", "--synth", "low-energy", "--years", "2", "-o", str(path)])
        frame = pd.read_csv(path)
        frame.loc[0, "prob"] += 0.5
        frame.to_csv(path, index=False)

        assert run(["site", "--check", str(path)]) == 2

    def test_refuses_to_overwrite(self, temp_workspace):
        path = temp_workspace / "west.csv"
        path.write_text("keep\n")

        assert run(["site", "--synth", "low-energy", "-o", str(path)]) == 2
        assert path.read_text() == "keep\n"

    def test_synth_needs_output(self):
        assert run(["site", "--synth", "low-energy"]) == 2

    def test_synth_writes_manifest_and_summary(self, temp_workspace):
        path = temp_workspace / "west.csv"

        assert run(["site", "--synth", "high-energy", "--seed", "7", "--years", "2", "-o", str(path)]) == 0

        manifest = json.loads((temp_workspace / "west.manifest.json").read_text())
        assert set(manifest["outputs"]) == {"west.csv", "west_summary.csv"}
        assert manifest["seed"] == 7
        summary = pd.read_csv(temp_workspace / "west_summary.csv")
        assert list(summary.columns) == ["year", "mean_hs", "mean_tp", "energy_flux_kw", "total_prob"]
        assert len(summary) == 2

    def test_synth_into_run_directory_replays(self, temp_workspace):
        out = temp_workspace / "site"

        assert run(["site", "--synth", "low-energy", "--years", "2", "--out", str(out)]) == 0
        assert (out / "manifest.json").exists()
        assert (out / "climate.csv").exists()

        replay = run(["--replay", str(out / "manifest.json"), "--out", str(temp_workspace / "again")])
        assert replay == 0


@pytest.mark.integration
class TestSimulateCommand:
    """Test suite for the simulate subcommand."""

    def test_infeasible_layout_exits_3(self, temp_workspace):
        config = write_config(
            temp_workspace,
            "\n[design]\nn_wec = 3\nradius = 2.0\naspect_ratio = 1.0\nlayout = [[0, 0], [5, 0], [50, 0]]\n",
        )

        status = run(["simulate", "--config", str(config), "--out", str(temp_workspace / "out")])

        assert status == 3
        assert not (temp_workspace / "out").exists()

    def test_isolated_row_has_unit_q_factor(self, temp_workspace):
        config = write_config(
            temp_workspace, "\n[design]\nn_wec = 3\nradius = 2.0\naspect_ratio = 1.0\nb_pto = 5e4\n"
        )
        out = temp_workspace / "out"

        status = run(
            [
                "simulate", "--config", str(config), "--backend", "isolated",
                "--climate", "synth:low-energy", "--out", str(out),
            ]
        )

        assert status == 0
        report = json.loads((out / "report.json").read_text())["report"]
        assert report["q_factor"] == 1.0
        assert report["n_wec"] == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["outputs"]) == {"report.json", "power_matrix.csv", "layout.csv", "layout.svg"}
        assert str(config) in manifest["inputs"]

    def test_coefficient_cache_lives_in_output_directory(self, temp_workspace):
        config = temp_workspace / "farm.toml"
        config.write_text(FAST_CONFIG.replace("cache_enabled = false", "cache_enabled = true"))
        out = temp_workspace / "out"

        status = run(
            [
                "simulate", "--config", str(config), "--backend", "isolated",
                "--climate", "synth:low-energy", "--out", str(out),
            ]
        )

        assert status == 0
        assert any((out / "cache").iterdir())
        manifest = json.loads((out / "manifest.json").read_text())
        assert not any(name.startswith("cache") for name in manifest["outputs"])

    def test_existing_output_needs_force(self, temp_workspace):
        config = write_config(temp_workspace)
        out = temp_workspace / "out"
        out.mkdir()
        (out / "old.txt").write_text("x")

        assert run(["simulate", "--config", str(config), "--backend", "isolated", "--out", str(out)]) == 2


@pytest.mark.integration
class TestStudyCommands:
    """Test suite for optimize, sweep and replay."""

    def test_command_line_overrides_reach_the_study(self, temp_workspace):
        config = write_config(temp_workspace)
        captured = {}

        def fake_run_study(spec, settings, **kwargs):
            captured["spec"] = spec
            return StudyResult(spec, [])

        with patch("wecfarm_cli.main.run_study", side_effect=fake_run_study):
            status = run(
                [
                    "optimize", "--config", str(config), "--preset", "control",
                    "--seed", "9", "--p-limit", "none", "--climate", "synth:low-energy",
                    "--generations", "4", "--max-evaluations", "12", "--out", str(temp_workspace / "out"),
                ]
            )

        spec = captured["spec"]
        assert status == 0
        assert spec.seed == 9
        assert spec.p_limits == (None,)
        assert spec.climates == ("synth:low-energy",)
        assert spec.ga["generations"] == 4
        assert spec.ga["max_evaluations"] == 12
        assert spec.local["budget"] == 12

    def test_sweep_accepts_alternate_preset_id(self, temp_workspace):
        config = write_config(temp_workspace)
        captured = {}

        def fake_run_study(spec, settings, **kwargs):
            captured["spec"] = spec
            return StudyResult(spec, [])

        with patch("wecfarm_cli.main.run_study", side_effect=fake_run_study):
            status = run(
                [
                    "sweep", "--config", str(config), "--preset", "fig5-landscape",
                    "--wave", "regular:2,10", "--out", str(temp_workspace / "out"),
                ]
            )

        assert status == 0
        assert captured["spec"].preset == "landscape"
        assert captured["spec"].solver == "sweep"

    def test_unknown_preset_exits_2(self, temp_workspace):
        assert run(["optimize", "--preset", "nope", "--out", str(temp_workspace / "out")]) == 2

    @pytest.mark.slow
    def test_budgeted_optimize_replays_identically(self, temp_workspace):
        config = write_config(temp_workspace)
        out = temp_workspace / "run"

        status = run(
            [
                "optimize", "--config", str(config), "--preset", "control", "--backend", "isolated",
                "--climate", "synth:low-energy", "--p-limit", "none", "--max-evaluations", "3",
                "--out", str(out),
            ]
        )

        assert status == 0
        result = json.loads((out / "result.json").read_text())
        assert result["truncated"] is True
        assert len(result["cases"]) == 1

        replay = run(["--replay", str(out / "manifest.json"), "--out", str(temp_workspace / "again")])
        assert replay == 0

    def test_replay_rejects_missing_manifest(self, temp_workspace):
        assert run(["--replay", str(temp_workspace / "manifest.json")]) == 2
