"""Tests for the layered configuration system."""

import pytest

from wecfarm_cli.config import SimulationSettings, WecFarmConfig, _flatten
from wecfarm_cli.errors import InvalidArgumentError


@pytest.mark.unit
class TestWecFarmConfig:
    """Test suite for WecFarmConfig."""

    def test_defaults(self):
        config = WecFarmConfig(environ={})

        assert config.get("rho") == 1025.0
        assert config.get("backend") == "pa"
        assert config.get("ga_generations") == 50
        assert config.sources["rho"] == "default"

    def test_file_overrides_defaults(self, temp_workspace):
        path = temp_workspace / "wecfarm.toml"
        path.write_text('backend = "ms"\nn_omega = 60\n\n[design]\nradius = 3.0\n')

        config = WecFarmConfig(path, environ={})

        assert config.get("backend") == "ms"
        assert config.get("n_omega") == 60
        assert config.section("design") == {"radius": 3.0}
        assert config.sources["backend"] == "file"

    def test_environment_overrides_file(self, temp_workspace):
        path = temp_workspace / "wecfarm.toml"
        path.write_text("seed = 4\n")

        config = WecFarmConfig(path, environ={"WECFARM_SEED": "9", "WECFARM_DESIGN__B_PTO": "1e4"})

        assert config.get("seed") == 9
        assert config.get("design.b_pto") == 1e4
        assert config.sources["seed"] == "env"

    def test_non_toml_environment_value_stays_text(self):
        config = WecFarmConfig(environ={"WECFARM_CLIMATE": "synth:low-energy"})

        assert config.get("climate") == "synth:low-energy"

    def test_cli_overrides_ignore_none(self):
        config = WecFarmConfig(environ={})
        config.apply_overrides({"seed": 3, "backend": None})

        assert config.get("seed") == 3
        assert config.get("backend") == "pa"
        assert config.sources["seed"] == "cli"

    def test_missing_file(self, temp_workspace):
        with pytest.raises(InvalidArgumentError):
            WecFarmConfig(temp_workspace / "absent.toml", environ={})

    def test_invalid_toml(self, temp_workspace):
        path = temp_workspace / "bad.toml"
        path.write_text("backend = \n")

        with pytest.raises(InvalidArgumentError):
            WecFarmConfig(path, environ={})

    def test_set_and_get_all(self):
        config = WecFarmConfig(environ={})
        config.set("threads", 2)

        assert config.get_all()["threads"] == 2
        assert config.get("missing", "fallback") == "fallback"


@pytest.mark.unit
class TestSimulationSettings:
    """Test suite for SimulationSettings."""

    def test_from_config(self):
        settings = SimulationSettings.from_config({"n_omega": "80", "backend": "MS", "threads": 0})

        assert settings.n_omega == 80
        assert settings.backend == "ms"
        assert settings.threads == 1
        assert settings.rho == 1025.0

    def test_flatten_nested_tables(self):
        assert _flatten({"a": {"b": 1, "c": {"d": 2}}, "e": 3}) == {"a.b": 1, "a.c.d": 2, "e": 3}
