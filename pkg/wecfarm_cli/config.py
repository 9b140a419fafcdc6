"""Configuration management for wecfarm-cli."""

import logging
import os
import tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from .errors import InvalidArgumentError

logger = logging.getLogger(__name__)

ENV_PREFIX = "WECFARM_"


def _flatten(table: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Flatten nested TOML tables into dotted keys."""
    flat: Dict[str, Any] = {}
    for key, value in table.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, prefix=f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def _parse_env_value(raw: str) -> Any:
    """Parse an environment override as a TOML scalar, falling back to text."""
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


class WecFarmConfig:
    """Layered configuration: defaults, TOML file, environment, explicit overrides."""

    def __init__(
        self,
        config_file: Optional[Path] = None,
        environ: Optional[Mapping[str, str]] = None,
    ):
        """
        Build the configuration.

        Args:
            config_file: Optional TOML file whose tables flatten to dotted keys
            environ: Environment mapping (defaults to os.environ)
        """
        self.config_file = Path(config_file).expanduser() if config_file else None
        self.config = self._get_default_config()
        self.sources: Dict[str, str] = {key: "default" for key in self.config}

        if self.config_file is not None:
            self._merge(self._load_file(self.config_file), source="file")

        self._merge(
            self._load_environment(os.environ if environ is None else environ),
            source="env",
        )

    def _load_file(self, path: Path) -> Dict[str, Any]:
        """
        Read a TOML configuration file.

        Raises:
            InvalidArgumentError: If the file is missing or not valid TOML
        """
        if not path.exists():
            raise InvalidArgumentError(f"config file not found: {path}")
        try:
            with open(path, "rb") as f:
                return _flatten(tomllib.load(f))
        except tomllib.TOMLDecodeError as e:
            raise InvalidArgumentError(f"invalid TOML in {path}: {e}") from e

    def _load_environment(self, environ: Mapping[str, str]) -> Dict[str, Any]:
        """Collect WECFARM_* overrides; double underscores map to dots."""
        overrides = {}
        for name, raw in environ.items():
            if not name.startswith(ENV_PREFIX):
                continue
            key = name[len(ENV_PREFIX):].lower().replace("__", ".")
            overrides[key] = _parse_env_value(raw)
        return overrides

    def _merge(self, values: Dict[str, Any], source: str):
        for key, value in values.items():
            if key not in self.config and not key.startswith(("design.", "study.")):
                logger.warning("Unknown configuration key '%s' from %s", key, source)
            self.config[key] = value
            self.sources[key] = source

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration values."""
        return {
            # Physical constants
            "rho": 1025.0,
            "gravity": 9.81,
            "depth": 50.0,
            "heading": 0.0,
            "safety_distance": 10.0,
            "n_years": 30,
            # Spectral discretization
            "omega_min": 0.1,
            "omega_max": 3.0,
            "n_omega": 120,
            "gamma": 3.3,
            # Hydrodynamics
            "backend": "pa",
            "n_terms": 40,
            "ms_order": 3,
            "cache_enabled": True,
            "cache_dir": None,  # None: <out>/cache
            # Sea
            "climate": "synth:high-energy",
            "wave": "irregular",
            # Optimization budgets (None means derived from dimension)
            "ga_population": None,
            "ga_generations": 50,
            "local_multi_start": 3,
            "local_max_evaluations": 2000,
            "max_evaluations": None,
            # Execution
            "seed": 0,
            "threads": os.cpu_count() or 1,
            "p_limit": None,
            # Display
            "display_mode": "table",
            "show_progress": True,
        }

    def apply_overrides(self, overrides: Dict[str, Any]):
        """Apply explicit (command-line) overrides; None values are ignored."""
        self._merge(
            {key: value for key, value in overrides.items() if value is not None},
            source="cli",
        )

    def section(self, name: str) -> Dict[str, Any]:
        """Return the keys under a dotted prefix with the prefix stripped."""
        prefix = f"{name}."
        return {
            key[len(prefix):]: value
            for key, value in self.config.items()
            if key.startswith(prefix)
        }

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value."""
        return self.config.get(key, default)

    def set(self, key: str, value: Any):
        """Set a configuration value."""
        self.config[key] = value
        self.sources[key] = "cli"

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration values."""
        return self.config.copy()


@dataclass(frozen=True)
class SimulationSettings:
    """Numerical settings shared by hydrodynamics and farm evaluation."""

    rho: float = 1025.0
    gravity: float = 9.81
    depth: float = 50.0
    heading: float = 0.0
    safety_distance: float = 10.0
    omega_min: float = 0.1
    omega_max: float = 3.0
    n_omega: int = 120
    gamma: float = 3.3
    backend: str = "pa"
    n_terms: int = 40
    ms_order: int = 3
    threads: int = 1

    @classmethod
    def from_config(cls, config: Dict) -> "SimulationSettings":
        """
        Create SimulationSettings from a configuration dict.

        Args:
            config: Configuration dictionary (e.g. WecFarmConfig.get_all())

        Returns:
            SimulationSettings instance
        """
        defaults = cls()
        return cls(
            rho=float(config.get("rho", defaults.rho)),
            gravity=float(config.get("gravity", defaults.gravity)),
            depth=float(config.get("depth", defaults.depth)),
            heading=float(config.get("heading", defaults.heading)),
            safety_distance=float(
                config.get("safety_distance", defaults.safety_distance)
            ),
            omega_min=float(config.get("omega_min", defaults.omega_min)),
            omega_max=float(config.get("omega_max", defaults.omega_max)),
            n_omega=int(config.get("n_omega", defaults.n_omega)),
            gamma=float(config.get("gamma", defaults.gamma)),
            backend=str(config.get("backend", defaults.backend)).lower(),
            n_terms=int(config.get("n_terms", defaults.n_terms)),
            ms_order=int(config.get("ms_order", defaults.ms_order)),
            threads=max(1, int(config.get("threads", defaults.threads))),
        )
