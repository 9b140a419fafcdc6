"""Pytest configuration and shared fixtures."""

import tempfile
from pathlib import Path

import pytest

from wecfarm_cli.cache import CoefficientCache
from wecfarm_cli.config import SimulationSettings
from wecfarm_cli.dynamics import FarmDesign, PtoParams
from wecfarm_cli.hydro import CylinderGeometry
from wecfarm_cli.waves import SeaStateBin, SiteClimate


@pytest.fixture
def temp_workspace():
    """Create a temporary workspace directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        workspace = Path(tmpdir)
        yield workspace


@pytest.fixture
def fast_settings():
    """Coarse frequency grid and truncation for quick farm evaluations."""
    return SimulationSettings(omega_min=0.2, omega_max=2.0, n_omega=40, n_terms=20, ms_order=2)


@pytest.fixture
def small_climate():
    """Two-year climate over four bins."""
    year1 = (
        SeaStateBin(1.0, 8.0, 0.25),
        SeaStateBin(1.0, 10.0, 0.25),
        SeaStateBin(2.0, 8.0, 0.25),
        SeaStateBin(2.0, 10.0, 0.25),
    )
    year2 = (
        SeaStateBin(1.0, 8.0, 0.4),
        SeaStateBin(2.0, 8.0, 0.1),
        SeaStateBin(2.0, 10.0, 0.5),
    )
    return SiteClimate("small", (year1, year2))


@pytest.fixture
def small_geometry():
    return CylinderGeometry(radius=2.0, aspect_ratio=1.0, depth=50.0)


@pytest.fixture
def single_design(small_geometry):
    return FarmDesign(small_geometry, PtoParams(b_pto=5e4, k_pto=0.0))


@pytest.fixture
def row_design(small_geometry):
    """Three devices in a row along the wave direction, 30 m apart."""
    return FarmDesign(
        small_geometry,
        PtoParams(b_pto=5e4, k_pto=0.0),
        ((0.0, 0.0), (30.0, 0.0), (60.0, 0.0)),
    )


@pytest.fixture
def memory_cache():
    return CoefficientCache()


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line("markers", "unit: Mark test as a unit test (pure numerics, fast)")
    config.addinivalue_line(
        "markers",
        "integration: Mark test as an integration test (full evaluation or CLI run)",
    )
    config.addinivalue_line("markers", "slow: Mark test as slow running")
