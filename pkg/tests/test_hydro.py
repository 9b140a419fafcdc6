"""Unit tests for dispersion and the isolated-cylinder solver."""

import math
from unittest.mock import patch

import pytest
from scipy.optimize import bisect

from wecfarm_cli.errors import HydroSolverError, InvalidArgumentError, InvalidGeometryError
from wecfarm_cli.hydro import (
    GRAVITY,
    RHO,
    CylinderGeometry,
    body_transfer,
    cache_key,
    diffraction_excitation,
    evanescent_wavenumbers,
    group_velocity,
    isolated_heave_coefficients,
    wavenumber,
)

HASKIND_GEOMETRIES = [(2.0, 2.0), (3.0, 1.5), (5.0, 1.0)]
HASKIND_OMEGAS = [0.4, 0.8, 1.2]


@pytest.mark.unit
class TestDispersion:
    """Test suite for wavenumbers and group velocity."""

    @pytest.mark.parametrize("omega", [0.05, 0.3, 1.0, 3.0])
    def test_dispersion_relation(self, omega):
        k = wavenumber(omega, 50.0)

        assert omega**2 == pytest.approx(GRAVITY * k * math.tanh(k * 50.0), rel=1e-10)

    def test_deep_water_limit(self):
        assert wavenumber(3.0, 50.0) == pytest.approx(9.0 / GRAVITY, rel=1e-9)

    def test_shallow_water_limit(self):
        omega = 0.01
        assert wavenumber(omega, 50.0) == pytest.approx(omega / math.sqrt(GRAVITY * 50.0), rel=1e-3)

    def test_evanescent_roots(self):
        omega, depth = 0.8, 50.0
        roots = evanescent_wavenumbers(omega, depth, 5)

        for j, kappa in enumerate(roots, start=1):
            assert (j - 0.5) * math.pi / depth < kappa < j * math.pi / depth
            assert omega**2 == pytest.approx(-GRAVITY * kappa * math.tan(kappa * depth), rel=1e-8)

    def test_group_velocity_limits(self):
        assert group_velocity(3.0, 50.0) == pytest.approx(GRAVITY / (2 * 3.0), rel=1e-6)
        assert group_velocity(0.01, 50.0) == pytest.approx(math.sqrt(GRAVITY * 50.0), rel=1e-3)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(InvalidArgumentError):
            wavenumber(0.0, 50.0)

    def test_very_deep_water(self):
        assert wavenumber(1.0, 1e6) == pytest.approx(1.0 / GRAVITY, abs=1e-9)

    def test_very_shallow_water(self):
        k = wavenumber(0.01, 10.0)

        assert k == pytest.approx(0.01 / math.sqrt(GRAVITY * 10.0), rel=1e-3)
        assert 0.01**2 == pytest.approx(GRAVITY * k * math.tanh(k * 10.0), rel=1e-10)

    def test_matches_bisection(self):
        omega, depth = 0.5, 50.0
        expected = bisect(
            lambda k: GRAVITY * k * math.tanh(k * depth) - omega**2, 1e-6, 10.0, xtol=1e-14
        )

        assert wavenumber(omega, depth) == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("omega, depth", [(1e-3, 5.0), (0.2, 2000.0), (6.0, 50.0), (12.0, 3.0)])
    def test_residual_is_tiny_over_wide_range(self, omega, depth):
        k = wavenumber(omega, depth)

        assert GRAVITY * k * math.tanh(k * depth) == pytest.approx(omega**2, rel=1e-10)

    def test_root_finder_failure_is_solver_error(self):
        with patch("wecfarm_cli.hydro.brentq", side_effect=RuntimeError("failed to converge")):
            with pytest.raises(HydroSolverError) as exc:
                wavenumber(0.777123, 41.0)

        assert exc.value.omega == 0.777123


@pytest.mark.unit
class TestCylinderGeometry:
    """Test suite for CylinderGeometry."""

    def test_draft_from_aspect_ratio(self):
        geom = CylinderGeometry(5.0, 5.0)

        assert geom.draft == 1.0
        assert geom.volume == pytest.approx(math.pi * 25.0)
        assert geom.stiffness() == pytest.approx(RHO * GRAVITY * math.pi * 25.0)

    def test_from_draft(self):
        assert CylinderGeometry.from_draft(3.0, 1.5).aspect_ratio == 2.0

    @pytest.mark.parametrize("radius, aspect_ratio", [(0.0, 1.0), (2.0, 0.0), (1.0, 0.01)])
    def test_invalid_geometry(self, radius, aspect_ratio):
        with pytest.raises(InvalidGeometryError):
            CylinderGeometry(radius, aspect_ratio, depth=50.0)


@pytest.mark.unit
class TestIsolatedCoefficients:
    """Test suite for the matched eigenfunction solver."""

    @pytest.mark.parametrize("radius, draft", HASKIND_GEOMETRIES)
    @pytest.mark.parametrize("omega", HASKIND_OMEGAS)
    def test_haskind_consistency(self, radius, draft, omega):
        """Radiation damping agrees with k |X|^2 / (4 rho g v_g)."""
        geom = CylinderGeometry.from_draft(radius, draft, 50.0)
        coeffs = isolated_heave_coefficients(geom, omega)
        k = wavenumber(omega, 50.0)
        haskind = k * abs(coeffs.excitation) ** 2 / (4 * RHO * GRAVITY * group_velocity(omega, 50.0))

        assert coeffs.radiation_damping == pytest.approx(haskind, rel=0.02)

    @pytest.mark.parametrize("omega", HASKIND_OMEGAS)
    def test_diffraction_matches_haskind_excitation(self, omega):
        geom = CylinderGeometry.from_draft(3.0, 1.5, 50.0)
        haskind = isolated_heave_coefficients(geom, omega).excitation
        direct = diffraction_excitation(geom, omega)

        assert abs(direct) == pytest.approx(abs(haskind), rel=0.02)

    def test_coefficients_are_physical(self, small_geometry):
        coeffs = isolated_heave_coefficients(small_geometry, 0.8)

        assert coeffs.added_mass > 0
        assert coeffs.radiation_damping > 0
        assert coeffs.impedance == complex(coeffs.radiation_damping, 0.8 * coeffs.added_mass)

    def test_excitation_tends_to_hydrostatic_force(self, small_geometry):
        coeffs = isolated_heave_coefficients(small_geometry, 0.02)

        assert abs(coeffs.excitation) == pytest.approx(RHO * GRAVITY * math.pi * 4.0, rel=0.05)

    def test_low_frequency_damping(self, small_geometry):
        """Long-wave damping follows omega rho pi^2 R^4 / (4 h) and vanishes with omega."""
        omega = 0.02
        coeffs = isolated_heave_coefficients(small_geometry, omega)
        expected = omega * RHO * math.pi**2 * 2.0**4 / (4 * 50.0)

        assert coeffs.radiation_damping == pytest.approx(expected, rel=0.2)
        assert isolated_heave_coefficients(small_geometry, 0.005).radiation_damping < coeffs.radiation_damping

    def test_truncation_converges(self):
        geom = CylinderGeometry.from_draft(3.0, 1.5, 50.0)
        coarse = isolated_heave_coefficients(geom, 0.8, n_terms=40)
        fine = isolated_heave_coefficients(geom, 0.8, n_terms=80)

        assert coarse.added_mass == pytest.approx(fine.added_mass, rel=0.005)
        assert coarse.radiation_damping == pytest.approx(fine.radiation_damping, rel=0.005)
        assert abs(coarse.excitation) == pytest.approx(abs(fine.excitation), rel=0.005)

    def test_too_few_terms(self, small_geometry):
        with pytest.raises(InvalidArgumentError):
            isolated_heave_coefficients(small_geometry, 0.8, n_terms=2)

    def test_body_transfer_orders(self, small_geometry):
        transfer = body_transfer(small_geometry, 0.8, order=3)

        assert len(transfer.scattering) == 4
        assert abs(transfer.direct_excitation) == pytest.approx(
            abs(transfer.coeffs.excitation), rel=0.02
        )


@pytest.mark.unit
class TestCacheKey:
    """Test suite for cache_key."""

    def test_stable_under_tiny_perturbation(self, small_geometry):
        a = cache_key(small_geometry, 0.8, "pa")
        b = cache_key(CylinderGeometry(2.0 * (1 + 1e-12), 1.0, 50.0), 0.8, "pa")

        assert a == b

    def test_distinguishes_frequency_and_backend(self, small_geometry):
        keys = {
            cache_key(small_geometry, 0.8, "pa"),
            cache_key(small_geometry, 0.81, "pa"),
            cache_key(small_geometry, 0.8, "ms"),
        }

        assert len(keys) == 3

    def test_is_hex_digest(self, small_geometry):
        key = cache_key(small_geometry, 0.8, "pa")

        assert len(key) == 64
        assert int(key, 16) >= 0
