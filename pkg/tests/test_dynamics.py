"""Tests for the equation of motion, power matrices and performance metrics."""

import io
import math
from dataclasses import replace

import numpy as np
import pytest

from wecfarm_cli.backends import IsolatedBackend, MultipleScatteringBackend, PointAbsorberBackend
from wecfarm_cli.dynamics import (
    FarmDesign,
    PtoParams,
    capacity_factor,
    capacity_factor_matrix,
    device_power_regular,
    evaluate_performance,
    frequency_response,
    natural_frequency,
    objective_pv,
    power_matrix,
    q_factor,
    rated_power,
    saturate,
    solve_motion,
    weighted_power,
)
from wecfarm_cli.errors import CoverageError, InvalidArgumentError
from wecfarm_cli.hydro import GRAVITY, RHO, HydroSet
from wecfarm_cli.waves import RegularWave, SeaStateGrid, regular_climate, synth_site_climate


@pytest.mark.unit
class TestFarmDesign:
    """Test suite for FarmDesign and PtoParams."""

    def test_first_body_must_be_at_origin(self, small_geometry):
        with pytest.raises(InvalidArgumentError):
            FarmDesign(small_geometry, PtoParams(1e4), ((5.0, 0.0),))

    def test_negative_damping_rejected(self):
        with pytest.raises(InvalidArgumentError):
            PtoParams(b_pto=-1.0)

    def test_spacing_violations(self, row_design):
        assert row_design.spacing_violations(10.0) == []
        assert row_design.spacing_violations(30.0) == [(1, 2, 30.0), (2, 3, 30.0)]

    def test_total_volume(self, row_design):
        assert row_design.total_volume == pytest.approx(3 * math.pi * 4.0 * 2.0)

    def test_single_keeps_body(self, row_design):
        single = row_design.single()

        assert single.n_wec == 1
        assert single.geom == row_design.geom


@pytest.mark.unit
class TestEquationOfMotion:
    """Test suite for solve_motion and regular-wave power."""

    def test_impedance_matched_power(self, small_geometry):
        """Resonant, damping-matched device absorbs |X|^2 A^2 / (8 b)."""
        omega, amplitude = 0.8, 1.5
        hydro = IsolatedBackend(n_terms=20).array_hydro([(0.0, 0.0)], small_geometry, omega)
        a, b = hydro.A[0, 0], hydro.B[0, 0]
        k_pto = omega**2 * (small_geometry.mass(RHO) + a) - small_geometry.stiffness(RHO, GRAVITY)
        design = FarmDesign(small_geometry, PtoParams(b_pto=b, k_pto=k_pto))

        power = device_power_regular(design, hydro, omega, amplitude)

        expected = abs(hydro.X[0]) ** 2 * amplitude**2 / (8 * b)
        assert power[0] == pytest.approx(expected, rel=1e-9)

    def test_matched_damping_is_optimal(self, small_geometry):
        omega = 0.8
        hydro = IsolatedBackend(n_terms=20).array_hydro([(0.0, 0.0)], small_geometry, omega)
        a, b = hydro.A[0, 0], hydro.B[0, 0]
        k_pto = omega**2 * (small_geometry.mass(RHO) + a) - small_geometry.stiffness(RHO, GRAVITY)

        def power(b_pto):
            design = FarmDesign(small_geometry, PtoParams(b_pto=b_pto, k_pto=k_pto))
            return device_power_regular(design, hydro, omega, 1.0)[0]

        assert power(b) > power(0.5 * b)
        assert power(b) > power(2.0 * b)

    @pytest.mark.parametrize("b_pto", [1e3, 5e4, 5e5])
    @pytest.mark.parametrize("k_pto", [-5e4, 0.0, 5e4])
    def test_absorbed_power_bounded_by_excitation_work(self, small_geometry, b_pto, k_pto):
        backend = IsolatedBackend(n_terms=20)
        layout = [(0.0, 0.0), (30.0, 0.0), (60.0, 10.0)]
        design = FarmDesign(small_geometry, PtoParams(b_pto=b_pto, k_pto=k_pto), tuple(layout))

        for omega in np.linspace(0.2, 2.0, 19):
            hydro = backend.array_hydro(layout, small_geometry, omega)
            motion = np.abs(solve_motion(design, hydro, omega))
            absorbed = 0.5 * b_pto * omega**2 * motion**2
            work = 0.5 * np.abs(hydro.X) * motion * omega

            assert np.all(absorbed <= work * (1 + 1e-9))

    @pytest.mark.parametrize(
        "backend, tolerance",
        [(PointAbsorberBackend(n_terms=20), 1e-9), (MultipleScatteringBackend(n_terms=20, order=2), 1e-6)],
    )
    def test_translating_layout_keeps_device_power(self, small_geometry, backend, tolerance):
        layout = np.array([(0.0, 0.0), (30.0, 0.0), (15.0, 20.0)])
        design = FarmDesign(small_geometry, PtoParams(b_pto=5e4), tuple(map(tuple, layout)))
        omega = 0.8

        base = backend.array_hydro(layout, small_geometry, omega)
        moved = backend.array_hydro(layout + (37.0, -12.0), small_geometry, omega)

        np.testing.assert_allclose(
            device_power_regular(design, moved, omega, 1.0),
            device_power_regular(design, base, omega, 1.0),
            rtol=tolerance,
        )

    def test_zero_excitation_gives_zero_motion(self, single_design):
        hydro = HydroSet(0.8, np.array([[1e3]]), np.array([[1e3]]), np.array([0j]))

        assert np.all(solve_motion(single_design, hydro, 0.8) == 0)

    def test_body_count_mismatch(self, row_design, small_geometry):
        hydro = IsolatedBackend(n_terms=20).array_hydro([(0.0, 0.0)], small_geometry, 0.8)

        with pytest.raises(InvalidArgumentError):
            solve_motion(row_design, hydro, 0.8)

    def test_nonpositive_amplitude(self, single_design, small_geometry):
        hydro = IsolatedBackend(n_terms=20).array_hydro([(0.0, 0.0)], small_geometry, 0.8)

        with pytest.raises(InvalidArgumentError):
            device_power_regular(single_design, hydro, 0.8, 0.0)


@pytest.mark.unit
class TestPowerMatrix:
    """Test suite for power matrices and saturation."""

    def test_saturation_is_monotone(self, single_design, small_climate, fast_settings):
        response = frequency_response(single_design, "isolated", fast_settings)
        powers = [
            weighted_power(
                power_matrix(single_design, small_climate, p, "isolated", fast_settings, response=response),
                small_climate,
            )
            for p in (None, 1e5, 1e4, 1e3, 0.0)
        ]

        assert all(a >= b for a, b in zip(powers, powers[1:]))
        assert powers[-1] == 0.0

    def test_saturated_never_exceeds_limit(self, single_design, small_climate, fast_settings):
        pm = power_matrix(single_design, small_climate, 2e3, "isolated", fast_settings)

        assert np.all(pm.saturated <= 2e3)
        assert np.all(pm.saturated <= pm.unsaturated)

    def test_negative_limit_rejected(self):
        with pytest.raises(InvalidArgumentError):
            saturate(np.array([1.0]), -1.0)

    def test_missing_bin_raises_coverage_error(self, single_design, small_climate, fast_settings):
        pm = power_matrix(
            single_design, SeaStateGrid((2.0,), (10.0,)), None, "isolated", fast_settings
        )

        with pytest.raises(CoverageError):
            weighted_power(pm, small_climate)

    def test_regular_matrix_matches_regular_power(self, single_design, small_geometry, fast_settings):
        wave = RegularWave(2.0, 8.0)
        pm = power_matrix(
            single_design, regular_climate(wave), None, IsolatedBackend(n_terms=20), fast_settings
        )
        hydro = IsolatedBackend(n_terms=20).array_hydro([(0.0, 0.0)], small_geometry, wave.omega)

        expected = device_power_regular(single_design, hydro, wave.omega, wave.amplitude)
        assert pm.device_power((2.0, 8.0))[0] == pytest.approx(expected[0], rel=1e-9)

    def test_power_scales_with_hs_squared(self, single_design, fast_settings):
        pm = power_matrix(
            single_design, SeaStateGrid((1.0, 2.0), (8.0,)), None, "isolated", fast_settings
        )

        assert pm.farm_power((2.0, 8.0)) == pytest.approx(4 * pm.farm_power((1.0, 8.0)), rel=1e-9)

    def test_configured_gamma_shapes_climate_power(self, single_design, small_climate, fast_settings):
        peaked = power_matrix(single_design, small_climate, None, "isolated", fast_settings)
        flat = power_matrix(
            single_design, small_climate, None, "isolated", replace(fast_settings, gamma=1.0)
        )

        assert weighted_power(flat, small_climate) != pytest.approx(
            weighted_power(peaked, small_climate), rel=1e-3
        )

    def test_site_gamma_takes_precedence(self, single_design, small_climate, fast_settings):
        site = replace(small_climate, gamma=1.0)
        from_site = power_matrix(single_design, site, None, "isolated", fast_settings)
        from_settings = power_matrix(
            single_design, small_climate, None, "isolated", replace(fast_settings, gamma=1.0)
        )

        np.testing.assert_allclose(from_site.unsaturated, from_settings.unsaturated, rtol=1e-12)

    def test_csv_columns(self, row_design, small_climate, fast_settings):
        pm = power_matrix(row_design, small_climate, None, "isolated", fast_settings)
        buffer = io.StringIO()
        pm.write_csv(buffer)

        lines = buffer.getvalue().splitlines()
        assert lines[0] == "hs_m,tp_s,device,unsat_W,sat_W"
        assert len(lines) == 1 + 4 * 3


@pytest.mark.integration
class TestInteractionMetrics:
    """Test suite for q-factor, natural frequency and performance reports."""

    def test_isolated_q_factor_is_one(self, row_design, small_climate, fast_settings):
        assert q_factor(row_design, small_climate, "isolated", fast_settings) == 1.0

    def test_far_apart_bodies_do_not_interact(self, small_geometry, small_climate, fast_settings):
        design = FarmDesign(small_geometry, PtoParams(5e4), ((0.0, 0.0), (0.0, 2000.0)))

        q = q_factor(design, small_climate, PointAbsorberBackend(n_terms=20), fast_settings)

        assert q == pytest.approx(1.0, abs=0.1)

    def test_mirrored_layout_keeps_q_and_pv(self, small_geometry, small_climate, fast_settings):
        layout = ((0.0, 0.0), (20.0, 15.0), (40.0, -10.0))
        design = FarmDesign(small_geometry, PtoParams(5e4), layout)
        mirrored = FarmDesign(small_geometry, PtoParams(5e4), tuple((x, -y) for x, y in layout))
        backend = PointAbsorberBackend(n_terms=20)

        assert q_factor(mirrored, small_climate, backend, fast_settings) == pytest.approx(
            q_factor(design, small_climate, backend, fast_settings), rel=1e-9
        )
        assert objective_pv(mirrored, small_climate, None, backend, fast_settings) == pytest.approx(
            objective_pv(design, small_climate, None, backend, fast_settings), rel=1e-9
        )

    @pytest.mark.parametrize("spacing, tolerance", [(400.0, 0.10), (2000.0, 0.02)])
    def test_wide_row_approaches_isolated_power(self, small_geometry, fast_settings, spacing, tolerance):
        design = FarmDesign(
            small_geometry, PtoParams(5e4), ((0.0, 0.0), (spacing, 0.0), (2 * spacing, 0.0))
        )
        climate = synth_site_climate("high-energy", 0, n_years=2)

        q = q_factor(design, climate, PointAbsorberBackend(n_terms=20), fast_settings)

        assert abs(q - 1.0) < tolerance

    def test_objective_is_power_per_volume(self, row_design, small_climate, fast_settings):
        pm = power_matrix(row_design, small_climate, None, "pa", fast_settings)

        assert objective_pv(row_design, small_climate, pm=pm) == pytest.approx(
            weighted_power(pm, small_climate) / row_design.total_volume
        )

    def test_natural_frequency_without_added_mass(self, single_design):
        omega = natural_frequency(single_design, added_mass=lambda w: 0.0)
        geom = single_design.geom

        assert omega == pytest.approx(math.sqrt(geom.stiffness() / geom.mass()), rel=1e-6)

    def test_natural_frequency_fixed_point(self, single_design, fast_settings):
        omega = natural_frequency(single_design, settings=fast_settings)
        added = IsolatedBackend(n_terms=fast_settings.n_terms).single_body(single_design.geom, omega)
        geom = single_design.geom

        assert omega**2 * (geom.mass() + added.added_mass) == pytest.approx(geom.stiffness(), rel=1e-5)

    def test_no_resonance_with_negative_stiffness(self, small_geometry):
        design = FarmDesign(small_geometry, PtoParams(5e4, k_pto=-2 * small_geometry.stiffness()))

        assert natural_frequency(design) is None

    def test_evaluate_performance_report(self, row_design, small_climate, fast_settings):
        report, pm = evaluate_performance(
            row_design, small_climate, 1e4, "isolated", fast_settings, rated=1e5
        )

        assert report.n_wec == 3
        assert report.q_factor == 1.0
        assert len(report.device_power) == 3
        assert report.weighted_power == pytest.approx(weighted_power(pm, small_climate))
        assert report.p_v == pytest.approx(report.weighted_power / row_design.total_volume)
        assert report.weighted_power <= report.weighted_power_unsaturated
        assert report.capacity_factor == pytest.approx(report.weighted_power / 1e5)

    def test_capacity_factor_scales_inversely_with_rating(self, single_design, small_climate, fast_settings):
        pm = power_matrix(single_design, small_climate, None, "isolated", fast_settings)
        rated = rated_power(pm, small_climate)

        base = capacity_factor(single_design, small_climate, rated, pm=pm)
        doubled = capacity_factor(single_design, small_climate, 2 * rated, pm=pm)

        assert base == pytest.approx(weighted_power(pm, small_climate) / rated)
        assert doubled == pytest.approx(base / 2)
        with pytest.raises(InvalidArgumentError):
            capacity_factor(single_design, small_climate, 0.0, pm=pm)

    def test_rated_power_and_capacity_matrix(self, single_design, small_climate, fast_settings):
        pm = power_matrix(single_design, small_climate, None, "isolated", fast_settings)
        rated = rated_power(pm, small_climate)
        matrix = capacity_factor_matrix(pm, small_climate, rated)

        assert matrix.max() == pytest.approx(1.0)
        assert matrix.sum() == pytest.approx(weighted_power(pm, small_climate) / rated)
