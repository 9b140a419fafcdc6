"""Unit tests for spectra, frequency grids and site climates."""

import io

import numpy as np
import pytest

from wecfarm_cli.errors import (
    DuplicateBinError,
    InvalidArgumentError,
    NormalizationError,
    SchemaError,
)
from wecfarm_cli.waves import (
    FrequencyGrid,
    RegularWave,
    SeaStateBin,
    SiteClimate,
    SpectrumParams,
    energy_flux_kw,
    jonswap_density,
    load_site_climate,
    regular_climate,
    spectral_moment,
    synth_site_climate,
    write_site_climate,
)


@pytest.mark.unit
class TestJonswap:
    """Test suite for the JONSWAP density."""

    @pytest.mark.parametrize("hs", [1.0, 2.0, 4.0])
    @pytest.mark.parametrize("tp", [6.0, 10.0, 14.0])
    def test_zeroth_moment_matches_hs(self, hs, tp):
        """m0 = hs^2 / 16 within 3% on the default grid."""
        m0 = spectral_moment(SpectrumParams(hs, tp), FrequencyGrid.default(), 0)

        assert m0 == pytest.approx(hs**2 / 16.0, rel=0.03)

    def test_peak_at_peak_frequency(self):
        params = SpectrumParams(2.0, 10.0)
        omegas = np.linspace(0.3, 1.5, 2001)
        density = jonswap_density(omegas, params)

        assert omegas[np.argmax(density)] == pytest.approx(params.omega_peak, abs=1e-3)

    def test_scalar_input_returns_float(self):
        value = jonswap_density(0.6, SpectrumParams(2.0, 10.0))

        assert isinstance(value, float)
        assert value > 0

    def test_density_is_nonnegative_and_vanishes_at_low_frequency(self):
        density = jonswap_density(np.array([0.01, 0.05, 1.0]), SpectrumParams(2.0, 10.0))

        assert np.all(density >= 0)
        assert density[0] == 0.0

    def test_gamma_one_is_pierson_moskowitz_shape(self):
        m0 = spectral_moment(SpectrumParams(2.0, 10.0, gamma=1.0), FrequencyGrid.default(), 0)

        assert m0 == pytest.approx(0.25, rel=0.03)

    @pytest.mark.parametrize("gamma", [1.0, 2.0, 3.3, 5.0, 7.0])
    def test_single_peak(self, gamma):
        params = SpectrumParams(2.0, 9.0, gamma)
        omegas = np.linspace(0.2 * params.omega_peak, 5.0 * params.omega_peak, 4001)
        slope = np.diff(jonswap_density(omegas, params))
        peak = int(np.argmax(jonswap_density(omegas, params)))

        assert np.all(slope[:peak] >= 0)
        assert np.all(slope[peak:] <= 0)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(InvalidArgumentError):
            jonswap_density(np.array([0.0, 1.0]), SpectrumParams(2.0, 10.0))

    @pytest.mark.parametrize(
        "hs, tp, gamma", [(0.0, 10.0, 3.3), (2.0, -1.0, 3.3), (2.0, 10.0, 0.5), (2.0, 10.0, 25.0)]
    )
    def test_invalid_parameters(self, hs, tp, gamma):
        with pytest.raises(InvalidArgumentError):
            SpectrumParams(hs, tp, gamma)

    def test_unknown_moment_order(self):
        with pytest.raises(InvalidArgumentError):
            spectral_moment(SpectrumParams(2.0, 10.0), FrequencyGrid.default(), 3)


@pytest.mark.unit
class TestFrequencyGrid:
    """Test suite for FrequencyGrid."""

    def test_weights_integrate_constant(self):
        grid = FrequencyGrid.linspace(0.1, 3.0, 120)

        assert grid.weights.sum() == pytest.approx(2.9)

    def test_rejects_unsorted(self):
        with pytest.raises(InvalidArgumentError):
            FrequencyGrid([0.5, 0.4, 0.6])

    def test_rejects_zero_start(self):
        with pytest.raises(InvalidArgumentError):
            FrequencyGrid([0.0, 0.5])

    def test_values_are_read_only(self):
        grid = FrequencyGrid.default()

        with pytest.raises(ValueError):
            grid.omegas[0] = 1.0


@pytest.mark.unit
class TestSiteClimate:
    """Test suite for SiteClimate construction and summaries."""

    def test_mean_probabilities_average_years(self, small_climate):
        mean = small_climate.mean_probabilities()

        assert mean[(1.0, 8.0)] == pytest.approx((0.25 + 0.4) / 2)
        assert mean[(1.0, 10.0)] == pytest.approx(0.125)
        assert sum(mean.values()) == pytest.approx(1.0)

    def test_grid_covers_all_bins(self, small_climate):
        grid = small_climate.grid()

        assert grid.hs_values == (1.0, 2.0)
        assert grid.tp_values == (8.0, 10.0)

    def test_modal_bin(self, small_climate):
        modal = small_climate.modal_bin()

        assert (modal.hs, modal.tp) == (2.0, 10.0)

    def test_flattened_is_single_normalized_year(self, small_climate):
        flat = small_climate.flattened()

        assert flat.n_yr == 1
        assert sum(b.prob for b in flat.years[0]) == pytest.approx(1.0)

    def test_summary_flux_proxy(self, small_climate):
        rows = small_climate.summary()

        assert [r.year for r in rows] == [1, 2]
        assert rows[0].mean_hs == pytest.approx(1.5)
        assert rows[0].energy_flux_kw == pytest.approx(
            float(np.mean(energy_flux_kw([1.0, 1.0, 2.0, 2.0], [8.0, 10.0, 8.0, 10.0])))
        )

    def test_unnormalized_year_names_year(self):
        with pytest.raises(NormalizationError) as exc:
            SiteClimate("bad", ((SeaStateBin(1.0, 8.0, 0.5),),), year_labels=(2021,))

        assert exc.value.year == 2021

    def test_duplicate_bin(self):
        bins = (SeaStateBin(1.0, 8.0, 0.5), SeaStateBin(1.0, 8.0, 0.5))

        with pytest.raises(DuplicateBinError):
            SiteClimate("dup", (bins,))

    def test_regular_climate_wraps_wave(self):
        climate = regular_climate(RegularWave(2.0, 10.0))

        assert climate.wave_type == "regular"
        assert climate.modal_bin().hs == 2.0
        assert RegularWave(2.0, 10.0).amplitude == 1.0


@pytest.mark.unit
class TestClimateFiles:
    """Test suite for the site-climate CSV schema."""

    def test_write_then_load_preserves_probabilities(self, small_climate, temp_workspace):
        path = temp_workspace / "site.csv"
        write_site_climate(small_climate, path)
        loaded = load_site_climate(path)

        assert loaded.site_id == "site"
        assert loaded.year_labels == (1, 2)
        assert loaded.mean_probabilities() == small_climate.mean_probabilities()

    def test_missing_column(self):
        source = io.StringIO("year,hs_m,prob\n1,1.0,1.0\n")

        with pytest.raises(SchemaError) as exc:
            load_site_climate(source)

        assert "tp_s" in str(exc.value)

    def test_non_numeric_value_reports_line(self):
        source = io.StringIO("year,hs_m,tp_s,prob\n1,1.0,8.0,0.5\n1,abc,9.0,0.5\n")

        with pytest.raises(SchemaError) as exc:
            load_site_climate(source)

        assert exc.value.line == 3

    def test_tampered_probability_names_year(self):
        source = io.StringIO(
            "year,hs_m,tp_s,prob\n2020,1.0,8.0,0.5\n2020,1.0,9.0,0.5\n2021,1.0,8.0,0.7\n2021,1.0,9.0,0.5\n"
        )

        with pytest.raises(NormalizationError) as exc:
            load_site_climate(source)

        assert exc.value.year == 2021
        assert "2021" in str(exc.value)

    def test_duplicate_rows(self):
        source = io.StringIO("year,hs_m,tp_s,prob\n1,1.0,8.0,0.5\n1,1.0,8.0,0.5\n")

        with pytest.raises(DuplicateBinError) as exc:
            load_site_climate(source)

        assert exc.value.line == 3

    def test_empty_file(self):
        with pytest.raises(SchemaError):
            load_site_climate(io.StringIO(""))


@pytest.mark.unit
class TestSyntheticClimates:
    """Test suite for synthetic site climates."""

    def test_same_seed_same_climate(self):
        a = synth_site_climate("high-energy", 7, n_years=3)
        b = synth_site_climate("high-energy", 7, n_years=3)

        assert a == b

    def test_years_normalize(self):
        climate = synth_site_climate("low-energy", 1, n_years=5)

        for row in climate.summary():
            assert row.total_prob == pytest.approx(1.0, abs=1e-9)

    def test_high_energy_site_is_more_energetic(self):
        high = synth_site_climate("high-energy", 3, n_years=4)
        low = synth_site_climate("low-energy", 3, n_years=4)

        assert high.mean_hs() > low.mean_hs()
        assert high.mean_energy_flux() > low.mean_energy_flux()

    def test_high_energy_mean_hs(self):
        climate = synth_site_climate("high-energy", 7)

        assert climate.mean_hs() == pytest.approx(2.5, rel=0.05)

    def test_thirty_years_by_default(self):
        assert synth_site_climate("high-energy", 0).n_yr == 30

    def test_unknown_profile(self):
        with pytest.raises(InvalidArgumentError):
            synth_site_climate("stormy", 0)
