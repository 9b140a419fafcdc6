"""Wave inputs: JONSWAP spectra, sea-state bins and multi-year site climates."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.stats import multivariate_normal

from .errors import (
    DuplicateBinError,
    InvalidArgumentError,
    NormalizationError,
    SchemaError,
)

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = 3.3
MAX_GAMMA = 20.0
DEFAULT_TP_VALUES: Tuple[float, ...] = tuple(float(tp) for tp in range(3, 18))
DEFAULT_HS_VALUES: Tuple[float, ...] = tuple(0.5 * i for i in range(1, 20))
DEFAULT_N_YEARS = 30
NORMALIZATION_TOL = 1e-6
CLIMATE_COLUMNS = ("year", "hs_m", "tp_s", "prob")

# Bins lighter than this (before renormalization) are dropped from synthetic years
SYNTH_TRUNCATION = 1e-5
# Energy period to peak period ratio for the flux proxy
TE_OVER_TP = 0.9

BinKey = Tuple[float, float]


def bin_key(hs: float, tp: float) -> BinKey:
    """Canonical dictionary key for a sea-state bin."""
    return (round(float(hs), 9), round(float(tp), 9))


@dataclass(frozen=True)
class SpectrumParams:
    """Parameters of a JONSWAP sea state."""

    hs: float
    tp: float
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not self.hs > 0:
            raise InvalidArgumentError(f"hs must be positive, got {self.hs}")
        if not self.tp > 0:
            raise InvalidArgumentError(f"tp must be positive, got {self.tp}")
        if not 1.0 <= self.gamma <= MAX_GAMMA:
            raise InvalidArgumentError(
                f"gamma must lie in [1, {MAX_GAMMA}], got {self.gamma}"
            )

    @property
    def omega_peak(self) -> float:
        return 2.0 * math.pi / self.tp


def _jonswap(w: np.ndarray, hs, tp, gamma: float) -> np.ndarray:
    """Goda-normalized JONSWAP density; hs and tp broadcast against w."""
    wp = 2.0 * np.pi / tp
    sigma = np.where(w <= wp, 0.07, 0.09)
    r = np.exp(-((w - wp) ** 2) / (2.0 * sigma**2 * wp**2))
    alpha = (5.0 / 16.0) * (1.0 - 0.287 * np.log(gamma))
    with np.errstate(over="ignore", under="ignore"):
        cutoff = np.exp(-1.25 * (wp / w) ** 4)
        density = alpha * hs**2 * wp**4 * w**-5.0 * cutoff * gamma**r
    return np.where(cutoff > 0.0, density, 0.0)


def jonswap_density(omega, params: SpectrumParams):
    """
    Evaluate the JONSWAP spectral density.

    Args:
        omega: Angular frequency (rad/s), scalar or array, strictly positive
        params: Sea-state parameters

    Returns:
        Spectral density in m^2 s/rad, same shape as omega

    Raises:
        InvalidArgumentError: If any frequency is not positive
    """
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise InvalidArgumentError("omega must be positive")
    density = _jonswap(w, params.hs, params.tp, params.gamma)
    if density.ndim == 0:
        return float(density)
    return density


def jonswap_table(
    omegas: np.ndarray, hs: np.ndarray, tp: np.ndarray, gamma: float
) -> np.ndarray:
    """Densities for many sea states at once: result[i, j] = S(omegas[j]; hs[i], tp[i])."""
    hs_col = np.asarray(hs, dtype=float)[:, None]
    tp_col = np.asarray(tp, dtype=float)[:, None]
    return _jonswap(np.asarray(omegas, dtype=float)[None, :], hs_col, tp_col, gamma)


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly increasing set of positive angular frequencies."""

    omegas: np.ndarray

    def __post_init__(self):
        values = np.array(self.omegas, dtype=float).ravel()
        if values.size < 2:
            raise InvalidArgumentError("frequency grid needs at least 2 points")
        if not values[0] > 0:
            raise InvalidArgumentError("frequency grid must start above zero")
        if np.any(np.diff(values) <= 0):
            raise InvalidArgumentError("frequency grid must be strictly increasing")
        values.setflags(write=False)
        object.__setattr__(self, "omegas", values)

    @classmethod
    def linspace(cls, omega_min: float, omega_max: float, n: int) -> "FrequencyGrid":
        """Evenly spaced grid including both ends."""
        return cls(np.linspace(omega_min, omega_max, int(n)))

    @classmethod
    def default(cls) -> "FrequencyGrid":
        return cls.linspace(0.1, 3.0, 120)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights."""
        w = np.empty_like(self.omegas)
        d = np.diff(self.omegas)
        w[0] = d[0] / 2.0
        w[-1] = d[-1] / 2.0
        w[1:-1] = (d[:-1] + d[1:]) / 2.0
        return w

    def __len__(self) -> int:
        return int(self.omegas.size)

    def __iter__(self):
        return iter(float(w) for w in self.omegas)

    def __eq__(self, other) -> bool:
        return isinstance(other, FrequencyGrid) and np.array_equal(
            self.omegas, other.omegas
        )

    def __hash__(self) -> int:
        return hash(self.omegas.tobytes())


def spectral_moment(params: SpectrumParams, grid: FrequencyGrid, n: int) -> float:
    """
    Spectral moment m_n by trapezoidal quadrature.

    Args:
        params: Sea-state parameters
        grid: Frequency grid
        n: Moment order, one of 0, 1, 2

    Returns:
        m_n (m^2 rad^n / s^n)
    """
    if not isinstance(grid, FrequencyGrid):
        grid = FrequencyGrid(grid)
    if n not in (0, 1, 2):
        raise InvalidArgumentError(f"moment order must be 0, 1 or 2, got {n}")
    integrand = grid.omegas**n * jonswap_density(grid.omegas, params)
    return float(trapezoid(integrand, grid.omegas))


@dataclass(frozen=True)
class SeaStateBin:
    """One (hs, tp) cell of a joint probability table."""

    hs: float
    tp: float
    prob: float = 1.0

    def __post_init__(self):
        if not self.hs > 0 or not self.tp > 0:
            raise InvalidArgumentError(
                f"sea-state bin needs positive hs and tp, got ({self.hs}, {self.tp})"
            )
        if not 0.0 <= self.prob <= 1.0:
            raise InvalidArgumentError(f"bin probability {self.prob} outside [0, 1]")

    @property
    def key(self) -> BinKey:
        return bin_key(self.hs, self.tp)

    def spectrum(self, gamma: float = DEFAULT_GAMMA) -> SpectrumParams:
        return SpectrumParams(self.hs, self.tp, gamma)


@dataclass(frozen=True)
class RegularWave:
    """Monochromatic wave; height is crest-to-trough."""

    height: float
    period: float

    def __post_init__(self):
        if not self.height > 0 or not self.period > 0:
            raise InvalidArgumentError(
                f"regular wave needs positive height and period, got "
                f"({self.height}, {self.period})"
            )

    @property
    def amplitude(self) -> float:
        return self.height / 2.0

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.period


def regular_wave(height: float, period: float) -> RegularWave:
    """Build a regular wave of given height (m) and period (s)."""
    return RegularWave(float(height), float(period))


@dataclass(frozen=True)
class SeaStateGrid:
    """Rectangular (hs, tp) axes of a power matrix."""

    hs_values: Tuple[float, ...]
    tp_values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "hs_values", tuple(sorted(map(float, self.hs_values))))
        object.__setattr__(self, "tp_values", tuple(sorted(map(float, self.tp_values))))
        if not self.hs_values or not self.tp_values:
            raise InvalidArgumentError("sea-state grid axes must be non-empty")

    @classmethod
    def default(cls) -> "SeaStateGrid":
        return cls(DEFAULT_HS_VALUES, DEFAULT_TP_VALUES)

    def bins(self) -> List[BinKey]:
        """All bins, hs-major order."""
        return [bin_key(hs, tp) for hs in self.hs_values for tp in self.tp_values]

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.hs_values), len(self.tp_values))


@dataclass(frozen=True)
class YearSummary:
    year: int
    mean_hs: float
    mean_tp: float
    energy_flux_kw: float
    total_prob: float


def energy_flux_kw(hs, tp, rho: float = 1025.0, gravity: float = 9.81):
    """Deep-water energy flux per metre of crest (kW/m)."""
    te = TE_OVER_TP * np.asarray(tp, dtype=float)
    return rho * gravity**2 / (64.0 * np.pi) * np.asarray(hs, dtype=float) ** 2 * te / 1e3


@dataclass(frozen=True)
class SiteClimate:
    """
    Per-year joint probability of sea states at a site.

    years holds one tuple of bins per year; year_labels default to 1..n.
    wave_type is "irregular" (JONSWAP bins) or "regular" (bins read as
    height/period of monochromatic waves). gamma pins the JONSWAP peak
    enhancement of this site; None defers to the simulation settings.
    """

    site_id: str
    years: Tuple[Tuple[SeaStateBin, ...], ...]
    year_labels: Tuple[int, ...] = ()
    wave_type: str = "irregular"
    gamma: Optional[float] = None
    _mean: Dict[BinKey, float] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        years = tuple(tuple(year) for year in self.years)
        object.__setattr__(self, "years", years)
        if not years:
            raise InvalidArgumentError("climate needs at least one year")
        labels = tuple(self.year_labels) or tuple(range(1, len(years) + 1))
        if len(labels) != len(years):
            raise InvalidArgumentError("year_labels and years differ in length")
        object.__setattr__(self, "year_labels", labels)
        if self.wave_type not in ("irregular", "regular"):
            raise InvalidArgumentError(f"unknown wave type '{self.wave_type}'")

        for label, bins in zip(labels, years):
            seen = set()
            for b in bins:
                if b.key in seen:
                    raise DuplicateBinError(label, b.hs, b.tp)
                seen.add(b.key)
            total = math.fsum(b.prob for b in bins)
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise NormalizationError(label, total)

    @property
    def n_yr(self) -> int:
        return len(self.years)

    def grid(self) -> SeaStateGrid:
        """Smallest rectangular grid holding every bin."""
        hs = {b.key[0] for year in self.years for b in year}
        tp = {b.key[1] for year in self.years for b in year}
        return SeaStateGrid(tuple(hs), tuple(tp))

    def mean_probabilities(self) -> Dict[BinKey, float]:
        """Probability of each bin averaged over years, sorted by (hs, tp)."""
        if self._mean is None:
            totals: Dict[BinKey, float] = {}
            for year in self.years:
                for b in year:
                    totals[b.key] = totals.get(b.key, 0.0) + b.prob
            mean = {key: totals[key] / self.n_yr for key in sorted(totals)}
            object.__setattr__(self, "_mean", mean)
        return dict(self._mean)

    def flattened(self) -> "SiteClimate":
        """Single-distribution climate with the year-averaged probabilities."""
        mean = self.mean_probabilities()
        total = math.fsum(mean.values())
        bins = tuple(
            SeaStateBin(hs, tp, prob / total) for (hs, tp), prob in mean.items() if prob > 0
        )
        return SiteClimate(
            f"{self.site_id}-flat", (bins,), wave_type=self.wave_type, gamma=self.gamma
        )

    def modal_bin(self) -> SeaStateBin:
        """Most probable bin of the year-averaged distribution (ties: smallest key)."""
        mean = self.mean_probabilities()
        key = max(mean, key=lambda k: (mean[k], -k[0], -k[1]))
        return SeaStateBin(key[0], key[1], mean[key])

    def summary(self, rho: float = 1025.0, gravity: float = 9.81) -> List[YearSummary]:
        """Per-year mean hs, mean tp and energy-flux proxy."""
        rows = []
        for label, bins in zip(self.year_labels, self.years):
            prob = np.array([b.prob for b in bins])
            hs = np.array([b.hs for b in bins])
            tp = np.array([b.tp for b in bins])
            rows.append(
                YearSummary(
                    year=int(label),
                    mean_hs=float(prob @ hs),
                    mean_tp=float(prob @ tp),
                    energy_flux_kw=float(prob @ energy_flux_kw(hs, tp, rho, gravity)),
                    total_prob=math.fsum(prob),
                )
            )
        return rows

    def mean_hs(self) -> float:
        return float(np.mean([row.mean_hs for row in self.summary()]))

    def mean_tp(self) -> float:
        return float(np.mean([row.mean_tp for row in self.summary()]))

    def mean_energy_flux(self) -> float:
        return float(np.mean([row.energy_flux_kw for row in self.summary()]))


def regular_climate(wave: RegularWave, site_id: Optional[str] = None) -> SiteClimate:
    """Wrap a regular wave as a one-bin climate."""
    label = site_id or f"regular-{wave.height:g}m-{wave.period:g}s"
    return SiteClimate(
        label, ((SeaStateBin(wave.height, wave.period, 1.0),),), wave_type="regular"
    )


def load_site_climate(
    source: Union[str, Path, IO[str]], site_id: Optional[str] = None
) -> SiteClimate:
    """
    Parse a site-climate CSV (`year,hs_m,tp_s,prob`).

    Args:
        source: Path or open text stream
        site_id: Label; defaults to the file stem

    Returns:
        SiteClimate with per-year normalization verified and zero bins dropped

    Raises:
        SchemaError: Missing column or malformed value (with line number)
        DuplicateBinError: Repeated (year, hs, tp)
        NormalizationError: A year whose probabilities do not sum to 1
    """
    if site_id is None:
        site_id = Path(source).stem if isinstance(source, (str, Path)) else "site"

    try:
        df = pd.read_csv(source, dtype=str, skipinitialspace=True, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise SchemaError("climate file is empty") from e
    except pd.errors.ParserError as e:
        raise SchemaError(f"malformed CSV: {e}") from e

    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in CLIMATE_COLUMNS if c not in df.columns]
    if missing:
        raise SchemaError(f"missing required column(s): {', '.join(missing)}", line=1)
    if df.empty:
        raise SchemaError("climate file has no rows")

    # header is line 1
    lines = df.index.to_numpy() + 2
    numeric = {}
    for column in CLIMATE_COLUMNS:
        values = pd.to_numeric(df[column].str.strip(), errors="coerce")
        bad = np.flatnonzero(~np.isfinite(values.to_numpy(dtype=float)))
        if bad.size:
            i = int(bad[0])
            raise SchemaError(
                f"non-numeric {column} value {df[column].iloc[i]!r}", line=int(lines[i])
            )
        numeric[column] = values.to_numpy(dtype=float)

    year, hs, tp, prob = (numeric[c] for c in CLIMATE_COLUMNS)
    checks = (
        (year != np.round(year), "year must be an integer"),
        (hs <= 0, "hs_m must be positive"),
        (tp <= 0, "tp_s must be positive"),
        ((prob < 0) | (prob > 1), "prob must lie in [0, 1]"),
    )
    for mask, message in checks:
        bad = np.flatnonzero(mask)
        if bad.size:
            raise SchemaError(message, line=int(lines[bad[0]]))

    table = pd.DataFrame(
        {
            "year": year.astype(int),
            "hs": [bin_key(h, t)[0] for h, t in zip(hs, tp)],
            "tp": [bin_key(h, t)[1] for h, t in zip(hs, tp)],
            "prob": prob,
            "line": lines,
        }
    )
    duplicated = table.duplicated(subset=["year", "hs", "tp"], keep="first")
    if duplicated.any():
        row = table[duplicated].iloc[0]
        raise DuplicateBinError(int(row.year), row.hs, row.tp, line=int(row.line))

    labels = []
    years = []
    for label, group in table.groupby("year", sort=True):
        total = math.fsum(group["prob"])
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(int(label), total)
        group = group[group["prob"] > 0].sort_values(["hs", "tp"])
        labels.append(int(label))
        years.append(
            tuple(SeaStateBin(float(r.hs), float(r.tp), float(r.prob)) for r in group.itertuples())
        )

    climate = SiteClimate(site_id, tuple(years), tuple(labels))
    logger.debug(
        "Loaded climate '%s': %d years, %d bins", site_id, climate.n_yr, len(table)
    )
    return climate


def climate_frame(climate: SiteClimate) -> pd.DataFrame:
    """Long-format table of a climate in the CSV schema."""
    rows = [
        (label, b.hs, b.tp, b.prob)
        for label, bins in zip(climate.year_labels, climate.years)
        for b in bins
    ]
    return pd.DataFrame(rows, columns=list(CLIMATE_COLUMNS))


def write_site_climate(climate: SiteClimate, destination: Union[str, Path, IO[str]]):
    """Serialize a climate to the CSV schema with round-trip precision."""
    climate_frame(climate).to_csv(
        destination, index=False, float_format="%.17g", lineterminator="\n"
    )


@dataclass(frozen=True)
class ClimateProfile:
    """Bivariate normal (hs, tp) profile for synthetic climates."""

    mean_hs: float
    mean_tp: float
    std_hs: float
    std_tp: float
    correlation: float = 0.5
    jitter: float = 0.05


PROFILES: Dict[str, ClimateProfile] = {
    "high-energy": ClimateProfile(mean_hs=2.5, mean_tp=10.0, std_hs=0.9, std_tp=2.0),
    "low-energy": ClimateProfile(mean_hs=1.2, mean_tp=7.0, std_hs=0.45, std_tp=1.5),
}


def synth_site_climate(
    profile: str,
    seed: int,
    n_years: int = DEFAULT_N_YEARS,
    hs_values: Sequence[float] = DEFAULT_HS_VALUES,
    tp_values: Sequence[float] = DEFAULT_TP_VALUES,
) -> SiteClimate:
    """
    Generate a synthetic multi-year climate.

    Each year is a discretized, truncated bivariate normal over the grid whose
    means are jittered by up to the profile's jitter fraction.

    Args:
        profile: "high-energy" or "low-energy"
        seed: Generator seed
        n_years: Number of yearly distributions

    Returns:
        SiteClimate labelled "<profile>-<seed>"
    """
    if profile not in PROFILES:
        raise InvalidArgumentError(
            f"unknown climate profile '{profile}'. Available: {', '.join(PROFILES)}"
        )
    prof = PROFILES[profile]
    rng = np.random.default_rng(seed)

    hs_grid, tp_grid = np.meshgrid(
        np.asarray(hs_values, dtype=float), np.asarray(tp_values, dtype=float), indexing="ij"
    )
    points = np.column_stack([hs_grid.ravel(), tp_grid.ravel()])
    cross = prof.correlation * prof.std_hs * prof.std_tp
    cov = np.array([[prof.std_hs**2, cross], [cross, prof.std_tp**2]])

    years = []
    for _ in range(n_years):
        jitter = rng.uniform(-prof.jitter, prof.jitter, size=2)
        mean = [prof.mean_hs * (1.0 + jitter[0]), prof.mean_tp * (1.0 + jitter[1])]
        density = multivariate_normal(mean=mean, cov=cov).pdf(points)
        prob = density / density.sum()
        prob[prob < SYNTH_TRUNCATION] = 0.0
        prob /= prob.sum()
        years.append(
            tuple(
                SeaStateBin(float(h), float(t), float(p))
                for (h, t), p in zip(points, prob)
                if p > 0
            )
        )

    return SiteClimate(f"{profile}-{seed}", tuple(years))
