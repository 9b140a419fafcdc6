"""
Farm dynamics: equation of motion, power matrices and performance metrics.

All powers are mean absorbed PTO powers in watts. Displacements are per
unit wave amplitude.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import IO, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .backends import BackendFactory, HydroBackend
from .backends.base import as_layout, distance_matrix
from .config import SimulationSettings
from .errors import (
    CoverageError,
    DegenerateDenominatorError,
    InvalidArgumentError,
    IterationError,
    SingularImpedanceError,
)
from .hydro import CylinderGeometry, HydroSet, isolated_heave_coefficients
from .scheduler import EvaluationScheduler
from .waves import (
    BinKey,
    FrequencyGrid,
    RegularWave,
    SeaStateBin,
    SeaStateGrid,
    SiteClimate,
    jonswap_table,
)

logger = logging.getLogger(__name__)

MAX_FIXED_POINT_ITERATIONS = 200
FIXED_POINT_TOLERANCE = 1e-8
FIXED_POINT_RELAXATION = 0.5
# Impedance matrices worse conditioned than this are treated as singular
MAX_IMPEDANCE_CONDITION = 1e14


@dataclass(frozen=True)
class PtoParams:
    """Uniform power take-off damping (N s/m) and stiffness (N/m)."""

    b_pto: float
    k_pto: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.b_pto) or not math.isfinite(self.k_pto):
            raise InvalidArgumentError("PTO parameters must be finite")
        if self.b_pto < 0:
            raise InvalidArgumentError(f"b_pto must be nonnegative, got {self.b_pto}")


@dataclass(frozen=True)
class FarmDesign:
    """Geometry, PTO and layout of a farm; body 1 sits at the origin."""

    geom: CylinderGeometry
    pto: PtoParams
    layout: Tuple[Tuple[float, float], ...] = ((0.0, 0.0),)

    def __post_init__(self):
        points = as_layout(self.layout)
        if points[0, 0] != 0.0 or points[0, 1] != 0.0:
            raise InvalidArgumentError("the first body must sit at the origin")
        object.__setattr__(
            self, "layout", tuple((float(x), float(y)) for x, y in points)
        )

    @property
    def n_wec(self) -> int:
        return len(self.layout)

    @property
    def points(self) -> np.ndarray:
        return np.array(self.layout, dtype=float)

    @property
    def total_volume(self) -> float:
        """Displaced volume of all bodies (m^3)."""
        return self.n_wec * self.geom.volume

    def single(self) -> "FarmDesign":
        """Same body and PTO, alone at the origin."""
        return replace(self, layout=((0.0, 0.0),))

    def spacing_violations(self, safety_distance: float) -> List[Tuple[int, int, float]]:
        """Pairs (p, q, d), 1-based, closer than 2R + safety_distance."""
        distances = distance_matrix(self.points)
        limit = 2.0 * self.geom.radius + safety_distance
        return [
            (p + 1, q + 1, float(distances[p, q]))
            for p in range(self.n_wec)
            for q in range(p + 1, self.n_wec)
            if distances[p, q] < limit
        ]

    def to_dict(self) -> Dict:
        return {
            "radius": self.geom.radius,
            "aspect_ratio": self.geom.aspect_ratio,
            "draft": self.geom.draft,
            "depth": self.geom.depth,
            "b_pto": self.pto.b_pto,
            "k_pto": self.pto.k_pto,
            "layout": [list(p) for p in self.layout],
        }


def resolve_backend(
    backend: Union[str, HydroBackend], settings: Optional[SimulationSettings] = None
) -> HydroBackend:
    """Backend instance from a name (using settings for truncation) or pass-through."""
    if isinstance(backend, HydroBackend):
        return backend
    settings = settings or SimulationSettings()
    return BackendFactory.create_backend(
        backend,
        n_terms=settings.n_terms,
        order=settings.ms_order,
        rho=settings.rho,
        gravity=settings.gravity,
    )


def frequency_grid(settings: Optional[SimulationSettings] = None) -> FrequencyGrid:
    settings = settings or SimulationSettings()
    return FrequencyGrid.linspace(settings.omega_min, settings.omega_max, settings.n_omega)


def impedance_matrix(
    design: FarmDesign, hydro: HydroSet, omega: float, rho: float = 1025.0, gravity: float = 9.81
) -> np.ndarray:
    """-omega^2 (M + A) + i omega (B + b_pto I) + (G + k_pto) I."""
    geom, pto = design.geom, design.pto
    n = design.n_wec
    eye = np.eye(n)
    mass = geom.mass(rho) * eye + hydro.A
    damping = hydro.B + pto.b_pto * eye
    stiffness = (geom.stiffness(rho, gravity) + pto.k_pto) * eye
    return -(omega**2) * mass + 1j * omega * damping + stiffness


def solve_motion(
    design: FarmDesign,
    hydro: HydroSet,
    omega: float,
    rho: float = 1025.0,
    gravity: float = 9.81,
) -> np.ndarray:
    """
    Complex heave displacement per unit wave amplitude.

    Args:
        design: Farm design
        hydro: Coefficients for this design at omega
        omega: Angular frequency (rad/s)

    Returns:
        Displacement vector (m/m)

    Raises:
        InvalidArgumentError: If hydro does not match the design
        SingularImpedanceError: If the impedance matrix is singular
    """
    if hydro.n_bodies != design.n_wec:
        raise InvalidArgumentError(
            f"hydro set has {hydro.n_bodies} bodies, design has {design.n_wec}"
        )
    if not np.any(hydro.X):
        return np.zeros(design.n_wec, dtype=complex)

    Z = impedance_matrix(design, hydro, omega, rho, gravity)
    condition = np.linalg.cond(Z)
    if not np.isfinite(condition) or condition > MAX_IMPEDANCE_CONDITION:
        raise SingularImpedanceError(
            f"farm impedance is singular at omega={omega:.4f} (cond={condition:.3g})"
        )
    try:
        return np.linalg.solve(Z, hydro.X)
    except np.linalg.LinAlgError as e:
        raise SingularImpedanceError(f"farm impedance is singular at omega={omega:.4f}") from e


def device_power_regular(
    design: FarmDesign,
    hydro: HydroSet,
    omega: float,
    amplitude: float,
    rho: float = 1025.0,
    gravity: float = 9.81,
) -> np.ndarray:
    """Mean PTO power of each device in a regular wave, 1/2 b_pto omega^2 |xi|^2 A^2."""
    if not amplitude > 0:
        raise InvalidArgumentError(f"wave amplitude must be positive, got {amplitude}")
    xi = solve_motion(design, hydro, omega, rho, gravity)
    return 0.5 * design.pto.b_pto * omega**2 * np.abs(xi) ** 2 * amplitude**2


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    """
    Unit-amplitude response of one design over a frequency grid.

    density[j, i] = b_pto omega_j^2 |xi_i(omega_j)|^2, so device power in a
    spectrum S is sum_j w_j density[j, i] S(omega_j).
    """

    design: FarmDesign
    grid: FrequencyGrid
    displacement: np.ndarray
    density: np.ndarray
    warnings: Tuple[str, ...] = ()

    def spectral_power(self, hs: Sequence[float], tp: Sequence[float], gamma: float) -> np.ndarray:
        """Per-device power for many sea states; result[b, i] in W."""
        spectra = jonswap_table(self.grid.omegas, hs, tp, gamma)
        return spectra @ (self.grid.weights[:, None] * self.density)

    def seastate_power(self, sea_state: SeaStateBin, gamma: float) -> np.ndarray:
        return self.spectral_power([sea_state.hs], [sea_state.tp], gamma)[0]


def _hydro_sets(
    design: FarmDesign,
    omegas: Sequence[float],
    backend: HydroBackend,
    heading: float,
    scheduler: Optional[EvaluationScheduler],
) -> List[HydroSet]:
    scheduler = scheduler or EvaluationScheduler()
    points = design.points
    return scheduler.map(
        lambda w: backend.array_hydro(points, design.geom, float(w), heading), list(omegas)
    )


def frequency_response(
    design: FarmDesign,
    backend: Union[str, HydroBackend] = "pa",
    settings: Optional[SimulationSettings] = None,
    grid: Optional[FrequencyGrid] = None,
    scheduler: Optional[EvaluationScheduler] = None,
) -> FrequencyResponse:
    """
    Solve the equation of motion at every grid frequency once.

    Sea states and years only reweight this response, so one call serves a
    whole power matrix.
    """
    settings = settings or SimulationSettings()
    backend = resolve_backend(backend, settings)
    grid = grid or frequency_grid(settings)

    hydro_sets = _hydro_sets(design, grid.omegas, backend, settings.heading, scheduler)
    displacement = np.array(
        [
            solve_motion(design, h, h.omega, settings.rho, settings.gravity)
            for h in hydro_sets
        ]
    )
    density = design.pto.b_pto * grid.omegas[:, None] ** 2 * np.abs(displacement) ** 2
    warnings = tuple(dict.fromkeys(w for h in hydro_sets for w in h.warnings))
    return FrequencyResponse(design, grid, displacement, density, warnings)


def seastate_power(
    design: FarmDesign,
    sea_state: SeaStateBin,
    grid: Optional[FrequencyGrid] = None,
    backend: Union[str, HydroBackend] = "pa",
    settings: Optional[SimulationSettings] = None,
    gamma: Optional[float] = None,
) -> np.ndarray:
    """
    Per-device mean power in one irregular sea state.

    Args:
        design: Farm design
        sea_state: (hs, tp) bin
        grid: Frequency grid (settings grid if None)
        backend: Hydrodynamics backend or variant name
        gamma: JONSWAP peak enhancement (settings value if None)

    Returns:
        Per-device power (W)
    """
    settings = settings or SimulationSettings()
    response = frequency_response(design, backend, settings, grid)
    return response.seastate_power(sea_state, settings.gamma if gamma is None else gamma)


@dataclass(frozen=True, eq=False)
class PowerMatrix:
    """
    Per-device power on a rectangular (hs, tp) grid, before and after saturation.

    Arrays have shape (n_hs, n_tp, n_wec).
    """

    grid: SeaStateGrid
    unsaturated: np.ndarray
    saturated: np.ndarray
    p_limit: Optional[float] = None
    warnings: Tuple[str, ...] = ()
    _index: Dict[BinKey, Tuple[int, int]] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        for name in ("unsaturated", "saturated"):
            value = np.array(getattr(self, name), dtype=float)
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        index = {
            (hs, tp): (i, j)
            for i, hs in enumerate(self.grid.hs_values)
            for j, tp in enumerate(self.grid.tp_values)
        }
        object.__setattr__(self, "_index", index)

    @property
    def n_wec(self) -> int:
        return int(self.unsaturated.shape[-1])

    def __contains__(self, key: BinKey) -> bool:
        return key in self._index

    def device_power(self, key: BinKey, saturated: bool = True) -> np.ndarray:
        """Per-device power of one bin."""
        if key not in self._index:
            raise CoverageError(*key)
        i, j = self._index[key]
        return (self.saturated if saturated else self.unsaturated)[i, j]

    def farm_power(self, key: BinKey, saturated: bool = True) -> float:
        return float(np.sum(self.device_power(key, saturated)))

    def farm_matrix(self, saturated: bool = True) -> np.ndarray:
        """Farm power per bin, shape (n_hs, n_tp)."""
        return np.sum(self.saturated if saturated else self.unsaturated, axis=-1)

    def to_frame(self) -> pd.DataFrame:
        """Long table with columns hs_m, tp_s, device, unsat_W, sat_W (device is 1-based)."""
        rows = []
        for i, hs in enumerate(self.grid.hs_values):
            for j, tp in enumerate(self.grid.tp_values):
                for device in range(self.n_wec):
                    rows.append(
                        (
                            hs,
                            tp,
                            device + 1,
                            self.unsaturated[i, j, device],
                            self.saturated[i, j, device],
                        )
                    )
        return pd.DataFrame(rows, columns=["hs_m", "tp_s", "device", "unsat_W", "sat_W"])

    def write_csv(self, destination: Union[str, Path, IO[str]]):
        self.to_frame().to_csv(
            destination, index=False, float_format="%.17g", lineterminator="\n"
        )


def _check_p_limit(p_limit: Optional[float]):
    if p_limit is not None and not p_limit >= 0:
        raise InvalidArgumentError(f"p_limit must be nonnegative, got {p_limit}")


def saturate(powers: np.ndarray, p_limit: Optional[float]) -> np.ndarray:
    _check_p_limit(p_limit)
    if p_limit is None:
        return np.array(powers, dtype=float)
    return np.minimum(powers, p_limit)


def _regular_powers(
    design: FarmDesign,
    grid: SeaStateGrid,
    backend: HydroBackend,
    settings: SimulationSettings,
    scheduler: Optional[EvaluationScheduler],
) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Bins read as (height, period) of regular waves."""
    omegas = [RegularWave(1.0, tp).omega for tp in grid.tp_values]
    hydro_sets = _hydro_sets(design, omegas, backend, settings.heading, scheduler)
    # power per unit amplitude squared, one row per period
    unit = np.array(
        [
            device_power_regular(design, h, h.omega, 1.0, settings.rho, settings.gravity)
            for h in hydro_sets
        ]
    )
    amplitudes = np.array(grid.hs_values) / 2.0
    powers = amplitudes[:, None, None] ** 2 * unit[None, :, :]
    warnings = tuple(dict.fromkeys(w for h in hydro_sets for w in h.warnings))
    return powers, warnings


def power_matrix(
    design: FarmDesign,
    bins: Union[SeaStateGrid, SiteClimate],
    p_limit: Optional[float] = None,
    backend: Union[str, HydroBackend] = "pa",
    settings: Optional[SimulationSettings] = None,
    wave_type: Optional[str] = None,
    gamma: Optional[float] = None,
    response: Optional[FrequencyResponse] = None,
    scheduler: Optional[EvaluationScheduler] = None,
) -> PowerMatrix:
    """
    Device power matrix over a sea-state grid.

    Args:
        design: Farm design
        bins: Rectangular grid, or a climate whose bins define the grid
        p_limit: Per-device saturation limit (W); None disables clipping
        backend: Hydrodynamics backend or variant name
        settings: Numerical settings
        wave_type: "irregular" or "regular" (climate's type if bins is a climate)
        gamma: JONSWAP peak enhancement (climate's, then settings value)
        response: Precomputed frequency response of the design

    Returns:
        PowerMatrix

    Raises:
        InvalidArgumentError: If p_limit is negative
    """
    _check_p_limit(p_limit)
    settings = settings or SimulationSettings()

    if isinstance(bins, SiteClimate):
        grid = bins.grid()
        wave_type = wave_type or bins.wave_type
        gamma = bins.gamma if gamma is None else gamma
    else:
        grid = bins
    wave_type = wave_type or "irregular"
    gamma = settings.gamma if gamma is None else gamma

    if wave_type == "regular":
        powers, warnings = _regular_powers(
            design, grid, resolve_backend(backend, settings), settings, scheduler
        )
    else:
        if response is None:
            response = frequency_response(design, backend, settings, scheduler=scheduler)
        keys = grid.bins()
        flat = response.spectral_power([k[0] for k in keys], [k[1] for k in keys], gamma)
        powers = flat.reshape(grid.shape + (design.n_wec,))
        warnings = response.warnings

    powers = np.maximum(powers, 0.0)
    return PowerMatrix(grid, powers, saturate(powers, p_limit), p_limit, warnings)


def _weighted(pm: PowerMatrix, climate: SiteClimate, saturated: bool) -> np.ndarray:
    """Year-averaged per-device power, summed year by year in bin order."""
    for year in climate.years:
        for b in year:
            if b.prob > 0 and b.key not in pm:
                raise CoverageError(b.hs, b.tp)

    total = np.zeros(pm.n_wec)
    for year in climate.years:
        year_power = np.zeros(pm.n_wec)
        for b in year:
            if b.prob > 0:
                year_power = year_power + b.prob * pm.device_power(b.key, saturated)
        total = total + year_power
    return total / climate.n_yr


def weighted_device_power(
    pm: PowerMatrix, climate: SiteClimate, saturated: bool = True
) -> np.ndarray:
    """Per-device power averaged over bins and years (W)."""
    return _weighted(pm, climate, saturated)


def weighted_power(pm: PowerMatrix, climate: SiteClimate, saturated: bool = True) -> float:
    """
    Farm mean power over the climate.

    P = (1/n_yr) sum_years sum_bins prob * farm_power(bin).

    Raises:
        CoverageError: If a bin with nonzero probability is missing from pm
    """
    return float(np.sum(_weighted(pm, climate, saturated)))


def objective_pv(
    design: FarmDesign,
    climate: SiteClimate,
    p_limit: Optional[float] = None,
    backend: Union[str, HydroBackend] = "pa",
    settings: Optional[SimulationSettings] = None,
    pm: Optional[PowerMatrix] = None,
) -> float:
    """Weighted farm power per unit displaced volume n pi R^2 D (W/m^3)."""
    if pm is None:
        pm = power_matrix(design, climate, p_limit, backend, settings)
    return weighted_power(pm, climate) / design.total_volume


def _single_device_power(
    design: FarmDesign,
    climate: SiteClimate,
    backend: HydroBackend,
    settings: SimulationSettings,
    p_limit: Optional[float],
) -> PowerMatrix:
    isolated = BackendFactory.create_backend(
        "isolated",
        cache=backend.cache,
        n_terms=backend.n_terms,
        rho=backend.rho,
        gravity=backend.gravity,
    )
    return power_matrix(design.single(), climate, p_limit, isolated, settings)


def q_factor(
    design: FarmDesign,
    climate: SiteClimate,
    backend: Union[str, HydroBackend] = "pa",
    settings: Optional[SimulationSettings] = None,
    pm: Optional[PowerMatrix] = None,
    p_limit: Optional[float] = None,
    saturated: bool = False,
) -> float:
    """
    Interaction factor P_farm / (n P_single).

    Unsaturated by default; saturated=True gives the saturated diagnostic
    using p_limit. Non-interacting backends return exactly 1.

    Raises:
        DegenerateDenominatorError: If the isolated device absorbs nothing
    """
    settings = settings or SimulationSettings()
    backend = resolve_backend(backend, settings)
    if not backend.interacting:
        return 1.0
    if pm is None:
        pm = power_matrix(design, climate, p_limit if saturated else None, backend, settings)
    single = _single_device_power(
        design, climate, backend, settings, p_limit if saturated else None
    )
    p_single = weighted_power(single, climate, saturated)
    if p_single <= 0.0:
        raise DegenerateDenominatorError("isolated device power is zero; q-factor undefined")
    return weighted_power(pm, climate, saturated) / (design.n_wec * p_single)


def natural_frequency(
    design: FarmDesign,
    backend: Union[str, HydroBackend, None] = None,
    settings: Optional[SimulationSettings] = None,
    added_mass: Optional[Callable[[float], float]] = None,
) -> Optional[float]:
    """
    Heave natural frequency omega_n = sqrt((k_pto + G) / (M + a(omega_n))).

    Solved by relaxed fixed-point iteration from the zero-added-mass value.

    Args:
        design: Farm design (only geometry and PTO stiffness matter)
        backend: Backend whose n_terms sets the added-mass solve
        settings: Physical constants
        added_mass: Replacement for the isolated added mass a(omega)

    Returns:
        omega_n in rad/s, or None when k_pto + G <= 0 (no resonance)

    Raises:
        IterationError: If the iteration does not settle in 200 steps
    """
    settings = settings or SimulationSettings()
    geom = design.geom
    net_stiffness = design.pto.k_pto + geom.stiffness(settings.rho, settings.gravity)
    if net_stiffness <= 0.0:
        return None
    mass = geom.mass(settings.rho)

    if added_mass is None:
        n_terms = backend.n_terms if isinstance(backend, HydroBackend) else settings.n_terms

        def added_mass(w: float) -> float:
            return isolated_heave_coefficients(
                geom, w, n_terms, rho=settings.rho, gravity=settings.gravity
            ).added_mass

    omega = math.sqrt(net_stiffness / mass)
    for iteration in range(MAX_FIXED_POINT_ITERATIONS):
        inertia = mass + added_mass(omega)
        if inertia <= 0.0:
            raise IterationError(f"nonpositive inertia {inertia:.3g} at omega={omega:.4f}")
        target = math.sqrt(net_stiffness / inertia)
        step = FIXED_POINT_RELAXATION * (target - omega)
        omega += step
        if abs(step) < FIXED_POINT_TOLERANCE:
            logger.debug("Natural frequency %.6f after %d iterations", omega, iteration + 1)
            return omega
    raise IterationError(
        f"natural frequency did not converge in {MAX_FIXED_POINT_ITERATIONS} iterations"
    )


def rated_power(pm: PowerMatrix, reference: SiteClimate) -> float:
    """Largest probability-weighted saturated farm power over the reference climate's bins."""
    mean = reference.mean_probabilities()
    values = [prob * pm.farm_power(key) for key, prob in mean.items() if prob > 0]
    if not values:
        raise InvalidArgumentError("reference climate has no bins with nonzero probability")
    return float(max(values))


def capacity_factor(
    design: FarmDesign,
    climate: SiteClimate,
    rated: float,
    p_limit: Optional[float] = None,
    backend: Union[str, HydroBackend] = "pa",
    settings: Optional[SimulationSettings] = None,
    pm: Optional[PowerMatrix] = None,
) -> float:
    """Weighted farm power over rated power."""
    if not rated > 0:
        raise InvalidArgumentError(f"rated power must be positive, got {rated}")
    if pm is None:
        pm = power_matrix(design, climate, p_limit, backend, settings)
    return weighted_power(pm, climate) / rated


def capacity_factor_matrix(pm: PowerMatrix, climate: SiteClimate, rated: float) -> np.ndarray:
    """
    Per-bin weighted farm power over rated power, shape (n_hs, n_tp) of pm.

    Bins absent from the climate are zero.
    """
    if not rated > 0:
        raise InvalidArgumentError(f"rated power must be positive, got {rated}")
    result = np.zeros(pm.grid.shape)
    for key, prob in climate.mean_probabilities().items():
        if prob <= 0:
            continue
        i, j = pm._index.get(key, (None, None))
        if i is None:
            raise CoverageError(*key)
        result[i, j] = prob * pm.farm_power(key) / rated
    return result


@dataclass(frozen=True)
class PerformanceReport:
    """Farm performance over a climate."""

    weighted_power: float
    weighted_power_unsaturated: float
    p_v: float
    q_factor: float
    q_factor_saturated: float
    device_power: Tuple[float, ...]
    device_power_unsaturated: Tuple[float, ...]
    peak_bin_power: float
    peak_bin: Tuple[float, float]
    total_volume: float
    n_wec: int
    natural_frequency: Optional[float] = None
    capacity_factor: Optional[float] = None
    rated_power: Optional[float] = None
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("weighted_power", "p_v", "q_factor", "total_volume"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"report field {name} is not finite")

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["device_power"] = list(self.device_power)
        data["device_power_unsaturated"] = list(self.device_power_unsaturated)
        data["peak_bin"] = list(self.peak_bin)
        data["warnings"] = list(self.warnings)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def evaluate_performance(
    design: FarmDesign,
    climate: SiteClimate,
    p_limit: Optional[float] = None,
    backend: Union[str, HydroBackend] = "pa",
    settings: Optional[SimulationSettings] = None,
    rated: Optional[float] = None,
    scheduler: Optional[EvaluationScheduler] = None,
    with_natural_frequency: bool = True,
) -> Tuple[PerformanceReport, PowerMatrix]:
    """
    Full performance report for one design, reusing one frequency response.

    Args:
        rated: Rated power for the capacity factor; None skips it

    Returns:
        (PerformanceReport, PowerMatrix)
    """
    settings = settings or SimulationSettings()
    backend = resolve_backend(backend, settings)
    pm = power_matrix(design, climate, p_limit, backend, settings, scheduler=scheduler)

    device = weighted_device_power(pm, climate, saturated=True)
    device_unsat = weighted_device_power(pm, climate, saturated=False)
    total = float(np.sum(device))

    if backend.interacting:
        single = _single_device_power(design, climate, backend, settings, p_limit)
        p_single = weighted_power(single, climate, saturated=False)
        p_single_sat = weighted_power(single, climate, saturated=True)
        if p_single <= 0.0:
            raise DegenerateDenominatorError(
                "isolated device power is zero; q-factor undefined"
            )
        q = float(np.sum(device_unsat)) / (design.n_wec * p_single)
        q_sat = total / (design.n_wec * p_single_sat) if p_single_sat > 0 else q
    else:
        q = q_sat = 1.0

    farm = pm.farm_matrix(saturated=True)
    i, j = np.unravel_index(int(np.argmax(farm)), farm.shape)
    report = PerformanceReport(
        weighted_power=total,
        weighted_power_unsaturated=float(np.sum(device_unsat)),
        p_v=total / design.total_volume,
        q_factor=q,
        q_factor_saturated=q_sat,
        device_power=tuple(float(p) for p in device),
        device_power_unsaturated=tuple(float(p) for p in device_unsat),
        peak_bin_power=float(farm[i, j]),
        peak_bin=(pm.grid.hs_values[i], pm.grid.tp_values[j]),
        total_volume=design.total_volume,
        n_wec=design.n_wec,
        natural_frequency=(
            natural_frequency(design, backend, settings) if with_natural_frequency else None
        ),
        capacity_factor=(capacity_factor(design, climate, rated, pm=pm) if rated else None),
        rated_power=rated,
        warnings=pm.warnings,
    )
    return report, pm
