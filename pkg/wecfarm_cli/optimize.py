"""
Constrained co-design optimization over plant, control and layout variables.

Variables are searched in the unit cube; VariableSpace maps them to
physical values. The objective is -p_v (minimized).
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from .backends import HydroBackend
from .config import SimulationSettings
from .dynamics import FarmDesign, PtoParams, objective_pv, resolve_backend
from .errors import InvalidArgumentError, WecFarmError
from .hydro import CylinderGeometry
from .scheduler import EvaluationScheduler
from .waves import SiteClimate

logger = logging.getLogger(__name__)

PLANT = "plant"
CONTROL = "control"
LAYOUT = "layout"
BLOCKS = (PLANT, CONTROL, LAYOUT)

DEFAULT_SAFETY_DISTANCE = 10.0
DRAFT_BOUNDS = (0.5, 20.0)
FAILED_OBJECTIVE = float(np.finfo(float).max)
BOUND_TOLERANCE = 1e-9


def default_bounds(n_wec: int = 1) -> Dict[str, Tuple[float, float]]:
    """Default variable bounds; layout half-width is 0.5 sqrt(2 n 1e4) m."""
    half = 0.5 * math.sqrt(2.0 * n_wec * 1e4)
    return {
        "radius": (0.5, 10.0),
        "aspect_ratio": (0.2, 10.0),
        "k_pto": (-5e5, 5e5),
        "b_pto": (0.0, 5e5),
        "x": (0.0, half),
        "y": (-half, half),
    }


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if not self.upper > self.lower:
            raise InvalidArgumentError(
                f"variable {self.name}: upper bound {self.upper} must exceed lower {self.lower}"
            )


class VariableSpace:
    """
    Ordered design variables with bounds.

    Order: plant [radius, aspect_ratio], control [k_pto, b_pto],
    layout [x2..xn, y2..yn]; body 1 is fixed at the origin.
    """

    def __init__(
        self,
        active: Sequence[str],
        n_wec: int = 1,
        bounds: Optional[Dict[str, Tuple[float, float]]] = None,
    ):
        """
        Build the space.

        Args:
            active: Active blocks, any of "plant", "control", "layout"
            n_wec: Number of devices
            bounds: Overrides keyed by radius, aspect_ratio, k_pto, b_pto, x, y
        """
        unknown = set(active) - set(BLOCKS)
        if unknown:
            raise InvalidArgumentError(f"unknown variable block(s): {', '.join(sorted(unknown))}")
        if n_wec < 1:
            raise InvalidArgumentError("a farm needs at least one device")
        self.active = tuple(b for b in BLOCKS if b in active)
        self.n_wec = int(n_wec)
        limits = default_bounds(n_wec)
        limits.update(bounds or {})

        variables: List[Variable] = []
        if PLANT in self.active:
            variables += [Variable(n, *limits[n]) for n in ("radius", "aspect_ratio")]
        if CONTROL in self.active:
            variables += [Variable(n, *limits[n]) for n in ("k_pto", "b_pto")]
        if LAYOUT in self.active and n_wec > 1:
            variables += [Variable(f"x{i}", *limits["x"]) for i in range(2, n_wec + 1)]
            variables += [Variable(f"y{i}", *limits["y"]) for i in range(2, n_wec + 1)]
        self._set_variables(variables)

    def _set_variables(self, variables: List[Variable]):
        if not variables:
            raise InvalidArgumentError("no active design variables")
        self.variables = tuple(variables)
        self.lower = np.array([v.lower for v in variables])
        self.upper = np.array([v.upper for v in variables])

    @classmethod
    def custom(
        cls, names: Sequence[str], lower: Sequence[float], upper: Sequence[float]
    ) -> "VariableSpace":
        """Free-form space, used with objective overrides."""
        space = cls.__new__(cls)
        space.active = ()
        space.n_wec = 1
        space._set_variables([Variable(n, lo, hi) for n, lo, hi in zip(names, lower, upper)])
        return space

    @property
    def dim(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> List[str]:
        return [v.name for v in self.variables]

    def to_unit(self, x: Sequence[float]) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.lower) / (self.upper - self.lower)

    def from_unit(self, u: Sequence[float]) -> np.ndarray:
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        x = self.lower + u * (self.upper - self.lower)
        # exact bounds at the cube faces
        x = np.where(u == 0.0, self.lower, x)
        return np.where(u == 1.0, self.upper, x)

    def clamp(self, x: Sequence[float]) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        clamped = np.clip(x, self.lower, self.upper)
        return clamped, bool(np.any(clamped != x))

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def values(self, x: Sequence[float]) -> Dict[str, float]:
        return {name: float(value) for name, value in zip(self.names, x)}

    def bound_activity(self, x: Sequence[float]) -> Dict[str, Optional[str]]:
        """Which variables sit on a bound ("lower"/"upper"), within 1e-9 of the scaled range."""
        u = self.to_unit(x)
        activity = {}
        for name, value in zip(self.names, u):
            if value <= BOUND_TOLERANCE:
                activity[name] = "lower"
            elif value >= 1.0 - BOUND_TOLERANCE:
                activity[name] = "upper"
            else:
                activity[name] = None
        return activity


@dataclass(frozen=True)
class ConstraintReport:
    """Spacing and draft violations (m); total is zero exactly when feasible."""

    pair_violations: Tuple[Tuple[int, int, float], ...] = ()
    draft_violation: float = 0.0

    @property
    def total(self) -> float:
        return math.fsum(v for _, _, v in self.pair_violations) + self.draft_violation

    @property
    def feasible(self) -> bool:
        return self.total == 0.0

    def violated_pairs(self) -> List[Tuple[int, int, float]]:
        return [p for p in self.pair_violations if p[2] > 0]

    def to_dict(self) -> Dict:
        return {
            "feasible": self.feasible,
            "total_violation": self.total,
            "draft_violation": self.draft_violation,
            "pair_violations": [
                {"p": p, "q": q, "violation": v} for p, q, v in self.violated_pairs()
            ],
        }


def distance_constraints(
    layout: Sequence[Sequence[float]], radius: float, safety_distance: float = DEFAULT_SAFETY_DISTANCE
) -> ConstraintReport:
    """Per-pair violation max(0, 2R + s_d - d_pq), 1-based pairs."""
    if safety_distance < 0:
        raise InvalidArgumentError("safety distance must be nonnegative")
    points = np.asarray(layout, dtype=float).reshape(-1, 2)
    limit = 2.0 * radius + safety_distance
    pairs = []
    for p in range(len(points)):
        for q in range(p + 1, len(points)):
            d = float(np.hypot(*(points[p] - points[q])))
            pairs.append((p + 1, q + 1, max(0.0, limit - d)))
    return ConstraintReport(tuple(pairs))


def draft_violation(radius: float, aspect_ratio: float, bounds: Tuple[float, float] = DRAFT_BOUNDS) -> float:
    draft = radius / aspect_ratio
    return max(0.0, bounds[0] - draft, draft - bounds[1])


@dataclass(frozen=True)
class Evaluation:
    """One objective evaluation."""

    x: Tuple[float, ...]
    objective: float
    constraints: ConstraintReport
    failed: bool = False
    clamped: bool = False
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.constraints.feasible and not self.failed

    @property
    def violation(self) -> float:
        return self.constraints.total


def deb_better(a: Evaluation, b: Evaluation) -> bool:
    """Feasibility rules: feasible beats infeasible, then objective, then violation."""
    if a.feasible and b.feasible:
        return a.objective < b.objective
    if a.feasible != b.feasible:
        return a.feasible
    return a.violation < b.violation


def best_index(evaluations: Sequence[Evaluation]) -> int:
    """Index of the best evaluation; ties go to the lower index."""
    best = 0
    for i in range(1, len(evaluations)):
        if deb_better(evaluations[i], evaluations[best]):
            best = i
    return best


class OptimizationProblem:
    """
    Resolved optimization problem: variable space, fixed design values,
    climate and evaluation settings.
    """

    def __init__(
        self,
        space: VariableSpace,
        base_design: Optional[FarmDesign] = None,
        climate: Optional[SiteClimate] = None,
        p_limit: Optional[float] = None,
        backend: Union[str, HydroBackend] = "pa",
        settings: Optional[SimulationSettings] = None,
        objective: Optional[Callable[[np.ndarray], float]] = None,
        seed: int = 0,
        scheduler: Optional[EvaluationScheduler] = None,
    ):
        """
        Initialize the problem.

        Args:
            space: Active variables and bounds
            base_design: Values of inactive variables (and n_wec via its layout)
            climate: Site climate for the p_v objective
            p_limit: Per-device saturation limit (W)
            backend: Hydrodynamics backend or variant name
            settings: Numerical settings (safety distance included)
            objective: Replacement objective of the physical vector; disables
                the design constraints
            seed: Seed for every random stream
            scheduler: Parallel evaluator for populations
        """
        if objective is None and (base_design is None or climate is None):
            raise InvalidArgumentError("a design problem needs a base design and a climate")
        if base_design is not None and base_design.n_wec != space.n_wec and objective is None:
            raise InvalidArgumentError("base design and variable space differ in n_wec")
        self.space = space
        self.base_design = base_design
        self.climate = climate
        self.p_limit = p_limit
        self.settings = settings or SimulationSettings()
        self.backend = resolve_backend(backend, self.settings) if objective is None else None
        self.objective_override = objective
        if int(seed) < 0:
            raise InvalidArgumentError(f"seed must be nonnegative, got {seed}")
        self.seed = int(seed)
        self.scheduler = scheduler or EvaluationScheduler(self.settings.threads)

    def decode(self, x: Sequence[float]) -> FarmDesign:
        """Design for a physical variable vector (inactive values from the base design)."""
        values = self.space.values(x)
        base = self.base_design
        geom = base.geom
        radius = values.get("radius", geom.radius)
        aspect_ratio = values.get("aspect_ratio", geom.aspect_ratio)
        if radius != geom.radius or aspect_ratio != geom.aspect_ratio:
            geom = CylinderGeometry(radius, aspect_ratio, geom.depth)
        pto = PtoParams(
            b_pto=values.get("b_pto", base.pto.b_pto),
            k_pto=values.get("k_pto", base.pto.k_pto),
        )
        layout = list(base.layout)
        for i in range(2, base.n_wec + 1):
            if f"x{i}" in values:
                layout[i - 1] = (values[f"x{i}"], values[f"y{i}"])
        return FarmDesign(geom, pto, tuple(layout))

    def constraints(self, x: Sequence[float]) -> ConstraintReport:
        values = self.space.values(x)
        geom = self.base_design.geom
        radius = values.get("radius", geom.radius)
        aspect_ratio = values.get("aspect_ratio", geom.aspect_ratio)

        layout = list(self.base_design.layout)
        for i in range(2, self.base_design.n_wec + 1):
            if f"x{i}" in values:
                layout[i - 1] = (values[f"x{i}"], values[f"y{i}"])

        spacing = distance_constraints(layout, radius, self.settings.safety_distance)
        return replace(spacing, draft_violation=draft_violation(radius, aspect_ratio))

    def evaluate(self, x: Sequence[float], objective_if_infeasible: bool = True) -> Evaluation:
        """
        Objective -p_v and constraint report of a physical vector.

        Out-of-bounds vectors are clamped first and flagged. Hydrodynamic or
        geometric failures yield FAILED_OBJECTIVE with the message retained.
        """
        x, clamped = self.space.clamp(x)
        if clamped:
            logger.warning("Clamped out-of-bounds variables to %s", x.tolist())
        key = tuple(float(v) for v in x)

        if self.objective_override is not None:
            return Evaluation(key, float(self.objective_override(x)), ConstraintReport(), clamped=clamped)

        report = self.constraints(x)
        if not report.feasible and not objective_if_infeasible:
            return Evaluation(key, FAILED_OBJECTIVE, report, clamped=clamped)

        try:
            design = self.decode(x)
            value = -objective_pv(design, self.climate, self.p_limit, self.backend, self.settings)
        except WecFarmError as e:
            logger.warning("Evaluation failed at %s: %s", list(key), e)
            return Evaluation(key, FAILED_OBJECTIVE, report, failed=True, clamped=clamped, message=str(e))

        if not math.isfinite(value):
            return Evaluation(
                key, FAILED_OBJECTIVE, report, failed=True, clamped=clamped, message="nonfinite objective"
            )
        return Evaluation(key, value, report, clamped=clamped)


def evaluate(x: Sequence[float], problem: OptimizationProblem) -> Tuple[float, ConstraintReport]:
    """(objective, ConstraintReport) of a physical variable vector."""
    result = problem.evaluate(x)
    return result.objective, result.constraints


@dataclass
class OptResult:
    """Outcome of one optimizer run."""

    solver: str
    variables: List[str]
    best: Evaluation
    best_design: Optional[FarmDesign]
    trace: List[Dict] = field(default_factory=list)
    evaluations: int = 0
    failed_evaluations: int = 0
    truncated: bool = False
    bound_activity: Dict[str, Optional[str]] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.best.feasible

    @property
    def best_x(self) -> np.ndarray:
        return np.array(self.best.x)

    @property
    def best_objective(self) -> float:
        return self.best.objective

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            self.trace,
            columns=["iteration", "evaluations", "best_objective", "best_violation", "n_feasible"],
        )

    def to_dict(self) -> Dict:
        """Serializable summary; wall time is left out so reruns compare equal."""
        return {
            "solver": self.solver,
            "feasible": self.feasible,
            "truncated": self.truncated,
            "evaluations": self.evaluations,
            "failed_evaluations": self.failed_evaluations,
            "best_objective": self.best.objective,
            "best_x": dict(zip(self.variables, self.best.x)),
            "bound_activity": self.bound_activity,
            "constraints": self.best.constraints.to_dict(),
            "design": self.best_design.to_dict() if self.best_design else None,
        }


@dataclass(frozen=True)
class GAConfig:
    """Real-coded GA settings; population None means 8 + 4 dim."""

    population: Optional[int] = None
    generations: int = 50
    crossover_rate: float = 0.9
    blend_alpha: float = 0.5
    tournament_size: int = 2
    sigma_start: float = 0.1
    sigma_end: float = 1e-5
    max_evaluations: Optional[int] = None

    def population_size(self, dim: int) -> int:
        return int(self.population) if self.population else 8 + 4 * dim


def _individual_rng(seed: int, generation: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, generation, index])


def _tournament(rng: np.random.Generator, evaluations: List[Evaluation], size: int) -> int:
    picks = sorted(int(i) for i in rng.integers(len(evaluations), size=size))
    winner = picks[0]
    for i in picks[1:]:
        if deb_better(evaluations[i], evaluations[winner]):
            winner = i
    return winner


def _offspring(
    rng: np.random.Generator,
    population: np.ndarray,
    evaluations: List[Evaluation],
    config: GAConfig,
    sigma: float,
) -> np.ndarray:
    """Tournament selection, blend crossover and gaussian mutation in the unit cube."""
    dim = population.shape[1]
    a = population[_tournament(rng, evaluations, config.tournament_size)]
    b = population[_tournament(rng, evaluations, config.tournament_size)]

    if rng.random() < config.crossover_rate:
        low = np.minimum(a, b)
        span = np.abs(a - b)
        child = rng.uniform(low - config.blend_alpha * span, low + (1 + config.blend_alpha) * span)
    else:
        child = a.copy()

    mutate = rng.random(dim) < 1.0 / dim
    child = child + mutate * rng.normal(0.0, sigma, size=dim)
    return np.clip(child, 0.0, 1.0)


def _trace_row(iteration: int, evaluations: int, best: Evaluation, population: Sequence[Evaluation]) -> Dict:
    return {
        "iteration": iteration,
        "evaluations": evaluations,
        "best_objective": best.objective,
        "best_violation": best.violation,
        "n_feasible": sum(1 for e in population if e.feasible),
    }


def _finish(
    solver: str,
    problem: OptimizationProblem,
    best: Evaluation,
    trace: List[Dict],
    evaluations: int,
    failed: int,
    truncated: bool,
    started: float,
) -> OptResult:
    design = None
    if problem.objective_override is None and not best.failed:
        try:
            design = problem.decode(best.x)
        except WecFarmError:
            design = None
    if not best.feasible:
        logger.warning("%s finished without a feasible design", solver)
    return OptResult(
        solver=solver,
        variables=problem.space.names,
        best=best,
        best_design=design,
        trace=trace,
        evaluations=evaluations,
        failed_evaluations=failed,
        truncated=truncated,
        bound_activity=problem.space.bound_activity(best.x),
        wall_time=time.perf_counter() - started,
    )


def run_ga(
    problem: OptimizationProblem,
    config: Optional[GAConfig] = None,
    on_generation: Optional[Callable[[int, Dict], None]] = None,
) -> OptResult:
    """
    Seeded real-coded genetic algorithm with feasibility-rule constraint handling.

    Individual i of generation g draws from its own generator seeded by
    (seed, g, i), so results do not depend on thread count.

    Args:
        problem: Optimization problem
        config: GA settings
        on_generation: Called with (generation, trace row) after each generation

    Returns:
        OptResult; truncated when max_evaluations stops the run early
    """
    config = config or GAConfig()
    started = time.perf_counter()
    space = problem.space
    dim = space.dim
    size = config.population_size(dim)
    if size < 2:
        raise InvalidArgumentError("GA population must hold at least 2 individuals")
    budget = config.max_evaluations

    def evaluate_all(units: np.ndarray) -> List[Evaluation]:
        return problem.scheduler.map(
            lambda u: problem.evaluate(space.from_unit(u), objective_if_infeasible=False),
            list(units),
        )

    truncated = False
    if budget is not None and budget < size:
        size = max(2, budget)
        truncated = True

    population = np.array([_individual_rng(problem.seed, 0, i).random(dim) for i in range(size)])
    evaluations = evaluate_all(population)
    n_evals = size
    failed = sum(e.failed for e in evaluations)
    best = evaluations[best_index(evaluations)]
    trace = [_trace_row(0, n_evals, best, evaluations)]
    if on_generation:
        on_generation(0, trace[-1])

    generations = max(1, config.generations)
    for g in range(1, generations):
        if budget is not None and n_evals + size - 1 > budget:
            truncated = True
            logger.info("GA stopped at generation %d: evaluation budget %d reached", g, budget)
            break
        fraction = g / max(1, generations - 1)
        sigma = config.sigma_start * (config.sigma_end / config.sigma_start) ** fraction

        elite = best_index(evaluations)
        children = np.array(
            [
                _offspring(_individual_rng(problem.seed, g, i), population, evaluations, config, sigma)
                for i in range(1, size)
            ]
        )
        child_evals = evaluate_all(children)
        n_evals += len(child_evals)
        failed += sum(e.failed for e in child_evals)

        population = np.vstack([population[elite], children])
        evaluations = [evaluations[elite]] + child_evals

        current = evaluations[best_index(evaluations)]
        if deb_better(current, best):
            best = current
        trace.append(_trace_row(g, n_evals, best, evaluations))
        if on_generation:
            on_generation(g, trace[-1])
        logger.debug(
            "Generation %d: best %.6g (violation %.3g)", g, best.objective, best.violation
        )

    return _finish("ga", problem, best, trace, n_evals, failed, truncated, started)


@dataclass(frozen=True)
class LocalConfig:
    """Nelder-Mead refiner settings (unit-cube scaling)."""

    multi_start: int = 1
    max_evaluations: int = 2000
    xatol: float = 1e-6
    penalty_weight: float = 1e2


class _BudgetExhausted(Exception):
    pass


@dataclass
class _LocalState:
    best: Optional[Evaluation] = None
    evaluations: int = 0
    failed: int = 0
    trace: List[Dict] = field(default_factory=list)

    def record(self, result: Evaluation):
        self.evaluations += 1
        self.failed += int(result.failed)
        if self.best is None or deb_better(result, self.best):
            self.best = result

    def snapshot(self):
        self.trace.append(
            {
                "iteration": len(self.trace) + 1,
                "evaluations": self.evaluations,
                "best_objective": self.best.objective,
                "best_violation": self.best.violation,
                "n_feasible": int(self.best.feasible),
            }
        )


def _local_start(
    problem: OptimizationProblem,
    u0: np.ndarray,
    config: LocalConfig,
    state: _LocalState,
    budget: Optional[int],
) -> bool:
    """
    One bounded Nelder-Mead run with a quadratic constraint penalty.

    Returns:
        True when the overall evaluation budget stopped the run
    """
    space = problem.space
    start = problem.evaluate(space.from_unit(u0))
    state.record(start)
    scale = max(abs(start.objective), np.finfo(float).tiny) if not start.failed else 1.0
    weight = config.penalty_weight * scale
    first = state.evaluations
    limit = first - 1 + config.max_evaluations
    if budget is not None:
        limit = min(limit, budget)

    def penalized(u: np.ndarray) -> float:
        if state.evaluations >= limit:
            raise _BudgetExhausted()
        result = problem.evaluate(space.from_unit(u))
        state.record(result)
        if result.failed:
            return FAILED_OBJECTIVE
        return min(FAILED_OBJECTIVE, result.objective + weight * result.violation**2)

    try:
        minimize(
            penalized,
            u0,
            method="Nelder-Mead",
            bounds=[(0.0, 1.0)] * space.dim,
            callback=lambda _: state.snapshot(),
            options={"xatol": config.xatol, "fatol": np.inf, "maxfev": config.max_evaluations},
        )
    except _BudgetExhausted:
        state.snapshot()
        return budget is not None and state.evaluations >= budget
    return False


def run_local(
    problem: OptimizationProblem,
    x0: Optional[Sequence[float]] = None,
    config: Optional[LocalConfig] = None,
    max_evaluations: Optional[int] = None,
) -> OptResult:
    """
    Bounded Nelder-Mead refinement with a quadratic penalty on violations.

    Terminates on a scaled simplex diameter below xatol or after
    max_evaluations per start. Extra starts (multi_start > 1) are drawn from
    the seeded generator; the best start wins, ties to the lowest start
    index. The result is never worse than x0.

    Args:
        problem: Optimization problem
        x0: Physical start vector (mid-bounds if None)
        config: Refiner settings
        max_evaluations: Overall budget across starts; reaching it flags truncation

    Returns:
        OptResult with a best-so-far trace per simplex iteration
    """
    config = config or LocalConfig()
    started = time.perf_counter()
    space = problem.space
    x0 = space.midpoint() if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (space.dim,):
        raise InvalidArgumentError(f"x0 must have {space.dim} entries")

    rng = np.random.default_rng([problem.seed, 1])
    starts = [space.to_unit(space.clamp(x0)[0])]
    starts += [rng.random(space.dim) for _ in range(max(0, config.multi_start - 1))]

    state = _LocalState()
    truncated = False
    for index, u0 in enumerate(starts):
        if max_evaluations is not None and state.evaluations >= max_evaluations:
            truncated = True
            break
        truncated = _local_start(problem, u0, config, state, max_evaluations)
        logger.debug("Local start %d done: best %.6g", index, state.best.objective)
        if truncated:
            break

    if not state.trace:
        state.snapshot()
    return _finish(
        "local", problem, state.best, state.trace, state.evaluations, state.failed, truncated, started
    )
