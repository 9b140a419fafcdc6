"""
Study specifications, canonical layouts and the preset registry.

A study expands into cases (per-case overrides x climates x p_limits) and
runs the solver the preset asks for on each of them.
"""

import logging
import math
import tomllib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .backends import BackendFactory, HydroBackend
from .cache import CoefficientCache
from .config import SimulationSettings, _flatten
from .dynamics import (
    FarmDesign,
    PerformanceReport,
    PowerMatrix,
    PtoParams,
    capacity_factor_matrix,
    evaluate_performance,
    frequency_response,
    power_matrix,
    q_factor,
    rated_power,
    weighted_power,
)
from .errors import InvalidArgumentError, UnknownPresetError, WecFarmError
from .hydro import CylinderGeometry
from .optimize import (
    CONTROL,
    LAYOUT,
    PLANT,
    GAConfig,
    LocalConfig,
    OptimizationProblem,
    OptResult,
    VariableSpace,
    run_ga,
    run_local,
)
from .scheduler import EvaluationScheduler
from .waves import (
    DEFAULT_N_YEARS,
    RegularWave,
    SiteClimate,
    load_site_climate,
    regular_climate,
    synth_site_climate,
)

logger = logging.getLogger(__name__)

SOLVERS = ("ga", "local", "ga+local", "evaluate", "sweep", "capacity", "smoothing", "regular-sweep")
FAR_SPACING_FACTOR = 5.0
SYNTH_PREFIX = "synth:"


# Layouts ----------------------------------------------------------------


def row_layout(n: int, spacing: float) -> List[Tuple[float, float]]:
    """Devices along the wave direction."""
    return [(i * spacing, 0.0) for i in range(n)]


def column_layout(n: int, spacing: float) -> List[Tuple[float, float]]:
    """Devices across the wave direction, alternating sides of body 1."""
    points = [(0.0, 0.0)]
    for i in range(1, n):
        k = (i + 1) // 2
        points.append((0.0, k * spacing if i % 2 else -k * spacing))
    return points


def symmetric_layout(n: int, spacing: float) -> List[Tuple[float, float]]:
    """Chevron opening down-wave, mirror-symmetric about the wave axis."""
    points = [(0.0, 0.0)]
    for i in range(1, n):
        k = (i + 1) // 2
        sign = 1.0 if i % 2 else -1.0
        points.append((k * spacing * 0.5, sign * k * spacing * math.sqrt(3.0) / 2.0))
    return points


LAYOUTS: Dict[str, Callable[[int, float], List[Tuple[float, float]]]] = {
    "row": row_layout,
    "column": column_layout,
    "close-symmetric": symmetric_layout,
    "far-symmetric": lambda n, s: symmetric_layout(n, FAR_SPACING_FACTOR * s),
}


def canonical_layout(kind: str, n: int, spacing: float) -> List[Tuple[float, float]]:
    if kind not in LAYOUTS:
        raise InvalidArgumentError(
            f"unknown layout '{kind}'. Available layouts: {', '.join(LAYOUTS)}"
        )
    return LAYOUTS[kind](n, spacing)


def smoothing_layouts(spacing: float) -> Dict[str, List[Tuple[float, float]]]:
    """Five close three-device layouts at the minimum spacing."""
    s = spacing
    h = s * math.sqrt(3.0) / 2.0
    return {
        "row": [(0.0, 0.0), (s, 0.0), (2 * s, 0.0)],
        "column": [(0.0, 0.0), (0.0, s), (0.0, -s)],
        "triangle": [(0.0, 0.0), (h, s / 2), (h, -s / 2)],
        "chevron": [(0.0, 0.0), (s, s), (2 * s, 0.0)],
        "ell": [(0.0, 0.0), (s, 0.0), (s, s)],
    }


# Inputs -----------------------------------------------------------------


def parse_p_limit(value: Any) -> Optional[float]:
    """W value, or None for "none"/"inf"."""
    if value is None:
        return None
    if isinstance(value, str):
        if value.strip().lower() in ("none", "inf", ""):
            return None
        value = float(value)
    value = float(value)
    if math.isinf(value):
        return None
    if value < 0:
        raise InvalidArgumentError(f"p_limit must be nonnegative, got {value}")
    return value


def parse_wave(text: Optional[str]) -> Optional[RegularWave]:
    """'regular:H,T' gives a RegularWave; 'irregular' or None gives None."""
    if text is None or text.strip().lower() == "irregular":
        return None
    kind, _, params = text.partition(":")
    if kind.strip().lower() != "regular":
        raise InvalidArgumentError(f"wave must be 'irregular' or 'regular:H,T', got '{text}'")
    try:
        height, period = (float(v) for v in params.split(","))
    except ValueError as e:
        raise InvalidArgumentError(f"regular wave needs 'regular:H,T', got '{text}'") from e
    return RegularWave(height, period)


def resolve_climate(
    ref: str, seed: int, n_years: int = DEFAULT_N_YEARS, base_dir: Optional[Path] = None
) -> SiteClimate:
    """
    Climate from a reference: "synth:<profile>[:<seed>]" or a CSV path.

    Relative paths resolve against base_dir when given.
    """
    if ref.startswith(SYNTH_PREFIX):
        parts = ref[len(SYNTH_PREFIX):].split(":")
        synth_seed = int(parts[1]) if len(parts) > 1 else seed
        return synth_site_climate(parts[0], synth_seed, n_years)
    path = Path(ref)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    if not path.exists():
        raise InvalidArgumentError(f"climate file not found: {path}")
    return load_site_climate(path)


# Study specs -------------------------------------------------------------


def _unflatten(values: Dict[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for key, value in values.items():
        node = nested
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return nested


@dataclass
class StudySpec:
    """
    Declarative description of a study.

    Inactive design variables take the fixed values below. cases holds
    per-case overrides (each with a "label"); every case runs on every
    climate and p_limit unless it overrides them.
    """

    preset: str
    seed: int = 0
    solver: str = "ga+local"
    n_wec: int = 1
    active: Tuple[str, ...] = (CONTROL,)
    radius: float = 5.0
    aspect_ratio: float = 5.0
    b_pto: float = 2.5e5
    k_pto: float = 0.0
    layout: Optional[List[List[float]]] = None
    layout_kind: str = "row"
    spacing: Optional[float] = None
    climates: Tuple[str, ...] = ("synth:high-energy",)
    wave: str = "irregular"
    backend: str = "pa"
    p_limits: Tuple[Optional[float], ...] = (None,)
    ga: Dict[str, Any] = field(default_factory=dict)
    local: Dict[str, Any] = field(default_factory=dict)
    bounds: Dict[str, List[float]] = field(default_factory=dict)
    sweep: Dict[str, Any] = field(default_factory=dict)
    cases: Tuple[Dict[str, Any], ...] = ()

    def __post_init__(self):
        if self.seed is None:
            raise InvalidArgumentError("a study needs a seed")
        if self.solver not in SOLVERS:
            raise InvalidArgumentError(
                f"unknown solver '{self.solver}'. Available: {', '.join(SOLVERS)}"
            )
        self.seed = int(self.seed)
        self.active = tuple(self.active)
        self.climates = tuple(self.climates)
        self.p_limits = tuple(parse_p_limit(p) for p in self.p_limits)
        self.cases = tuple(dict(c) for c in self.cases)
        parse_wave(self.wave)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StudySpec":
        """Build from a (possibly dotted-key) mapping; unknown keys are rejected."""
        data = _unflatten(data)
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidArgumentError(f"unknown study key(s): {', '.join(sorted(unknown))}")
        if "preset" not in data:
            raise InvalidArgumentError("study needs a 'preset' name")
        return cls(**data)

    @classmethod
    def from_toml(cls, path: Union[str, Path]) -> "StudySpec":
        """Read the [study] table of a TOML file, layered over the named preset."""
        path = Path(path)
        try:
            with open(path, "rb") as f:
                document = tomllib.load(f)
        except FileNotFoundError as e:
            raise InvalidArgumentError(f"study file not found: {path}") from e
        except tomllib.TOMLDecodeError as e:
            raise InvalidArgumentError(f"invalid TOML in {path}: {e}") from e
        table = document.get("study", document)
        preset = table.get("preset")
        if preset is None:
            return cls.from_dict(table)
        return get_preset(preset).updated(_flatten(table))

    def updated(self, overrides: Dict[str, Any]) -> "StudySpec":
        """Copy with dotted-key overrides applied; None values are ignored."""
        data = self.to_dict()
        for key, value in _unflatten(
            {k: v for k, v in overrides.items() if v is not None}
        ).items():
            if key not in data:
                raise InvalidArgumentError(f"unknown study key '{key}'")
            if isinstance(data[key], dict) and isinstance(value, dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        return StudySpec.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["active"] = list(self.active)
        data["climates"] = list(self.climates)
        data["p_limits"] = ["none" if p is None else p for p in self.p_limits]
        data["cases"] = [dict(c) for c in self.cases]
        return data

    def expand(self) -> List[Tuple[str, "StudySpec"]]:
        """(label, case spec) pairs; each case spec has one climate and one p_limit."""
        variants = self.cases or ({"label": self.layout_kind if self.n_wec > 1 else "base"},)
        expanded = []
        for variant in variants:
            overrides = {k: v for k, v in variant.items() if k != "label"}
            case = replace(self, cases=(), **overrides) if overrides else replace(self, cases=())
            label = str(variant.get("label", f"case{len(expanded) + 1}"))
            for climate in case.climates:
                for p_limit in case.p_limits:
                    p_text = "none" if p_limit is None else f"{p_limit:g}"
                    expanded.append(
                        (
                            f"{label}|{climate}|p={p_text}",
                            replace(case, climates=(climate,), p_limits=(p_limit,)),
                        )
                    )
        return expanded

    def design(self, settings: SimulationSettings) -> FarmDesign:
        geom = CylinderGeometry(self.radius, self.aspect_ratio, settings.depth)
        if self.layout:
            layout = [tuple(p) for p in self.layout]
        else:
            spacing = self.spacing or 2.0 * self.radius + settings.safety_distance
            layout = canonical_layout(self.layout_kind, self.n_wec, spacing)
        return FarmDesign(geom, PtoParams(self.b_pto, self.k_pto), tuple(layout))

    def ga_config(self) -> GAConfig:
        return GAConfig(**self.ga)

    def local_config(self) -> LocalConfig:
        return LocalConfig(**{k: v for k, v in self.local.items() if k not in ("enabled", "budget")})


# Presets ----------------------------------------------------------------

P_LIMITS_CONTROL = (50e3, 150e3, 250e3, 350e3, None)
P_LIMITS_SMALL = (1e3, 1e4, 1e5, None)
BOTH_CLIMATES = ("synth:high-energy", "synth:low-energy")

# alternate ids accepted wherever a preset name is
PRESET_ALIASES = {
    "table1-concurrent": "concurrent",
    "table3-control": "control",
    "fig5-landscape": "landscape",
}


def _preset_specs() -> Dict[str, StudySpec]:
    return {
        "concurrent": StudySpec(
            preset="concurrent",
            solver="ga",
            n_wec=3,
            active=(PLANT, LAYOUT),
            b_pto=5e5,
            k_pto=-5e3,
            climates=BOTH_CLIMATES,
        ),
        "control": StudySpec(
            preset="control",
            solver="local",
            active=(CONTROL,),
            radius=5.0,
            aspect_ratio=5.0,
            climates=BOTH_CLIMATES,
            p_limits=P_LIMITS_CONTROL,
        ),
        "plant": StudySpec(
            preset="plant",
            solver="local",
            active=(PLANT,),
            b_pto=5e5,
            k_pto=-500.0,
            climates=BOTH_CLIMATES,
            p_limits=(1e3, 1e5, 1e8, None),
        ),
        "control-plant": StudySpec(
            preset="control-plant",
            solver="local",
            n_wec=5,
            active=(CONTROL,),
            layout_kind="close-symmetric",
            p_limits=P_LIMITS_SMALL,
            cases=({"label": "R5", "radius": 5.0}, {"label": "R10", "radius": 10.0}),
        ),
        "control-site": StudySpec(
            preset="control-site",
            solver="local",
            n_wec=5,
            active=(CONTROL,),
            layout_kind="close-symmetric",
            climates=("synth:low-energy",),
            p_limits=P_LIMITS_SMALL,
        ),
        "control-layout": StudySpec(
            preset="control-layout",
            solver="local",
            n_wec=5,
            active=(CONTROL,),
            p_limits=P_LIMITS_SMALL,
            cases=(
                {"label": "close-symmetric", "layout_kind": "close-symmetric"},
                {"label": "row", "layout_kind": "row"},
            ),
        ),
        "plant-layout": StudySpec(
            preset="plant-layout",
            solver="local",
            n_wec=5,
            active=(PLANT,),
            b_pto=1e5,
            k_pto=-5e5,
            cases=tuple(
                {"label": kind, "layout_kind": kind}
                for kind in ("close-symmetric", "column", "row", "far-symmetric")
            ),
        ),
        "layout3": StudySpec(
            preset="layout3",
            solver="ga",
            n_wec=3,
            active=(LAYOUT,),
            cases=(
                {"label": "R2-AR1", "radius": 2.0, "aspect_ratio": 1.0, "b_pto": 5e5, "k_pto": -5e3},
                {"label": "R6-AR3", "radius": 6.0, "aspect_ratio": 3.0, "b_pto": 5e5, "k_pto": -5e3},
                {"label": "R2-AR1-soft", "radius": 2.0, "aspect_ratio": 1.0, "b_pto": 2e3, "k_pto": -2e3},
                {
                    "label": "R2-AR1-low",
                    "radius": 2.0,
                    "aspect_ratio": 1.0,
                    "b_pto": 5e5,
                    "k_pto": -5e3,
                    "climates": ("synth:low-energy",),
                },
            ),
        ),
        "capacity": StudySpec(
            preset="capacity",
            solver="capacity",
            b_pto=2.5e5,
            k_pto=-5e5,
            climates=BOTH_CLIMATES,
        ),
        "smoothing": StudySpec(
            preset="smoothing",
            solver="smoothing",
            n_wec=3,
            radius=2.0,
            aspect_ratio=1.0,
            b_pto=5e4,
            k_pto=0.0,
        ),
        "regular-sweep": StudySpec(
            preset="regular-sweep",
            solver="regular-sweep",
            radius=2.0,
            aspect_ratio=1.0,
            b_pto=5e4,
            k_pto=0.0,
            sweep={"height": 2.0, "periods": [4.0, 6.0, 8.0, 10.0, 12.0, 14.0]},
        ),
        "landscape": StudySpec(
            preset="landscape",
            solver="sweep",
            n_wec=2,
            radius=2.0,
            aspect_ratio=1.0,
            b_pto=5e4,
            k_pto=0.0,
            sweep={"x_max": 200.0, "y_max": 200.0, "step": 10.0},
        ),
    }


def available_presets() -> List[str]:
    return sorted(_preset_specs())


def get_preset(name: str) -> StudySpec:
    """
    Default specification of a named preset.

    Raises:
        UnknownPresetError: With the list of available presets
    """
    presets = _preset_specs()
    name = PRESET_ALIASES.get(name, name)
    if name not in presets:
        raise UnknownPresetError(name, [*presets, *PRESET_ALIASES])
    return presets[name]


# Results ----------------------------------------------------------------


@dataclass
class CaseResult:
    """Outcome of one expanded case."""

    label: str
    climate_id: str
    p_limit: Optional[float]
    design: Optional[FarmDesign] = None
    report: Optional[PerformanceReport] = None
    power_matrix: Optional[PowerMatrix] = None
    ga: Optional[OptResult] = None
    local: Optional[OptResult] = None
    rows: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def optimum(self) -> Optional[OptResult]:
        return self.local or self.ga

    @property
    def truncated(self) -> bool:
        return any(r.truncated for r in (self.ga, self.local) if r is not None)

    def summary(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "case": self.label,
            "climate": self.climate_id,
            "p_limit_W": self.p_limit,
        }
        if self.design is not None:
            row.update(
                radius_m=self.design.geom.radius,
                aspect_ratio=self.design.geom.aspect_ratio,
                draft_m=self.design.geom.draft,
                b_pto=self.design.pto.b_pto,
                k_pto=self.design.pto.k_pto,
            )
        if self.report is not None:
            row.update(
                power_W=self.report.weighted_power,
                p_v=self.report.p_v,
                q_factor=self.report.q_factor,
                natural_frequency=self.report.natural_frequency,
                capacity_factor=self.report.capacity_factor,
            )
        if self.optimum is not None:
            row.update(feasible=self.optimum.feasible, truncated=self.truncated)
        return row

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "climate": self.climate_id,
            "p_limit": self.p_limit,
            "design": self.design.to_dict() if self.design else None,
            "report": self.report.to_dict() if self.report else None,
            "ga": self.ga.to_dict() if self.ga else None,
            "local": self.local.to_dict() if self.local else None,
            "rows": self.rows,
        }


@dataclass
class StudyResult:
    spec: StudySpec
    cases: List[CaseResult]
    field: Optional[pd.DataFrame] = None
    warnings: Tuple[str, ...] = ()

    @property
    def truncated(self) -> bool:
        return any(c.truncated for c in self.cases)

    @property
    def feasible(self) -> bool:
        results = [c.optimum for c in self.cases if c.optimum is not None]
        return all(r.feasible for r in results)

    def table(self) -> pd.DataFrame:
        return pd.DataFrame([c.summary() for c in self.cases])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "preset": self.spec.preset,
            "seed": self.spec.seed,
            "spec": self.spec.to_dict(),
            "truncated": self.truncated,
            "feasible": self.feasible,
            "cases": [c.to_dict() for c in self.cases],
            "warnings": list(self.warnings),
        }


# Runner -----------------------------------------------------------------


class StudyRunner:
    """Runs every case of a study with one backend and one coefficient cache."""

    def __init__(
        self,
        spec: StudySpec,
        settings: Optional[SimulationSettings] = None,
        cache: Optional[CoefficientCache] = None,
        progress=None,
        base_dir: Optional[Path] = None,
        n_years: int = DEFAULT_N_YEARS,
    ):
        """
        Initialize the runner.

        Args:
            spec: Study specification
            settings: Numerical settings
            cache: Shared coefficient cache
            progress: Object with step(description), e.g. StudyProgress
            base_dir: Directory for relative climate paths
            n_years: Years of synthetic climates
        """
        self.spec = spec
        self.settings = settings or SimulationSettings()
        self.cache = cache if cache is not None else CoefficientCache()
        self.progress = progress
        self.base_dir = base_dir
        self.n_years = n_years
        self.scheduler = EvaluationScheduler(self.settings.threads)
        self._climates: Dict[str, SiteClimate] = {}
        self.backend = self._backend(spec.backend)

    def _backend(self, name: str) -> HydroBackend:
        return BackendFactory.create_backend(
            name,
            cache=self.cache,
            n_terms=self.settings.n_terms,
            order=self.settings.ms_order,
            rho=self.settings.rho,
            gravity=self.settings.gravity,
        )

    def climate(self, ref: str) -> SiteClimate:
        wave = parse_wave(self.spec.wave)
        if wave is not None:
            return regular_climate(wave)
        if ref not in self._climates:
            self._climates[ref] = resolve_climate(ref, self.spec.seed, self.n_years, self.base_dir)
        return self._climates[ref]

    def _step(self, description: str):
        if self.progress is not None:
            self.progress.step(description)
        logger.info(description)

    def run(self) -> StudyResult:
        handler = {
            "capacity": self._run_capacity,
            "smoothing": self._run_smoothing,
            "regular-sweep": self._run_regular_sweep,
            "sweep": self._run_landscape,
        }.get(self.spec.solver)
        if handler is not None:
            cases, table = handler()
        else:
            cases = [self._run_case(label, case) for label, case in self.spec.expand()]
            table = None
        self.cache.flush()
        warnings = tuple(
            dict.fromkeys(
                w for c in cases if c.report is not None for w in c.report.warnings
            )
        )
        return StudyResult(self.spec, cases, table, warnings)

    def problem(self, case: StudySpec, climate: SiteClimate) -> OptimizationProblem:
        bounds = {k: tuple(v) for k, v in case.bounds.items()}
        space = VariableSpace(case.active, case.n_wec, bounds)
        return OptimizationProblem(
            space,
            case.design(self.settings),
            climate,
            case.p_limits[0],
            self.backend,
            self.settings,
            seed=case.seed,
            scheduler=self.scheduler,
        )

    def _report(self, case: CaseResult, climate: SiteClimate, rated: Optional[float] = None):
        if case.design is None:
            return
        try:
            case.report, case.power_matrix = evaluate_performance(
                case.design,
                climate,
                case.p_limit,
                self.backend,
                self.settings,
                rated=rated,
                scheduler=self.scheduler,
            )
        except WecFarmError as e:
            logger.warning("Could not evaluate %s: %s", case.label, e)

    def _run_case(self, label: str, case: StudySpec) -> CaseResult:
        climate = self.climate(case.climates[0])
        result = CaseResult(label, climate.site_id, case.p_limits[0])
        if case.solver == "evaluate":
            self._step(f"Evaluating {label}")
            result.design = case.design(self.settings)
            self._report(result, climate)
            return result

        problem = self.problem(case, climate)
        x0 = None
        if case.solver in ("ga", "ga+local"):
            self._step(f"GA on {label}")
            result.ga = run_ga(problem, case.ga_config(), getattr(self.progress, "on_generation", None))
            x0 = result.ga.best_x
        if case.solver in ("local", "ga+local") and case.local.get("enabled", True):
            self._step(f"Local search on {label}")
            config = case.local_config()
            result.local = run_local(problem, x0, config, case.local.get("budget"))
        if result.optimum is None:
            return result
        result.design = result.optimum.best_design
        if result.optimum.feasible:
            self._report(result, climate)
        return result

    def _run_capacity(self) -> Tuple[List[CaseResult], pd.DataFrame]:
        """Rated power from the first climate; capacity-factor maps on every climate."""
        spec = self.spec
        design = spec.design(self.settings)
        p_limit = spec.p_limits[0]
        reference = self.climate(spec.climates[0])
        response = frequency_response(design, self.backend, self.settings, scheduler=self.scheduler)
        reference_pm = power_matrix(design, reference, p_limit, self.backend, self.settings, response=response)
        rated = rated_power(reference_pm, reference)
        self._step(f"Rated power {rated:.4g} W from {reference.site_id}")

        cases, frames = [], []
        for ref in spec.climates:
            climate = self.climate(ref)
            result = CaseResult(f"capacity|{ref}", climate.site_id, p_limit, design=design)
            self._report(result, climate, rated)
            if result.power_matrix is not None:
                cf = capacity_factor_matrix(result.power_matrix, climate, rated)
                grid = result.power_matrix.grid
                hs, tp = np.meshgrid(grid.hs_values, grid.tp_values, indexing="ij")
                frames.append(
                    pd.DataFrame(
                        {
                            "case": result.label,
                            "hs_m": hs.ravel(),
                            "tp_s": tp.ravel(),
                            "capacity_factor": cf.ravel(),
                        }
                    )
                )
            cases.append(result)
        return cases, pd.concat(frames, ignore_index=True) if frames else None

    def _run_smoothing(self) -> Tuple[List[CaseResult], pd.DataFrame]:
        """q-factor of five close layouts, irregular climate vs regular wave at the modal period."""
        spec = self.spec
        irregular = self.climate(spec.climates[0])
        if irregular.wave_type == "regular":
            raise InvalidArgumentError("the smoothing study needs an irregular climate")
        modal = irregular.modal_bin()
        regular = regular_climate(RegularWave(modal.hs, modal.tp))
        base = spec.design(self.settings)
        spacing = 2.0 * spec.radius + self.settings.safety_distance

        rows, cases = [], []
        for name, layout in smoothing_layouts(spacing).items():
            self._step(f"Smoothing layout {name}")
            design = replace(base, layout=tuple(layout))
            q_irr = q_factor(design, irregular, self.backend, self.settings)
            q_reg = q_factor(design, regular, self.backend, self.settings)
            row = {"layout": name, "q_irregular": q_irr, "q_regular": q_reg}
            rows.append(row)
            cases.append(CaseResult(f"smoothing|{name}", irregular.site_id, None, design=design, rows=[row]))
        return cases, pd.DataFrame(rows)

    def _run_regular_sweep(self) -> Tuple[List[CaseResult], pd.DataFrame]:
        """Optimal plant (fixed control) and optimal control (fixed plant) per regular-wave period."""
        spec = self.spec
        height = float(spec.sweep.get("height", 2.0))
        rows, cases = [], []
        for period in spec.sweep.get("periods", [8.0]):
            climate = regular_climate(RegularWave(height, float(period)))
            row: Dict[str, Any] = {"period_s": float(period), "omega": 2.0 * math.pi / float(period)}
            for block in (PLANT, CONTROL):
                self._step(f"Optimal {block} at T={period:g} s")
                case = replace(spec, active=(block,), wave="irregular")
                result = CaseResult(f"{block}|T={period:g}", climate.site_id, None)
                result.local = run_local(self.problem(case, climate), None, case.local_config())
                result.design = result.local.best_design
                if result.design is not None:
                    if block == PLANT:
                        row.update(radius_m=result.design.geom.radius, aspect_ratio=result.design.geom.aspect_ratio)
                    else:
                        row.update(b_pto=result.design.pto.b_pto, k_pto=result.design.pto.k_pto)
                cases.append(result)
            rows.append(row)
        return cases, pd.DataFrame(rows)

    def _run_landscape(self) -> Tuple[List[CaseResult], pd.DataFrame]:
        """Farm power as body 2 moves over a rectangular grid."""
        spec = self.spec
        frame = power_landscape(
            spec.design(self.settings),
            self.climate(spec.climates[0]),
            self.backend,
            self.settings,
            x_max=float(spec.sweep.get("x_max", 200.0)),
            y_max=float(spec.sweep.get("y_max", 200.0)),
            step=float(spec.sweep.get("step", 10.0)),
            x_min=float(spec.sweep.get("x_min", 0.0)),
            p_limit=spec.p_limits[0],
            scheduler=self.scheduler,
            progress=self.progress,
        )
        return [], frame


def power_landscape(
    design: FarmDesign,
    climate: SiteClimate,
    backend: Union[str, HydroBackend],
    settings: Optional[SimulationSettings] = None,
    x_max: float = 200.0,
    y_max: float = 200.0,
    step: float = 10.0,
    x_min: float = 0.0,
    p_limit: Optional[float] = None,
    scheduler: Optional[EvaluationScheduler] = None,
    progress=None,
) -> pd.DataFrame:
    """
    Two-device power field: body 1 at the origin, body 2 on a grid.

    Positions with overlapping bodies get NaN power.

    Returns:
        DataFrame with x_m, y_m, distance_m, farm_W, q_factor
    """
    settings = settings or SimulationSettings()
    if not step > 0:
        raise InvalidArgumentError("sweep step must be positive")
    xs = np.arange(x_min, x_max + step / 2, step)
    ys = np.arange(-y_max, y_max + step / 2, step)
    single = replace(design, layout=((0.0, 0.0),))
    isolated = weighted_power(
        power_matrix(single, climate, p_limit, backend, settings, scheduler=scheduler), climate
    )
    if progress is not None:
        progress.start(len(xs) * len(ys), "Sweeping body 2")

    rows = []
    for x in xs:
        for y in ys:
            d = float(math.hypot(x, y))
            farm = float("nan")
            if d > 2.0 * design.geom.radius:
                candidate = replace(design, layout=((0.0, 0.0), (float(x), float(y))))
                pm = power_matrix(candidate, climate, p_limit, backend, settings, scheduler=scheduler)
                farm = weighted_power(pm, climate)
            q = farm / (2.0 * isolated) if isolated > 0 else float("nan")
            rows.append({"x_m": float(x), "y_m": float(y), "distance_m": d, "farm_W": farm, "q_factor": q})
            if progress is not None:
                progress.update()
    if progress is not None:
        progress.complete("Sweep complete")
    return pd.DataFrame(rows)


def run_study(
    spec: StudySpec,
    settings: Optional[SimulationSettings] = None,
    cache: Optional[CoefficientCache] = None,
    progress=None,
    base_dir: Optional[Path] = None,
    n_years: int = DEFAULT_N_YEARS,
) -> StudyResult:
    """
    Run every case of a study.

    Args:
        spec: Study specification (see get_preset)
        settings: Numerical settings
        cache: Shared coefficient cache
        progress: Progress reporter with step(); sweeps also use start/update/complete
        base_dir: Directory for relative climate paths
        n_years: Years of synthetic climates

    Returns:
        StudyResult
    """
    return StudyRunner(spec, settings, cache, progress, base_dir, n_years).run()
