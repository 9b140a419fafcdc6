"""wecfarm - frequency-domain wave energy farm simulation and co-design."""

__version__ = "0.1.0"

from .backends import (
    BackendFactory,
    HydroBackend,
    IsolatedBackend,
    MultipleScatteringBackend,
    PointAbsorberBackend,
    array_hydro,
)
from .cache import CoefficientCache
from .config import SimulationSettings, WecFarmConfig
from .display import DisplayManager
from .dynamics import (
    FarmDesign,
    PerformanceReport,
    PowerMatrix,
    PtoParams,
    capacity_factor,
    evaluate_performance,
    natural_frequency,
    objective_pv,
    power_matrix,
    q_factor,
    seastate_power,
    weighted_power,
)
from .errors import WecFarmError
from .hydro import CylinderGeometry, HydroSet, cache_key
from .main import WecFarmCLI
from .optimize import OptimizationProblem, OptResult, VariableSpace, evaluate, run_ga, run_local
from .progress import StudyProgress
from .scheduler import EvaluationScheduler
from .studies import StudyResult, StudySpec, get_preset, run_study
from .waves import (
    SiteClimate,
    SpectrumParams,
    jonswap_density,
    load_site_climate,
    spectral_moment,
    synth_site_climate,
)

__all__ = [
    "BackendFactory",
    "CoefficientCache",
    "CylinderGeometry",
    "DisplayManager",
    "EvaluationScheduler",
    "FarmDesign",
    "HydroBackend",
    "HydroSet",
    "IsolatedBackend",
    "MultipleScatteringBackend",
    "OptResult",
    "OptimizationProblem",
    "PerformanceReport",
    "PointAbsorberBackend",
    "PowerMatrix",
    "PtoParams",
    "SimulationSettings",
    "SiteClimate",
    "SpectrumParams",
    "StudyProgress",
    "StudyResult",
    "StudySpec",
    "VariableSpace",
    "WecFarmCLI",
    "WecFarmConfig",
    "WecFarmError",
    "array_hydro",
    "cache_key",
    "capacity_factor",
    "evaluate",
    "evaluate_performance",
    "get_preset",
    "jonswap_density",
    "load_site_climate",
    "natural_frequency",
    "objective_pv",
    "power_matrix",
    "q_factor",
    "run_ga",
    "run_local",
    "run_study",
    "seastate_power",
    "spectral_moment",
    "synth_site_climate",
    "weighted_power",
]
