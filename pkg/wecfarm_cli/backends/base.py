"""Base interface for array hydrodynamics backends."""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..cache import CoefficientCache
from ..errors import GeometryError, InvalidArgumentError
from ..hydro import (
    DEFAULT_N_TERMS,
    GRAVITY,
    MIN_N_TERMS,
    RHO,
    CylinderGeometry,
    HydroSet,
    cache_key,
    isolated_heave_coefficients,
    wavenumber,
)

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 3


class BackendMetadata:
    """
    Self-description of a hydrodynamics backend.

    Lets the factory discover backends and the CLI list them.
    """

    def __init__(
        self,
        name: str,
        display_name: str,
        description: str,
        interacting: bool,
        options: Optional[List[Dict[str, Any]]] = None,
    ):
        """
        Initialize backend metadata.

        Args:
            name: Variant name used on the command line (e.g. "pa")
            display_name: Human-readable name
            description: One-line description
            interacting: Whether bodies influence each other
            options: Constructor options with "key" and "default" entries
        """
        self.name = name
        self.display_name = display_name
        self.description = description
        self.interacting = interacting
        self.options = options or []


def as_layout(layout: Sequence[Sequence[float]]) -> np.ndarray:
    """Convert a layout to an (n, 2) float array."""
    points = np.asarray(layout, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 1:
        raise InvalidArgumentError("layout must be a non-empty list of (x, y) points")
    if not np.all(np.isfinite(points)):
        raise InvalidArgumentError("layout coordinates must be finite")
    return points


def distance_matrix(points: np.ndarray) -> np.ndarray:
    """Pairwise centre distances."""
    if len(points) < 2:
        return np.zeros((len(points), len(points)))
    return squareform(pdist(points))


def overlapping_pairs(points: np.ndarray, radius: float) -> List[Tuple[int, int, float]]:
    """Pairs (p, q, d) with d <= 2R, 1-based body numbers."""
    distances = distance_matrix(points)
    pairs = []
    for p in range(len(points)):
        for q in range(p + 1, len(points)):
            if distances[p, q] <= 2.0 * radius:
                pairs.append((p + 1, q + 1, float(distances[p, q])))
    return pairs


def incident_phase(points: np.ndarray, k: float, heading: float) -> np.ndarray:
    """Phase of a unit plane wave at each body centre."""
    projection = points[:, 0] * np.cos(heading) + points[:, 1] * np.sin(heading)
    return np.exp(-1j * k * projection)


class HydroBackend(ABC):
    """
    Abstract base class for array hydrodynamics.

    Subclasses define METADATA and _assemble(); single-body data is computed
    through single_body() so every backend shares the coefficient cache.
    Placing a subclass in wecfarm_cli/backends/ makes it discoverable.
    """

    METADATA: Optional[BackendMetadata] = None

    def __init__(
        self,
        n_terms: int = DEFAULT_N_TERMS,
        order: int = DEFAULT_ORDER,
        cache: Optional[CoefficientCache] = None,
        rho: float = RHO,
        gravity: float = GRAVITY,
    ):
        """
        Initialize the backend.

        Args:
            n_terms: Eigenfunction terms per region in the single-body solve
            order: Highest partial-wave order (interaction theory only)
            cache: Shared coefficient cache (in-memory cache if None)
            rho: Water density (kg/m^3)
            gravity: Gravitational acceleration (m/s^2)
        """
        if n_terms < MIN_N_TERMS:
            raise InvalidArgumentError(f"n_terms must be at least {MIN_N_TERMS}")
        if order < 0:
            raise InvalidArgumentError("partial-wave order must be nonnegative")
        self.n_terms = int(n_terms)
        self.order = int(order)
        self.cache = cache if cache is not None else CoefficientCache()
        self.rho = rho
        self.gravity = gravity

    @property
    def variant(self) -> str:
        return self.METADATA.name

    @property
    def interacting(self) -> bool:
        return self.METADATA.interacting

    def describe(self) -> Dict[str, Any]:
        return {"variant": self.variant, "n_terms": self.n_terms, "order": self.order}

    def with_cache(self, cache: CoefficientCache) -> "HydroBackend":
        """Same backend settings bound to another cache."""
        return type(self)(self.n_terms, self.order, cache, self.rho, self.gravity)

    def single_body(self, geom: CylinderGeometry, omega: float):
        """Cached single-body data for this backend."""
        key = cache_key(geom, omega, self, rho=self.rho, gravity=self.gravity)
        return self.cache.get_or_compute(key, lambda: self._compute_single(geom, omega))

    def _compute_single(self, geom: CylinderGeometry, omega: float):
        return isolated_heave_coefficients(
            geom, omega, self.n_terms, rho=self.rho, gravity=self.gravity
        )

    def array_hydro(
        self,
        layout: Sequence[Sequence[float]],
        geom: CylinderGeometry,
        omega: float,
        heading: float = 0.0,
    ) -> HydroSet:
        """
        Farm coefficients at one frequency.

        Args:
            layout: Body centres (m)
            geom: Common geometry of all bodies
            omega: Angular frequency (rad/s)
            heading: Wave propagation direction (rad, 0 = +x)

        Returns:
            HydroSet with A, B (n x n) and X (n)

        Raises:
            GeometryError: If bodies overlap
        """
        points = as_layout(layout)
        overlaps = overlapping_pairs(points, geom.radius)
        if overlaps:
            listing = ", ".join(f"{p}-{q} ({d:.2f} m)" for p, q, d in overlaps)
            raise GeometryError(f"overlapping bodies: {listing}", pairs=overlaps)
        k = wavenumber(omega, geom.depth, self.gravity)
        data = self.single_body(geom, omega)
        return self._assemble(points, geom, float(omega), k, heading, data)

    @abstractmethod
    def _assemble(
        self,
        points: np.ndarray,
        geom: CylinderGeometry,
        omega: float,
        k: float,
        heading: float,
        data,
    ) -> HydroSet:
        """
        Build the HydroSet from cached single-body data.

        Args:
            points: (n, 2) body centres
            geom: Body geometry
            omega: Angular frequency
            k: Wavenumber
            heading: Wave direction
            data: Result of single_body()
        """
        pass
