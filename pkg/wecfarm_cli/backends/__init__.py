"""Array hydrodynamics backends of increasing fidelity."""

from typing import Sequence, Union

from ..hydro import CylinderGeometry, HydroSet
from .base import BackendMetadata, HydroBackend
from .factory import BackendFactory
from .isolated_backend import IsolatedBackend
from .ms_backend import MultipleScatteringBackend
from .pa_backend import PointAbsorberBackend


def array_hydro(
    layout: Sequence[Sequence[float]],
    geom: CylinderGeometry,
    omega: float,
    backend: Union[str, HydroBackend],
    heading: float = 0.0,
) -> HydroSet:
    """
    Farm hydrodynamic coefficients at one frequency.

    Args:
        layout: Body centres (m)
        geom: Common cylinder geometry
        omega: Angular frequency (rad/s)
        backend: HydroBackend instance or variant name
        heading: Wave propagation direction (rad)

    Returns:
        HydroSet
    """
    if isinstance(backend, str):
        backend = BackendFactory.create_backend(backend)
    return backend.array_hydro(layout, geom, omega, heading)


__all__ = [
    "BackendFactory",
    "BackendMetadata",
    "HydroBackend",
    "IsolatedBackend",
    "MultipleScatteringBackend",
    "PointAbsorberBackend",
    "array_hydro",
]
