"""Non-interacting array backend."""

import numpy as np

from ..hydro import CylinderGeometry, HydroSet, SingleBodyCoeffs
from .base import BackendMetadata, HydroBackend, incident_phase


class IsolatedBackend(HydroBackend):
    """Every body sees only the incident wave and its own radiation."""

    METADATA = BackendMetadata(
        name="isolated",
        display_name="Isolated",
        description="No hydrodynamic interaction; q-factor is 1 by construction",
        interacting=False,
        options=[{"key": "n_terms", "default": 40}],
    )

    def _assemble(
        self,
        points: np.ndarray,
        geom: CylinderGeometry,
        omega: float,
        k: float,
        heading: float,
        data: SingleBodyCoeffs,
    ) -> HydroSet:
        n = len(points)
        eye = np.eye(n)
        return HydroSet(
            omega=omega,
            A=data.added_mass * eye,
            B=data.radiation_damping * eye,
            X=data.excitation * incident_phase(points, k, heading),
        )
