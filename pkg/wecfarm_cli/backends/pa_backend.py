"""Point-absorber far-field interaction backend."""

import numpy as np
from scipy.special import j0, y0

from ..hydro import CylinderGeometry, HydroSet, SingleBodyCoeffs
from .base import BackendMetadata, HydroBackend, distance_matrix, incident_phase


class PointAbsorberBackend(HydroBackend):
    """
    Cross-coupling from the far-field radiation impedance of a point absorber.

    Z_pq = b_iso [J0(k d_pq) - i Y0(k d_pq)] for p != q; excitation carries
    only the incident-wave phase at each body.
    """

    METADATA = BackendMetadata(
        name="pa",
        display_name="Point absorber",
        description="Bessel-kernel far-field coupling; cheap tier for optimization",
        interacting=True,
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
        b = data.radiation_damping
        A = data.added_mass * np.eye(n)
        B = b * np.eye(n)
        if n > 1:
            kd = k * distance_matrix(points)
            off = ~np.eye(n, dtype=bool)
            B[off] = b * j0(kd[off])
            A[off] = -b * y0(kd[off]) / omega
        return HydroSet(
            omega=omega,
            A=A,
            B=B,
            X=data.excitation * incident_phase(points, k, heading),
        )
