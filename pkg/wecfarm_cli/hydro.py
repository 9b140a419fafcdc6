"""
Heave hydrodynamics of truncated vertical cylinders in finite depth.

Time dependence is exp(i*omega*t) throughout, so outgoing waves are carried
by Hankel functions of the second kind. Potentials are written per unit body
velocity (radiation) or per unit incident-wave amplitude (diffraction).
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import h2vp, hankel2, ive, jv, jvp, kve

from .errors import HydroSolverError, InvalidArgumentError, InvalidGeometryError

logger = logging.getLogger(__name__)

RHO = 1025.0
GRAVITY = 9.81
DEFAULT_DEPTH = 50.0
DEFAULT_N_TERMS = 40
MIN_N_TERMS = 4

# Matched systems with a worse condition number are rejected
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class CylinderGeometry:
    """Truncated vertical cylinder; aspect_ratio is radius over draft."""

    radius: float
    aspect_ratio: float
    depth: float = DEFAULT_DEPTH

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidGeometryError(f"radius must be positive, got {self.radius}")
        if not self.aspect_ratio > 0:
            raise InvalidGeometryError(
                f"aspect ratio must be positive, got {self.aspect_ratio}"
            )
        if not self.depth > 0:
            raise InvalidGeometryError(f"water depth must be positive, got {self.depth}")
        if not self.draft < self.depth:
            raise InvalidGeometryError(
                f"draft {self.draft:g} m must be smaller than depth {self.depth:g} m"
            )

    @classmethod
    def from_draft(
        cls, radius: float, draft: float, depth: float = DEFAULT_DEPTH
    ) -> "CylinderGeometry":
        if not draft > 0:
            raise InvalidGeometryError(f"draft must be positive, got {draft}")
        return cls(radius, radius / draft, depth)

    @property
    def draft(self) -> float:
        return self.radius / self.aspect_ratio

    @property
    def waterplane_area(self) -> float:
        return math.pi * self.radius**2

    @property
    def volume(self) -> float:
        return self.waterplane_area * self.draft

    def mass(self, rho: float = RHO) -> float:
        """Neutrally buoyant body mass."""
        return rho * self.volume

    def stiffness(self, rho: float = RHO, gravity: float = GRAVITY) -> float:
        """Hydrostatic heave stiffness."""
        return rho * gravity * self.waterplane_area


def _sech2(x: float) -> float:
    t = math.tanh(x)
    return 1.0 - t * t


@lru_cache(maxsize=8192)
def _wavenumber(omega: float, depth: float, gravity: float) -> float:
    # explicit initial guess brackets the root; the residual is increasing in k
    x = omega * math.sqrt(depth / gravity)
    y = x**2 / (1.0 - math.exp(-(x**2.4908))) ** 0.4015
    k0 = y / depth

    def residual(k):
        return gravity * k * math.tanh(k * depth) - omega**2

    hi = 2.0 * k0
    for _ in range(200):
        if residual(hi) > 0.0:
            break
        hi *= 2.0
    try:
        return float(brentq(residual, 0.0, hi, xtol=1e-14 * k0, rtol=1e-14, maxiter=200))
    except (ValueError, RuntimeError) as e:
        raise HydroSolverError(f"dispersion relation not solved: {e}", omega=omega) from e


def wavenumber(omega: float, depth: float, gravity: float = GRAVITY) -> float:
    """
    Solve the linear dispersion relation omega^2 = g k tanh(k h).

    Args:
        omega: Angular frequency (rad/s)
        depth: Water depth (m)
        gravity: Gravitational acceleration (m/s^2)

    Returns:
        Positive real wavenumber (1/m)
    """
    if not omega > 0 or not depth > 0:
        raise InvalidArgumentError(
            f"wavenumber needs positive omega and depth, got ({omega}, {depth})"
        )
    return _wavenumber(float(omega), float(depth), float(gravity))


@lru_cache(maxsize=4096)
def _evanescent(omega: float, depth: float, count: int, gravity: float) -> Tuple[float, ...]:
    roots = []
    w2 = omega**2
    for n in range(1, count + 1):
        lo = (n - 0.5) * math.pi / depth
        hi = n * math.pi / depth

        def residual(kappa):
            return w2 * math.cos(kappa * depth) + gravity * kappa * math.sin(kappa * depth)

        roots.append(brentq(residual, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200))
    return tuple(roots)


def evanescent_wavenumbers(
    omega: float, depth: float, count: int, gravity: float = GRAVITY
) -> np.ndarray:
    """Roots of omega^2 = -g kappa tan(kappa h), one per interval ((n-1/2)pi/h, n pi/h)."""
    if count < 0:
        raise InvalidArgumentError("count must be nonnegative")
    return np.array(_evanescent(float(omega), float(depth), int(count), float(gravity)))


def group_velocity(omega: float, depth: float, gravity: float = GRAVITY) -> float:
    """Group velocity of linear waves (m/s)."""
    k = wavenumber(omega, depth, gravity)
    two_kh = 2.0 * k * depth
    ratio = 0.0 if two_kh > 700.0 else two_kh / math.sinh(two_kh)
    return omega / (2.0 * k) * (1.0 + ratio)


@dataclass(frozen=True)
class SingleBodyCoeffs:
    """Isolated-body heave coefficients at one frequency."""

    omega: float
    added_mass: float
    radiation_damping: float
    excitation: complex

    @property
    def impedance(self) -> complex:
        """Radiation impedance b + i omega a."""
        return complex(self.radiation_damping, self.omega * self.added_mass)


@dataclass(frozen=True)
class BodyTransfer:
    """
    Single-body data needed by interaction theory.

    scattering[m] is the outgoing H_m coefficient produced by a unit incident
    J_m partial wave; radiated_wave is the outgoing H_0 coefficient per unit
    heave velocity, in units of the incident potential scale i g / omega;
    direct_excitation is the heave force from the diffraction solve.
    """

    coeffs: SingleBodyCoeffs
    scattering: Tuple[complex, ...]
    radiated_wave: complex
    direct_excitation: complex

    @property
    def order(self) -> int:
        return len(self.scattering) - 1


@dataclass(frozen=True, eq=False)
class HydroSet:
    """Farm hydrodynamic coefficients at one frequency."""

    omega: float
    A: np.ndarray
    B: np.ndarray
    X: np.ndarray
    warnings: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in ("A", "B", "X"):
            value = np.array(getattr(self, name))
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_bodies(self) -> int:
        return int(self.X.size)


class _MatchedProblem:
    """
    Interior/exterior eigenfunction matching for one cylinder at one frequency.

    Region I lies under the body (r < a, -h < z < -d) and uses cos(lambda_n (z+h));
    region II (r > a) uses the propagating mode cosh(k (z+h))/cosh(k h) and the
    evanescent modes cos(kappa_j (z+h)).
    """

    def __init__(self, geom: CylinderGeometry, omega: float, n_terms: int, gravity: float):
        self.geom = geom
        self.omega = omega
        self.n_terms = n_terms
        a, h, d = geom.radius, geom.depth, geom.draft
        self.gap = gap = h - d

        self.k = k = wavenumber(omega, h, gravity)
        self.kappa = evanescent_wavenumbers(omega, h, n_terms - 1, gravity)
        self.lam = np.arange(n_terms) * np.pi / gap
        self.psi_norm = np.full(n_terms, gap / 2.0)
        self.psi_norm[0] = gap
        self.sign = (-1.0) ** np.arange(n_terms)

        kh = k * h
        norms = np.empty(n_terms)
        norms[0] = (kh * _sech2(kh) + math.tanh(kh)) / (2.0 * k)
        norms[1:] = h / 2.0 * (1.0 + np.sinc(2.0 * self.kappa * h / np.pi))
        self.norms = norms

        coupling = np.empty((n_terms, n_terms))
        # sinh(k gap) / cosh(k h) without overflow
        ratio = (math.exp(k * (gap - h)) - math.exp(-k * (gap + h))) / (
            1.0 + math.exp(-2.0 * kh)
        )
        coupling[:, 0] = self.sign * k * ratio / (self.lam**2 + k**2)
        scaled = self.kappa[None, :] * gap / np.pi
        n_idx = np.arange(n_terms)[:, None]
        coupling[:, 1:] = gap / 2.0 * (np.sinc(scaled - n_idx) + np.sinc(scaled + n_idx))
        self.coupling = coupling

        x = self.lam[1:] * a
        self.bessel_ratio = ive(1, x) / ive(0, x)

    def _interior_slopes(self, m: int) -> np.ndarray:
        a = self.geom.radius
        slopes = np.empty(self.n_terms)
        slopes[0] = m / a
        x = self.lam[1:] * a
        slopes[1:] = self.lam[1:] * (ive(m - 1, x) + ive(m + 1, x)) / (2.0 * ive(m, x))
        return slopes

    def _exterior_slopes(self, m: int) -> np.ndarray:
        a = self.geom.radius
        slopes = np.empty(self.n_terms, dtype=complex)
        ka = self.k * a
        slopes[0] = self.k * h2vp(m, ka) / hankel2(m, ka)
        x = self.kappa * a
        slopes[1:] = -self.kappa * (kve(m - 1, x) + kve(m + 1, x)) / (2.0 * kve(m, x))
        return slopes

    def solve(
        self,
        m: int,
        forcing_value: np.ndarray,
        forcing_slope: np.ndarray,
        interior_value: np.ndarray,
        interior_slope: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Solve for exterior (alpha) and interior (beta) coefficients of mode m.

        forcing_* are projections of a known exterior field (incident wave),
        interior_* the projections of a particular interior solution.
        """
        L = self.coupling
        weight = self._interior_slopes(m) / self.psi_norm
        matrix = np.diag(self.norms * self._exterior_slopes(m)) - L.T @ (weight[:, None] * L)
        rhs = (
            interior_slope
            - self.norms * forcing_slope
            + L.T @ (weight * (L @ forcing_value - interior_value))
        )
        try:
            condition = np.linalg.cond(matrix)
            if not np.isfinite(condition) or condition > MAX_CONDITION:
                raise HydroSolverError(
                    f"ill-conditioned matching system (cond={condition:.3g})",
                    geometry=self.geom,
                    omega=self.omega,
                )
            alpha = np.linalg.solve(matrix, rhs)
        except np.linalg.LinAlgError as e:
            raise HydroSolverError(str(e), geometry=self.geom, omega=self.omega) from e
        beta = (L @ (alpha + forcing_value) - interior_value) / self.psi_norm
        return alpha, beta

    def _bottom_integral(self, beta: np.ndarray) -> complex:
        """Integral of the homogeneous interior potential over the body bottom, over 2 pi."""
        a = self.geom.radius
        terms = self.sign[1:] * beta[1:] * a * self.bessel_ratio / self.lam[1:]
        return beta[0] * a**2 / 2.0 + np.sum(terms)

    def radiation(self) -> Tuple[complex, complex]:
        """
        Heave radiation at unit velocity.

        Returns:
            (force integral I, propagating coefficient A_0); the radiation
            force is -i omega rho I
        """
        a, gap = self.geom.radius, self.gap
        zeros = np.zeros(self.n_terms)
        interior_value = self.sign / np.where(self.lam > 0, self.lam, 1.0) ** 2
        interior_value[0] = gap**2 / 6.0 - a**2 / 4.0
        interior_slope = -a / (2.0 * gap) * self.coupling[0, :]
        alpha, beta = self.solve(0, zeros, zeros, interior_value, interior_slope)
        particular = gap * a**2 / 4.0 - a**4 / (16.0 * gap)
        integral = 2.0 * np.pi * (particular + self._bottom_integral(beta))
        return complex(integral), complex(alpha[0])

    def diffraction(self, m: int) -> Tuple[complex, complex]:
        """
        Scattering of a unit incident partial wave J_m(kr) exp(i m theta).

        Returns:
            (outgoing H_m coefficient, bottom integral over 2 pi for m = 0)
        """
        ka = self.k * self.geom.radius
        value = np.zeros(self.n_terms, dtype=complex)
        slope = np.zeros(self.n_terms, dtype=complex)
        value[0] = jv(m, ka)
        slope[0] = self.k * jvp(m, ka)
        zeros = np.zeros(self.n_terms)
        alpha, beta = self.solve(m, value, slope, zeros, zeros)
        outgoing = complex(alpha[0] / hankel2(m, ka))
        integral = 2.0 * np.pi * self._bottom_integral(beta) if m == 0 else 0.0
        return outgoing, complex(integral)


def _check_inputs(geom: CylinderGeometry, omega: float, n_terms: int):
    if not omega > 0:
        raise InvalidArgumentError(f"omega must be positive, got {omega}")
    if n_terms < MIN_N_TERMS:
        raise InvalidArgumentError(f"n_terms must be at least {MIN_N_TERMS}")
    if not geom.draft < geom.depth:
        raise InvalidGeometryError("draft must be smaller than depth")


def _single_body(
    problem: _MatchedProblem, rho: float, gravity: float
) -> Tuple[SingleBodyCoeffs, complex]:
    omega = problem.omega
    integral, a0 = problem.radiation()
    added_mass = rho * integral.real
    damping = -omega * rho * integral.imag
    if damping < 0.0:
        # truncation noise near zero frequency
        logger.debug("Clipping negative damping %.3e at omega=%.4f", damping, omega)
        damping = 0.0
    ka = problem.k * problem.geom.radius
    excitation = 4j * rho * gravity * problem.norms[0] * a0 / hankel2(0, ka)
    coeffs = SingleBodyCoeffs(omega, float(added_mass), float(damping), complex(excitation))
    return coeffs, a0


def isolated_heave_coefficients(
    geom: CylinderGeometry,
    omega: float,
    n_terms: int = DEFAULT_N_TERMS,
    rho: float = RHO,
    gravity: float = GRAVITY,
) -> SingleBodyCoeffs:
    """
    Added mass, radiation damping and excitation of an isolated heaving cylinder.

    The excitation comes from the radiated propagating wave through the
    Haskind relation, X = 4 i rho g N_0 A_0 / H_0(ka).

    Args:
        geom: Cylinder geometry (depth included)
        omega: Angular frequency (rad/s)
        n_terms: Eigenfunctions per region
        rho: Water density (kg/m^3)
        gravity: Gravitational acceleration (m/s^2)

    Returns:
        SingleBodyCoeffs

    Raises:
        HydroSolverError: If the matching system is singular or ill-conditioned
    """
    _check_inputs(geom, omega, n_terms)
    problem = _MatchedProblem(geom, float(omega), int(n_terms), gravity)
    coeffs, _ = _single_body(problem, rho, gravity)
    return coeffs


def diffraction_excitation(
    geom: CylinderGeometry,
    omega: float,
    n_terms: int = DEFAULT_N_TERMS,
    rho: float = RHO,
    gravity: float = GRAVITY,
) -> complex:
    """Heave excitation integrated directly from the diffraction solution."""
    _check_inputs(geom, omega, n_terms)
    problem = _MatchedProblem(geom, float(omega), int(n_terms), gravity)
    _, integral = problem.diffraction(0)
    return complex(rho * gravity * integral)


def body_transfer(
    geom: CylinderGeometry,
    omega: float,
    order: int,
    n_terms: int = DEFAULT_N_TERMS,
    rho: float = RHO,
    gravity: float = GRAVITY,
) -> BodyTransfer:
    """
    Isolated coefficients plus partial-wave scattering up to the given order.

    Args:
        order: Highest angular order |m| kept
    """
    _check_inputs(geom, omega, n_terms)
    if order < 0:
        raise InvalidArgumentError("partial-wave order must be nonnegative")
    problem = _MatchedProblem(geom, float(omega), int(n_terms), gravity)
    coeffs, a0 = _single_body(problem, rho, gravity)

    scattering = []
    direct = 0j
    for m in range(order + 1):
        outgoing, integral = problem.diffraction(m)
        scattering.append(outgoing)
        if m == 0:
            direct = rho * gravity * integral

    ka = problem.k * geom.radius
    incident_scale = 1j * gravity / omega
    radiated = a0 / (incident_scale * hankel2(0, ka))
    return BodyTransfer(coeffs, tuple(scattering), complex(radiated), complex(direct))


def _quantize(value: float) -> str:
    return f"{float(value):.6e}"


def cache_key(
    geom: CylinderGeometry,
    omega: float,
    backend: Union[str, object],
    depth: Optional[float] = None,
    rho: float = RHO,
    gravity: float = GRAVITY,
) -> str:
    """
    Canonical cache key for single-body data.

    Quantizes radius, aspect ratio, depth and omega to about 1e-6 relative
    before hashing. backend may be a HydroBackend (variant and truncation
    parameters enter the key) or a plain variant name.
    """
    if isinstance(backend, str):
        backend_part = backend.lower()
    else:
        backend_part = "{}:{}:{}".format(
            backend.variant, getattr(backend, "n_terms", ""), getattr(backend, "order", "")
        )
    depth = geom.depth if depth is None else depth
    parts = [
        backend_part,
        _quantize(geom.radius),
        _quantize(geom.aspect_ratio),
        _quantize(depth),
        _quantize(omega),
        _quantize(rho),
        _quantize(gravity),
    ]
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()
