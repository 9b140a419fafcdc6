"""Exception hierarchy shared by the library and the command-line front end."""

from typing import Iterable, List, Optional, Tuple


class WecFarmError(Exception):
    """Base class for all wecfarm errors; carries the process exit code."""

    exit_code = 1


class InvalidArgumentError(WecFarmError, ValueError):
    """Invalid input value, file or option."""

    exit_code = 2


class SchemaError(InvalidArgumentError):
    """Malformed tabular input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NormalizationError(InvalidArgumentError):
    """A climate year whose probabilities do not sum to one."""

    def __init__(self, year, total: float):
        self.year = year
        self.total = total
        super().__init__(
            f"probabilities of year {year} sum to {total:.9f}, expected 1"
        )


class DuplicateBinError(InvalidArgumentError):
    """The same (year, hs, tp) bin appears more than once."""

    def __init__(self, year, hs: float, tp: float, line: Optional[int] = None):
        self.year = year
        self.bin = (hs, tp)
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate bin hs={hs}, tp={tp} in year {year}{where}")


class CoverageError(InvalidArgumentError):
    """A climate bin with nonzero probability is missing from a power matrix."""

    def __init__(self, hs: float, tp: float):
        self.bin = (hs, tp)
        super().__init__(f"power matrix has no entry for bin hs={hs}, tp={tp}")


class UnknownPresetError(InvalidArgumentError):
    """Requested study preset is not registered."""

    def __init__(self, name: str, available: Iterable[str]):
        self.name = name
        self.available = sorted(available)
        super().__init__(
            f"unknown preset '{name}'. Available presets: {', '.join(self.available)}"
        )


class OutputExistsError(InvalidArgumentError):
    """Output location already exists and overwriting was not requested."""


class InvalidGeometryError(InvalidArgumentError):
    """Cylinder geometry outside its physical domain."""


class InfeasibleDesignError(WecFarmError):
    """Design violates the spacing or draft constraints."""

    exit_code = 3

    def __init__(self, message: str, pairs: Optional[List[Tuple[int, int, float]]] = None):
        self.pairs = list(pairs or [])
        super().__init__(message)


class GeometryError(InfeasibleDesignError):
    """Overlapping bodies in a layout."""


class SolverError(WecFarmError, RuntimeError):
    """Numerical failure."""

    exit_code = 4


class HydroSolverError(SolverError):
    """Matched eigenfunction system could not be solved."""

    def __init__(self, message: str, geometry=None, omega: Optional[float] = None):
        self.geometry = geometry
        self.omega = omega
        super().__init__(f"{message} (geometry={geometry}, omega={omega})")


class SingularImpedanceError(SolverError):
    """Farm impedance matrix is singular at this frequency."""


class IterationError(SolverError):
    """Fixed-point iteration did not converge."""


class DegenerateDenominatorError(SolverError):
    """A ratio metric has a zero denominator."""


class ConvergenceWarning(UserWarning):
    """Truncated series did not settle within tolerance."""
