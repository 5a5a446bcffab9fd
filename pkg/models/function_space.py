"""Function-space data models: the domain interval, evaluation grids and H-valued functions."""

from dataclasses import dataclass, field
import math

import numpy as np

from utils.errors import DimensionMismatchError, DomainError


@dataclass(frozen=True)
class Interval:
    """The open domain (a, b) of the function space H = L²((a, b))."""

    a: float = 0.0
    b: float = 60.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError(f"interval endpoints must be finite, got ({self.a}, {self.b})")
        if not self.a < self.b:
            raise DomainError(f"interval requires a < b, got ({self.a}, {self.b})")

    @property
    def length(self):
        return self.b - self.a

    def contains(self, x):
        """True when every point of x lies strictly inside (a, b)."""
        values = np.asarray(x, dtype=float)
        return bool(np.all((values > self.a) & (values < self.b)))


DEFAULT_INTERVAL = Interval()


@dataclass(frozen=True, eq=False)
class Grid:
    """Equally spaced abscissae strictly inside an interval."""

    points: np.ndarray
    interval: Interval = DEFAULT_INTERVAL

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 1 or points.size < 1:
            raise DomainError("grid needs at least one point")
        if points.size > 1 and np.any(np.diff(points) <= 0):
            raise DomainError("grid points must be strictly increasing")
        if not self.interval.contains(points):
            raise DomainError(f"grid points must lie inside ({self.interval.a}, {self.interval.b})")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def midpoint(cls, interval=DEFAULT_INTERVAL, M=60):
        """Cell midpoints of M equal cells of the interval."""
        if M < 1:
            raise DomainError(f"grid size must be >= 1, got {M}")
        h = interval.length / M
        return cls(interval.a + h * (np.arange(M) + 0.5), interval)

    @property
    def M(self):
        return self.points.size

    @property
    def spacing(self):
        """Quadrature weight of the composite midpoint rule."""
        return self.interval.length / self.M


@dataclass(frozen=True, eq=False)
class HFunction:
    """An element of H stored as K coefficients in the orthonormal sine basis.

    Coefficient ``coeffs[j - 1]`` belongs to basis function j.
    """

    coeffs: np.ndarray
    interval: Interval = field(default=DEFAULT_INTERVAL)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise DimensionMismatchError("an HFunction needs a 1-D vector of at least one coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("HFunction coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def K(self):
        return self.coeffs.size

    @classmethod
    def zeros(cls, K, interval=DEFAULT_INTERVAL):
        return cls(np.zeros(K), interval)

    @classmethod
    def unit(cls, j, K, interval=DEFAULT_INTERVAL):
        """The j-th basis function (1-based)."""
        if not 1 <= j <= K:
            raise DimensionMismatchError(f"unit index {j} outside 1..{K}")
        coeffs = np.zeros(K)
        coeffs[j - 1] = 1.0
        return cls(coeffs, interval)

    def check_compatible(self, other):
        if self.interval != other.interval or self.K != other.K:
            raise DimensionMismatchError(
                f"incompatible HFunctions: K={self.K} on {self.interval} vs K={other.K} on {other.interval}"
            )

    def __add__(self, other):
        self.check_compatible(other)
        return HFunction(self.coeffs + other.coeffs, self.interval)

    def __sub__(self, other):
        self.check_compatible(other)
        return HFunction(self.coeffs - other.coeffs, self.interval)

    def scaled(self, factor):
        return HFunction(factor * self.coeffs, self.interval)
