"""Orthonormal sine basis on (a, b), grid conversions and inner products.

Basis function j is the j-th eigenfunction of the Dirichlet negative
Laplacian, scaled to unit L² norm:

    phi_j(x) = sqrt(2 / (b - a)) * sin(pi * j * (x - a) / (b - a))

On the default interval (0, 60) this is sin(pi * j * x / 60) up to the constant.
"""

import numpy as np

from models.function_space import Grid, HFunction
from utils.errors import DimensionMismatchError, DomainError, ResolutionError

# Modes per grid point required by project()
RESOLUTION_FACTOR = 4


def normalization_constant(interval):
    return np.sqrt(2.0 / interval.length)


def basis_eval(j, x, interval):
    """Evaluate basis function j (1-based) at x; x may be a scalar or an array."""
    if int(j) != j or j < 1:
        raise DomainError(f"basis index must be a positive integer, got {j}")
    if not interval.contains(x):
        raise DomainError(f"x must lie strictly inside ({interval.a}, {interval.b})")
    x = np.asarray(x, dtype=float)
    value = normalization_constant(interval) * np.sin(np.pi * j * (x - interval.a) / interval.length)
    return float(value) if value.ndim == 0 else value


def basis_matrix(grid, K):
    """(M, K) matrix of phi_j(x_i)."""
    interval = grid.interval
    modes = np.arange(1, K + 1)
    phase = np.pi * np.outer(grid.points - interval.a, modes) / interval.length
    return normalization_constant(interval) * np.sin(phase)


def synthesize(f, grid):
    """Pointwise values of f on the grid."""
    if grid.interval != f.interval:
        raise DomainError("grid and function live on different intervals")
    return basis_matrix(grid, f.K) @ f.coeffs


def quadrature(values, grid):
    """Composite midpoint rule for the integral of sampled values."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.M:
        raise DimensionMismatchError(f"expected {grid.M} samples, got {values.shape[0]}")
    return grid.spacing * values.sum(axis=0)


def project(values, grid, K):
    """Coefficients of sampled values against the first K basis functions."""
    if grid.M < RESOLUTION_FACTOR * K:
        raise ResolutionError(
            f"grid of {grid.M} points cannot resolve {K} modes (needs at least {RESOLUTION_FACTOR * K})"
        )
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.M,):
        raise DimensionMismatchError(f"expected {grid.M} samples, got shape {values.shape}")
    coeffs = grid.spacing * (basis_matrix(grid, K).T @ values)
    return HFunction(coeffs, grid.interval)


def inner_product(f, g):
    """Parseval: the H inner product is the coefficient dot product."""
    f.check_compatible(g)
    return float(f.coeffs @ g.coeffs)


def norm(f):
    return float(np.sqrt(inner_product(f, f)))


def coefficient_matrix(functions):
    """Stack a sequence of compatible HFunctions into an (N, K) array."""
    functions = list(functions)
    if not functions:
        raise DimensionMismatchError("empty function sequence")
    first = functions[0]
    for f in functions[1:]:
        first.check_compatible(f)
    return np.vstack([f.coeffs for f in functions])


def functions_from_matrix(array, interval):
    """Inverse of coefficient_matrix."""
    array = np.atleast_2d(np.asarray(array, dtype=float))
    return [HFunction(row, interval) for row in array]
