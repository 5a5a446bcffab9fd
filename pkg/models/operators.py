"""Operator data models: diagonal spectral operators and kernel regressors."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from utils.errors import DimensionMismatchError, OperatorKindError


class OperatorKind(str, Enum):
    COVARIANCE = "covariance"
    AUTOCORRELATION = "autocorrelation"
    # Derived operators (powers, inverses) carry no kind invariant
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    """Diagonal operator on H given by its eigenvalues in the shared basis.

    Covariance operators need strictly positive, nonincreasing eigenvalues;
    autocorrelation operators need |eigenvalue| < 1. ``validate=False``
    skips those checks for degenerate test inputs.
    """

    eigenvalues: np.ndarray
    kind: OperatorKind = OperatorKind.GENERAL
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        values = np.array(self.eigenvalues, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise DimensionMismatchError("eigenvalues must be a non-empty vector")
        if not np.all(np.isfinite(values)):
            raise OperatorKindError("eigenvalues must be finite")
        kind = OperatorKind(self.kind)
        if self.validate:
            if kind is OperatorKind.COVARIANCE:
                if np.any(values <= 0):
                    raise OperatorKindError("covariance eigenvalues must be strictly positive")
                if np.any(np.diff(values) > 0):
                    raise OperatorKindError("covariance eigenvalues must be nonincreasing")
            elif kind is OperatorKind.AUTOCORRELATION and np.any(np.abs(values) >= 1):
                raise OperatorKindError("autocorrelation eigenvalues must satisfy |lambda| < 1")
        values.setflags(write=False)
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "kind", kind)

    @property
    def K(self):
        return self.eigenvalues.size

    @classmethod
    def identity(cls, K):
        return cls(np.ones(K), OperatorKind.GENERAL)


@dataclass(frozen=True, eq=False)
class RegressorOperator:
    """K x K coefficient matrix of a kernel regressor X_n^j.

    Entry (k, l) is the coefficient of output mode k from input mode l.
    """

    matrix: np.ndarray
    diagonal: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
            raise DimensionMismatchError(f"regressor matrix must be square, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise OperatorKindError("regressor entries must be finite")
        if self.diagonal and np.any(matrix[~np.eye(matrix.shape[0], dtype=bool)] != 0):
            raise OperatorKindError("diagonal regressor has nonzero off-diagonal entries")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_diagonal(cls, values):
        return cls(np.diag(np.asarray(values, dtype=float)), diagonal=True)

    @property
    def K(self):
        return self.matrix.shape[0]

    @property
    def diagonal_values(self):
        return np.diag(self.matrix).copy()

    def hilbert_schmidt_norm(self):
        return float(np.sqrt(np.sum(self.matrix ** 2)))

    def operator_norm(self):
        if self.diagonal:
            return float(np.max(np.abs(np.diag(self.matrix))))
        return float(np.linalg.norm(self.matrix, ord=2))


@dataclass(frozen=True, eq=False)
class RegressorPanel:
    """The N x p array of kernel regressors.

    Diagonal panels keep only the (N, p, K) diagonals; general panels keep
    the full (N, p, K, K) stack.
    """

    values: np.ndarray
    diagonal: bool

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        expected_ndim = 3 if self.diagonal else 4
        if values.ndim != expected_ndim:
            raise DimensionMismatchError(
                f"{'diagonal' if self.diagonal else 'dense'} panel needs a {expected_ndim}-D array, got {values.ndim}-D"
            )
        if not self.diagonal and values.shape[2] != values.shape[3]:
            raise DimensionMismatchError("dense panel entries must be square")
        if values.shape[0] < 1 or values.shape[1] < 1 or values.shape[2] < 1:
            raise DimensionMismatchError(f"panel needs N, p, K >= 1, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise OperatorKindError("regressor entries must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_diagonals(cls, diagonals):
        return cls(diagonals, diagonal=True)

    @classmethod
    def from_matrices(cls, matrices):
        return cls(matrices, diagonal=False)

    @classmethod
    def from_entries(cls, entries):
        """Build from an N x p nested sequence of RegressorOperators."""
        rows = [list(row) for row in entries]
        if not rows or not rows[0]:
            raise DimensionMismatchError("panel needs at least one entry")
        p = len(rows[0])
        K = rows[0][0].K
        for row in rows:
            if len(row) != p or any(op.K != K for op in row):
                raise DimensionMismatchError("panel entries must share p and K")
        if all(op.diagonal for row in rows for op in row):
            return cls.from_diagonals([[op.diagonal_values for op in row] for row in rows])
        return cls.from_matrices([[op.matrix for op in row] for row in rows])

    @property
    def N(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def K(self):
        return self.values.shape[2]

    def entry(self, n, j):
        """Regressor at 0-based time n and parameter j."""
        if self.diagonal:
            return RegressorOperator.from_diagonal(self.values[n, j])
        return RegressorOperator(self.values[n, j])

    def row(self, n):
        return [self.entry(n, j) for j in range(self.p)]

    @property
    def entries(self):
        return [self.row(n) for n in range(self.N)]

    def dense_matrices(self):
        """(N, p, K, K) stack of matrices."""
        if not self.diagonal:
            return np.array(self.values)
        matrices = np.zeros(self.values.shape + (self.K,))
        index = np.arange(self.K)
        matrices[..., index, index] = self.values
        return matrices

    def head(self, n):
        """Panel restricted to the first n times."""
        return RegressorPanel(self.values[:n], self.diagonal)

    def apply(self, beta_coeffs):
        """Regression means sum_j X_n^j(beta_j) as an (N, K) array."""
        beta_coeffs = np.asarray(beta_coeffs, dtype=float)
        if beta_coeffs.shape != (self.p, self.K):
            raise DimensionMismatchError(f"expected beta of shape {(self.p, self.K)}, got {beta_coeffs.shape}")
        if self.diagonal:
            return np.einsum("npk,pk->nk", self.values, beta_coeffs)
        return np.einsum("npkl,pl->nk", self.values, beta_coeffs)
