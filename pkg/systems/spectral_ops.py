"""Diagonal spectral operators and kernel regressors.

Every operator here is diagonal in the shared sine basis except general
RegressorOperators, which act through their full K x K matrix.
"""

import numpy as np

from models.function_space import HFunction
from models.operators import OperatorKind, RegressorPanel, SpectralOperator
from utils.errors import DimensionMismatchError, OperatorKindError

DEFAULT_INVERSE_FLOOR = 1e-12


def _check_K(op_K, f):
    if op_K != f.K:
        raise DimensionMismatchError(f"operator has K={op_K} but function has K={f.K}")


def apply_operator(op, f):
    _check_K(op.K, f)
    return HFunction(op.eigenvalues * f.coeffs, f.interval)


def operator_power(op, j):
    """op^j; j = 0 gives the identity."""
    if int(j) != j or j < 0:
        raise ValueError(f"power must be a nonnegative integer, got {j}")
    kind = op.kind if j > 0 else OperatorKind.GENERAL
    return SpectralOperator(op.eigenvalues ** int(j), kind, validate=op.validate and j > 0)


def compose(first, second):
    """The operator first ∘ second."""
    if first.K != second.K:
        raise DimensionMismatchError(f"cannot compose K={first.K} with K={second.K}")
    return SpectralOperator(first.eigenvalues * second.eigenvalues, OperatorKind.GENERAL)


def operator_inverse(op, floor=DEFAULT_INVERSE_FLOOR):
    """Inverse of a covariance operator with eigenvalues clamped below at floor."""
    if not floor > 0:
        raise ValueError(f"inverse floor must be positive, got {floor}")
    if op.kind is not OperatorKind.COVARIANCE:
        raise OperatorKindError(f"operator_inverse needs a covariance operator, got {op.kind.value}")
    return SpectralOperator(1.0 / np.maximum(op.eigenvalues, floor), OperatorKind.GENERAL)


def stationary_covariance(rho, r_delta):
    """Covariance of the stationary ARH(1) law: lambda(R_delta) / (1 - lambda(rho)^2)."""
    if rho.K != r_delta.K:
        raise DimensionMismatchError(f"rho has K={rho.K} but R_delta has K={r_delta.K}")
    values = r_delta.eigenvalues / (1.0 - rho.eigenvalues ** 2)
    # The ratio need not be monotone for arbitrary laws
    strictly_ordered = bool(np.all(values > 0) and np.all(np.diff(values) <= 0))
    kind = OperatorKind.COVARIANCE if strictly_ordered else OperatorKind.GENERAL
    return SpectralOperator(values, kind, validate=r_delta.validate)


def apply_regressor(X, f):
    _check_K(X.K, f)
    if X.diagonal:
        return HFunction(np.diag(X.matrix) * f.coeffs, f.interval)
    return HFunction(X.matrix @ f.coeffs, f.interval)


def build_model_operators(model, K=None, noise_scale=1.0):
    """(nominal R_0, R_delta, rho) for the model truncated at K modes."""
    k = model.modes(K)
    r0 = SpectralOperator(model.r0_law.evaluate(k), OperatorKind.COVARIANCE)
    # noise_scale = 0 gives the degenerate noiseless operator
    r_delta = SpectralOperator(
        noise_scale * model.r_delta_law.evaluate(k), OperatorKind.COVARIANCE, validate=noise_scale > 0
    )
    rho = SpectralOperator(model.rho_law.evaluate(k), OperatorKind.AUTOCORRELATION)
    return r0, r_delta, rho


def build_model_regressors(model, N, K=None):
    """Diagonal panel of x_k^j(n), n = 1..N, j = 1..p."""
    if N < 1:
        raise DimensionMismatchError(f"N must be >= 1, got {N}")
    K = K or model.K
    if K < 1:
        raise DimensionMismatchError(f"K must be >= 1, got {K}")
    diagonals = np.stack([model.regressor_values(j, N, K) for j in range(model.p)], axis=1)
    return RegressorPanel.from_diagonals(diagonals)


def build_model_beta(model, K=None):
    """The true parameter functions beta_1..beta_p."""
    return [HFunction(row, model.interval) for row in model.beta_coefficients(K)]

