"""ARH(1) error simulation and response generation.

The error process is eps_n = rho(eps_{n-1}) + delta_n with Gaussian
innovations. Since rho and R_delta share the sine eigenbasis, each
coefficient is an independent scalar AR(1) series.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from models.function_space import DEFAULT_INTERVAL, HFunction
from models.operators import OperatorKind, SpectralOperator
from systems.basis import coefficient_matrix, functions_from_matrix
from systems.spectral_ops import build_model_operators
from utils.errors import DimensionMismatchError, OperatorKindError


@dataclass(frozen=True)
class ArhSpec:
    """Autocorrelation operator and innovation covariance of an ARH(1) process."""

    rho: SpectralOperator
    r_delta: SpectralOperator
    K: int

    def __post_init__(self):
        if self.rho.K != self.K or self.r_delta.K != self.K:
            raise DimensionMismatchError(f"rho (K={self.rho.K}) and R_delta (K={self.r_delta.K}) must have K={self.K}")
        if np.any(np.abs(self.rho.eigenvalues) >= 1):
            raise OperatorKindError("rho eigenvalues must satisfy |lambda| < 1")
        if self.r_delta.validate and np.any(self.r_delta.eigenvalues <= 0):
            raise OperatorKindError("R_delta eigenvalues must be positive")
        if np.any(self.r_delta.eigenvalues < 0):
            raise OperatorKindError("R_delta eigenvalues must be nonnegative")

    @classmethod
    def from_model(cls, model, K=None, noise_scale=1.0):
        _, r_delta, rho = build_model_operators(model, K, noise_scale)
        return cls(rho=rho, r_delta=r_delta, K=rho.K)

    @property
    def stationary_variances(self):
        return self.r_delta.eigenvalues / (1.0 - self.rho.eigenvalues ** 2)


@dataclass(frozen=True)
class SamplePath:
    """One simulated functional sample."""

    errors: List[HFunction]
    responses: List[HFunction]
    seed: int

    def __post_init__(self):
        if len(self.errors) != len(self.responses):
            raise DimensionMismatchError("errors and responses must have the same length")

    @property
    def N(self):
        return len(self.responses)

    def response_matrix(self):
        return coefficient_matrix(self.responses)

    def error_matrix(self):
        return coefficient_matrix(self.errors)


def gaussian_innovation(r_delta, rng, interval=DEFAULT_INTERVAL):
    """One draw of delta_n: coefficient j ~ Normal(0, lambda_j(R_delta))."""
    if r_delta.kind is not OperatorKind.COVARIANCE:
        raise OperatorKindError(f"innovation covariance must be a covariance operator, got {r_delta.kind.value}")
    scale = np.sqrt(r_delta.eigenvalues)
    return HFunction(scale * rng.standard_normal(r_delta.K), interval)


def simulate_arh1_coefficients(spec, N, burn_in, rng):
    """(N, K) coefficient array of a stationary ARH(1) path.

    Draw order: the initial state, then one innovation vector per step.
    """
    if N < 1:
        raise DimensionMismatchError(f"N must be >= 1, got {N}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    lam = spec.rho.eigenvalues
    state = np.sqrt(spec.stationary_variances) * rng.standard_normal(spec.K)
    shocks = np.sqrt(spec.r_delta.eigenvalues) * rng.standard_normal((burn_in + N, spec.K))
    path = np.empty((N, spec.K))
    for step in range(burn_in + N):
        state = lam * state + shocks[step]
        if step >= burn_in:
            path[step - burn_in] = state
    return path


def simulate_arh1(spec, N, burn_in, rng, interval=DEFAULT_INTERVAL):
    """The last N states after burn_in steps from the stationary law."""
    return functions_from_matrix(simulate_arh1_coefficients(spec, N, burn_in, rng), interval)


def simulate_response(panel, beta, errors):
    """Y_n = sum_j X_n^j(beta_j) + eps_n."""
    beta = list(beta)
    errors = list(errors)
    if len(beta) != panel.p:
        raise DimensionMismatchError(f"panel has p={panel.p} but {len(beta)} parameters were given")
    if len(errors) != panel.N:
        raise DimensionMismatchError(f"panel has N={panel.N} but {len(errors)} errors were given")
    beta_coeffs = coefficient_matrix(beta)
    error_coeffs = coefficient_matrix(errors)
    if beta_coeffs.shape[1] != panel.K or error_coeffs.shape[1] != panel.K:
        raise DimensionMismatchError(f"panel has K={panel.K}")
    beta[0].check_compatible(errors[0])
    return functions_from_matrix(panel.apply(beta_coeffs) + error_coeffs, errors[0].interval)


def simulate_sample_path(model, panel, beta, rng, seed=0, noise_scale=1.0, burn_in=0):
    """Errors and responses for one repetition of a model."""
    spec = ArhSpec.from_model(model, panel.K, noise_scale)
    errors = simulate_arh1(spec, panel.N, burn_in, rng, model.interval)
    return SamplePath(errors=errors, responses=simulate_response(panel, beta, errors), seed=seed)
