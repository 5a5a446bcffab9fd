"""Shared fixtures and dense reference implementations."""

import numpy as np
import pytest
from scipy.linalg import toeplitz

from systems.gls_core import design_tensor
from systems.model_catalog import load_model


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def model1():
    return load_model("model1")


@pytest.fixture(scope="session")
def model2():
    return load_model("model2")


@pytest.fixture(scope="session")
def periodic_model():
    return load_model("periodic_design")


def dense_covariance(variances, lams, N):
    """(N K) x (N K) time-major covariance with entry ((n, k), (m, k)) = variances[k] * lams[k]^|n - m|."""
    variances = np.asarray(variances, dtype=float)
    lams = np.asarray(lams, dtype=float)
    K = variances.size
    C = np.zeros((N * K, N * K))
    for k in range(K):
        index = np.arange(N) * K + k
        C[np.ix_(index, index)] = variances[k] * toeplitz(lams[k] ** np.arange(N))
    return C


def dense_design(panel):
    """(N K) x (p K) design matrix, rows time-major and columns parameter-major."""
    W = design_tensor(panel)
    N, K, pK = W.shape
    return W.reshape(N * K, pK)


def dense_gls(panel, Y, C):
    """beta (p, K) from the textbook formula with an explicit inverse covariance."""
    X = dense_design(panel)
    precision = np.linalg.inv(C)
    info = X.T @ precision @ X
    beta = np.linalg.solve(info, X.T @ precision @ np.asarray(Y).reshape(-1))
    return beta.reshape(panel.p, panel.K), info


def var1_covariance(transition, variances, N):
    """Dense covariance of a stationary VAR(1) score sequence s_{n+1} = M s_n + eta_n.

    Cov(s_n, s_m) = M^(n - m) Lambda for n >= m; time-major order.
    """
    k = len(variances)
    stationary = np.diag(variances)
    C = np.zeros((N * k, N * k))
    powers = [np.eye(k)]
    for _ in range(1, N):
        powers.append(transition @ powers[-1])
    for n in range(N):
        for m in range(n + 1):
            block = powers[n - m] @ stationary
            C[n * k:(n + 1) * k, m * k:(m + 1) * k] = block
            C[m * k:(m + 1) * k, n * k:(n + 1) * k] = block.T
    return C
