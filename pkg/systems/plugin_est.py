"""Plug-in GLS for unknown error covariance, and one-step-ahead prediction.

Pipeline: OLS, residual covariance operators, their eigendecomposition,
the componentwise autocorrelation estimate on the leading k_N empirical
eigendirections, then GLS in the empirical eigenbasis with the estimated
precision (identity weighting beyond k_N), rotated back to the sine basis.
"""

from dataclasses import dataclass, replace
import logging
import math

import numpy as np
from scipy.linalg import cholesky, solve_triangular, LinAlgError

from models.function_space import DEFAULT_INTERVAL, HFunction
from models.operators import OperatorKind, RegressorPanel, SpectralOperator
from systems.basis import coefficient_matrix
from systems.gls_core import (
    build_block_precision,
    design_tensor,
    fit_from_full,
    gls_estimate,
    ols_estimate,
    solve_normal_equations,
)
from systems.spectral_ops import apply_regressor
from utils.errors import DimensionMismatchError, MissingResidualError, NearSingularError, TruncationError

logger = logging.getLogger("arhgls.numerics")

EIGEN_FLOOR = 1e-10
TRUNCATION_THRESHOLD = 1.0
MAX_TRUNCATION_FRACTION = 0.1
OFF_DIAGONAL_TOLERANCE = 0.1
# Residual energy below this fraction of the response energy counts as an exact fit
EXACT_FIT_TOLERANCE = 1e-20


def _as_matrix(values):
    if isinstance(values, np.ndarray):
        return np.atleast_2d(values), DEFAULT_INTERVAL
    values = list(values)
    return coefficient_matrix(values), values[0].interval


@dataclass(frozen=True, eq=False)
class EmpiricalCov:
    """Lag-0 and lag-1 empirical covariance operators in basis coefficients."""

    r0_hat: np.ndarray
    r1_hat: np.ndarray
    N: int


@dataclass(frozen=True, eq=False)
class EmpiricalEigen:
    """Eigenpairs of r0_hat; column j of ``vectors`` is phi_{jN}."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def K(self):
        return self.values.size

    def leading(self, k):
        return self.vectors[:, :k]


@dataclass(frozen=True, eq=False)
class RhoHat:
    """Autocorrelation estimate on the leading k_N empirical eigendirections.

    The operator maps h to sum_{i,j} coeffs[i, j] <phi_j, h> phi_i, so in
    score coordinates it is the matrix-vector product coeffs @ s.
    """

    coeffs: np.ndarray
    k_N: int

    def apply_scores(self, scores):
        """Output scores for input scores along the last axis."""
        return np.asarray(scores) @ self.coeffs.T

    def apply(self, f, eig):
        basis = eig.leading(self.k_N)
        return HFunction(basis @ self.apply_scores(basis.T @ f.coeffs), f.interval)

    def off_diagonal_ratio(self):
        diagonal_mass = np.sum(np.abs(np.diag(self.coeffs)))
        off_mass = np.sum(np.abs(self.coeffs)) - diagonal_mass
        if diagonal_mass == 0:
            return 0.0 if off_mass == 0 else math.inf
        return float(off_mass / diagonal_mass)


def empirical_cov(residuals):
    E, _ = _as_matrix(residuals)
    N = E.shape[0]
    if N < 2:
        raise DimensionMismatchError(f"empirical covariance needs N >= 2, got {N}")
    return EmpiricalCov(r0_hat=E.T @ E / N, r1_hat=E[:-1].T @ E[1:] / (N - 1), N=N)


def empirical_eigendecomposition(cov):
    """Eigenpairs sorted decreasingly; each vector's largest-magnitude entry is positive."""
    r0 = 0.5 * (cov.r0_hat + cov.r0_hat.T)
    values, vectors = np.linalg.eigh(r0)
    order = np.argsort(values)[::-1]
    values = np.clip(values[order], 0.0, None)
    vectors = vectors[:, order]
    pivots = vectors[np.argmax(np.abs(vectors), axis=0), np.arange(vectors.shape[1])]
    vectors = vectors * np.where(pivots < 0, -1.0, 1.0)
    return EmpiricalEigen(values=values, vectors=vectors)


def estimate_rho(residuals, eig, k_N, eigen_floor=EIGEN_FLOOR):
    """rho_hat[i, j] = (1/(N-1)) sum_n <e_n, phi_i> <e_{n+1}, phi_j> / lambda_j."""
    E, _ = _as_matrix(residuals)
    N, K = E.shape
    if not 1 <= k_N <= min(K, N):
        raise TruncationError(f"k_N must lie in [1, {min(K, N)}], got {k_N}")
    values = eig.values[:k_N]
    if eig.values[0] <= 0 or np.any(values <= eigen_floor * eig.values[0]):
        raise TruncationError(f"empirical eigenvalues up to k_N={k_N} fall below the floor {eigen_floor} * lambda_1")
    scores = E @ eig.leading(k_N)
    coeffs = (scores[:-1].T @ scores[1:]) / (N - 1) / values[None, :]
    return RhoHat(coeffs=coeffs, k_N=int(k_N))


def spacing_constant(values, k_N):
    """max_{j <= k_N} 1 / (lambda_j - lambda_{j+1}); infinite for tied eigenvalues."""
    extended = np.append(values, 0.0)
    gaps = extended[:k_N] - extended[1:k_N + 1]
    with np.errstate(divide="ignore"):
        return float(np.max(np.where(gaps > 0, 1.0 / np.where(gaps > 0, gaps, 1.0), np.inf)))


def select_truncation(eig, N, threshold=TRUNCATION_THRESHOLD, max_fraction=MAX_TRUNCATION_FRACTION):
    """Largest k with N lambda_k^2 / ((a_1 + ... + a_k)^2 log N) >= threshold.

    a_1 = 2 sqrt(2) / (lambda_1 - lambda_2) and
    a_j = 2 sqrt(2) max(1/(lambda_{j-1} - lambda_j), 1/(lambda_j - lambda_{j+1})),
    with lambda_{K+1} = 0. The result lies in [1, min(K, N - 1, max_fraction N)].
    """
    if N < 3:
        raise TruncationError(f"truncation selection needs N >= 3, got {N}")
    values = np.asarray(eig.values, dtype=float)
    positive = values[values > 0]
    if np.unique(positive).size < 2:
        return 1
    extended = np.append(values, 0.0)
    gaps = extended[:-1] - extended[1:]
    with np.errstate(divide="ignore"):
        inverse_gaps = np.where(gaps > 0, 1.0 / np.where(gaps > 0, gaps, 1.0), np.inf)
    a = 2.0 * np.sqrt(2.0) * np.maximum(inverse_gaps, np.concatenate(([0.0], inverse_gaps[:-1])))
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = N * values ** 2 / (np.cumsum(a) ** 2 * np.log(N))
    ratio = np.nan_to_num(ratio, nan=0.0)
    upper = max(1, min(values.size, N - 1, int(max_fraction * N)))
    eligible = np.flatnonzero(ratio[:upper] >= threshold)
    return int(eligible[-1]) + 1 if eligible.size else 1


def nominal_truncation(model, N, K=None, threshold=TRUNCATION_THRESHOLD):
    """k_N from the model's nominal R_0 law."""
    values = model.r0_law.evaluate(model.modes(K))
    return select_truncation(EmpiricalEigen(values, np.eye(values.size)), N, threshold)


def rotate_coefficients(values, vectors):
    """Coordinates of (N, K) coefficient rows in the empirical eigenbasis."""
    return np.asarray(values) @ vectors


def unrotate_coefficients(scores, vectors):
    return np.asarray(scores) @ vectors.T


def rotate_panel(panel, vectors):
    """Panel of V^T X V: the regressors expressed in the empirical eigenbasis."""
    if panel.diagonal:
        matrices = np.einsum("ki,npk,kj->npij", vectors, panel.values, vectors, optimize=True)
    else:
        matrices = np.einsum("ki,npkl,lj->npij", vectors, panel.values, vectors, optimize=True)
    return RegressorPanel.from_matrices(matrices)


def var1_whiten(values, transition, variances):
    """Whitening of a stationary VAR(1) score sequence along axis 0.

    values has shape (N, k, m). The first row is scaled by Lambda^{-1/2},
    later rows map to L^{-1}(s_{n+1} - M s_n) with L L^T = Lambda - M Lambda M^T.
    The squared norm of the result is the quadratic form of the inverse
    stationary covariance.
    """
    N, k, m = values.shape
    stationary = np.diag(variances)
    innovation = stationary - transition @ stationary @ transition.T
    try:
        lower = cholesky(0.5 * (innovation + innovation.T), lower=True)
    except LinAlgError as e:
        raise NearSingularError("estimated autocorrelation leaves no positive definite innovation covariance") from e
    out = np.empty_like(values)
    out[0] = values[0] / np.sqrt(variances)[:, None]
    if N > 1:
        shocks = values[1:] - np.einsum("ij,njm->nim", transition, values[:-1])
        flat = shocks.transpose(1, 0, 2).reshape(k, -1)
        out[1:] = solve_triangular(lower, flat, lower=True).reshape(k, N - 1, m).transpose(1, 0, 2)
    return out


def _tridiagonal_fit(panel_r, Y_r, eig, rho, k_N, on_singular):
    K = Y_r.shape[1]
    variances = np.ones(K)
    variances[:k_N] = eig.values[:k_N]
    lam = np.zeros(K)
    lam[:k_N] = np.diag(rho.coeffs)
    P = build_block_precision(
        SpectralOperator(variances, OperatorKind.GENERAL), SpectralOperator(lam, OperatorKind.GENERAL), panel_r.N
    )
    fit = gls_estimate(panel_r, Y_r, P, on_singular)
    return fit.beta_matrix(), fit.covariance, fit.information, fit.loss, fit.diagnostics["full_rank"]


def _dense_subspace_fit(panel_r, Y_r, eig, rho, k_N, on_singular):
    N, K = Y_r.shape
    W = design_tensor(panel_r)
    pK = W.shape[2]
    transition = rho.coeffs
    variances = eig.values[:k_N]
    lead = var1_whiten(np.concatenate([W[:, :k_N, :], Y_r[:, :k_N, None]], axis=2), transition, variances)
    lead = lead.reshape(N * k_N, pK + 1)
    tail_W = W[:, k_N:, :].reshape(-1, pK)
    tail_y = Y_r[:, k_N:].reshape(-1)
    info = lead[:, :pK].T @ lead[:, :pK] + tail_W.T @ tail_W
    rhs = lead[:, :pK].T @ lead[:, pK] + tail_W.T @ tail_y
    beta_vec, covariance, full_rank = solve_normal_equations(info, rhs, on_singular, "plug-in design")
    beta = beta_vec.reshape(-1, K)
    resid = Y_r - panel_r.apply(beta)
    whitened = var1_whiten(resid[:, :k_N, None], transition, variances)
    loss = float(np.sum(whitened ** 2) + np.sum(resid[:, k_N:] ** 2))
    return beta, covariance, info, loss, full_rank


def _prediction_operator(residuals, k_N, fallback):
    """Empirical eigenpairs and rho_hat re-estimated from GLS residuals."""
    eig = empirical_eigendecomposition(empirical_cov(residuals))
    try:
        return eig, estimate_rho(residuals, eig, k_N)
    except TruncationError:
        logger.warning("GLS residuals too degenerate to re-estimate rho at k_N=%d; keeping the OLS-stage estimate", k_N)
        return fallback


def plugin_gls(panel, Y, k_N="auto", threshold=TRUNCATION_THRESHOLD,
               off_diagonal_tolerance=OFF_DIAGONAL_TOLERANCE, on_singular="raise"):
    """GLS with the empirical covariance structure plugged in.

    The returned fit carries the eigenpairs and rho_hat used for prediction
    in ``eigen`` and ``rho_hat``; the OLS-stage quantities are kept in
    ``diagnostics``.
    """
    Y, interval = _as_matrix(Y)
    N, K = Y.shape
    if N < 3:
        raise DimensionMismatchError(f"plug-in estimation needs N >= 3, got {N}")

    ols = ols_estimate(panel, Y, on_singular, interval)
    residuals = ols.residual_matrix()
    eig = empirical_eigendecomposition(empirical_cov(residuals))
    if eig.values[0] <= EXACT_FIT_TOLERANCE * np.sum(Y ** 2) / N:
        logger.warning("OLS residuals vanish identically; returning the OLS fit")
        rho = RhoHat(np.zeros((1, 1)), 1)
        return replace(ols, eigen=eig, rho_hat=rho, diagnostics={"path": "ols_exact", "k_N": 1})

    if k_N == "auto":
        k_N = select_truncation(eig, N, threshold)
    k_N = int(k_N)
    rho = estimate_rho(residuals, eig, k_N)

    vectors = eig.vectors
    Y_r = rotate_coefficients(Y, vectors)
    panel_r = rotate_panel(panel, vectors)
    ratio = rho.off_diagonal_ratio()
    if ratio < off_diagonal_tolerance:
        path = "tridiagonal"
        beta_r, cov_r, info_r, loss, full_rank = _tridiagonal_fit(panel_r, Y_r, eig, rho, k_N, on_singular)
    else:
        path = "dense"
        logger.info("rho_hat off-diagonal mass ratio %.3g >= %.3g; using the dense subspace solver",
                    ratio, off_diagonal_tolerance)
        beta_r, cov_r, info_r, loss, full_rank = _dense_subspace_fit(panel_r, Y_r, eig, rho, k_N, on_singular)

    p = panel.p
    back = np.kron(np.eye(p), vectors)
    beta = unrotate_coefficients(beta_r, vectors)
    resid = Y - panel.apply(beta)
    diagnostics = {
        "path": path,
        "k_N": k_N,
        "off_diagonal_ratio": ratio,
        "spacing_constant": spacing_constant(eig.values, k_N),
        "ols_eigenvalues": eig.values[: k_N + 1].tolist(),
        "ols_rho_hat": rho.coeffs.tolist(),
    }
    fit = fit_from_full(beta, back @ cov_r @ back.T, back @ info_r @ back.T, resid, loss, interval,
                        full_rank, diagnostics)
    fit.diagnostics["rank_deficient_modes"] = list(fit.rank_deficient_modes)
    eig_pred, rho_pred = _prediction_operator(resid, k_N, (eig, rho))
    return replace(fit, eigen=eig_pred, rho_hat=rho_pred)


def predict_response(panel_row, fit, rho_hat=None, eig=None, previous_residual=None):
    """Y_hat = sum_j X^j(beta_hat_j) + rho_hat(previous residual).

    previous_residual defaults to the last residual of the fit, which makes
    this the one-step-ahead forecast for the time after the sample.
    """
    rho_hat = rho_hat if rho_hat is not None else fit.rho_hat
    eig = eig if eig is not None else fit.eigen
    if previous_residual is None:
        if not fit.residuals:
            raise MissingResidualError("the fit carries no residuals to condition on")
        previous_residual = fit.residuals[-1]
    panel_row = list(panel_row)
    if len(panel_row) != fit.p:
        raise DimensionMismatchError(f"expected {fit.p} regressors, got {len(panel_row)}")
    mean = apply_regressor(panel_row[0], fit.beta_hat[0])
    for X, beta in zip(panel_row[1:], fit.beta_hat[1:]):
        mean = mean + apply_regressor(X, beta)
    if rho_hat is None or eig is None:
        return mean
    return mean + rho_hat.apply(previous_residual, eig)


def in_sample_predictions(panel, fit):
    """(N, K) array of Y_hat_n, each using the residual at n - 1 (none at n = 1)."""
    predictions = panel.apply(fit.beta_matrix())
    if fit.rho_hat is None or fit.eigen is None:
        return predictions
    basis = fit.eigen.leading(fit.rho_hat.k_N)
    previous = fit.residual_matrix()[:-1]
    predictions[1:] += fit.rho_hat.apply_scores(previous @ basis) @ basis.T
    return predictions


def rolling_forecasts(panel, Y, times, k_N="auto", **kwargs):
    """(len(times), K) array: Y_n forecast from a plug-in fit on times 1..n-1."""
    Y, interval = _as_matrix(Y)
    forecasts = []
    for n in times:
        if n < 4 or n > Y.shape[0]:
            raise DimensionMismatchError(f"rolling forecasts need 4 <= n <= {Y.shape[0]}, got {n}")
        fit = plugin_gls(panel.head(n - 1), Y[: n - 1], k_N, **kwargs)
        forecasts.append(predict_response(panel.row(n - 1), fit).coeffs)
    return np.array(forecasts)
