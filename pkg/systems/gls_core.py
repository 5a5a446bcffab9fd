"""Known-covariance GLS: AR(1) Toeplitz structure, block precision, loss and estimators.

In the simultaneously diagonal design the error covariance restricted to
basis mode k is lambda_k(R_0) * Lambda_k, with Lambda_k the N x N AR(1)
correlation matrix of lambda_k(rho). Its inverse is tridiagonal, so the
precision C^{-1} is stored as K tridiagonal blocks and never assembled.
Functions stacked in H^N are ordered time-major: index n * K + k.
"""

from dataclasses import dataclass, field
import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import toeplitz

from models.function_space import DEFAULT_INTERVAL, HFunction
from systems.basis import coefficient_matrix, functions_from_matrix
from utils.errors import (
    DimensionMismatchError,
    NearSingularError,
    NonPositiveDefiniteError,
    SingularDesignError,
)

logger = logging.getLogger("arhgls.numerics")

# |lambda(rho)| must stay below 1 - UNIT_ROOT_GUARD
UNIT_ROOT_GUARD = 1e-10
# Relative eigenvalue tolerance for rank decisions on information matrices
RANK_TOLERANCE = 1e-12
SINGULAR_POLICIES = ("raise", "pinv")


@dataclass(frozen=True)
class ToeplitzAr1:
    """The N x N matrix with entry (i, j) = lam^|i - j|."""

    lam: float
    N: int

    def __post_init__(self):
        if not abs(self.lam) < 1:
            raise NearSingularError(f"AR(1) coefficient must satisfy |lam| < 1, got {self.lam}")
        if self.N < 1:
            raise DimensionMismatchError(f"N must be >= 1, got {self.N}")


def _check_guard(lam):
    if abs(lam) >= 1 - UNIT_ROOT_GUARD:
        raise NearSingularError(f"|lam| = {abs(lam)} is within {UNIT_ROOT_GUARD} of 1")


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix from its main and first off diagonals."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray

    @property
    def N(self):
        return self.diagonal.size

    def to_dense(self):
        return np.diag(self.diagonal) + np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)

    def matvec(self, v):
        out = self.diagonal * v
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out

    def quadratic_form(self, v):
        return float(v @ self.matvec(v))


def toeplitz_dense(t):
    return toeplitz(t.lam ** np.arange(t.N))


def _tridiagonal_ar1_inverse(lam, N):
    """Diagonals of Lambda^{-1} for AR(1) coefficient lam."""
    if N == 1:
        return np.ones(1), np.zeros(0)
    s = 1.0 / (1.0 - lam ** 2)
    diagonal = np.full(N, s * (1.0 + lam ** 2))
    diagonal[0] = diagonal[-1] = s
    return diagonal, np.full(N - 1, -s * lam)


def toeplitz_inverse_tridiag(t):
    _check_guard(t.lam)
    return TridiagonalMatrix(*_tridiagonal_ar1_inverse(t.lam, t.N))


def cholesky_factor_A(t):
    """Upper triangular A with A^T A = Lambda.

    Row 1 holds the powers of lam; row i >= 2 holds sqrt(1 - lam^2) * lam^(j - i) for j >= i.
    """
    _check_guard(t.lam)
    powers = t.lam ** np.arange(t.N)
    A = np.sqrt(1.0 - t.lam ** 2) * np.triu(toeplitz(powers))
    A[0] = powers
    return A


def cholesky_inverse_bidiag(t):
    """A^{-1}: upper bidiagonal, so Lambda^{-1} = A^{-1} A^{-T}."""
    _check_guard(t.lam)
    c = np.sqrt(1.0 - t.lam ** 2)
    inverse = np.diag(np.full(t.N, 1.0 / c))
    inverse[0, 0] = 1.0
    if t.N > 1:
        inverse[0, 1] = -t.lam / c
        index = np.arange(1, t.N - 1)
        inverse[index, index + 1] = -t.lam / c
    return inverse


@dataclass(frozen=True, eq=False)
class BlockPrecision:
    """C^{-1} as K symmetric tridiagonal N x N blocks.

    ``diagonal`` has shape (K, N) and ``off_diagonal`` shape (K, N - 1).
    """

    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        if self.diagonal.ndim != 2 or self.off_diagonal.shape != (self.K, max(self.N - 1, 0)):
            raise DimensionMismatchError("block diagonals have inconsistent shapes")

    @property
    def K(self):
        return self.diagonal.shape[0]

    @property
    def N(self):
        return self.diagonal.shape[1]

    @classmethod
    def identity(cls, N, K):
        return cls(np.ones((K, N)), np.zeros((K, max(N - 1, 0))))

    def block(self, k):
        """Tridiagonal block of 0-based mode k."""
        return TridiagonalMatrix(self.diagonal[k], self.off_diagonal[k])

    def apply(self, values):
        """C^{-1} applied along time to an (N, K, ...) array."""
        values = np.asarray(values, dtype=float)
        if values.shape[:2] != (self.N, self.K):
            raise DimensionMismatchError(f"expected leading shape {(self.N, self.K)}, got {values.shape[:2]}")
        extra = (slice(None), slice(None)) + (None,) * (values.ndim - 2)
        diagonal = self.diagonal.T[extra]
        off = self.off_diagonal.T[extra]
        out = diagonal * values
        out[:-1] += off * values[1:]
        out[1:] += off * values[:-1]
        return out

    def quadratic_form(self, values):
        values = np.asarray(values, dtype=float)
        return float(np.sum(values * self.apply(values)))

    def to_dense(self):
        """(N K) x (N K) matrix in time-major order."""
        N, K = self.N, self.K
        dense = np.zeros((N * K, N * K))
        for k in range(K):
            index = np.arange(N) * K + k
            dense[np.ix_(index, index)] = self.block(k).to_dense()
        return dense


def build_block_precision(r0_eff, rho, N):
    """Block k = Lambda_k^{-1} / lambda_k(R_0)."""
    if r0_eff.K != rho.K:
        raise DimensionMismatchError(f"R_0 has K={r0_eff.K} but rho has K={rho.K}")
    if np.any(r0_eff.eigenvalues <= 0):
        raise NonPositiveDefiniteError("effective R_0 eigenvalues must be strictly positive")
    K = rho.K
    diagonal = np.empty((K, N))
    off_diagonal = np.empty((K, max(N - 1, 0)))
    for k, (lam, variance) in enumerate(zip(rho.eigenvalues, r0_eff.eigenvalues)):
        _check_guard(lam)
        d, o = _tridiagonal_ar1_inverse(lam, N)
        diagonal[k] = d / variance
        off_diagonal[k] = o / variance
    return BlockPrecision(diagonal, off_diagonal)


def _residual_array(P, resid):
    if isinstance(resid, np.ndarray):
        array = resid
    else:
        array = coefficient_matrix(resid)
    if array.shape != (P.N, P.K):
        raise DimensionMismatchError(f"expected residuals of shape {(P.N, P.K)}, got {array.shape}")
    return array


def rkhs_loss(P, resid):
    """Squared RKHS norm sum_k r_k^T block_k r_k of the residual vector."""
    return max(P.quadratic_form(_residual_array(P, resid)), 0.0)


@dataclass(frozen=True, eq=False)
class GlsFit:
    """Estimated parameters with their per-frequency covariance.

    ``covariance`` and ``information`` hold the full (pK) x (pK) matrices,
    parameter-major, when the fit came from a dense solver and are None for
    per-frequency fits.
    """

    beta_hat: List[HFunction]
    covariance_blocks: np.ndarray
    information_blocks: np.ndarray
    residuals: List[HFunction]
    loss: float
    rank_deficient_modes: Tuple[int, ...] = ()
    covariance: Optional[np.ndarray] = None
    information: Optional[np.ndarray] = None
    eigen: Any = None
    rho_hat: Any = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def p(self):
        return len(self.beta_hat)

    @property
    def K(self):
        return self.beta_hat[0].K

    def beta_matrix(self):
        return coefficient_matrix(self.beta_hat)

    def residual_matrix(self):
        return coefficient_matrix(self.residuals)


def _check_policy(on_singular):
    if on_singular not in SINGULAR_POLICIES:
        raise ValueError(f"on_singular must be one of {SINGULAR_POLICIES}, got {on_singular!r}")


def _rank_deficient(eigenvalues):
    """Boolean mask of eigenvalues treated as zero, per row."""
    scale = np.max(np.abs(eigenvalues), axis=-1, keepdims=True)
    return eigenvalues <= RANK_TOLERANCE * scale


def numerical_rank(matrices):
    """Rank of symmetric PSD matrices (..., m, m), decided after scaling to unit diagonal.

    The scaling makes the decision independent of how strongly each
    parameter is weighted.
    """
    matrices = 0.5 * (matrices + np.swapaxes(matrices, -1, -2))
    d = np.sqrt(np.clip(np.diagonal(matrices, axis1=-2, axis2=-1), 0.0, None))
    safe = np.where(d > 0, d, 1.0)
    scaled = matrices / (safe[..., :, None] * safe[..., None, :])
    w = np.linalg.eigvalsh(scaled)
    positive = np.max(w, axis=-1) > 0
    return np.where(positive, np.sum(~_rank_deficient(w), axis=-1), 0)


def _pseudo_inverse(matrices):
    """Eigen pseudo-inverse keeping the numerical_rank largest eigenvalues.

    Returns (inverse, rank_deficient mask over the leading axes).
    """
    matrices = 0.5 * (matrices + np.swapaxes(matrices, -1, -2))
    w, V = np.linalg.eigh(matrices)
    m = w.shape[-1]
    rank = numerical_rank(matrices)
    keep = (np.arange(m) >= (m - rank)[..., None]) & (w > 0)
    inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    inverse = np.einsum("...pi,...i,...qi->...pq", V, inv_w, V)
    return inverse, rank < m


def solve_normal_equations(info, rhs, on_singular="raise", label="design"):
    """Solve info @ beta = rhs for symmetric PSD info.

    Returns (beta, covariance, full_rank). Under the ``pinv`` policy a rank
    deficient system gets the minimum-norm solution.
    """
    _check_policy(on_singular)
    covariance, deficient = _pseudo_inverse(info)
    full_rank = not bool(deficient)
    if not full_rank:
        if on_singular == "raise":
            raise SingularDesignError(f"normal equations of the {label} are rank deficient")
        logger.warning("Rank-deficient %s: %d of %d directions dropped",
                       label, info.shape[0] - int(numerical_rank(info)), info.shape[0])
    return covariance @ rhs, covariance, full_rank


def design_tensor(panel):
    """(N, K, pK) array W with Y_n = W_n @ vec(beta), vec parameter-major."""
    matrices = panel.dense_matrices()
    N, p, K, _ = matrices.shape
    return matrices.transpose(0, 2, 1, 3).reshape(N, K, p * K)


def design_information(panel, P):
    """(K, p, p) per-frequency information X_k^T block_k X_k of a diagonal panel."""
    if not panel.diagonal:
        raise DimensionMismatchError("per-frequency information needs a diagonal panel")
    design = panel.values.transpose(0, 2, 1)
    return np.einsum("nkp,nkq->kpq", design, P.apply(design))


def _blocks_from_full(matrix, p, K):
    index = np.arange(p)[:, None] * K
    return np.stack([matrix[np.ix_((index + k).ravel(), (index + k).ravel())] for k in range(K)])


def _full_from_blocks(blocks):
    K, p, _ = blocks.shape
    full = np.zeros((p * K, p * K))
    index = np.arange(p) * K
    for k in range(K):
        full[np.ix_(index + k, index + k)] = blocks[k]
    return full


def _check_inputs(panel, Y, P):
    Y = coefficient_matrix(Y) if not isinstance(Y, np.ndarray) else Y
    if Y.shape != (panel.N, panel.K):
        raise DimensionMismatchError(f"responses have shape {Y.shape}, panel expects {(panel.N, panel.K)}")
    if (P.N, P.K) != (panel.N, panel.K):
        raise DimensionMismatchError(f"precision is for N={P.N}, K={P.K}; panel has N={panel.N}, K={panel.K}")
    return Y


def gls_estimate(panel, Y, P, on_singular="raise", interval=None):
    """beta_hat = (X^T C^{-1} X)^{-1} X^T C^{-1} Y.

    Diagonal panels decouple into one p x p solve per frequency; general
    panels use one dense (pK) x (pK) solve.
    """
    _check_policy(on_singular)
    if interval is None:
        interval = DEFAULT_INTERVAL if isinstance(Y, np.ndarray) else Y[0].interval
    Y = _check_inputs(panel, Y, P)
    if panel.diagonal:
        return _per_frequency_gls(panel, Y, P, on_singular, interval)
    return _dense_gls(panel, Y, P, on_singular, interval)


def _per_frequency_gls(panel, Y, P, on_singular, interval):
    N, p, K = panel.values.shape
    design = panel.values.transpose(0, 2, 1)
    weighted = P.apply(design)
    info = np.einsum("nkp,nkq->kpq", design, weighted)
    rhs = np.einsum("nkp,nk->kp", weighted, Y)
    info = 0.5 * (info + info.transpose(0, 2, 1))
    covariance, dropped = _pseudo_inverse(info)
    deficient = tuple(int(k) + 1 for k in np.flatnonzero(dropped))
    if deficient:
        if on_singular == "raise":
            raise SingularDesignError(f"design is rank deficient at frequency k={deficient[0]}", mode=deficient[0])
        logger.warning("Rank-deficient design at %d frequencies (first k=%d); using minimum-norm solutions",
                       len(deficient), deficient[0])
    beta = np.einsum("kpq,kq->pk", covariance, rhs)
    residuals = Y - panel.apply(beta)
    return GlsFit(
        beta_hat=functions_from_matrix(beta, interval),
        covariance_blocks=covariance,
        information_blocks=info,
        residuals=functions_from_matrix(residuals, interval),
        loss=rkhs_loss(P, residuals),
        rank_deficient_modes=deficient,
        diagnostics={"path": "per_frequency"},
    )


def _dense_gls(panel, Y, P, on_singular, interval):
    N, p, K = panel.N, panel.p, panel.K
    W = design_tensor(panel)
    weighted = P.apply(W)
    info = W.reshape(N * K, p * K).T @ weighted.reshape(N * K, p * K)
    rhs = weighted.reshape(N * K, p * K).T @ Y.reshape(N * K)
    beta_vec, covariance, full_rank = solve_normal_equations(info, rhs, on_singular, "dense design")
    beta = beta_vec.reshape(p, K)
    residuals = Y - panel.apply(beta)
    return fit_from_full(beta, covariance, info, residuals, rkhs_loss(P, residuals), interval, full_rank,
                         {"path": "dense", "full_rank": full_rank})


def fit_from_full(beta, covariance, info, residuals, loss, interval, full_rank=True, diagnostics=None):
    """GlsFit from full (pK) x (pK) covariance and information matrices."""
    p, K = beta.shape
    info_blocks = _blocks_from_full(info, p, K)
    deficient = ()
    if not full_rank:
        deficient = tuple(int(k) + 1 for k in np.flatnonzero(numerical_rank(info_blocks) < p))
    return GlsFit(
        beta_hat=functions_from_matrix(beta, interval),
        covariance_blocks=_blocks_from_full(covariance, p, K),
        information_blocks=info_blocks,
        residuals=functions_from_matrix(residuals, interval),
        loss=loss,
        rank_deficient_modes=deficient,
        covariance=covariance,
        information=info,
        diagnostics=dict(diagnostics or {}),
    )


def ols_estimate(panel, Y, on_singular="raise", interval=None):
    """beta_tilde = (X^T X)^{-1} X^T Y."""
    return gls_estimate(panel, Y, BlockPrecision.identity(panel.N, panel.K), on_singular, interval)


def _symmetric_sqrt(matrix):
    w, V = np.linalg.eigh(0.5 * (matrix + matrix.T))
    if numerical_rank(matrix) < w.size or np.any(w <= 0):
        raise NonPositiveDefiniteError("information matrix is not positive definite")
    return (V * np.sqrt(w)) @ V.T


def normalized_statistic(fit, beta_true, modes=None):
    """Standardized estimation error (X^T C^{-1} X)_k^{1/2} (beta_hat - beta)_k.

    Returns an array of shape (len(modes), p); modes are 1-based and default
    to all K. Fits from the dense solver are standardized jointly with the
    full information matrix.
    """
    true = coefficient_matrix(beta_true)
    error = fit.beta_matrix() - true
    p, K = error.shape
    modes = list(range(1, K + 1)) if modes is None else [int(k) for k in modes]
    if fit.information is not None and fit.diagnostics.get("path") != "per_frequency":
        z = (_symmetric_sqrt(fit.information) @ error.reshape(p * K)).reshape(p, K).T
        return z[[k - 1 for k in modes]]
    rows = []
    for k in modes:
        try:
            root = _symmetric_sqrt(fit.information_blocks[k - 1])
        except NonPositiveDefiniteError as e:
            raise NonPositiveDefiniteError(f"information block at frequency k={k} is not positive definite") from e
        rows.append(root @ error[:, k - 1])
    return np.array(rows)
