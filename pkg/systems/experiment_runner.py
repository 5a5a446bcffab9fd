"""Monte Carlo experiments: prediction errors, consistency sweeps and normality checks.

Repetition i draws from its own stream repetition_rng(seed, ..., i), and
results are reduced in repetition order, so reports do not depend on the
number of worker threads. A repetition that raises a numerical error is
logged, excluded and counted in ``MetricsReport.failures``.
"""

import concurrent.futures
import logging

import numpy as np
from scipy.stats import skew

from models.experiment import MetricsReport
from models.function_space import Grid
from systems.basis import basis_matrix
from systems.arh_sim import simulate_sample_path
from systems.gls_core import (
    build_block_precision,
    design_information,
    gls_estimate,
    normalized_statistic,
    numerical_rank,
    ols_estimate,
)
from systems.plugin_est import in_sample_predictions, nominal_truncation, plugin_gls, rolling_forecasts
from systems.spectral_ops import (
    build_model_beta,
    build_model_operators,
    build_model_regressors,
    stationary_covariance,
)
from utils.errors import NUMERICAL_ERRORS
from utils.seeding import repetition_rng

logger = logging.getLogger("arhgls.experiment")

# Stream keys separating the experiment kinds under one seed
EFMQE_STREAM = 0
SWEEP_STREAM = 1
NORMALITY_STREAM = 2


def _guarded(task, index, run_logger):
    try:
        return task(index), None
    except NUMERICAL_ERRORS + (np.linalg.LinAlgError,) as e:
        if run_logger is not None:
            run_logger.log_repetition_failure(index, e)
        else:
            logger.warning("Repetition %d failed: %s: %s", index, type(e).__name__, e)
        return None, e


def run_repetitions(task, r, threads=1, run_logger=None):
    """[(result, error)] for repetitions 0..r-1, in repetition order."""
    if threads <= 1 or r == 1:
        return [_guarded(task, i, run_logger) for i in range(r)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(lambda i: _guarded(task, i, run_logger), range(r)))


def innovation_floor(model, K=None, grid=None, noise_scale=1.0):
    """(1/M) sum over the grid of Var(delta_n(x)); no predictor's expected EFMQE goes below it."""
    grid = grid or Grid.midpoint(model.interval, 60)
    _, r_delta, _ = build_model_operators(model, K, noise_scale)
    phi = basis_matrix(grid, r_delta.K)
    return float(np.mean(phi ** 2 @ r_delta.eigenvalues))


def run_efmqe_experiment(cfg, threads=1, rolling=None, run_logger=None):
    """EFMQE(n) and CEMQE(x, n) of the plug-in predictor at the configured times.

    The in-sample reading fits once on the full sample and predicts Y_n with
    the residual at n - 1; the rolling reading refits on times 1..n-1.
    """
    rolling = cfg.rolling if rolling is None else rolling
    model = cfg.model
    panel = build_model_regressors(model, cfg.N, cfg.K)
    beta = build_model_beta(model, cfg.K)
    grid = cfg.grid
    phi = basis_matrix(grid, cfg.K)
    index = np.array(cfg.times) - 1
    options = {"threshold": cfg.truncation_threshold, "on_singular": cfg.singular_design}

    def repetition(i):
        rng = repetition_rng(cfg.seed, EFMQE_STREAM, i)
        sample = simulate_sample_path(model, panel, beta, rng, cfg.seed, cfg.noise_scale, cfg.burn_in)
        Y = sample.response_matrix()
        if rolling:
            predicted = rolling_forecasts(panel, Y, cfg.times, cfg.k_N, **options)
            path = "rolling"
        else:
            fit = plugin_gls(panel, Y, cfg.k_N, **options)
            predicted = in_sample_predictions(panel, fit)[index]
            path = fit.diagnostics.get("path")
        pointwise = (Y[index] - predicted) @ phi.T
        return pointwise ** 2, path

    outcomes = run_repetitions(repetition, cfg.r, threads, run_logger)
    completed = [result for result, error in outcomes if error is None]
    report = MetricsReport(times=cfg.times, grid_points=grid.points.copy(), repetitions=cfg.r,
                           failures=cfg.r - len(completed))
    paths = {}
    for _, path in completed:
        paths[path] = paths.get(path, 0) + 1
    report.diagnostics.update(
        innovation_floor=innovation_floor(model, cfg.K, grid, cfg.noise_scale),
        nominal_k_N=nominal_truncation(model, cfg.N, cfg.K, cfg.truncation_threshold),
        k_N=cfg.k_N,
        rolling=bool(rolling),
        paths=paths,
    )
    if not completed:
        logger.warning("All %d repetitions failed; no EFMQE reported", cfg.r)
        return report
    squared = np.stack([result for result, _ in completed])
    per_repetition = squared.mean(axis=2)
    efmqe = per_repetition.mean(axis=0)
    stderr = np.zeros_like(efmqe)
    if len(completed) > 1:
        stderr = per_repetition.std(axis=0, ddof=1) / np.sqrt(len(completed))
    report.efmqe = {n: float(v) for n, v in zip(cfg.times, efmqe)}
    report.efmqe_stderr = {n: float(v) for n, v in zip(cfg.times, stderr)}
    report.cemqe = squared.mean(axis=0).T
    return report


def _median(values):
    values = [v for v in values if v is not None]
    return float(np.median(values)) if values else float("nan")


def run_consistency_sweep(model, Ns, r, seed, K=None, k_N="auto", noise_scale=1.0, on_singular="pinv",
                          threads=1, run_logger=None):
    """Median ||beta_hat - beta||_{H^p} over r repetitions for OLS and plug-in GLS at each N."""
    Ns = [int(N) for N in Ns]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError(f"sweep sizes must be increasing, got {Ns}")
    K = K or model.K
    beta = build_model_beta(model, K)
    beta_true = np.vstack([b.coeffs for b in beta])
    report = MetricsReport(repetitions=r * len(Ns))

    for N in Ns:
        panel = build_model_regressors(model, N, K)

        def repetition(i, N=N, panel=panel):
            rng = repetition_rng(seed, SWEEP_STREAM, N, i)
            Y = simulate_sample_path(model, panel, beta, rng, seed, noise_scale).response_matrix()
            ols = ols_estimate(panel, Y, on_singular)
            plugin = plugin_gls(panel, Y, k_N, on_singular=on_singular)
            return (float(np.linalg.norm(ols.beta_matrix() - beta_true)),
                    float(np.linalg.norm(plugin.beta_matrix() - beta_true)))

        outcomes = run_repetitions(repetition, r, threads, run_logger)
        completed = [result for result, error in outcomes if error is None]
        report.failures += r - len(completed)
        report.consistency[N] = {
            "ols": _median(result[0] for result in completed),
            "plugin": _median(result[1] for result in completed),
        }
        logger.info("Sweep N=%d: %d of %d repetitions completed", N, len(completed), r)
    return report


def identifiable_frequencies(information_blocks):
    """1-based frequencies whose information block has full rank."""
    full = numerical_rank(information_blocks) == information_blocks.shape[-1]
    return [int(k) + 1 for k in np.flatnonzero(full)]


def _moments(samples):
    """Mean, variance and skewness of a 1-D sample; degenerate samples get zero spread."""
    mean = float(np.mean(samples))
    var = float(np.var(samples, ddof=1)) if samples.size > 1 else 0.0
    if samples.size < 3 or np.ptp(samples) == 0:
        return mean, var, 0.0
    return mean, var, float(skew(samples))


def run_normality_check(model, N, r, seed, frequencies=3, K=None, noise_scale=1.0, on_singular="pinv",
                        threads=1, run_logger=None):
    """Moments of the standardized GLS error under the true error covariance.

    Reports the leading ``frequencies`` identifiable frequencies for every
    parameter; rank-deficient frequencies before them are listed as skipped.
    """
    K = K or model.K
    panel = build_model_regressors(model, N, K)
    beta = build_model_beta(model, K)
    # Scaling C leaves beta_hat unchanged; the unit scale stands in for noiseless runs
    _, r_delta, rho = build_model_operators(model, K, noise_scale if noise_scale > 0 else 1.0)
    P = build_block_precision(stationary_covariance(rho, r_delta), rho, N)
    identifiable = identifiable_frequencies(design_information(panel, P))
    modes = identifiable[:frequencies]
    skipped = tuple(k for k in range(1, (modes[-1] if modes else K) + 1) if k not in modes)
    report = MetricsReport(repetitions=r, skipped_frequencies=skipped)
    report.diagnostics["frequencies"] = modes
    if skipped:
        logger.info("Normality check skips rank-deficient frequencies %s", list(skipped))
    if not modes:
        logger.warning("%s has no identifiable frequency at N=%d", model.model_id, N)
        return report

    def repetition(i):
        rng = repetition_rng(seed, NORMALITY_STREAM, i)
        Y = simulate_sample_path(model, panel, beta, rng, seed, noise_scale).response_matrix()
        fit = gls_estimate(panel, Y, P, on_singular)
        return normalized_statistic(fit, beta, modes)

    outcomes = run_repetitions(repetition, r, threads, run_logger)
    completed = [result for result, error in outcomes if error is None]
    report.failures = r - len(completed)
    if not completed:
        return report
    stats = np.stack(completed)
    for f, k in enumerate(modes):
        for j in range(panel.p):
            mean, var, skewness = _moments(stats[:, f, j])
            report.normality.append({"frequency": k, "param": j + 1, "mean": mean, "var": var, "skew": skewness})
    return report
