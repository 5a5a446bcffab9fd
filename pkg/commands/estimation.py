"""Estimation and forecasting commands over simulated CSV data."""

import os

from systems.gls_core import ols_estimate
from systems.plugin_est import plugin_gls, predict_response
from utils import reports
from utils.errors import ConfigError


def _load_inputs(app, input_dir):
    if not os.path.isdir(input_dir):
        raise ConfigError("input", f"{input_dir} is not a directory")
    Y = reports.read_responses(os.path.join(input_dir, reports.RESPONSES_FILE))
    panel = reports.read_panel(os.path.join(input_dir, reports.PANEL_FILE))
    N, K = Y.shape
    if panel.K != K or panel.N < N:
        raise ConfigError("input", f"panel (N={panel.N}, K={panel.K}) does not cover responses (N={N}, K={K})")
    return Y, panel


def _fit(app, panel, Y, estimator):
    cfg = app.config
    if estimator == "ols":
        return ols_estimate(panel, Y, cfg.singular_design)
    return plugin_gls(panel, Y, cfg.k_N, threshold=cfg.truncation_threshold, on_singular=cfg.singular_design)


def fit_command(app, args):
    """Fit beta by OLS or plug-in GLS; write beta_hat.csv and diagnostics.json."""
    Y, panel = _load_inputs(app, args.input)
    N = Y.shape[0]
    fit = _fit(app, panel.head(N), Y, args.estimator)

    diagnostics = dict(fit.diagnostics)
    diagnostics.update(
        estimator=args.estimator,
        N=N,
        K=fit.K,
        p=fit.p,
        loss=fit.loss,
        rank_deficient_modes=list(fit.rank_deficient_modes),
    )
    outputs = [
        reports.write_beta(fit.beta_matrix(), app.output_path(reports.BETA_HAT_FILE)),
        reports.write_json(diagnostics, app.output_path(reports.DIAGNOSTICS_FILE)),
    ]
    app.send(app.formatter.format_success(f"Fitted {args.estimator} estimator on N={N}, K={fit.K}, p={fit.p}"))
    if "k_N" in diagnostics:
        app.send(app.formatter.format_metric("k_N", diagnostics["k_N"]))
    app.send(app.formatter.format_metric("loss", fit.loss))
    return outputs


def predict_command(app, args):
    """Plug-in fit on times 1..N and one-step forecast of Y_{N+1}."""
    Y, panel = _load_inputs(app, args.input)
    N = Y.shape[0]
    if panel.N < N + 1:
        raise ConfigError("input", f"forecasting time {N + 1} needs panel rows up to {N + 1}, got {panel.N}")
    fit = _fit(app, panel.head(N), Y, "plugin")
    forecast = predict_response(panel.row(N), fit)
    outputs = [reports.write_forecast(forecast.coeffs, app.output_path(reports.FORECAST_FILE))]
    app.send(app.formatter.format_success(f"Forecast Y_{N + 1} from a plug-in fit on N={N}"))
    return outputs
