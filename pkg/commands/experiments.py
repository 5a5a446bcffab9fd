"""Monte Carlo experiment commands."""

from systems.experiment_runner import run_consistency_sweep, run_efmqe_experiment, run_normality_check
from utils import reports


def _report_failures(app, report):
    app.run_logger.log_info(f"REPETITIONS - Completed: {report.completed}, Failed: {report.failures}")
    if report.failures:
        app.send(app.formatter.format_error(
            f"{report.failures} of {report.repetitions} repetitions failed and were excluded (see logs)"
        ))


def experiment_command(app, args):
    """EFMQE table at the report times plus the pointwise CEMQE surface."""
    cfg = app.config
    rolling = True if args.rolling else cfg.rolling
    report = run_efmqe_experiment(cfg, app.threads, rolling, app.run_logger)

    summary = report.summary()
    summary.update(config=cfg.to_dict(), efmqe={str(n): v for n, v in report.efmqe.items()})
    outputs = [
        reports.write_table(report.efmqe_rows(), ("time", "efmqe"), app.output_path(reports.EFMQE_FILE)),
        reports.write_table(report.cemqe_rows(), ("x", "time", "cemqe"), app.output_path(reports.CEMQE_FILE)),
        reports.write_json(summary, app.output_path(reports.SUMMARY_FILE)),
    ]
    label = "rolling forecast" if rolling else "in-sample"
    app.send(app.formatter.format_header(f"EFMQE, {cfg.model.model_id}, N={cfg.N}, r={cfg.r}, {label}"))
    app.send(app.formatter.format_table(("time", "efmqe"), [(n, report.efmqe[n]) for n in cfg.times
                                                             if n in report.efmqe]))
    app.send(app.formatter.format_metric("innovation floor", report.diagnostics["innovation_floor"]))
    _report_failures(app, report)
    return outputs


def sweep_command(app, args):
    """Median estimation error of OLS and plug-in GLS across sample sizes."""
    cfg = app.config
    report = run_consistency_sweep(
        cfg.model, cfg.Ns, cfg.r, cfg.seed, K=cfg.K, k_N=cfg.k_N, noise_scale=cfg.noise_scale,
        on_singular=cfg.singular_design, threads=app.threads, run_logger=app.run_logger,
    )
    rows = report.consistency_rows()
    outputs = [reports.write_table(rows, ("N", "estimator", "median_error"), app.output_path(reports.SWEEP_FILE))]
    app.send(app.formatter.format_header(f"Consistency sweep, {cfg.model.model_id}, r={cfg.r}"))
    app.send(app.formatter.format_table(("N", "estimator", "median_error"),
                                        [(row["N"], row["estimator"], row["median_error"]) for row in rows]))
    _report_failures(app, report)
    return outputs


def normality_command(app, args):
    """Moments of the standardized known-covariance GLS error."""
    cfg = app.config
    report = run_normality_check(
        cfg.model, cfg.N, cfg.r, cfg.seed, frequencies=cfg.normality_frequencies, K=cfg.K,
        noise_scale=cfg.noise_scale, on_singular=cfg.singular_design, threads=app.threads,
        run_logger=app.run_logger,
    )
    columns = ("frequency", "param", "mean", "var", "skew")
    outputs = [reports.write_table(report.normality, columns, app.output_path(reports.NORMALITY_FILE))]
    app.send(app.formatter.format_header(f"Normality check, {cfg.model.model_id}, N={cfg.N}, r={cfg.r}"))
    app.send(app.formatter.format_table(columns, [tuple(row[c] for c in columns) for row in report.normality]))
    if report.skipped_frequencies:
        app.send(app.formatter.format_metric("skipped rank-deficient frequencies",
                                             ", ".join(str(k) for k in report.skipped_frequencies)))
    _report_failures(app, report)
    return outputs
