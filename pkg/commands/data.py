"""Sample generation command."""

from systems.arh_sim import simulate_sample_path
from systems.spectral_ops import build_model_beta, build_model_regressors
from utils import reports
from utils.seeding import repetition_rng


def simulate_command(app, args):
    """Simulate one sample path and write responses, regressors and the true beta.

    The panel covers times 1..N+1 so that ``predict`` has the regressors of
    the time after the sample.
    """
    cfg = app.config
    model = cfg.model
    panel = build_model_regressors(model, cfg.N + 1, cfg.K)
    beta = build_model_beta(model, cfg.K)
    rng = repetition_rng(cfg.seed)
    sample = simulate_sample_path(model, panel.head(cfg.N), beta, rng, cfg.seed, cfg.noise_scale, cfg.burn_in)

    outputs = [
        reports.write_responses(sample.response_matrix(), app.output_path(reports.RESPONSES_FILE)),
        reports.write_panel(panel, app.output_path(reports.PANEL_FILE)),
        reports.write_beta([b.coeffs for b in beta], app.output_path(reports.BETA_TRUE_FILE)),
    ]
    app.send(app.formatter.format_success(
        f"Simulated {model.model_id}: N={cfg.N}, K={cfg.K}, p={model.p}, seed={cfg.seed}"
    ))
    return outputs
