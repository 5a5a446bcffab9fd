import io
import json

import pytest
from numpy.testing import assert_allclose

from arhgls import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, cli_main
from utils import reports
from utils.config import THREADS_ENV
from utils.logger import LOG_DIR_ENV

SMALL_STUDY = "model = model1\nN = 40\nr = 3\nk_N = 2\nK = 8\nM = 40\ntimes = 10:40:10\nNs = 40,80\n"


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    monkeypatch.delenv(LOG_DIR_ENV, raising=False)


def run(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    code = cli_main(list(argv), stdout=stdout, stderr=stderr)
    return code, stdout.getvalue(), stderr.getvalue()


def write_config(tmp_path, text, name="study.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_experiment_is_identical_across_thread_counts(tmp_path):
    config = write_config(tmp_path, SMALL_STUDY)
    serial, threaded = tmp_path / "serial", tmp_path / "threaded"
    assert run("--config", config, "--out", str(serial), "--threads", "1", "experiment")[0] == EXIT_OK
    assert run("--config", config, "--out", str(threaded), "--threads", "4", "experiment")[0] == EXIT_OK
    for name in (reports.EFMQE_FILE, reports.CEMQE_FILE, reports.SUMMARY_FILE):
        assert (serial / name).read_bytes() == (threaded / name).read_bytes()


@pytest.mark.parametrize("command, output", [("sweep", reports.SWEEP_FILE), ("normality", reports.NORMALITY_FILE)])
def test_studies_are_identical_across_thread_counts(tmp_path, command, output):
    config = write_config(tmp_path, "model = periodic_design\nN = 40\nr = 6\nK = 6\ntimes = 10,40\nNs = 40,80\n"
                                    "normality_frequencies = 2\n")
    serial, threaded = tmp_path / "serial", tmp_path / "threaded"
    assert run("--config", config, "--out", str(serial), "--threads", "1", command)[0] == EXIT_OK
    assert run("--config", config, "--out", str(threaded), "--threads", "8", command)[0] == EXIT_OK
    assert (serial / output).read_bytes() == (threaded / output).read_bytes()


def test_experiment_tables_cover_every_report_time(tmp_path):
    config = write_config(tmp_path, "N = 200\nr = 2\nk_N = 2\nK = 8\nM = 40\n")
    code, stdout, _ = run("--config", config, "--out", str(tmp_path), "experiment")
    assert code == EXIT_OK
    efmqe = (tmp_path / reports.EFMQE_FILE).read_text().splitlines()
    assert efmqe[0] == "time,efmqe"
    assert [int(line.split(",")[0]) for line in efmqe[1:]] == list(range(10, 201, 10))
    cemqe = (tmp_path / reports.CEMQE_FILE).read_text().splitlines()
    assert cemqe[0] == "x,time,cemqe"
    assert len(cemqe) == 1 + 40 * 20
    summary = json.loads((tmp_path / reports.SUMMARY_FILE).read_text())
    assert summary["config"]["model"] == "model1"
    assert summary["repetitions"] == 2
    assert "EFMQE" in stdout


def test_run_writes_logs(tmp_path):
    config = write_config(tmp_path, SMALL_STUDY)
    assert run("--config", config, "--out", str(tmp_path / "out"), "experiment")[0] == EXIT_OK
    log = (tmp_path / "out" / "logs" / "experiment.log").read_text()
    assert "experiment" in log
    assert "REPETITIONS - Completed: 3, Failed: 0" in log


@pytest.mark.parametrize("estimator", ["plugin", "ols"])
def test_simulate_then_fit_recovers_beta_without_noise(tmp_path, estimator):
    config = write_config(tmp_path, "model = periodic_design\nN = 30\nK = 6\ntimes = 10,20,30\nnoise_scale = 0\n")
    data = tmp_path / "data"
    assert run("--config", config, "--out", str(data), "simulate")[0] == EXIT_OK
    fitted = tmp_path / "fit"
    code, _, _ = run("--config", config, "--out", str(fitted), "fit", "--input", str(data), "--estimator", estimator)
    assert code == EXIT_OK
    beta_true = reports.read_beta(str(data / reports.BETA_TRUE_FILE))
    beta_hat = reports.read_beta(str(fitted / reports.BETA_HAT_FILE))
    assert beta_hat.shape == (3, 6)
    assert_allclose(beta_hat, beta_true, atol=1e-8)
    diagnostics = json.loads((fitted / reports.DIAGNOSTICS_FILE).read_text())
    assert diagnostics["estimator"] == estimator
    assert diagnostics["N"] == 30
    assert diagnostics["rank_deficient_modes"] == []


def test_predict_forecasts_the_next_mean_without_noise(tmp_path):
    config = write_config(tmp_path, "model = periodic_design\nN = 30\nK = 6\ntimes = 10,20,30\nnoise_scale = 0\n")
    data = tmp_path / "data"
    assert run("--config", config, "--out", str(data), "simulate")[0] == EXIT_OK
    assert run("--config", config, "--out", str(tmp_path / "pred"), "predict", "--input", str(data))[0] == EXIT_OK
    panel = reports.read_panel(str(data / reports.PANEL_FILE))
    assert panel.N == 31
    beta = reports.read_beta(str(data / reports.BETA_TRUE_FILE))
    forecast = reports.read_forecast(str(tmp_path / "pred" / reports.FORECAST_FILE))
    assert forecast.shape == (panel.K,)
    assert_allclose(forecast, panel.apply(beta)[30], atol=1e-8)


def test_singular_design_under_raise_policy_is_a_numerical_failure(tmp_path):
    config = write_config(tmp_path, "N = 20\nK = 4\ntimes = 10,20\nsingular_design = raise\n")
    data = tmp_path / "data"
    assert run("--config", config, "--out", str(data), "simulate")[0] == EXIT_OK
    code, _, stderr = run("--config", config, "--out", str(tmp_path / "fit"), "fit", "--input", str(data),
                          "--estimator", "ols")
    assert code == EXIT_NUMERICAL
    assert "SingularDesignError" in stderr


def test_unknown_config_key_names_the_key(tmp_path):
    config = write_config(tmp_path, "sample_size = 10\n")
    code, _, stderr = run("--config", config, "--out", str(tmp_path), "experiment")
    assert code == EXIT_USAGE
    assert "sample_size" in stderr


def test_missing_config_file(tmp_path):
    code, _, stderr = run("--config", str(tmp_path / "absent.cfg"), "--out", str(tmp_path), "experiment")
    assert code == EXIT_USAGE
    assert "absent.cfg" in stderr


def test_unknown_subcommand():
    assert run("bootstrap")[0] == EXIT_USAGE


def test_fit_without_input_directory(tmp_path):
    code, _, stderr = run("--out", str(tmp_path), "fit", "--input", str(tmp_path / "nothing"))
    assert code == EXIT_USAGE
    assert "input" in stderr


def test_invalid_thread_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    code, _, stderr = run("--out", str(tmp_path), "experiment")
    assert code == EXIT_USAGE
    assert THREADS_ENV in stderr


def test_sweep_and_normality_commands(tmp_path):
    config = write_config(tmp_path, "model = periodic_design\nN = 40\nr = 2\nK = 6\ntimes = 10,20\nNs = 40,80\n")
    assert run("--config", config, "--out", str(tmp_path), "sweep")[0] == EXIT_OK
    sweep = (tmp_path / reports.SWEEP_FILE).read_text().splitlines()
    assert sweep[0] == "N,estimator,median_error"
    assert len(sweep) == 1 + 4
    assert run("--config", config, "--out", str(tmp_path), "normality")[0] == EXIT_OK
    normality = (tmp_path / reports.NORMALITY_FILE).read_text().splitlines()
    assert normality[0] == "frequency,param,mean,var,skew"
    assert len(normality) == 1 + 3 * 3
