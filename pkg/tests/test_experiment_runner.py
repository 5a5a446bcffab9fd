import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from models.experiment import ExperimentConfig
from models.function_space import Grid
from systems.experiment_runner import (
    identifiable_frequencies,
    innovation_floor,
    run_consistency_sweep,
    run_efmqe_experiment,
    run_normality_check,
    run_repetitions,
)
from utils.errors import NearSingularError


def _small_config(model, **changes):
    settings = dict(model=model.with_K(8), N=40, r=4, k_N=2, K=8, M=40, seed=3, times=(10, 20, 40),
                    Ns=(40, 80))
    settings.update(changes)
    return ExperimentConfig(**settings)


def test_run_repetitions_keeps_order_and_counts_failures():
    def task(i):
        if i == 2:
            raise NearSingularError("boom")
        return i * i

    serial = run_repetitions(task, 5, threads=1)
    threaded = run_repetitions(task, 5, threads=3)
    assert [result for result, _ in serial] == [0, 1, None, 9, 16]
    assert [result for result, _ in threaded] == [0, 1, None, 9, 16]
    assert isinstance(serial[2][1], NearSingularError)


def test_run_repetitions_propagates_programming_errors():
    def task(i):
        raise KeyError(i)

    with pytest.raises(KeyError):
        run_repetitions(task, 2)


def test_innovation_floor_of_model1(model1):
    grid = Grid.midpoint(model1.interval, 60)
    k = np.arange(1, 51)
    # On the midpoint grid the mean of phi_k^2 is exactly 1 / 60 for k < 60
    expected = np.sum(1 / (k + 1) ** 4) / 60
    assert innovation_floor(model1, 50, grid) == pytest.approx(expected)
    assert innovation_floor(model1, 50, grid, noise_scale=0.5) == pytest.approx(expected / 2)


def test_efmqe_report_layout(model1):
    cfg = _small_config(model1)
    report = run_efmqe_experiment(cfg)
    assert report.times == (10, 20, 40)
    assert list(report.efmqe) == [10, 20, 40]
    assert report.cemqe.shape == (40, 3)
    assert len(report.cemqe_rows()) == 120
    assert report.repetitions == 4
    assert report.failures == 0
    assert report.check()
    assert_allclose([report.efmqe[n] for n in cfg.times], report.cemqe.mean(axis=0))
    assert report.diagnostics["innovation_floor"] > 0


def test_efmqe_is_independent_of_thread_count(model1):
    cfg = _small_config(model1)
    serial = run_efmqe_experiment(cfg, threads=1)
    threaded = run_efmqe_experiment(cfg, threads=4)
    assert serial.efmqe == threaded.efmqe
    assert_array_equal(serial.cemqe, threaded.cemqe)


def test_efmqe_vanishes_without_noise(model1):
    cfg = _small_config(model1, noise_scale=1e-12, r=2)
    report = run_efmqe_experiment(cfg)
    assert report.failures == 0
    assert all(value < 1e-8 for value in report.efmqe.values())


def test_rolling_efmqe(model1):
    cfg = _small_config(model1, r=2, times=(20, 40), rolling=True)
    report = run_efmqe_experiment(cfg)
    assert report.diagnostics["rolling"] is True
    assert list(report.efmqe) == [20, 40]


def test_consistency_sweep_with_a_single_repetition(periodic_model):
    report = run_consistency_sweep(periodic_model, [40, 80], 1, seed=5, K=6)
    assert sorted(report.consistency) == [40, 80]
    for summary in report.consistency.values():
        assert set(summary) == {"ols", "plugin"}
        assert all(np.isfinite(v) and v > 0 for v in summary.values())
    assert len(report.consistency_rows()) == 4


def test_consistency_sweep_rejects_unordered_sizes(periodic_model):
    with pytest.raises(ValueError):
        run_consistency_sweep(periodic_model, [80, 40], 1, seed=0)


@pytest.mark.slow
def test_consistency_errors_decrease_on_identifiable_design(periodic_model):
    Ns = (200, 600, 1000)
    report = run_consistency_sweep(periodic_model, list(Ns), 50, seed=11, K=20)
    for estimator in ("ols", "plugin"):
        medians = [report.consistency[N][estimator] for N in Ns]
        assert medians[0] > medians[1] > medians[2]
    # Estimating rho must not cost more than a few percent against OLS
    for N in Ns:
        assert report.consistency[N]["plugin"] <= 1.05 * report.consistency[N]["ols"]
    assert report.failures == 0


def test_identifiable_frequencies_skips_singular_blocks():
    blocks = np.stack([np.ones((2, 2)), np.eye(2), np.zeros((2, 2))])
    assert identifiable_frequencies(blocks) == [2]


def test_normality_statistics_vanish_without_noise(periodic_model):
    report = run_normality_check(periodic_model, 30, 3, seed=1, frequencies=2, K=6, noise_scale=0.0)
    assert len(report.normality) == 2 * 3
    for row in report.normality:
        assert abs(row["mean"]) < 1e-8
        assert row["var"] < 1e-16


def test_normality_on_identifiable_design(periodic_model):
    report = run_normality_check(periodic_model, 100, 300, seed=2, frequencies=3, K=10)
    assert report.skipped_frequencies == ()
    assert [row["frequency"] for row in report.normality] == [1, 1, 1, 2, 2, 2, 3, 3, 3]
    for row in report.normality:
        # 4 standard errors at r = 300
        assert abs(row["mean"]) < 0.25
        assert 0.65 < row["var"] < 1.35


def test_normality_skips_the_collinear_first_frequency_of_model1(model1):
    report = run_normality_check(model1, 60, 2, seed=0, frequencies=3, K=8)
    assert 1 in report.skipped_frequencies
    assert {row["frequency"] for row in report.normality} == set(report.diagnostics["frequencies"])
    assert 1 not in report.diagnostics["frequencies"]


def test_model2_has_no_identifiable_frequency(model2):
    report = run_normality_check(model2, 60, 2, seed=0, K=5)
    assert report.normality == []
    assert report.skipped_frequencies == (1, 2, 3, 4, 5)


@pytest.fixture(scope="module")
def acceptance_reports(model1, model2):
    reports = {}
    for name, model in (("model1", model1), ("model2", model2)):
        cfg = ExperimentConfig(model=model, N=200, r=100, k_N=4, K=50, M=60, seed=0)
        reports[name] = run_efmqe_experiment(cfg, threads=4)
    return reports


@pytest.mark.slow
def test_efmqe_bands_at_acceptance_scale(acceptance_reports):
    first, second = acceptance_reports["model1"], acceptance_reports["model2"]
    assert list(first.efmqe) == list(range(10, 201, 10))
    for n in first.efmqe:
        assert 5e-4 <= first.efmqe[n] <= 3e-2
        assert 3e-2 <= second.efmqe[n] <= 9e-1
        assert second.efmqe[n] > first.efmqe[n]
    assert first.failures <= 5
    assert second.failures <= 5


@pytest.mark.slow
def test_efmqe_stays_above_the_innovation_floor(acceptance_reports):
    for report in acceptance_reports.values():
        floor = report.diagnostics["innovation_floor"]
        for n, value in report.efmqe.items():
            assert value + 4 * report.efmqe_stderr[n] >= floor
        assert np.mean(list(report.efmqe.values())) >= 0.9 * floor


@pytest.mark.slow
def test_model1_normality_at_acceptance_scale(model1):
    report = run_normality_check(model1, 200, 1000, seed=4, frequencies=3, K=50, threads=4)
    assert len(report.normality) == 9
    for row in report.normality:
        assert -0.15 < row["mean"] < 0.15
        assert 0.8 < row["var"] < 1.2
