"""Experiment settings and the metrics they produce."""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Tuple

import numpy as np

from models.function_space import Grid
from models.model_spec import ModelSpec
from systems.gls_core import SINGULAR_POLICIES
from utils.errors import ConfigError


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo study: a model, sample size, repetitions and report times.

    Every invariant violation raises ConfigError naming the offending key.
    """

    model: ModelSpec
    N: int = 200
    r: int = 100
    k_N: Any = 4
    K: int = 50
    M: int = 60
    seed: int = 0
    times: Tuple[int, ...] = tuple(range(10, 201, 10))
    Ns: Tuple[int, ...] = (200, 600, 1000)
    normality_frequencies: int = 3
    noise_scale: float = 1.0
    burn_in: int = 0
    truncation_threshold: float = 1.0
    singular_design: str = "pinv"
    rolling: bool = False

    def __post_init__(self):
        if not isinstance(self.model, ModelSpec):
            raise ConfigError("model", f"expected a model specification, got {type(self.model).__name__}")
        if self.N < 3:
            raise ConfigError("N", f"sample size must be >= 3, got {self.N}")
        if self.r < 1:
            raise ConfigError("r", f"need at least one repetition, got {self.r}")
        if self.K < 1:
            raise ConfigError("K", f"need at least one basis mode, got {self.K}")
        if self.k_N != "auto" and not (isinstance(self.k_N, int) and 1 <= self.k_N <= min(self.K, self.N - 1)):
            raise ConfigError("k_N", f"must be 'auto' or an integer in [1, {min(self.K, self.N - 1)}], got {self.k_N!r}")
        if self.M < 1:
            raise ConfigError("M", f"grid size must be positive, got {self.M}")
        if self.seed < 0:
            raise ConfigError("seed", f"seed must be nonnegative, got {self.seed}")
        if not self.times:
            raise ConfigError("times", "no report times given")
        if any(n < 1 or n > self.N for n in self.times):
            raise ConfigError("times", f"report times must lie in [1, {self.N}]")
        if len(set(self.times)) != len(self.times):
            raise ConfigError("times", "report times must be distinct")
        if self.rolling and min(self.times) < 4:
            raise ConfigError("times", "rolling forecasts need report times >= 4")
        if not self.Ns or any(n < 3 for n in self.Ns) or any(b <= a for a, b in zip(self.Ns, self.Ns[1:])):
            raise ConfigError("Ns", f"sweep sizes must be increasing and >= 3, got {list(self.Ns)}")
        if self.normality_frequencies < 1 or self.normality_frequencies > self.K:
            raise ConfigError("normality_frequencies", f"must lie in [1, {self.K}], got {self.normality_frequencies}")
        if not self.noise_scale >= 0:
            raise ConfigError("noise_scale", f"must be >= 0, got {self.noise_scale}")
        if self.burn_in < 0:
            raise ConfigError("burn_in", f"must be >= 0, got {self.burn_in}")
        if not self.truncation_threshold > 0:
            raise ConfigError("truncation_threshold", f"must be positive, got {self.truncation_threshold}")
        if self.singular_design not in SINGULAR_POLICIES:
            raise ConfigError("singular_design", f"expected one of {SINGULAR_POLICIES}, got {self.singular_design!r}")
        object.__setattr__(self, "times", tuple(int(n) for n in self.times))
        object.__setattr__(self, "Ns", tuple(int(n) for n in self.Ns))

    @property
    def grid(self):
        return Grid.midpoint(self.model.interval, self.M)

    def with_overrides(self, **changes):
        changes = {key: value for key, value in changes.items() if value is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self):
        return {
            "model": self.model.model_id,
            "N": self.N,
            "r": self.r,
            "k_N": self.k_N,
            "K": self.K,
            "M": self.M,
            "seed": self.seed,
            "times": list(self.times),
            "Ns": list(self.Ns),
            "normality_frequencies": self.normality_frequencies,
            "noise_scale": self.noise_scale,
            "burn_in": self.burn_in,
            "truncation_threshold": self.truncation_threshold,
            "singular_design": self.singular_design,
            "rolling": self.rolling,
        }


@dataclass
class MetricsReport:
    """Monte Carlo metrics; only the sections a run fills are populated.

    ``cemqe`` has shape (M, len(times)) with rows ordered as ``grid_points``.
    ``consistency`` maps N to the median error per estimator.
    """

    times: Tuple[int, ...] = ()
    efmqe: Dict[int, float] = field(default_factory=dict)
    efmqe_stderr: Dict[int, float] = field(default_factory=dict)
    grid_points: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cemqe: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    consistency: Dict[int, Dict[str, float]] = field(default_factory=dict)
    normality: List[Dict[str, float]] = field(default_factory=list)
    skipped_frequencies: Tuple[int, ...] = ()
    repetitions: int = 0
    failures: int = 0
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def completed(self):
        return self.repetitions - self.failures

    def efmqe_rows(self):
        return [{"time": n, "efmqe": self.efmqe[n]} for n in self.times if n in self.efmqe]

    def cemqe_rows(self):
        """Rows (x, time, cemqe), x varying fastest within each time."""
        rows = []
        for t, n in enumerate(self.times):
            for i, x in enumerate(self.grid_points):
                rows.append({"x": float(x), "time": n, "cemqe": float(self.cemqe[i, t])})
        return rows

    def consistency_rows(self):
        rows = []
        for N in sorted(self.consistency):
            for estimator, value in self.consistency[N].items():
                rows.append({"N": N, "estimator": estimator, "median_error": value})
        return rows

    def check(self):
        """True when every squared-error and variance entry is nonnegative."""
        errors = list(self.efmqe.values()) + [v for summary in self.consistency.values() for v in summary.values()]
        variances = [row["var"] for row in self.normality]
        finite = [v for v in errors + variances if not np.isnan(v)]
        return all(v >= 0 for v in finite) and bool(np.all(self.cemqe >= 0))

    def summary(self):
        return {
            "repetitions": self.repetitions,
            "completed": self.completed,
            "failures": self.failures,
            "times": list(self.times),
            "efmqe_stderr": {str(n): value for n, value in self.efmqe_stderr.items()},
            "skipped_frequencies": list(self.skipped_frequencies),
            "diagnostics": self.diagnostics,
        }
