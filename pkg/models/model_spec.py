"""Model definitions: closed-form laws for eigenvalues, regressors and parameters.

A ModelSpec is the parsed form of a JSON file under contributions/models/.
Each law maps the 1-based mode index k (and, for regressors, the 1-based
time n) to a real number.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from models.function_space import Interval
from utils.errors import DomainError, ModelError

LAW_FORMS = ("power", "exp_decay", "harmonic", "periodic")
MODEL_KINDS = ("model1", "model2", "custom")


@dataclass(frozen=True)
class Law:
    """A parametric sequence in k (and optionally n).

    power:     sign * scale / (k + shift)^exponent
    exp_decay: scale * exp(-n^time_exponent * (k + shift)^exponent)
    harmonic:  scale / (n^time_exponent * (k + shift)^exponent)
    periodic:  (level + amplitude * cos(2 pi n / period + phase)) / (k + shift)^exponent
    """

    form: str
    exponent: float = 1.0
    shift: float = 0.0
    scale: float = 1.0
    sign: float = 1.0
    time_exponent: float = 1.0
    level: float = 0.0
    amplitude: float = 0.0
    period: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.form not in LAW_FORMS:
            raise ModelError(f"unknown law form {self.form!r}; expected one of {LAW_FORMS}")
        if self.form == "periodic" and self.period == 0:
            raise ModelError("periodic law needs a nonzero period")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "law" not in data:
            raise ModelError(f"law entry must be an object with a 'law' field, got {data!r}")
        params = {key: float(value) for key, value in data.items() if key != "law"}
        unknown = set(params) - set(cls.__dataclass_fields__)
        if unknown:
            raise ModelError(f"unknown law parameters {sorted(unknown)}")
        return cls(form=data["law"], **params)

    def to_dict(self):
        data = {"law": self.form, "exponent": self.exponent, "shift": self.shift, "scale": self.scale}
        if self.form == "power" and self.sign != 1.0:
            data["sign"] = self.sign
        if self.form in ("exp_decay", "harmonic"):
            data["time_exponent"] = self.time_exponent
        if self.form == "periodic":
            data.update(level=self.level, amplitude=self.amplitude, period=self.period, phase=self.phase)
        return data

    def depends_on_time(self):
        return self.form != "power"

    def evaluate(self, k, n=None):
        """Law values for mode indices k; broadcasts against time indices n."""
        k = np.asarray(k, dtype=float)
        base = k + self.shift
        if np.any(base <= 0):
            raise DomainError("law base k + shift must be positive")
        decay = base ** self.exponent
        if self.form == "power":
            return self.sign * self.scale / decay
        if n is None:
            raise ModelError(f"{self.form} law needs a time index")
        n = np.asarray(n, dtype=float)
        if self.form == "exp_decay":
            return self.scale * np.exp(-(n ** self.time_exponent) * decay)
        if self.form == "harmonic":
            return self.scale / (n ** self.time_exponent * decay)
        return (self.level + self.amplitude * np.cos(2.0 * np.pi * n / self.period + self.phase)) / decay


@dataclass(frozen=True)
class ModelSpec:
    """A functional regression model with ARH(1) errors, truncated at K modes."""

    model_id: str
    kind: str
    r0_law: Law
    r_delta_law: Law
    rho_law: Law
    regressor_laws: Tuple[Law, ...]
    beta_laws: Tuple[Law, ...]
    K: int = 50
    interval: Interval = Interval()
    description: str = ""

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ModelError(f"unknown model tag {self.kind!r}; expected one of {MODEL_KINDS}")
        if not self.regressor_laws or len(self.regressor_laws) != len(self.beta_laws):
            raise ModelError("a model needs p >= 1 regressor laws and as many beta laws")
        if self.K < 1:
            raise ModelError(f"K must be >= 1, got {self.K}")
        for name, law in (("r0", self.r0_law), ("r_delta", self.r_delta_law), ("rho", self.rho_law)):
            if law.depends_on_time():
                raise ModelError(f"eigenvalue law {name} must be a power law")

    @property
    def p(self):
        return len(self.regressor_laws)

    def modes(self, K=None):
        return np.arange(1, (K or self.K) + 1)

    def check_admissible(self, K=None):
        """Raise ModelError unless |lambda(rho)| < 1 and lambda(R_delta) > 0 for all K modes."""
        k = self.modes(K)
        if np.any(np.abs(self.rho_law.evaluate(k)) >= 1):
            raise ModelError(f"{self.model_id}: autocorrelation law leaves the unit disc")
        if np.any(self.r_delta_law.evaluate(k) <= 0):
            raise ModelError(f"{self.model_id}: innovation variances must be positive")

    def regressor_values(self, j, N, K=None):
        """(N, K) diagonal entries x_k^j(n), n = 1..N, for 0-based parameter j."""
        k = self.modes(K)
        n = np.arange(1, N + 1)[:, None]
        values = self.regressor_laws[j].evaluate(k[None, :], n)
        return np.broadcast_to(values, (N, k.size)).astype(float)

    def beta_coefficients(self, K=None):
        """(p, K) array of <beta_j, phi_k>."""
        k = self.modes(K)
        return np.vstack([law.evaluate(k) for law in self.beta_laws])

    @classmethod
    def from_dict(cls, data, source=None):
        label = source or data.get("model_id", "<model>")
        try:
            eigen = data["eigenvalues"]
            interval = data.get("interval", [0.0, 60.0])
            spec = cls(
                model_id=str(data["model_id"]),
                kind=str(data.get("kind", "custom")),
                r0_law=Law.from_dict(eigen["r0"]),
                r_delta_law=Law.from_dict(eigen["r_delta"]),
                rho_law=Law.from_dict(eigen["rho"]),
                regressor_laws=tuple(Law.from_dict(item) for item in data["regressors"]),
                beta_laws=tuple(Law.from_dict(item) for item in data["beta"]),
                K=int(data.get("K", 50)),
                interval=Interval(float(interval[0]), float(interval[1])),
                description=str(data.get("description", "")),
            )
        except KeyError as e:
            raise ModelError(f"{label}: missing field {e.args[0]!r}") from e
        except (TypeError, IndexError, DomainError) as e:
            raise ModelError(f"{label}: {e}") from e
        if "p" in data and int(data["p"]) != spec.p:
            raise ModelError(f"{label}: declares p={data['p']} but defines {spec.p} regressors")
        return spec

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model_id": self.model_id,
            "kind": self.kind,
            "description": self.description,
            "p": self.p,
            "K": self.K,
            "interval": [self.interval.a, self.interval.b],
            "eigenvalues": {
                "r0": self.r0_law.to_dict(),
                "r_delta": self.r_delta_law.to_dict(),
                "rho": self.rho_law.to_dict(),
            },
            "regressors": [law.to_dict() for law in self.regressor_laws],
            "beta": [law.to_dict() for law in self.beta_laws],
        }

    def with_K(self, K: Optional[int]):
        if K is None or K == self.K:
            return self
        return ModelSpec(
            self.model_id, self.kind, self.r0_law, self.r_delta_law, self.rho_law,
            self.regressor_laws, self.beta_laws, int(K), self.interval, self.description,
        )
