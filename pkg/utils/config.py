"""Flat key = value experiment configuration.

Lines are ``key = value``; blank lines and ``#`` comments are ignored.
Missing keys take the defaults below. Any problem is a ConfigError naming
the offending key.
"""

import os

from models.experiment import ExperimentConfig
from systems.model_catalog import load_model
from utils.errors import ConfigError, ModelError

THREADS_ENV = "ARHGLS_THREADS"

DEFAULTS = {
    "model": "model1",
    "N": "200",
    "r": "100",
    "k_N": "4",
    "K": "50",
    "M": "60",
    "seed": "0",
    "times": "10:200:10",
    "Ns": "200,600,1000",
    "normality_frequencies": "3",
    "noise_scale": "1",
    "burn_in": "0",
    "truncation_threshold": "1",
    "singular_design": "pinv",
    "rolling": "false",
}

_INT_KEYS = ("N", "r", "K", "M", "seed", "normality_frequencies", "burn_in")
_FLOAT_KEYS = ("noise_scale", "truncation_threshold")


def _parse_int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def _parse_float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None


def _parse_bool(key, text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected true or false, got {text!r}")


def parse_int_list(key, text):
    """Comma list ``10,20,30`` or inclusive range ``start:stop:step``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(key, f"expected start:stop[:step], got {text!r}")
        start, stop = _parse_int(key, parts[0]), _parse_int(key, parts[1])
        step = _parse_int(key, parts[2]) if len(parts) == 3 else 1
        if step < 1:
            raise ConfigError(key, f"step must be positive, got {step}")
        return tuple(range(start, stop + 1, step))
    items = [item for item in text.split(",") if item.strip()]
    if not items:
        raise ConfigError(key, "empty list")
    return tuple(_parse_int(key, item.strip()) for item in items)


def parse_config_text(text):
    """Raw key -> value strings; unknown keys and malformed lines are errors."""
    values = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line.split()[0], f"line {line_number} is not of the form key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(key, f"unknown configuration key (line {line_number})")
        if not value:
            raise ConfigError(key, "missing value")
        values[key] = value
    return values


def build_config(values=None, **overrides):
    """ExperimentConfig from raw strings merged over DEFAULTS.

    ``overrides`` are already-typed values (CLI flags) applied last; None
    entries are ignored.
    """
    raw = dict(DEFAULTS)
    raw.update(values or {})
    model_name = overrides.pop("model", None) or raw["model"]
    settings = {}
    for key in _INT_KEYS:
        settings[key] = _parse_int(key, raw[key])
    for key in _FLOAT_KEYS:
        settings[key] = _parse_float(key, raw[key])
    k_N = raw["k_N"].strip().lower()
    settings["k_N"] = "auto" if k_N == "auto" else _parse_int("k_N", k_N)
    settings["times"] = parse_int_list("times", raw["times"])
    settings["Ns"] = parse_int_list("Ns", raw["Ns"])
    settings["singular_design"] = raw["singular_design"].strip().lower()
    settings["rolling"] = _parse_bool("rolling", raw["rolling"])
    settings.update({key: value for key, value in overrides.items() if value is not None})
    try:
        model = load_model(model_name, settings["K"])
    except ModelError as e:
        raise ConfigError("model", str(e)) from e
    return ExperimentConfig(model=model, **settings)


def load_config(path=None, **overrides):
    """Read a config file (or only defaults when path is None) into an ExperimentConfig."""
    values = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                values = parse_config_text(f.read())
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e.strerror or e}") from e
    return build_config(values, **overrides)


def resolve_threads(flag_value=None):
    """--threads, else ARHGLS_THREADS, else 1."""
    if flag_value is not None:
        source, text = "threads", str(flag_value)
    else:
        text = os.getenv(THREADS_ENV, "").strip()
        if not text:
            return 1
        source = THREADS_ENV
    try:
        threads = int(text)
    except ValueError:
        raise ConfigError(source, f"expected a positive integer, got {text!r}") from None
    if threads < 1:
        raise ConfigError(source, f"expected a positive integer, got {threads}")
    return threads
