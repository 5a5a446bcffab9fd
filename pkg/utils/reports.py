"""CSV and JSON artifacts written and read by the command line.

Every table is long-format with a header row. Floats are written with the
shortest repr that round-trips, so identical results give identical bytes.
"""

import json
import os

import numpy as np
import pandas as pd

from models.operators import RegressorPanel
from utils.errors import ConfigError

RESPONSES_FILE = "responses.csv"
PANEL_FILE = "panel.csv"
BETA_TRUE_FILE = "beta_true.csv"
BETA_HAT_FILE = "beta_hat.csv"
DIAGNOSTICS_FILE = "diagnostics.json"
FORECAST_FILE = "forecast.csv"
EFMQE_FILE = "efmqe.csv"
CEMQE_FILE = "cemqe.csv"
SUMMARY_FILE = "experiment_summary.json"
SWEEP_FILE = "sweep.csv"
NORMALITY_FILE = "normality.csv"


def write_table(rows, columns, path):
    """Write rows (dicts) in the given column order."""
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False)
    return path


def write_json(data, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def coefficient_rows(array, index_name, offset=1):
    """Long rows (index, mode_index, coefficient) of a 2-D coefficient array."""
    rows = []
    for i, values in enumerate(np.atleast_2d(array), start=offset):
        for k, value in enumerate(values, start=1):
            rows.append({index_name: i, "mode_index": k, "coefficient": float(value)})
    return rows


def write_responses(Y, path):
    return write_table(coefficient_rows(Y, "time"), ("time", "mode_index", "coefficient"), path)


def write_beta(beta, path):
    return write_table(coefficient_rows(beta, "param_index"), ("param_index", "mode_index", "coefficient"), path)


def write_forecast(coeffs, path):
    rows = [{"mode_index": k, "coefficient": float(v)} for k, v in enumerate(np.ravel(coeffs), start=1)]
    return write_table(rows, ("mode_index", "coefficient"), path)


def read_forecast(path):
    """Forecast coefficient vector (K,) from a (mode_index, coefficient) table."""
    frame = _read_csv(path, ("mode_index", "coefficient"))
    if frame["mode_index"].duplicated().any():
        raise ConfigError("input", f"{os.path.basename(path)} repeats a mode_index")
    return frame.sort_values("mode_index")["coefficient"].to_numpy(dtype=float)


def write_panel(panel, path):
    """Diagonal panel as (time, param_index, mode_index, value)."""
    if not panel.diagonal:
        raise ConfigError("panel", "only diagonal panels have a CSV form")
    N, p, K = panel.values.shape
    time, param, mode = np.meshgrid(np.arange(1, N + 1), np.arange(1, p + 1), np.arange(1, K + 1), indexing="ij")
    frame = pd.DataFrame({
        "time": time.ravel(),
        "param_index": param.ravel(),
        "mode_index": mode.ravel(),
        "value": panel.values.ravel(),
    })
    frame.to_csv(path, index=False)
    return path


def _read_csv(path, columns):
    if not os.path.exists(path):
        raise ConfigError("input", f"missing file {path}")
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as e:
        raise ConfigError("input", f"cannot parse {path}: {e}") from e
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ConfigError("input", f"{os.path.basename(path)} lacks columns {missing}")
    return frame


def _dense(frame, index, columns, values, path):
    table = frame.pivot_table(index=index, columns=columns, values=values, aggfunc="first").sort_index()
    table = table.reindex(columns=sorted(table.columns))
    if table.isna().to_numpy().any():
        raise ConfigError("input", f"{os.path.basename(path)} has missing entries")
    return table


def read_coefficients(path, index_name):
    """(rows, K) array from a long (index, mode_index, coefficient) table."""
    frame = _read_csv(path, (index_name, "mode_index", "coefficient"))
    return _dense(frame, index_name, "mode_index", "coefficient", path).to_numpy(dtype=float)


def read_responses(path):
    return read_coefficients(path, "time")


def read_beta(path):
    return read_coefficients(path, "param_index")


def read_panel(path):
    """Diagonal RegressorPanel from a (time, param_index, mode_index, value) table."""
    frame = _read_csv(path, ("time", "param_index", "mode_index", "value"))
    table = _dense(frame, "time", ["param_index", "mode_index"], "value", path)
    N = table.shape[0]
    p = frame["param_index"].nunique()
    K = frame["mode_index"].nunique()
    if table.shape[1] != p * K:
        raise ConfigError("input", f"{os.path.basename(path)} is not a full time x param x mode grid")
    return RegressorPanel.from_diagonals(table.to_numpy(dtype=float).reshape(N, p, K))
