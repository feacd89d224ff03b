"""CSV ingestion of measured (or synthetic) data and fit dispatch.

Input files are plain CSV with a header row; ``#`` lines are ignored.

thermal_rabi : ``time_us, order, population[, weight]``
    ``order`` is carrier, red or blue.
power_law : ``power_uw, rabi_khz[, weight][, correction]``
    ``rabi_khz`` is Omega / 2 pi; ``correction`` multiplies it before fitting.
waist_scan : ``position_um`` or ``position_v``, then ``population[, weight]``
    Volts are converted with ``calibration.position_volt_scale_um_per_v``.
"""
from __future__ import annotations

import csv
import io
import json

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .constants import KHZ, TWO_PI, UM, US, UW
from .estimation import Dataset, FitResult, fit_power_law, fit_thermal_rabi, fit_waist_scan


def read_table(path_or_file) -> dict:
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file, encoding="utf-8") as fh:
            text = fh.read()
    lines = [l for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise ConfigError("input CSV is empty")
    header = [h.strip().lower() for h in rows[0]]
    table = {h: [r[i].strip() for r in rows[1:]] for i, h in enumerate(header)}
    return table


def _col(table, name, required=True):
    if name not in table:
        if required:
            raise ConfigError(f"input CSV lacks column {name!r}")
        return None
    return np.array([float(v) for v in table[name]])


def thermal_rabi_datasets(table) -> dict:
    t = _col(table, "time_us") * US
    y = _col(table, "population")
    w = _col(table, "weight", required=False)
    orders = np.array([o.lower() for o in table.get("order", [])])
    if orders.size != t.size:
        raise ConfigError("input CSV lacks column 'order'")
    out = {}
    for name in ("carrier", "red", "blue"):
        sel = orders == name
        if sel.any():
            out[name] = Dataset(t[sel], y[sel], None if w is None else w[sel])
    unknown = set(orders) - {"carrier", "red", "blue"}
    if unknown:
        raise ConfigError(f"unknown trace orders {sorted(unknown)}")
    return out


def waist_dataset(table, cfg: ExperimentConfig) -> Dataset:
    y = _col(table, "population")
    w = _col(table, "weight", required=False)
    if "position_um" in table:
        x = _col(table, "position_um") * UM
    elif "position_v" in table:
        scale = cfg["calibration.position_volt_scale_um_per_v"]
        if scale is None:
            raise ConfigError("position_v input needs calibration.position_volt_scale_um_per_v")
        x = _col(table, "position_v") * scale * UM
    else:
        raise ConfigError("waist scan needs a position_um or position_v column")
    return Dataset(x, y, w)


def run_fit(cfg: ExperimentConfig, data_path) -> FitResult:
    table = read_table(data_path)
    kind = cfg["fit.kind"]
    if kind == "thermal_rabi":
        free = cfg["fit.free"]
        values = {
            "nbar": cfg["fit.nbar"],
            "rabi": TWO_PI * KHZ * cfg["fit.rabi_khz"] if cfg["fit.rabi_khz"] is not None else cfg.base_rabi(),
            "eta": cfg["fit.eta"],
            "gamma": cfg["fit.gamma_per_s"],
        }
        fixed = {k: v for k, v in values.items() if k not in free}
        if any(v is None for v in fixed.values()):
            raise ConfigError(f"fixed parameters need values: {[k for k, v in fixed.items() if v is None]}")
        initial = {k: v for k, v in values.items() if k in free and v is not None and k != "nbar"}
        return fit_thermal_rabi(thermal_rabi_datasets(table), fixed, free, initial)
    if kind == "power_law":
        P = _col(table, "power_uw") * UW
        omega = _col(table, "rabi_khz") * TWO_PI * KHZ
        w = _col(table, "weight", required=False)
        corr = _col(table, "correction", required=False)
        return fit_power_law(Dataset(P, omega, w), corr)
    beam_kind = cfg["fit.beam_kind"] or cfg["beam.kind"]
    return fit_waist_scan(waist_dataset(table, cfg), beam_kind)


def fit_report(result: FitResult, cfg: ExperimentConfig) -> str:
    report = {
        "kind": "fit",
        "fit_kind": cfg["fit.kind"],
        "version": __version__,
        "config_hash": cfg.hash,
        "parameters": result.parameters,
        "errors": result.errors,
        "residual_norm": result.residual_norm,
        "converged": result.converged,
        "iterations": result.iterations,
        "message": result.message,
    }
    buf = io.StringIO()
    json.dump(report, buf, sort_keys=True, indent=2, default=float)
    return buf.getvalue() + "\n"
