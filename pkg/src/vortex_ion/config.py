"""Flat ``section.key = value`` experiment configuration.

Keys carry their unit as a suffix (``_um``, ``_nm``, ``_us``, ``_uw``,
``_khz``).  Vector values are comma separated.  Mode-indexed vectors
(``trap.freq_khz``, ``state.nbar``, ``state.n_max``) are ordered ax, R1, R2.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .constants import AMU, KHZ, MHZ, MW, NM, TWO_PI, UM, US, UW
from .dynamics import PulseSpec, RabiCalibration, ThermalState, rabi_from_power
from .fields import BeamField, BeamKind
from .trap import DEFAULT_DIRECTIONS, TrapModes


class ConfigError(ValueError):
    """Syntax, validation or unknown-key error in a configuration."""


def _float(s):
    return float(s)


def _int(s):
    return int(s)


def _str(s):
    return s.strip().lower()


def _bool(s):
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


def _vec3(s):
    v = _floats(s)
    if len(v) != 3:
        raise ValueError(f"expected 3 comma-separated values, got {len(v)}")
    return v


def _ints3(s):
    v = tuple(int(x) for x in s.split(","))
    if len(v) != 3:
        raise ValueError("expected 3 comma-separated integers")
    return v


def _names(s):
    return tuple(v.strip().lower() for v in s.split(",") if v.strip())


REQUIRED = object()

# key -> (parser, default)
KEYS = {
    "beam.kind": (_str, REQUIRED),
    "beam.waist_um": (_float, REQUIRED),
    "beam.power_uw": (_float, 10.0),
    "beam.wavelength_nm": (_float, 729.0),
    "beam.sigma": (_int, -1),
    "beam.l": (_int, None),
    "beam.offset_nm": (_vec3, (0.0, 0.0, 0.0)),
    "trap.mass_u": (_float, 40.0),
    "trap.freq_khz": (_vec3, (700.0, 1700.0, 2050.0)),
    "trap.e_ax": (_vec3, DEFAULT_DIRECTIONS[0]),
    "trap.e_r1": (_vec3, DEFAULT_DIRECTIONS[1]),
    "trap.e_r2": (_vec3, DEFAULT_DIRECTIONS[2]),
    "state.nbar": (_vec3, (15.0, 7.0, 7.0)),
    "state.n_max": (_ints3, (0, 0, 0)),
    "state.drift_nm": (_vec3, (0.0, 0.0, 0.0)),
    "pulse.tau_us": (_float, 150.0),
    "pulse.detuning_khz": (_float, 0.0),
    "pulse.gamma_per_s": (_float, 0.0),
    "pulse.rabi_khz": (_float, None),
    "channel.delta_m": (_int, None),
    "channel.residual_carrier": (_bool, True),
    "scan.kind": (_str, "spectrum"),
    "scan.start_khz": (_float, -2300.0),
    "scan.stop_khz": (_float, 2300.0),
    "scan.step_khz": (_float, 1.0),
    "scan.t_stop_us": (_float, 500.0),
    "scan.t_step_us": (_float, 1.0),
    "scan.mode": (_str, "ax"),
    "scan.x_half_um": (_float, 1.0),
    "scan.y_half_um": (_float, 1.0),
    "scan.step_x_nm": (_float, 32.0),
    "scan.step_y_nm": (_float, 64.0),
    "scan.carrier_power_uw": (_float, None),
    "scan.nbar_grid": (_floats, (0.0, 2.0, 5.0, 10.0, 15.0, 20.0)),
    "scan.displacement_nm": (_floats, (0.0, 25.0, 50.0, 75.0, 100.0, 150.0, 200.0)),
    "reference.waist_um": (_float, 2.8),
    "reference.power_uw": (_float, 0.31),
    "calibration.slope_mhz": (_float, 0.704),
    "calibration.position_volt_scale_um_per_v": (_float, None),
    "fit.kind": (_str, "thermal_rabi"),
    "fit.free": (_names, ("eta",)),
    "fit.nbar": (_float, 0.19),
    "fit.rabi_khz": (_float, None),
    "fit.eta": (_float, None),
    "fit.gamma_per_s": (_float, 0.0),
    "fit.beam_kind": (_str, None),
}

SCAN_KINDS = ("spectrum", "rabi", "map", "residual", "fit")
FIT_KINDS = ("thermal_rabi", "power_law", "waist_scan")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully resolved configuration (flat key -> value)."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def with_values(self, updates: dict) -> "ExperimentConfig":
        vals = dict(self.values)
        vals.update(updates)
        return validate(vals)

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.values), sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    # -- domain objects ------------------------------------------------------

    def beam(self, power_uw: float | None = None) -> BeamField:
        v = self.values
        return BeamField(
            BeamKind(v["beam.kind"]),
            v["beam.waist_um"] * UM,
            (v["beam.power_uw"] if power_uw is None else power_uw) * UW,
            v["beam.wavelength_nm"] * NM,
            v["beam.sigma"],
            v["beam.l"],
            tuple(np.asarray(v["beam.offset_nm"]) * NM),
        )

    def reference_beam(self) -> BeamField:
        v = self.values
        return BeamField(
            BeamKind.GAUSSIAN,
            v["reference.waist_um"] * UM,
            v["reference.power_uw"] * UW,
            v["beam.wavelength_nm"] * NM,
            v["beam.sigma"],
            0,
        )

    def trap(self) -> TrapModes:
        v = self.values
        return TrapModes(
            v["trap.mass_u"] * AMU,
            tuple(TWO_PI * f * KHZ for f in v["trap.freq_khz"]),
            (v["trap.e_ax"], v["trap.e_r1"], v["trap.e_r2"]),
        )

    def state(self) -> ThermalState:
        return ThermalState(self.values["state.nbar"], self.values["state.n_max"])

    def drift(self) -> np.ndarray:
        return np.asarray(self.values["state.drift_nm"]) * NM

    def calibration(self) -> RabiCalibration:
        return RabiCalibration(TWO_PI * self.values["calibration.slope_mhz"] * MHZ / np.sqrt(MW))

    def base_rabi(self, power_uw: float | None = None) -> float:
        if self.values["pulse.rabi_khz"] is not None:
            return TWO_PI * self.values["pulse.rabi_khz"] * KHZ
        p = self.values["beam.power_uw"] if power_uw is None else power_uw
        return rabi_from_power(self.calibration(), p * UW)

    def pulse(self, power_uw: float | None = None) -> PulseSpec:
        v = self.values
        return PulseSpec(
            v["pulse.tau_us"] * US,
            TWO_PI * v["pulse.detuning_khz"] * KHZ,
            self.base_rabi(power_uw),
            v["pulse.gamma_per_s"],
        )

    @property
    def delta_m(self) -> int:
        return self.values["channel.delta_m"]


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ConfigError(f"line {lineno}, column {col}: expected 'section.key = value'")
        key, value = body.split("=", 1)
        key = key.strip()
        if not key or "." not in key or " " in key:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigError(f"line {lineno}, column {col}: malformed key {key!r}")
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        parser = KEYS[key][0]
        try:
            raw[key] = parser(value.strip())
        except ValueError as exc:
            col = body.index("=") + 2
            raise ConfigError(f"line {lineno}, column {col}: bad value for {key}: {exc}") from None
    return validate(raw)


def _require(cond, key, invariant):
    if not cond:
        raise ConfigError(f"{key}: violates invariant '{invariant}'")


def validate(raw: dict) -> ExperimentConfig:
    """Apply defaults and check invariants; returns an :class:`ExperimentConfig`."""
    for key in raw:
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
    vals = {}
    for key, (_, default) in KEYS.items():
        if key in raw:
            vals[key] = raw[key]
        elif default is REQUIRED:
            raise ConfigError(f"missing required key {key!r}")
        else:
            vals[key] = default

    _require(vals["beam.kind"] in ("gaussian", "lg01"), "beam.kind", "kind in {gaussian, lg01}")
    if vals["beam.l"] is None:
        vals["beam.l"] = 0 if vals["beam.kind"] == "gaussian" else -1
    if vals["channel.delta_m"] is None:
        vals["channel.delta_m"] = vals["beam.sigma"]
    _require(vals["beam.waist_um"] > 0, "beam.waist_um", "waist > 0")
    _require(vals["beam.power_uw"] >= 0, "beam.power_uw", "power >= 0")
    _require(vals["beam.wavelength_nm"] > 0, "beam.wavelength_nm", "wavelength > 0")
    _require(vals["beam.sigma"] in (-1, 1), "beam.sigma", "sigma in {-1, +1}")
    if vals["beam.kind"] == "gaussian":
        _require(vals["beam.l"] == 0, "beam.l", "Gaussian => l = 0")
    else:
        _require(abs(vals["beam.l"]) == 1, "beam.l", "LG01 => |l| = 1")
    _require(vals["trap.mass_u"] > 0, "trap.mass_u", "mass > 0")
    _require(all(f > 0 for f in vals["trap.freq_khz"]), "trap.freq_khz", "frequencies > 0")
    dirs = np.array([vals["trap.e_ax"], vals["trap.e_r1"], vals["trap.e_r2"]])
    _require(np.max(np.abs(dirs @ dirs.T - np.eye(3))) < 1e-9, "trap.e_*", "eigendirections orthonormal")
    _require(all(n >= 0 for n in vals["state.nbar"]), "state.nbar", "nbar >= 0")
    _require(all(n >= 0 for n in vals["state.n_max"]), "state.n_max", "n_max >= 0")
    _require(vals["pulse.tau_us"] >= 0, "pulse.tau_us", "tau >= 0")
    _require(vals["pulse.gamma_per_s"] >= 0, "pulse.gamma_per_s", "gamma >= 0")
    if vals["pulse.rabi_khz"] is not None:
        _require(vals["pulse.rabi_khz"] >= 0, "pulse.rabi_khz", "rabi >= 0")
    _require(vals["channel.delta_m"] in (-2, -1, 0, 1, 2), "channel.delta_m", "delta_m in {-2..2}")
    _require(vals["scan.kind"] in SCAN_KINDS, "scan.kind", f"kind in {SCAN_KINDS}")
    _require(vals["scan.step_khz"] > 0, "scan.step_khz", "grid step > 0")
    _require(vals["scan.stop_khz"] >= vals["scan.start_khz"], "scan.stop_khz", "grid monotone")
    _require(vals["scan.t_step_us"] > 0 and vals["scan.t_stop_us"] >= 0, "scan.t_*", "time grid non-empty")
    _require(vals["scan.mode"] in ("ax", "r1", "r2"), "scan.mode", "mode in {ax, r1, r2}")
    _require(vals["scan.x_half_um"] >= 0 and vals["scan.y_half_um"] >= 0, "scan.*_half_um", "half-width >= 0")
    _require(vals["scan.step_x_nm"] > 0 and vals["scan.step_y_nm"] > 0, "scan.step_*_nm", "grid step > 0")
    for key in ("scan.nbar_grid", "scan.displacement_nm"):
        g = np.asarray(vals[key])
        _require(g.size > 0 and np.all(np.diff(g) > 0), key, "grid non-empty and increasing")
        _require(np.all(g >= 0), key, "grid values >= 0")
    _require(vals["reference.waist_um"] > 0, "reference.waist_um", "waist > 0")
    _require(vals["reference.power_uw"] >= 0, "reference.power_uw", "power >= 0")
    _require(vals["calibration.slope_mhz"] > 0, "calibration.slope_mhz", "slope > 0")
    if vals["calibration.position_volt_scale_um_per_v"] is not None:
        _require(vals["calibration.position_volt_scale_um_per_v"] > 0, "calibration.position_volt_scale_um_per_v",
                 "scale > 0")
    _require(vals["fit.kind"] in FIT_KINDS, "fit.kind", f"kind in {FIT_KINDS}")
    _require(vals["fit.nbar"] >= 0, "fit.nbar", "nbar >= 0")
    if vals["fit.beam_kind"] is not None:
        _require(vals["fit.beam_kind"] in ("gaussian", "lg01"), "fit.beam_kind", "kind in {gaussian, lg01}")
    return ExperimentConfig(vals)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


DEFAULT_CONFIG_TEXT = """\
beam.kind = lg01
beam.waist_um = 3.34
"""
