"""Scan drivers (spectrum, Rabi, spatial map, residual) and result I/O."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .constants import KHZ, NM, TWO_PI, US
from .coupling import longitudinal_eta, relative_couplings
from .dynamics import BLUE, CARRIER, RED, PulseSpec, full_spectrum, rabi_trace
from .thermal import effective_carrier_coupling, residual_carrier_ratio, residual_map, wavepacket_from
from .trap import Mode


@dataclass
class ScanResult:
    kind: str
    abscissa_name: str
    abscissa: np.ndarray
    columns: dict
    config: ExperimentConfig
    extra_abscissae: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def __post_init__(self):
        n = len(self.abscissa)
        for name, col in list(self.columns.items()) + list(self.extra_abscissae.items()):
            if len(col) != n:
                raise ValueError(f"column {name!r} has length {len(col)}, expected {n}")

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "version": __version__,
            "config_hash": self.config.hash,
            "config": json.loads(self.config.to_json()),
            "wall_time_s": round(self.wall_time, 3),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.metadata(), sort_keys=True) + "\n")
        names = [self.abscissa_name, *self.extra_abscissae, *self.columns]
        cols = [self.abscissa, *self.extra_abscissae.values(), *self.columns.values()]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*cols):
            writer.writerow([f"{v:.10g}" for v in row])
        return buf.getvalue()

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def read_scan_csv(path_or_text):
    """Inverse of :meth:`ScanResult.to_csv`: returns (metadata, {column: array})."""
    text = path_or_text
    if "\n" not in str(path_or_text):
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    meta = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
    rows = list(csv.reader(l for l in lines if not l.startswith("#")))
    header, body = rows[0], rows[1:]
    data = {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}
    return meta, data


def _carrier_coupling(cfg: ExperimentConfig, beam, trap, state, position):
    """Relative carrier coupling, wave-packet averaged when configured."""
    if cfg["channel.residual_carrier"] and abs(cfg.delta_m) == 1:
        return effective_carrier_coupling(beam, wavepacket_from(trap, state, position))
    return None


def run_spectrum(cfg: ExperimentConfig, workers: int = 1) -> ScanResult:
    t0 = time.perf_counter()
    beam, trap, state, pulse = cfg.beam(), cfg.trap(), cfg.state(), cfg.pulse()
    pos = cfg.drift()
    start, stop, step = cfg["scan.start_khz"], cfg["scan.stop_khz"], cfg["scan.step_khz"]
    nu = start + step * np.arange(int(np.floor((stop - start) / step + 1e-9)) + 1)
    spec = full_spectrum(
        beam, trap, state, pulse, cfg.delta_m, TWO_PI * nu * KHZ, pos,
        _carrier_coupling(cfg, beam, trap, state, pos), workers,
    )
    c = spec.components
    columns = {
        "total": spec.total,
        "carrier": np.clip(c["carrier"], 0, 1),
        "axial": np.clip(c["red_ax"] + c["blue_ax"], 0, 1),
        "radial": np.clip(c["red_r1"] + c["blue_r1"] + c["red_r2"] + c["blue_r2"], 0, 1),
    }
    return ScanResult("spectrum", "detuning_khz", nu, columns, cfg, wall_time=time.perf_counter() - t0)


def run_rabi(cfg: ExperimentConfig, workers: int = 1) -> ScanResult:
    t0 = time.perf_counter()
    beam, trap, state = cfg.beam(), cfg.trap(), cfg.state()
    mode = Mode[cfg["scan.mode"].upper()]
    pos = cfg.drift()
    rel_c, rel_sb = relative_couplings(beam, trap, pos, cfg.delta_m)
    eff = _carrier_coupling(cfg, beam, trap, state, pos)
    if eff is not None:
        rel_c = eff
    omega0 = cfg.base_rabi()
    gamma = cfg["pulse.gamma_per_s"]
    t_us = cfg["scan.t_step_us"] * np.arange(int(np.floor(cfg["scan.t_stop_us"] / cfg["scan.t_step_us"] + 1e-9)) + 1)
    t = t_us * US
    eta_l = longitudinal_eta(beam, trap)[mode]
    columns = {
        "carrier": rabi_trace(state, PulseSpec(0.0, 0.0, omega0 * float(rel_c), gamma), eta_l, CARRIER, t, mode),
        "red": rabi_trace(state, PulseSpec(0.0, 0.0, omega0, gamma), float(rel_sb[mode]), RED, t, mode),
        "blue": rabi_trace(state, PulseSpec(0.0, 0.0, omega0, gamma), float(rel_sb[mode]), BLUE, t, mode),
    }
    return ScanResult("rabi", "time_us", t_us, columns, cfg, wall_time=time.perf_counter() - t0)


def _axis(half, step):
    n = int(np.floor(half / step + 1e-9))
    return step * np.arange(-n, n + 1)


def map_pixel(cfg: ExperimentConfig, position, beam, trap, state) -> tuple:
    """(carrier, red, blue) excitation at one ion position, off-resonant lines included."""
    eff = _carrier_coupling(cfg, beam, trap, state, position)
    w_ax = trap.frequency(Mode.AX)
    p_car = cfg["scan.carrier_power_uw"]
    out = []
    for detuning, power in ((0.0, p_car), (-w_ax, None), (w_ax, None)):
        pulse = cfg.pulse(power)
        spec = full_spectrum(beam, trap, state, pulse, cfg.delta_m, [detuning], position, eff)
        out.append(float(spec.total[0]))
    return tuple(out)


def run_map(cfg: ExperimentConfig, workers: int = 1) -> ScanResult:
    """Transverse scan of carrier and axial red/blue sideband excitation.

    Grid coordinates are the ion position relative to the beam axis, on top of
    the configured drift.  The carrier map uses ``scan.carrier_power_uw``
    (default: the beam power); each pixel includes off-resonant contributions
    of every line.
    """
    t0 = time.perf_counter()
    beam, trap, state = cfg.beam(), cfg.trap(), cfg.state()
    xs = _axis(cfg["scan.x_half_um"] * 1e3, cfg["scan.step_x_nm"])
    ys = _axis(cfg["scan.y_half_um"] * 1e3, cfg["scan.step_y_nm"])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    drift = cfg.drift()
    positions = [drift + np.array([x, y, 0.0]) * NM for x, y in zip(X.ravel(), Y.ravel())]

    def pixel(p):
        return map_pixel(cfg, p, beam, trap, state)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(pixel, positions))
    else:
        values = [pixel(p) for p in positions]
    values = np.asarray(values)
    columns = {"carrier": values[:, 0], "red": values[:, 1], "blue": values[:, 2]}
    return ScanResult(
        "map", "x_nm", X.ravel(), columns, cfg, extra_abscissae={"y_nm": Y.ravel()},
        wall_time=time.perf_counter() - t0,
    )


def map_arrays(result: ScanResult):
    """Reshape a map result into (xs, ys, {name: 2-D array indexed [ix, iy]})."""
    xs = np.unique(result.abscissa)
    ys = np.unique(result.extra_abscissae["y_nm"])
    shape = (xs.size, ys.size)
    return xs, ys, {k: np.asarray(v).reshape(shape) for k, v in result.columns.items()}


def run_residual(cfg: ExperimentConfig, workers: int = 1) -> ScanResult:
    t0 = time.perf_counter()
    vortex, gauss, trap = cfg.beam(), cfg.reference_beam(), cfg.trap()
    nb = np.asarray(cfg["scan.nbar_grid"])
    disp = np.asarray(cfg["scan.displacement_nm"])
    radial = (cfg["state.nbar"][Mode.R1], cfg["state.nbar"][Mode.R2])
    amp = residual_map(vortex, gauss, trap, nb, disp * NM, radial)
    eq = residual_map(vortex, gauss, trap, nb, disp * NM, radial, equal_power=True)
    N, D = np.meshgrid(nb, disp, indexing="ij")
    columns = {
        "ratio_amplitude": amp.ravel(),
        "ratio_intensity": amp.ravel() ** 2,
        "equal_power_amplitude": eq.ravel(),
        "equal_power_intensity": eq.ravel() ** 2,
    }
    return ScanResult(
        "residual", "nbar", N.ravel(), columns, cfg, extra_abscissae={"displacement_nm": D.ravel()},
        wall_time=time.perf_counter() - t0,
    )


def residual_at(cfg: ExperimentConfig, displacement_nm=None) -> dict:
    """Residual carrier ratios for the configured state and drift."""
    vortex, gauss, trap, state = cfg.beam(), cfg.reference_beam(), cfg.trap(), cfg.state()
    pos = cfg.drift() if displacement_nm is None else np.asarray(displacement_nm) * NM
    wp = wavepacket_from(trap, state, pos)
    amp = residual_carrier_ratio(vortex, gauss, wp)
    eq = residual_carrier_ratio(vortex, gauss, wp, equal_power=True)
    return {
        "amplitude": amp,
        "intensity": amp**2,
        "equal_power_amplitude": eq,
        "equal_power_intensity": eq**2,
    }


RUNNERS = {"spectrum": run_spectrum, "rabi": run_rabi, "map": run_map, "residual": run_residual}
