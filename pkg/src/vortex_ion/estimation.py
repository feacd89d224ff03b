"""Least-squares estimation of thermal-Rabi, power-law and waist-scan models."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    BLUE,
    CARRIER,
    RED,
    RabiCalibration,
    detuned_sum,
    rabi_from_power,
    required_nmax,
    sideband_rabi,
    truncated_distribution,
)
from .fields import BeamKind

RABI_PARAMETERS = ("nbar", "rabi", "eta", "gamma")
LOG_PARAMETERS = ("nbar", "gamma")


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    abscissa: np.ndarray
    populations: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.abscissa, dtype=float)
        y = np.asarray(self.populations, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("abscissa and populations must be 1-D arrays of equal length")
        object.__setattr__(self, "abscissa", x)
        object.__setattr__(self, "populations", y)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != x.shape or np.any(w < 0):
                raise ValueError("weights must be non-negative and match the data length")
            object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.abscissa.size

    @property
    def sqrt_weights(self):
        return np.ones_like(self.abscissa) if self.weights is None else np.sqrt(self.weights)

    def check_probabilities(self):
        if np.any(self.populations < 0) or np.any(self.populations > 1):
            raise ValueError("populations must lie in [0, 1]")
        return self


@dataclass
class FitResult:
    parameters: dict
    errors: dict
    residual_norm: float
    converged: bool
    iterations: int
    history: list = field(default_factory=list)
    message: str = ""
    meta: dict = field(default_factory=dict)


# -- optimizer ---------------------------------------------------------------


@dataclass
class LMState:
    x: np.ndarray
    cost: float
    jacobian: np.ndarray
    iterations: int
    converged: bool
    history: list
    message: str


def numerical_jacobian(fun, x, rel_step=1e-6):
    """Central differences with per-parameter step rel_step * max(|x_i|, 1)."""
    cols = []
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((fun(xp) - fun(xm)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def levenberg_marquardt(fun, x0, max_iter=200, ftol=1e-10, xtol=1e-12, rel_step=1e-6) -> LMState:
    """Minimize ||fun(x)||^2 by damped Gauss-Newton steps.

    Only steps that lower the cost are accepted, so ``history`` is
    non-increasing.  Converges when the relative cost decrease falls below
    ``ftol`` or the relative step norm below ``xtol``.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = fun(x)
    cost = float(r @ r)
    history = [cost]
    lam = 1e-3
    J = numerical_jacobian(fun, x, rel_step)
    for it in range(1, max_iter + 1):
        A = J.T @ J
        g = J.T @ r
        d = np.clip(np.diag(A), 1e-300, None)
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                step = np.full_like(x, np.nan)
            x_new = x + step
            r_new = fun(x_new) if np.all(np.isfinite(step)) else None
            new_cost = float(r_new @ r_new) if r_new is not None and np.all(np.isfinite(r_new)) else np.inf
            if new_cost < cost:
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
            if lam > 1e16:
                msg = "no downhill step; at a (local) minimum"
                return LMState(x, cost, J, it, True, history, msg)
        decrease = cost - new_cost
        small_step = np.linalg.norm(step) <= xtol * (np.linalg.norm(x) + xtol)
        x, r, cost = x_new, r_new, new_cost
        history.append(cost)
        J = numerical_jacobian(fun, x, rel_step)
        if decrease <= ftol * history[-2] or small_step or cost == 0.0:
            return LMState(x, cost, J, it, True, history, "converged")
    return LMState(x, cost, J, max_iter, False, history, "maximum iterations reached")


def _covariance(J, cost, n_points):
    dof = n_points - J.shape[1]
    A = J.T @ J
    if not np.all(np.isfinite(A)) or np.linalg.cond(A) > 1e14:
        return None
    cov = np.linalg.inv(A)
    return cov * (cost / dof) if dof > 0 else cov * np.nan


# -- thermal Rabi fits ------------------------------------------------------

_ORDER_NAMES = {"carrier": CARRIER, "red": RED, "blue": BLUE, 0: CARRIER, -1: RED, 1: BLUE}


def thermal_rabi_model(times, order, nbar, rabi, eta, gamma, tol=1e-10):
    rho = truncated_distribution(nbar, required_nmax(nbar, tol))
    n = np.arange(rho.size)
    omega = sideband_rabi(rabi, eta, n, order)
    t = np.asarray(times, dtype=float)
    return 0.5 * (1.0 - (np.cos(np.multiply.outer(t, omega)) @ rho) * np.exp(-gamma * t))


def _dominant_angular_frequency(t, y):
    t = np.asarray(t, float)
    y = np.asarray(y, float) - np.mean(y)
    if t.size < 4 or np.ptp(t) == 0:
        return None
    order = np.argsort(t)
    dt = np.median(np.diff(t[order]))
    grid = np.arange(t.min(), t.max() + 0.5 * dt, dt)
    yy = np.interp(grid, t[order], y[order])
    spec = np.abs(np.fft.rfft(yy, n=16 * grid.size))
    freqs = np.fft.rfftfreq(16 * grid.size, dt)
    spec[0] = 0.0
    return 2.0 * np.pi * freqs[int(np.argmax(spec))]


def _initial_rabi_guess(traces, fixed):
    guess = {}
    if "carrier" in traces:
        w = _dominant_angular_frequency(traces["carrier"].abscissa, traces["carrier"].populations)
        if w:
            guess["rabi"] = w
    rabi = fixed.get("rabi", guess.get("rabi"))
    sb = traces.get("blue") or traces.get("red")
    if sb is not None and rabi:
        w = _dominant_angular_frequency(sb.abscissa, sb.populations)
        if w:
            guess["eta"] = w / rabi
    t_max = max(np.max(d.abscissa) for d in traces.values())
    guess.setdefault("gamma", 0.1 / t_max)
    guess.setdefault("eta", 0.05)
    return guess


def _normalize_traces(data):
    traces = {}
    for key, ds in data.items():
        if key not in _ORDER_NAMES:
            raise ConfigurationError(f"unknown trace order {key!r}")
        name = {CARRIER: "carrier", RED: "red", BLUE: "blue"}[_ORDER_NAMES[key]]
        traces[name] = ds if isinstance(ds, Dataset) else Dataset(*ds)
        traces[name].check_probabilities()
    return traces


def fit_thermal_rabi(data, fixed=None, free=("nbar", "rabi", "eta", "gamma"), initial=None, max_iter=200) -> FitResult:
    """Simultaneous fit of thermal Rabi traces with shared parameters.

    Parameters
    ----------
    data : dict
        Maps the transition order ("carrier", "red", "blue" or 0, -1, +1) to
        a :class:`Dataset` of (time in s, population).
    fixed : dict
        Values of the parameters held constant.
    free : sequence
        Names of the fitted parameters; with ``fixed`` they must cover
        nbar, rabi (rad/s), eta and gamma (1/s).
    initial : dict, optional
        Starting values for free parameters.  Missing ones are estimated from
        the trace spectra; nbar is always started from 5 log-spaced values.
    """
    fixed = dict(fixed or {})
    free = tuple(free)
    if set(fixed) & set(free):
        raise ConfigurationError(f"parameters both fixed and free: {sorted(set(fixed) & set(free))}")
    if set(fixed) | set(free) != set(RABI_PARAMETERS):
        raise ConfigurationError(f"fixed + free must cover exactly {RABI_PARAMETERS}")
    if not free:
        raise ConfigurationError("nothing to fit")
    traces = _normalize_traces(data)
    n_points = sum(len(d) for d in traces.values())
    if n_points < len(free) + 1:
        raise ConfigurationError("under-determined: fewer data points than free parameters + 1")

    all_y = np.concatenate([d.populations for d in traces.values()])
    if np.ptp(all_y) == 0:
        return FitResult({}, {}, float("nan"), False, 0, message="data are constant; no information")

    guess = _initial_rabi_guess(traces, fixed)
    guess.update(initial or {})

    def unpack(x):
        p = dict(fixed)
        for name, v in zip(free, x):
            # clipped so that wild trial steps are rejected without overflow
            p[name] = np.exp(np.clip(v, -700.0, 700.0)) if name in LOG_PARAMETERS else (abs(v) if name == "eta" else v)
        return p

    def residuals(x):
        p = unpack(x)
        parts = []
        for name, d in traces.items():
            model = thermal_rabi_model(d.abscissa, _ORDER_NAMES[name], p["nbar"], p["rabi"], p["eta"], p["gamma"])
            parts.append((model - d.populations) * d.sqrt_weights)
        return np.concatenate(parts)

    nbar_starts = np.geomspace(0.01, 10.0, 5) if "nbar" in free else [None]
    best = None
    for nb in nbar_starts:
        x0 = []
        for name in free:
            v = nb if name == "nbar" else guess.get(name, 1.0)
            x0.append(np.log(max(v, 1e-300)) if name in LOG_PARAMETERS else v)
        state = levenberg_marquardt(residuals, np.array(x0), max_iter=max_iter)
        if best is None or state.cost < best.cost:
            best = state
    return _finish(best, free, unpack, n_points)


def _finish(state, free, unpack, n_points):
    p = unpack(state.x)
    params = {k: float(v) for k, v in p.items()}
    errors = {}
    converged = state.converged
    message = state.message
    cov = _covariance(state.jacobian, state.cost, n_points) if converged else None
    if converged and cov is None:
        converged = False
        message = "singular Jacobian at optimum; parameters not identifiable"
    if converged:
        for i, name in enumerate(free):
            s = float(np.sqrt(cov[i, i])) if np.isfinite(cov[i, i]) else float("nan")
            errors[name] = params[name] * s if name in LOG_PARAMETERS else s
    return FitResult(
        params, errors, float(np.sqrt(state.cost)), converged, state.iterations, list(state.history), message
    )


# -- power calibration -------------------------------------------------------


def fit_power_law(data: Dataset, correction=None) -> FitResult:
    """Intercept-free least squares for Omega = slope * sqrt(P).

    ``correction`` is an optional per-point multiplicative factor applied to
    the measured Rabi frequencies before fitting.
    """
    P = data.abscissa
    omega = data.populations * (1.0 if correction is None else np.asarray(correction, float))
    if P.size < 1:
        raise ConfigurationError("need at least one point")
    if np.any(P <= 0):
        raise ConfigurationError("powers must be > 0")
    if P.size >= 2 and np.ptp(P) == 0:
        raise ConfigurationError("degenerate data: all powers equal")
    w = np.ones_like(P) if data.weights is None else data.weights
    x = np.sqrt(P)
    sxx = np.sum(w * x * x)
    slope = float(np.sum(w * x * omega) / sxx)
    resid = (omega - slope * x) * np.sqrt(w)
    cost = float(resid @ resid)
    dof = P.size - 1
    err = float(np.sqrt(cost / dof / sxx)) if dof > 0 else float("nan")
    return FitResult({"slope": slope}, {"slope": err}, float(np.sqrt(cost)), True, 1, [cost], "closed form")


# -- waist scans -------------------------------------------------------------


def waist_profile(x, center, waist, kind):
    """Relative Rabi frequency along a line through the beam centre."""
    u = (np.asarray(x, float) - center) / waist
    env = np.exp(-(u**2))
    if BeamKind(kind) is BeamKind.GAUSSIAN:
        return env
    return np.sqrt(2.0) * np.abs(u) * env


def waist_scan_model(x, center, waist, area, kind, tau=1.0, nbar=0.0, eta=0.0):
    """Resonant carrier excitation versus position; ``area`` = peak Rabi * tau."""
    rho = truncated_distribution(nbar, required_nmax(nbar))
    n = np.arange(rho.size)
    rel = waist_profile(x, center, waist, kind)
    out = np.empty(rel.shape)
    for i, r in enumerate(rel.ravel()):
        out.flat[i] = detuned_sum(rho, sideband_rabi(area / tau * r, eta, n, CARRIER), 0.0, tau)
    return out


def fit_waist_scan(data: Dataset, beam_kind, nbar=0.0, eta=0.0, initial=None, max_iter=200) -> FitResult:
    """Fit waist, centre and peak pulse area to a transverse excitation scan.

    Positions are in m.  The scan is modelled as a resonant carrier pulse whose
    Rabi frequency follows the beam profile.
    """
    kind = BeamKind(beam_kind)
    x, y = data.abscissa, data.populations
    free = ("waist", "center", "area")
    if x.size < len(free) + 1:
        raise ConfigurationError("under-determined waist scan")
    if np.ptp(y) == 0:
        return FitResult({}, {}, float("nan"), False, 0, message="flat scan; no information")
    wts = np.clip(y, 0, None)
    c0 = float(np.sum(wts * x) / np.sum(wts))
    std = float(np.sqrt(np.sum(wts * (x - c0) ** 2) / np.sum(wts)))
    w0 = 2.0 * std if kind is BeamKind.GAUSSIAN else 2.0 * std / np.sqrt(3.0)
    fmax = 1.0 if kind is BeamKind.GAUSSIAN else np.exp(-0.5)
    a0 = 2.0 * np.arcsin(np.sqrt(np.clip(np.max(y), 0, 1))) / fmax
    initial = dict(initial or {})
    sw = data.sqrt_weights

    def unpack(v):
        return {"waist": abs(v[0]), "center": v[1], "area": abs(v[2])}

    def residuals(v):
        p = unpack(v)
        return (waist_scan_model(x, p["center"], p["waist"], p["area"], kind, 1.0, nbar, eta) - y) * sw

    best = None
    area_starts = [initial["area"]] if "area" in initial else [a0, 2 * np.pi / fmax - a0]
    for a in area_starts:
        v0 = np.array([initial.get("waist", w0), initial.get("center", c0), a])
        state = levenberg_marquardt(residuals, v0, max_iter=max_iter)
        if best is None or state.cost < best.cost:
            best = state
    return _finish(best, free, unpack, x.size)


# -- averaging ---------------------------------------------------------------


def eta_from_sideband_fits(results, cal: RabiCalibration | None = None):
    """Unweighted mean and 1-sigma spread of eta over fits at several powers.

    Results without an ``eta`` entry may carry ``sideband_rabi`` (rad/s, for
    the n=0 -> 1 transition) plus ``meta["power"]`` (W); eta then follows from
    the calibration.
    """
    etas, errs = [], []
    for res in results:
        if "eta" in res.parameters:
            etas.append(res.parameters["eta"])
            errs.append(res.errors.get("eta", float("nan")))
        elif "sideband_rabi" in res.parameters and "power" in res.meta and cal is not None:
            omega0 = rabi_from_power(cal, res.meta["power"])
            etas.append(res.parameters["sideband_rabi"] / omega0)
            errs.append(res.errors.get("sideband_rabi", float("nan")) / omega0)
        else:
            raise ConfigurationError("fit result carries no eta estimate")
    if not etas:
        raise ConfigurationError("no fit results given")
    etas = np.asarray(etas)
    if etas.size == 1:
        return float(etas[0]), float(errs[0])
    return float(np.mean(etas)), float(np.std(etas, ddof=1))
