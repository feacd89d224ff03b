"""Thermal Rabi dynamics, resolved-sideband spectra and power calibration."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constants import MHZ, MW, TWO_PI
from .coupling import longitudinal_eta, relative_couplings
from .fields import BeamField
from .trap import MODES, Mode, TrapModes

MASS_TOLERANCE = 1e-6
CARRIER, RED, BLUE = 0, -1, +1


def thermal_weight(nbar, n):
    """rho_n = nbar^n / (nbar + 1)^(n + 1), vectorized over ``n``."""
    n = np.asarray(n)
    if nbar == 0:
        return np.where(n == 0, 1.0, 0.0)
    q = nbar / (nbar + 1.0)
    return np.exp(n * np.log(q)) / (nbar + 1.0)


def required_nmax(nbar: float, tol: float = MASS_TOLERANCE) -> int:
    """Smallest cutoff whose truncated thermal mass is at least 1 - tol."""
    if nbar == 0:
        return 0
    q = nbar / (nbar + 1.0)
    n = max(int(np.ceil(np.log(tol) / np.log(q))) - 1, 0)
    while thermal_weight(nbar, np.arange(n + 1)).sum() < 1.0 - tol:
        n += 1
    return n


def truncated_distribution(nbar: float, n_max: int) -> np.ndarray:
    """Thermal weights for n = 0..n_max, renormalized to unit mass.

    Renormalizing keeps the cosine (Rabi trace) and sin^2 (spectrum) forms
    of the thermal sum identical at zero detuning.
    """
    rho = thermal_weight(nbar, np.arange(n_max + 1))
    return rho / rho.sum()


@dataclass(frozen=True)
class ThermalState:
    """Per-mode mean phonon numbers (indexed by Mode) and truncation bounds.

    ``n_max`` entries below the mass requirement are raised automatically.
    """

    nbar: tuple = (0.0, 0.0, 0.0)
    n_max: tuple | None = None

    def __post_init__(self):
        nbar = tuple(float(v) for v in self.nbar)
        if len(nbar) != 3 or any(not v >= 0 for v in nbar):
            raise ValueError(f"nbar must be three non-negative values, got {self.nbar}")
        given = self.n_max if self.n_max is not None else (0, 0, 0)
        n_max = tuple(max(int(g), required_nmax(v)) for g, v in zip(given, nbar))
        object.__setattr__(self, "nbar", nbar)
        object.__setattr__(self, "n_max", n_max)

    def distribution(self, mode) -> np.ndarray:
        m = Mode(mode)
        return truncated_distribution(self.nbar[m], self.n_max[m])

    def with_n_max(self, factor: int) -> "ThermalState":
        return ThermalState(self.nbar, tuple(factor * n + 1 for n in self.n_max))


@dataclass(frozen=True)
class PulseSpec:
    duration: float
    detuning: float = 0.0
    base_rabi: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError("pulse duration must be >= 0")
        if not self.gamma >= 0:
            raise ValueError("decoherence rate must be >= 0")


@dataclass(frozen=True)
class RabiCalibration:
    """Omega(P) = slope * sqrt(P); slope in rad/s per sqrt(W)."""

    slope: float = field(default=TWO_PI * 0.704 * MHZ / np.sqrt(MW))

    def __post_init__(self):
        if not self.slope > 0:
            raise ValueError("calibration slope must be > 0")


def rabi_from_power(cal: RabiCalibration, power: float) -> float:
    if power < 0:
        raise ValueError("power must be >= 0")
    return float(cal.slope * np.sqrt(power))


def sideband_rabi(omega0, eta, n, order):
    """Rabi frequency of the n -> n + order transition to first order in eta."""
    n = np.asarray(n, dtype=float)
    if order == CARRIER:
        return (1.0 - eta**2 * n) * omega0
    if order == RED:
        return eta * np.sqrt(n) * omega0
    if order == BLUE:
        return eta * np.sqrt(n + 1.0) * omega0
    raise ValueError(f"order must be -1, 0 or +1, got {order!r}")


def _nbar_and_rho(state, mode):
    if isinstance(state, ThermalState):
        return state.nbar[Mode(mode)], state.distribution(mode)
    nbar = float(state)
    return nbar, truncated_distribution(nbar, required_nmax(nbar))


def rabi_trace(state, pulse: PulseSpec, eta: float, order: int, times, mode=Mode.AX) -> np.ndarray:
    """Resonant thermal Rabi flop P_D(t).

    ``state`` is a :class:`ThermalState` (``mode`` selects the mode) or a bare
    mean phonon number.  The decoherence factor damps the oscillation
    contrast, so the trace relaxes to 1/2.
    """
    _, rho = _nbar_and_rho(state, mode)
    n = np.arange(rho.size)
    omega = sideband_rabi(pulse.base_rabi, eta, n, order)
    t = np.asarray(times, dtype=float)
    osc = np.cos(np.multiply.outer(t, omega)) @ rho
    return 0.5 * (1.0 - osc * np.exp(-pulse.gamma * t))


def detuned_sum(rho, omega_n, detunings, tau, gamma=0.0) -> np.ndarray:
    """sum_n rho_n W_n^2/(W_n^2 + d^2) sin^2(tau/2 sqrt(W_n^2 + d^2)) exp(-gamma tau).

    Vectorized over ``detunings``; terms with W_n = d = 0 contribute zero.
    """
    d = np.asarray(detunings, dtype=float)
    w2 = np.asarray(omega_n, dtype=float) ** 2
    gen2 = w2[None, :] + d.reshape(-1, 1) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        lor = np.where(gen2 > 0, w2[None, :] / gen2, 0.0)
    terms = lor * np.sin(0.5 * tau * np.sqrt(gen2)) ** 2
    return (terms @ rho).reshape(d.shape) * np.exp(-gamma * tau)


def spectrum_point(state, pulse: PulseSpec, rabi_law, mode=Mode.AX) -> float:
    """Detuned thermal excitation for one transition.

    ``rabi_law`` maps an array of phonon numbers to Rabi frequencies (rad/s),
    or is a precomputed array aligned with the truncated distribution.
    """
    _, rho = _nbar_and_rho(state, mode)
    n = np.arange(rho.size)
    omega_n = rabi_law(n) if callable(rabi_law) else np.asarray(rabi_law, float)[: rho.size]
    return float(detuned_sum(rho, omega_n, pulse.detuning, pulse.duration, pulse.gamma))


@dataclass
class Transition:
    """One line of the spectrum: its resonance offset and per-n Rabi law."""

    name: str
    mode: Mode
    offset: float
    rho: np.ndarray
    omega_n: np.ndarray


def transitions(
    beam: BeamField,
    trap: TrapModes,
    state: ThermalState,
    pulse: PulseSpec,
    delta_m: int,
    position=(0.0, 0.0, 0.0),
    carrier_override: float | None = None,
) -> list[Transition]:
    """Carrier plus the six first-order sidebands at ``position``.

    ``carrier_override`` replaces the local relative carrier coupling, e.g.
    with a wave-packet-averaged value.  The carrier Debye-Waller factor uses
    the mode with the largest eta_parallel^2 * nbar; spectator modes are
    neglected.
    """
    rel_c, rel_sb = relative_couplings(beam, trap, np.asarray(position, float), delta_m)
    if carrier_override is not None:
        rel_c = carrier_override
    omega0 = pulse.base_rabi
    eta_l = longitudinal_eta(beam, trap)
    dw_mode = Mode(int(np.argmax(eta_l**2 * np.asarray(state.nbar))))
    n = np.arange(state.n_max[dw_mode] + 1)
    out = [
        Transition(
            "carrier",
            dw_mode,
            0.0,
            state.distribution(dw_mode),
            sideband_rabi(omega0 * float(rel_c), eta_l[dw_mode], n, CARRIER),
        )
    ]
    for m in MODES:
        n = np.arange(state.n_max[m] + 1)
        rho = state.distribution(m)
        for order, label in ((RED, "red"), (BLUE, "blue")):
            out.append(
                Transition(
                    f"{label}_{m.name.lower()}",
                    m,
                    order * trap.frequency(m),
                    rho,
                    sideband_rabi(omega0, float(rel_sb[m]), n, order),
                )
            )
    return out


@dataclass
class Spectrum:
    detunings: np.ndarray
    total: np.ndarray
    components: dict


def full_spectrum(
    beam: BeamField,
    trap: TrapModes,
    state: ThermalState,
    pulse: PulseSpec,
    delta_m: int,
    detunings,
    position=(0.0, 0.0, 0.0),
    carrier_override: float | None = None,
    workers: int = 1,
) -> Spectrum:
    """Dark-state population versus laser detuning.

    Each transition contributes an independent detuned thermal Rabi response
    centred on its resonance; the sum is clamped to [0, 1].
    """
    d = np.asarray(detunings, dtype=float)
    if not np.all(np.isfinite(d)):
        raise ValueError("detuning grid must be finite")
    lines = transitions(beam, trap, state, pulse, delta_m, position, carrier_override)

    def one(line):
        return line.name, detuned_sum(line.rho, line.omega_n, d - line.offset, pulse.duration, pulse.gamma)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(one, lines))
    else:
        parts = [one(line) for line in lines]
    components = dict(parts)
    total = np.clip(sum(components.values()), 0.0, 1.0)
    return Spectrum(d, total, components)
