"""Thermal wave-packet averaging of the beam intensity.

The ion's position density is a product of independent Gaussians along the
trap eigendirections with std x0 * sqrt(2 nbar + 1).  Beam profiles do not
depend on z, so only the transverse marginal enters the averages.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dynamics import ThermalState
from .fields import BeamField, field_amplitude
from .trap import Mode, TrapModes, ground_state_sizes


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class WavePacket:
    """Gaussian position density: centre (m), per-mode std (m), mode directions."""

    center: tuple
    sigmas: tuple
    directions: tuple

    def __post_init__(self):
        if any(not s > 0 for s in self.sigmas):
            raise ValueError("wave-packet widths must be > 0")

    def transverse_covariance(self) -> np.ndarray:
        e = np.asarray(self.directions)[:, :2]
        s2 = np.asarray(self.sigmas) ** 2
        return np.einsum("m,mi,mj->ij", s2, e, e)


def wavepacket_from(trap: TrapModes, state: ThermalState, displacement=(0.0, 0.0, 0.0)) -> WavePacket:
    sig = ground_state_sizes(trap) * np.sqrt(2.0 * np.asarray(state.nbar) + 1.0)
    return WavePacket(tuple(float(v) for v in displacement), tuple(sig), trap.directions)


def point_packet(center=(0.0, 0.0, 0.0), width: float = 1e-15) -> WavePacket:
    """A (numerically) point-like packet, for delta-function limits."""
    return WavePacket(tuple(center), (width,) * 3, ((1.0, 0, 0), (0, 1.0, 0), (0, 0, 1.0)))


def _grid_mean(func, center, axes, n):
    u = np.linspace(-5.0, 5.0, n)
    w = np.exp(-0.5 * u**2)
    w[0] *= 0.5
    w[-1] *= 0.5
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(w, w)
    pts = np.empty(U.shape + (3,))
    pts[...] = center
    pts[..., :2] += U[..., None] * axes[:, 0] + V[..., None] * axes[:, 1]
    return float(np.sum(W * func(pts)) / np.sum(W))


def gaussian_average(func, wp: WavePacket, rtol: float = 1e-4, n0: int = 17, n_limit: int = 2049) -> float:
    """Average of ``func(points)`` over the transverse marginal of ``wp``.

    Trapezoidal tensor grid over +-5 std along the principal axes, doubled
    until successive estimates agree to ``rtol``.
    """
    cov = wp.transverse_covariance()
    evals, evecs = np.linalg.eigh(cov)
    axes = evecs * np.sqrt(np.clip(evals, 0.0, None))  # columns: scaled principal axes
    center = np.asarray(wp.center, dtype=float)
    n = n0
    prev = _grid_mean(func, center, axes, n)
    while n < n_limit:
        n = 2 * n - 1
        cur = _grid_mean(func, center, axes, n)
        if abs(cur - prev) <= rtol * abs(cur) or cur == prev:
            return cur
        prev = cur
    raise QuadratureError(f"wave-packet quadrature did not stabilize to {rtol} with {n_limit} points")


def effective_intensity(beam: BeamField, wp: WavePacket, rtol: float = 1e-4) -> float:
    """<|E|^2> over the wave packet, V^2/m^2."""

    def intensity(pts):
        return np.sum(np.abs(field_amplitude(beam, pts)) ** 2, axis=-1)

    return gaussian_average(intensity, wp, rtol)


def effective_carrier_coupling(beam: BeamField, wp: WavePacket, rtol: float = 1e-4) -> float:
    """RMS field over the packet relative to the Gaussian peak of equal power and waist.

    This is the carrier Rabi frequency in units of the calibrated base Rabi
    frequency of ``beam``.
    """
    if beam.power == 0:
        return 0.0
    return float(np.sqrt(effective_intensity(beam, wp, rtol)) / beam.peak_amplitude)


def residual_carrier_ratio(
    vortex: BeamField,
    gaussian: BeamField,
    wp: WavePacket,
    equal_power: bool = False,
    rtol: float = 1e-4,
) -> float:
    """Effective vortex carrier Rabi frequency relative to the Gaussian carrier.

    ``sqrt(<|E_V|^2>_wp / |E_G(centre)|^2)``, with both beams at their own
    powers; ``equal_power=True`` rescales the Gaussian to the vortex power.
    Square the result for the corresponding intensity (weak-pulse population)
    ratio.
    """
    if equal_power:
        gaussian = replace(gaussian, power=vortex.power)
    ref = np.sum(np.abs(field_amplitude(gaussian, np.asarray(gaussian.focus_offset))) ** 2)
    return float(np.sqrt(effective_intensity(vortex, wp, rtol) / ref))


def residual_map(
    vortex: BeamField,
    gaussian: BeamField,
    trap: TrapModes,
    nbar_grid,
    displacement_grid,
    radial_nbar: tuple = (7.0, 7.0),
    direction=(1.0, 0.0, 0.0),
    equal_power: bool = False,
) -> np.ndarray:
    """Residual carrier ratio on (axial nbar) x (displacement) grids.

    Rows follow ``nbar_grid``; displacement is applied along ``direction``.
    Radial modes stay at ``radial_nbar``.
    """
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    out = np.empty((len(nbar_grid), len(displacement_grid)))
    for i, nb in enumerate(nbar_grid):
        nbar = [0.0, 0.0, 0.0]
        nbar[Mode.AX] = float(nb)
        nbar[Mode.R1], nbar[Mode.R2] = radial_nbar
        state = ThermalState(tuple(nbar))
        for j, d in enumerate(displacement_grid):
            wp = wavepacket_from(trap, state, d * direction)
            out[i, j] = residual_carrier_ratio(vortex, gaussian, wp, equal_power)
    return out
