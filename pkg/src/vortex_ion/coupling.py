"""Quadrupole coupling: spherical-tensor channels and motional sidebands.

Amplitudes are in arbitrary units proportional to the field-gradient
combination multiplying each T^2_dm.  Only ratios to :func:`base_coupling`
carry meaning; the absolute Rabi scale comes from the power calibration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import BeamField, FieldSample, field_jacobian
from .trap import MODES, TrapModes, ground_state_sizes

DELTA_M = (2, 1, 0, -1, -2)


@dataclass(frozen=True)
class TensorChannel:
    delta_m: int
    amplitude: complex


@dataclass(frozen=True)
class TransitionChannel:
    """Carrier amplitude and first-order sideband amplitudes (indexed by Mode)."""

    delta_m: int
    carrier_amplitude: complex
    sideband_amplitudes: tuple


def tensor_amplitudes(jacobian) -> np.ndarray:
    """Gradient combinations for dm = +2, +1, 0, -1, -2 along the last axis."""
    J = np.asarray(jacobian)
    dxEx, dyEx, dzEx = J[..., 0, 0], J[..., 0, 1], J[..., 0, 2]
    dxEy, dyEy, dzEy = J[..., 1, 0], J[..., 1, 1], J[..., 1, 2]
    return np.stack(
        [
            dxEx - dyEy - 1j * dxEy - 1j * dyEx,
            dzEx - 1j * dzEy,
            2.0 / np.sqrt(6.0) * (dxEx + dyEy),
            dzEx + 1j * dzEy,
            dxEx - dyEy + 1j * dxEy + 1j * dyEx,
        ],
        axis=-1,
    )


def tensor_decompose(sample: FieldSample) -> list[TensorChannel]:
    amps = tensor_amplitudes(sample.jacobian)
    return [TensorChannel(dm, complex(a)) for dm, a in zip(DELTA_M, amps)]


def _check_dm(delta_m):
    if delta_m not in DELTA_M:
        raise ValueError(f"invalid delta_m {delta_m!r}; expected one of {DELTA_M}")


def base_coupling(beam: BeamField) -> float:
    """|dm = sigma| amplitude at the centre of a Gaussian beam of equal power and waist."""
    return float(np.sqrt(2.0) * beam.k * beam.peak_amplitude)


def channel_amplitudes(beam: BeamField, trap: TrapModes, points, delta_m: int):
    """Vectorized carrier ``(...)`` and sideband ``(..., 3)`` amplitudes.

    Sidebands come from the first-order expansion of the channel amplitude
    around each point along the mode eigendirections, scaled by the
    ground-state size.  For dm = +-1 the full gradient is used (longitudinal
    phase plus transverse field gradient); for dm = 0, +-2 only the
    longitudinal phase factor is kept.
    """
    _check_dm(delta_m)
    J = field_jacobian(beam, points)
    carrier = tensor_amplitudes(J)[..., DELTA_M.index(delta_m)]
    x0 = ground_state_sizes(trap)
    dirs = np.asarray(trap.directions)  # (mode, q)
    if abs(delta_m) == 1:
        # d/dq of (dzEx -+ i dzEy) = ik (dqEx -+ i dqEy) for an exp(ikz) field
        s = -1j * delta_m
        grad = 1j * beam.k * (J[..., 0, :] + s * J[..., 1, :])  # (..., q)
        sidebands = np.einsum("...q,mq->...m", grad, dirs) * x0
    else:
        kz = 1j * beam.k * dirs[:, 2] * x0
        sidebands = carrier[..., None] * kz
    return carrier, sidebands


def channel_at(beam: BeamField, trap: TrapModes, position, delta_m: int) -> TransitionChannel:
    carrier, sidebands = channel_amplitudes(beam, trap, np.asarray(position, float), delta_m)
    return TransitionChannel(delta_m, complex(carrier), tuple(complex(s) for s in sidebands))


def relative_couplings(beam: BeamField, trap: TrapModes, points, delta_m: int):
    """Carrier and sideband magnitudes divided by :func:`base_coupling`.

    Multiplying by the calibrated base Rabi frequency gives the carrier Rabi
    frequency and the sideband Lamb-Dicke factors (eta * Omega0).
    """
    carrier, sidebands = channel_amplitudes(beam, trap, points, delta_m)
    base = base_coupling(beam)
    if base == 0.0:
        return np.zeros(np.shape(carrier)), np.zeros(np.shape(sidebands))
    return np.abs(carrier) / base, np.abs(sidebands) / base


def longitudinal_eta(beam: BeamField, trap: TrapModes) -> np.ndarray:
    """|k . e_mode| x0 for every mode, used for the carrier Debye-Waller factor."""
    dirs = np.asarray(trap.directions)
    return np.abs(beam.k * dirs[:, 2]) * ground_state_sizes(trap)


__all__ = [
    "DELTA_M",
    "MODES",
    "TensorChannel",
    "TransitionChannel",
    "base_coupling",
    "channel_amplitudes",
    "channel_at",
    "longitudinal_eta",
    "relative_couplings",
    "tensor_amplitudes",
    "tensor_decompose",
]
