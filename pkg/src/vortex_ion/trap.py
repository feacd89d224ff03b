"""Trap geometry, ground-state sizes and Lamb-Dicke parameters."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .constants import CA40_MASS, HBAR, KHZ, MHZ, TWO_PI
from .fields import BeamField, BeamKind


class Mode(enum.IntEnum):
    """Motional modes.  Arrays indexed by mode follow this order."""

    AX = 0
    R1 = 1
    R2 = 2


MODES = tuple(Mode)


class UnsupportedBeamError(ValueError):
    pass


_S = 1.0 / np.sqrt(2.0)
DEFAULT_DIRECTIONS = (
    (1.0, 0.0, 0.0),  # ax: along beam-frame x
    (0.0, _S, _S),  # R1: rotated 45 deg about the beam axis
    (0.0, _S, -_S),  # R2
)


@dataclass(frozen=True)
class TrapModes:
    """Ion mass, secular frequencies and eigendirections in the beam frame.

    ``frequencies`` and ``directions`` are indexed by :class:`Mode`
    (ax, R1, R2).
    """

    mass: float = CA40_MASS
    frequencies: tuple = (TWO_PI * 700 * KHZ, TWO_PI * 1.70 * MHZ, TWO_PI * 2.05 * MHZ)
    directions: tuple = DEFAULT_DIRECTIONS

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.frequencies)
        dirs = np.asarray(self.directions, dtype=float)
        if len(freqs) != 3 or dirs.shape != (3, 3):
            raise ValueError("need exactly three modes")
        if not all(f > 0 for f in freqs):
            raise ValueError("secular frequencies must be > 0")
        if not self.mass > 0:
            raise ValueError("mass must be > 0")
        if np.max(np.abs(dirs @ dirs.T - np.eye(3))) > 1e-12:
            raise ValueError("mode eigendirections must be orthonormal")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "directions", tuple(tuple(d) for d in dirs))

    def direction(self, mode) -> np.ndarray:
        return np.asarray(self.directions[Mode(mode)])

    def frequency(self, mode) -> float:
        return self.frequencies[Mode(mode)]


def ground_state_size(trap: TrapModes, mode) -> float:
    """sqrt(hbar / (2 m omega)) for one mode, in m."""
    return float(np.sqrt(HBAR / (2.0 * trap.mass * trap.frequency(mode))))


def ground_state_sizes(trap: TrapModes) -> np.ndarray:
    return np.array([ground_state_size(trap, m) for m in MODES])


def lamb_dicke_parallel(trap: TrapModes, mode, k_vector) -> float:
    k_vector = np.asarray(k_vector, dtype=float)
    if not np.linalg.norm(k_vector) > 0:
        raise ValueError("k_vector must be nonzero")
    return float(k_vector @ trap.direction(mode) * ground_state_size(trap, mode))


def lamb_dicke_perp(trap: TrapModes, mode, beam: BeamField, transverse_dir=(1.0, 0.0)) -> float:
    """Transverse Lamb-Dicke parameter (n_perp . e_mode) sqrt(2)/w0 x0.

    ``transverse_dir`` is a unit 2-vector in the beam's (x, y) plane.
    """
    if beam.kind is not BeamKind.LG01:
        raise UnsupportedBeamError("transverse Lamb-Dicke parameter needs an LG01 beam")
    n = np.zeros(3)
    n[:2] = transverse_dir
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("transverse_dir must be a unit vector")
    return float(n @ trap.direction(mode) * np.sqrt(2.0) / beam.waist * ground_state_size(trap, mode))


def lamb_dicke_table(trap: TrapModes, gaussian: BeamField, vortex: BeamField) -> dict:
    """Magnitudes of eta_parallel (Gaussian, k along z) and eta_perp (vortex).

    The vortex column projects each mode on the transverse direction it has
    the largest overlap with: x for the axial mode, y for the radial ones.
    """
    kz = np.array([0.0, 0.0, gaussian.k])
    table = {}
    for m in MODES:
        e = trap.direction(m)
        n_perp = (1.0, 0.0) if abs(e[0]) >= abs(e[1]) else (0.0, 1.0)
        table[m.name.lower()] = (
            abs(lamb_dicke_parallel(trap, m, kz)),
            abs(lamb_dicke_perp(trap, m, vortex, n_perp)),
        )
    return table
