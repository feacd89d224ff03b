"""Focal-plane fields of Gaussian and LG01 vortex beams.

The beam propagates along +z of the beam frame.  Only the plane-wave phase
``exp(ikz)`` is kept along z (no Gouy phase, no divergence) and the field is
purely transverse.  All functions accept a single point of shape ``(3,)`` or a
stack of points ``(..., 3)`` and broadcast over the leading axes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .constants import C, EPS0, TWO_PI


class DomainError(ValueError):
    """Raised for non-finite or otherwise invalid evaluation points."""


class BeamKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LG01 = "lg01"


@dataclass(frozen=True)
class BeamField:
    """Parametric description of a focused beam.

    Parameters
    ----------
    kind : BeamKind
    waist : float
        1/e^2 intensity radius w0 in m.
    power : float
        Optical power in W.
    wavelength : float
        Vacuum wavelength in m.
    sigma : int
        Circular polarization handedness, +1 or -1.
    l : int
        OAM charge; 0 for Gaussian, +-1 for LG01.
    focus_offset : tuple
        Displacement of the beam axis from the trap origin, m.
    """

    kind: BeamKind
    waist: float
    power: float
    wavelength: float = 729e-9
    sigma: int = -1
    l: int = 0
    focus_offset: tuple = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        object.__setattr__(self, "kind", BeamKind(self.kind))
        object.__setattr__(self, "focus_offset", tuple(float(v) for v in self.focus_offset))
        if not self.waist > 0:
            raise ValueError(f"waist must be > 0, got {self.waist}")
        if not self.power >= 0:
            raise ValueError(f"power must be >= 0, got {self.power}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        if self.sigma not in (-1, 1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma}")
        if self.kind is BeamKind.GAUSSIAN and self.l != 0:
            raise ValueError("Gaussian beam requires l = 0")
        if self.kind is BeamKind.LG01 and abs(self.l) != 1:
            raise ValueError("LG01 beam requires |l| = 1")
        if len(self.focus_offset) != 3:
            raise ValueError("focus_offset must be a 3-vector")

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def peak_amplitude(self) -> float:
        """|E| at the centre of a Gaussian beam with this power and waist (V/m).

        The LG01 profile shares this normalization constant, so both beam kinds
        carry the same power for the same value.
        """
        return np.sqrt(4.0 * self.power / (np.pi * C * EPS0 * self.waist**2))

    @property
    def polarization(self) -> np.ndarray:
        return np.array([1.0, 1j * self.sigma]) / np.sqrt(2.0)


def gaussian(waist, power, **kw) -> BeamField:
    return BeamField(BeamKind.GAUSSIAN, waist, power, l=0, **kw)


def vortex(waist, power, l=-1, **kw) -> BeamField:
    return BeamField(BeamKind.LG01, waist, power, l=l, **kw)


def _local(beam, point):
    q = np.asarray(point, dtype=float)
    if q.shape[-1] != 3:
        raise DomainError(f"point must have a trailing axis of length 3, got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise DomainError("point has non-finite components")
    return q - np.asarray(beam.focus_offset)


def _profile(beam, x, y):
    """Scalar transverse profile u and its x/y derivatives (peak-normalized units)."""
    w = beam.waist
    env = np.exp(-(x**2 + y**2) / w**2)
    if beam.kind is BeamKind.GAUSSIAN:
        u = env.astype(complex)
        ux = -2.0 * x / w**2 * u
        uy = -2.0 * y / w**2 * u
    else:
        s = x + 1j * beam.l * y
        a = np.sqrt(2.0) / w
        u = a * s * env
        ux = a * env * (1.0 - 2.0 * x * s / w**2)
        uy = a * env * (1j * beam.l - 2.0 * y * s / w**2)
    return u, ux, uy


def field_amplitude(beam: BeamField, point) -> np.ndarray:
    """Complex transverse field (Ex, Ey) in V/m at ``point`` (beam frame, m)."""
    q = _local(beam, point)
    x, y, z = q[..., 0], q[..., 1], q[..., 2]
    u, _, _ = _profile(beam, x, y)
    scalar = beam.peak_amplitude * u * np.exp(1j * beam.k * z)
    return scalar[..., None] * beam.polarization


def field_jacobian(beam: BeamField, point) -> np.ndarray:
    """Analytic derivatives dE_j/dq_i, shape ``(..., 2, 3)`` with rows j = x, y."""
    q = _local(beam, point)
    x, y, z = q[..., 0], q[..., 1], q[..., 2]
    u, ux, uy = _profile(beam, x, y)
    phase = beam.peak_amplitude * np.exp(1j * beam.k * z)
    grad = np.stack([ux * phase, uy * phase, 1j * beam.k * u * phase], axis=-1)
    return beam.polarization[:, None] * grad[..., None, :]


@dataclass(frozen=True)
class FieldSample:
    amplitude: np.ndarray
    jacobian: np.ndarray


def sample(beam: BeamField, point) -> FieldSample:
    return FieldSample(field_amplitude(beam, point), field_jacobian(beam, point))


def intensity_factor(beam: BeamField, x, y) -> np.ndarray:
    """|E|^2 / peak_amplitude^2 in the focal plane (dimensionless, vectorized)."""
    u, _, _ = _profile(beam, np.asarray(x, float), np.asarray(y, float))
    return np.abs(u) ** 2
