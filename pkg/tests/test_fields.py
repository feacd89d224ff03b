import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from vortex_ion.constants import C, EPS0
from vortex_ion.fields import (
    BeamField,
    DomainError,
    field_amplitude,
    field_jacobian,
    gaussian,
    vortex,
)

W = 2.8e-6
P = 310e-9


def radial_power(beam):
    """2-D power integral of |E|^2 at z = 0, returned in units of P / (c eps0 / 2)."""

    def integrand(r, phi):
        pt = np.array([r * np.cos(phi), r * np.sin(phi), 0.0])
        return np.sum(np.abs(field_amplitude(beam, pt)) ** 2) * r

    val, _ = integrate.dblquad(integrand, 0, 2 * np.pi, 0, 6 * beam.waist, epsabs=0, epsrel=1e-9)
    return val / (2 * beam.power / (C * EPS0))


def test_vortex_vanishes_on_axis():
    E = field_amplitude(vortex(3.3e-6, 10e-6), np.zeros(3))
    assert np.all(E == 0)


def test_gaussian_peak_matches_power_integral():
    beam = gaussian(W, P)
    peak = np.linalg.norm(field_amplitude(beam, np.zeros(3)))
    assert peak == pytest.approx(np.sqrt(4 * P / (np.pi * C * EPS0 * W**2)), rel=1e-12)
    # independent route: radial quadrature of |E|^2 recovers P
    val, _ = integrate.quad(lambda r: 2 * np.pi * r * peak**2 * np.exp(-2 * r**2 / W**2), 0, 10 * W, epsrel=1e-12)
    assert val * C * EPS0 / 2 == pytest.approx(P, rel=1e-6)


@pytest.mark.parametrize("beam", [gaussian(W, P), vortex(3.3e-6, 10e-6, l=1), vortex(3.3e-6, 10e-6, l=-1)])
def test_power_normalization(beam):
    assert radial_power(beam) == pytest.approx(1.0, rel=1e-4)


def test_lg_radial_maximum():
    beam = vortex(3.34e-6, 1e-6)
    res = optimize.minimize_scalar(
        lambda r: -np.linalg.norm(field_amplitude(beam, [r, 0, 0])),
        bounds=(0, 3 * beam.waist),
        method="bounded",
        options={"xatol": 1e-14},
    )
    assert res.x == pytest.approx(beam.waist / np.sqrt(2), rel=1e-6)


def test_gaussian_jacobian_on_axis():
    beam = gaussian(W, P)
    J = field_jacobian(beam, np.zeros(3))
    E = field_amplitude(beam, np.zeros(3))
    assert J[0, 0] == 0 and J[0, 1] == 0
    assert J[0, 2] == pytest.approx(1j * beam.k * E[0])


@pytest.mark.parametrize("sigma", [-1, 1])
def test_vortex_axis_gradient(sigma):
    beam = vortex(3.34e-6, 10e-6, sigma=sigma)
    ref = gaussian(3.34e-6, 10e-6, sigma=sigma)
    J = field_jacobian(beam, np.zeros(3))
    Ex_peak = abs(field_amplitude(ref, np.zeros(3))[0])
    assert abs(J[0, 0]) == pytest.approx(np.sqrt(2) / beam.waist * Ex_peak, rel=1e-12)
    assert J[0, 1] == pytest.approx(1j * beam.l * J[0, 0])
    assert J[0, 2] == 0


def central_difference(beam, point, h=1e-10):
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        cols.append((field_amplitude(beam, point + e) - field_amplitude(beam, point - e)) / (2 * h))
    return np.stack(cols, axis=-1)


@pytest.mark.parametrize(
    "beam",
    [gaussian(W, P, sigma=1), vortex(3.3e-6, 10e-6, l=1, sigma=-1), vortex(3.3e-6, 10e-6, l=-1, sigma=1)],
    ids=["gauss", "lg+", "lg-"],
)
def test_jacobian_matches_finite_differences(beam):
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(100):
        r = 2 * beam.waist * np.sqrt(rng.uniform())
        phi = rng.uniform(0, 2 * np.pi)
        pt = np.array([r * np.cos(phi), r * np.sin(phi), rng.uniform(-1e-6, 1e-6)])
        Ja = field_jacobian(beam, pt)
        Jn = central_difference(beam, pt)
        floor = 1e-6 * np.max(np.abs(Ja))
        mask = np.abs(Ja) > floor
        worst = max(worst, np.max(np.abs(Ja - Jn)[mask] / np.abs(Ja)[mask]))
    assert worst < 1e-5


@pytest.mark.parametrize("sigma", [-1, 1])
def test_circular_polarization_relation(sigma):
    beam = vortex(3e-6, 1e-6, sigma=sigma)
    pt = np.array([0.4e-6, -0.7e-6, 0.1e-6])
    E = field_amplitude(beam, pt)
    J = field_jacobian(beam, pt)
    assert E[1] == pytest.approx(1j * sigma * E[0])
    np.testing.assert_allclose(J[1], 1j * sigma * J[0])


@settings(max_examples=100, deadline=None)
@given(r=st.floats(1e-9, 6e-6), phi=st.floats(0, 2 * np.pi), l=st.sampled_from([-1, 1]))
def test_oam_phase_winding(r, phi, l):
    beam = vortex(3.3e-6, 1e-6, l=l)
    e0 = field_amplitude(beam, [r, 0, 0])[0]
    e1 = field_amplitude(beam, [r * np.cos(phi), r * np.sin(phi), 0])[0]
    wound = np.angle(e1 / e0)
    assert np.angle(np.exp(1j * (wound - l * phi))) == pytest.approx(0, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0, 6e-6), phi=st.floats(0, 2 * np.pi))
def test_gaussian_is_rotationally_symmetric(r, phi):
    beam = gaussian(W, P)
    a = field_amplitude(beam, [r, 0, 0])
    b = field_amplitude(beam, [r * np.cos(phi), r * np.sin(phi), 0])
    np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-300)


def test_vectorized_matches_pointwise():
    beam = vortex(3.3e-6, 1e-6)
    pts = np.random.default_rng(0).normal(scale=1e-6, size=(4, 5, 3))
    E = field_amplitude(beam, pts)
    J = field_jacobian(beam, pts)
    assert E.shape == (4, 5, 2) and J.shape == (4, 5, 2, 3)
    np.testing.assert_allclose(E[2, 3], field_amplitude(beam, pts[2, 3]))
    np.testing.assert_allclose(J[1, 4], field_jacobian(beam, pts[1, 4]))


def test_focus_offset_shifts_profile():
    beam = vortex(3.3e-6, 1e-6, focus_offset=(100e-9, 0, 0))
    assert np.all(field_amplitude(beam, [100e-9, 0, 0]) == 0)


@pytest.mark.parametrize("bad", [[np.nan, 0, 0], [0, np.inf, 0]])
def test_non_finite_point_is_domain_error(bad):
    with pytest.raises(DomainError):
        field_amplitude(gaussian(W, P), bad)
    with pytest.raises(DomainError):
        field_jacobian(gaussian(W, P), bad)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="gaussian", waist=0.0, power=1.0),
        dict(kind="gaussian", waist=1e-6, power=-1.0),
        dict(kind="gaussian", waist=1e-6, power=1.0, wavelength=0.0),
        dict(kind="gaussian", waist=1e-6, power=1.0, l=1),
        dict(kind="lg01", waist=1e-6, power=1.0, l=0),
        dict(kind="lg01", waist=1e-6, power=1.0, l=2),
        dict(kind="lg01", waist=1e-6, power=1.0, l=1, sigma=0),
    ],
)
def test_invalid_beams_rejected(kwargs):
    with pytest.raises(ValueError):
        BeamField(**kwargs)


def test_wavenumber_is_derived():
    beam = gaussian(W, P, wavelength=729e-9)
    assert beam.k == pytest.approx(2 * np.pi / 729e-9)
