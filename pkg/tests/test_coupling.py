import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortex_ion.coupling import (
    DELTA_M,
    base_coupling,
    channel_amplitudes,
    channel_at,
    relative_couplings,
    tensor_amplitudes,
    tensor_decompose,
)
from vortex_ion.fields import gaussian, sample, vortex
from vortex_ion.trap import Mode, TrapModes, ground_state_sizes, lamb_dicke_table

TRAP = TrapModes()
ORIGIN = np.zeros(3)


def carrier(beam, point, dm):
    return channel_amplitudes(beam, TRAP, np.asarray(point, float), dm)[0]


def test_five_channels_in_order():
    chans = tensor_decompose(sample(gaussian(2.8e-6, 1e-6), ORIGIN))
    assert [c.delta_m for c in chans] == list(DELTA_M)


def test_gaussian_on_axis_single_channel():
    amps = tensor_amplitudes(sample(gaussian(2.8e-6, 1e-6, sigma=-1), ORIGIN).jacobian)
    nonzero = [dm for dm, a in zip(DELTA_M, amps) if abs(a) > 1e-9 * np.max(np.abs(amps))]
    assert nonzero == [-1]


@pytest.mark.parametrize("sigma", [-1, 1])
def test_vortex_on_axis_dm1_vanish(sigma):
    amps = tensor_amplitudes(sample(vortex(3.3e-6, 1e-6, sigma=sigma), ORIGIN).jacobian)
    assert amps[DELTA_M.index(1)] == 0 and amps[DELTA_M.index(-1)] == 0


def test_vortex_on_axis_dm2_pattern():
    on = tensor_amplitudes(sample(vortex(3.3e-6, 1e-6, l=1, sigma=1), ORIGIN).jacobian)
    ref = np.max(np.abs(on))
    assert abs(on[DELTA_M.index(2)]) > 0.1 * ref
    assert abs(on[DELTA_M.index(0)]) < 1e-12 * ref
    assert abs(on[DELTA_M.index(-2)]) < 1e-12 * ref
    off = tensor_amplitudes(sample(vortex(3.3e-6, 1e-6, l=1, sigma=-1), ORIGIN).jacobian)
    assert abs(off[DELTA_M.index(0)]) > 0.1 * ref


@pytest.mark.parametrize("sigma", [-1, 1])
def test_vortex_axial_sideband_matches_eta_perp(sigma):
    beam = vortex(3.34e-6, 1e-3, sigma=sigma)
    ch = channel_at(beam, TRAP, ORIGIN, sigma)
    assert ch.carrier_amplitude == 0
    rel = np.abs(ch.sideband_amplitudes) / base_coupling(beam)
    np.testing.assert_allclose(rel, [0.0057, 0.0026, 0.0024], atol=6e-5)


def test_on_axis_vortex_sidebands_equal_lamb_dicke_table():
    beam = vortex(3.34e-6, 1e-3, sigma=-1)
    table = lamb_dicke_table(TRAP, gaussian(2.8e-6, 1e-3), beam)
    _, sb = relative_couplings(beam, TRAP, ORIGIN, -1)
    np.testing.assert_allclose(sb, [table[k][1] for k in ("ax", "r1", "r2")], rtol=1e-12)


def test_gaussian_on_axis_sidebands():
    beam = gaussian(2.8e-6, 310e-9, sigma=-1)
    ch = channel_at(beam, TRAP, ORIGIN, -1)
    ratio = np.abs(ch.sideband_amplitudes) / abs(ch.carrier_amplitude)
    assert ratio[Mode.AX] == pytest.approx(0.0, abs=1e-15)
    assert ratio[Mode.R1] == pytest.approx(0.053, abs=0.0005)
    assert ratio[Mode.R2] == pytest.approx(0.048, abs=0.0005)
    # modes with k . e != 0 are exactly those with nonzero sidebands
    kz = np.asarray(TRAP.directions)[:, 2]
    assert np.all((np.abs(ratio) > 0) == (np.abs(kz) > 1e-12))


@pytest.mark.parametrize(
    "beam,dm",
    [
        (gaussian(2.8e-6, 1e-6, sigma=1), 1),
        (vortex(3.3e-6, 1e-6, l=1, sigma=-1), -1),
        (vortex(3.3e-6, 1e-6, l=-1, sigma=1), 1),
    ],
    ids=["gauss", "lg-sigma-", "lg-sigma+"],
)
def test_dm1_sidebands_match_directional_derivative(beam, dm):
    """First-order expansion oracle: x0 * d/ds of the carrier along each mode."""
    rng = np.random.default_rng(7)
    x0 = ground_state_sizes(TRAP)
    h = 1e-10
    for _ in range(25):
        p = rng.normal(scale=1e-6, size=3)
        _, sb = channel_amplitudes(beam, TRAP, p, dm)
        for m, e in enumerate(np.asarray(TRAP.directions)):
            fd = (carrier(beam, p + h * e, dm) - carrier(beam, p - h * e, dm)) / (2 * h) * x0[m]
            assert sb[m] == pytest.approx(fd, rel=1e-5, abs=1e-9 * np.abs(sb).max())


@pytest.mark.parametrize("dm", [2, 0, -2])
def test_other_channels_use_longitudinal_factor(dm):
    beam = vortex(3.3e-6, 1e-6, l=1, sigma=1)
    p = np.array([0.3e-6, -0.2e-6, 0.0])
    c, sb = channel_amplitudes(beam, TRAP, p, dm)
    kz = np.asarray(TRAP.directions)[:, 2]
    np.testing.assert_allclose(sb, c * 1j * beam.k * kz * ground_state_sizes(TRAP))


@settings(max_examples=30, deadline=None)
@given(
    x=st.floats(-3e-6, 3e-6),
    y=st.floats(-3e-6, 3e-6),
    scale=st.floats(0.01, 100.0),
)
def test_amplitudes_scale_as_sqrt_power(x, y, scale):
    p = np.array([x, y, 0.0])
    a = channel_amplitudes(vortex(3.3e-6, 1e-6), TRAP, p, -1)
    b = channel_amplitudes(vortex(3.3e-6, scale * 1e-6), TRAP, p, -1)
    np.testing.assert_allclose(b[0], np.sqrt(scale) * a[0], rtol=1e-10, atol=1e-300)
    np.testing.assert_allclose(b[1], np.sqrt(scale) * a[1], rtol=1e-10, atol=1e-300)
    # relative couplings are power independent
    np.testing.assert_allclose(
        relative_couplings(vortex(3.3e-6, 1e-6), TRAP, p, -1)[1],
        relative_couplings(vortex(3.3e-6, scale * 1e-6), TRAP, p, -1)[1],
        rtol=1e-10,
        atol=1e-300,
    )


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-3e-6, 3e-6), y=st.floats(-3e-6, 3e-6))
def test_sigma_flip_maps_dm_plus_to_minus(x, y):
    p = np.array([x, y, 0.0])
    plus = channel_at(gaussian(2.8e-6, 1e-6, sigma=1), TRAP, p, 1)
    minus = channel_at(gaussian(2.8e-6, 1e-6, sigma=-1), TRAP, p, -1)
    assert abs(plus.carrier_amplitude) == pytest.approx(abs(minus.carrier_amplitude), rel=1e-12)
    np.testing.assert_allclose(np.abs(plus.sideband_amplitudes), np.abs(minus.sideband_amplitudes), rtol=1e-10)


def test_l_flip_conjugates_transverse_y_term():
    # two in-plane modes at +-45 deg; flipping l flips the sign of the y term
    s = 1 / np.sqrt(2)
    trap = TrapModes(directions=((s, s, 0), (-s, s, 0), (0, 0, 1)))
    x0 = ground_state_sizes(trap)
    a = np.asarray(channel_at(vortex(3.3e-6, 1e-6, l=1), trap, ORIGIN, -1).sideband_amplitudes) / x0
    b = np.asarray(channel_at(vortex(3.3e-6, 1e-6, l=-1), trap, ORIGIN, -1).sideband_amplitudes) / x0
    # mode (x+y)/sqrt2: 1 + i l ; mode (-x+y)/sqrt2: -1 + i l
    assert a[0] / a[1] == pytest.approx((1 + 1j) / (-1 + 1j))
    assert b[0] / b[1] == pytest.approx((1 - 1j) / (-1 - 1j))
    assert abs(a[0]) == pytest.approx(abs(b[0]))


def test_invalid_delta_m():
    with pytest.raises(ValueError):
        channel_at(gaussian(2.8e-6, 1e-6), TRAP, ORIGIN, 3)


def test_zero_power_gives_zero_relative_couplings():
    c, sb = relative_couplings(gaussian(2.8e-6, 0.0), TRAP, ORIGIN, -1)
    assert c == 0 and np.all(sb == 0)
