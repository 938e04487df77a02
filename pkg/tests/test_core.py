import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mecsched import (
    UNBOUNDED,
    ChannelConfig,
    DomainError,
    InfeasiblePowerError,
    db_to_linear,
    dbm_to_watts,
    phi,
    phi_closed_form,
    psi,
    psi_derivatives,
    rate,
    rate_inverse_to_power,
    xi_lower_bound,
)

LN2 = math.log(2.0)


def unit_channel():
    # bandwidth 1 Hz so psi can be checked by hand
    return ChannelConfig(bandwidth_hz=1.0)


def test_db_conversions():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(-40.0) == pytest.approx(1e-4, rel=1e-12)
    assert dbm_to_watts(-174.0) == pytest.approx(3.981e-21, rel=1e-3)


def test_default_channel_matches_db_form(channel):
    ch = ChannelConfig.from_db(bandwidth_hz=1e6, g0_db=-40.0, theta=4.0, l0_m=1.0, l_m=100.0, n0_dbm_per_hz=-174.0, p_max_w=0.1)
    assert ch.gain == pytest.approx(channel.gain, rel=1e-15)
    assert channel.gain == pytest.approx(1e-12, rel=1e-12)
    assert channel.noise_power_w == pytest.approx(3.981e-15, rel=1e-3)


def test_rate_examples(channel):
    assert rate(0.0, channel) == 0.0
    assert rate(0.1, channel) == pytest.approx(4.707e6, rel=1e-3)
    p_unit_snr = channel.noise_power_w / channel.gain
    assert rate(p_unit_snr, channel) == pytest.approx(channel.bandwidth_hz, rel=1e-14)
    with pytest.raises(DomainError):
        rate(-1e-3, channel)


def test_xi_lower_bound(channel):
    d = xi_lower_bound(channel)
    assert d == pytest.approx(2.124e-7, rel=1e-3)
    assert d == 1.0 / rate(channel.p_max_w, channel)
    assert xi_lower_bound(channel.replace(p_max_w=0.2)) < d


def test_xi_lower_bound_bandwidth_recomputed(channel):
    wide = channel.replace(bandwidth_hz=2e6)
    snr = wide.gain * wide.p_max_w / wide.noise_power_w
    assert xi_lower_bound(wide) == pytest.approx(1.0 / (2e6 * math.log2(1 + snr)), rel=1e-14)


def test_rate_inverse_examples(channel):
    d = xi_lower_bound(channel)
    assert rate_inverse_to_power(d, channel) == pytest.approx(channel.p_max_w, rel=1e-12)
    assert rate_inverse_to_power(1.0 / channel.bandwidth_hz, channel) == pytest.approx(
        channel.noise_power_w / channel.gain, rel=1e-12
    )
    assert rate_inverse_to_power(1e6 * d, channel) < rate_inverse_to_power(1e3 * d, channel)
    with pytest.raises(InfeasiblePowerError):
        rate_inverse_to_power(0.5 * d, channel)
    with pytest.raises(DomainError):
        rate_inverse_to_power(0.0, channel)


@given(st.floats(1e-8, 1.0))
def test_rate_round_trip(frac):
    ch = ChannelConfig()
    p = frac * ch.p_max_w
    assert rate_inverse_to_power(1.0 / rate(p, ch), ch) == pytest.approx(p, rel=1e-9)


def test_psi_examples():
    ch = unit_channel()
    assert psi(1.0, ch) == pytest.approx(1.0, rel=1e-15)
    assert psi(0.5, ch) == pytest.approx(1.5, rel=1e-15)
    assert psi(1e6, ch) == pytest.approx(LN2, rel=1e-6)


def test_psi_derivative_examples():
    ch = unit_channel()
    first, second = psi_derivatives(1.0, ch)
    assert first == pytest.approx(-(2 * LN2 - 1), rel=1e-14)
    assert second == pytest.approx(2 * LN2**2, rel=1e-14)
    h = 1e-5
    assert (psi(1 + h, ch) - psi(1 - h, ch)) / (2 * h) == pytest.approx(first, rel=1e-5)
    fp, _ = psi_derivatives(1 + h, ch)
    fm, _ = psi_derivatives(1 - h, ch)
    assert (fp - fm) / (2 * h) == pytest.approx(second, rel=1e-5)
    far, _ = psi_derivatives(1e8, ch)
    assert abs(far) < 1e-15


def test_psi_derivatives_small_s_series(channel):
    # large xi uses a series for -psi'; check it joins the direct formula smoothly
    xi = np.geomspace(1e-5, 1e2, 400)
    first, second = psi_derivatives(xi, channel)
    s = LN2 / (channel.bandwidth_hz * xi)
    direct = -(1.0 + np.exp(s) * (s - 1.0))
    mask = s > 0.05
    assert np.allclose(first[mask], direct[mask], rtol=1e-12)
    assert np.all(np.diff(first) > 0)
    assert np.all(second > 0)


def test_phi_examples():
    ch = unit_channel()
    assert phi(2 * LN2 - 1, ch, 1.0) == pytest.approx(1.0, rel=1e-10)
    assert phi(0.0, ch, 1.0) == UNBOUNDED
    assert phi_closed_form(2 * LN2 - 1, ch, 1.0) == pytest.approx(1.0, rel=1e-10)
    with pytest.raises(DomainError):
        phi(-1.0, ch, 1.0)


@settings(max_examples=200)
@given(st.floats(1e-9, 1e9), st.floats(1e-9, 1e9))
def test_phi_monotone(x1, x2):
    ch = ChannelConfig()
    lo, hi = sorted((x1, x2))
    assert phi(lo, ch, 0.4) >= phi(hi, ch, 0.4)


@settings(max_examples=200)
@given(st.floats(-9, 9), st.floats(-3, 3))
def test_phi_routes_agree(log_x, log_c):
    ch = ChannelConfig()
    x, c = 10.0**log_x, 10.0**log_c
    a = phi(x, ch, c)
    b = float(phi_closed_form(x, ch, c))
    assert b == pytest.approx(a, rel=1e-9)
    first, _ = psi_derivatives(a, ch)
    assert -first == pytest.approx(x / c, rel=1e-8)
