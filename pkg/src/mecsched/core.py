"""Physical-layer scalar math.

Shannon rate of the uplink, dB conversions, the rate-inverse change of
variables ``xi = 1 / R(p)`` and the per-bit energy kernel

    psi(xi) = xi * (2 ** (1 / (omega * xi)) - 1)

together with its derivatives and the inverse ``phi`` of ``-psi'``.

All quantities are SI (W, Hz, bits, seconds, W/Hz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import lambertw

LN2 = math.log(2.0)

#: Returned by :func:`phi` for a zero dual aggregate; callers clip it to a box.
UNBOUNDED = math.inf

# relative slack allowed below the peak-power bound D
XI_FEAS_RTOL = 1e-12


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class InfeasiblePowerError(ValueError):
    """Requested rate needs more than the peak transmit power."""


def db_to_linear(x_db):
    """``10 ** (x_db / 10)``."""
    return _as_out(10.0 ** (np.asarray(x_db, dtype=float) / 10.0))


def dbm_to_watts(x_dbm):
    """dBm (or dBm/Hz) to W (or W/Hz)."""
    return _as_out(10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0))


def _as_out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


@dataclass(frozen=True)
class ChannelConfig:
    """Deterministic path-loss uplink.

    ``pathloss_const_linear`` is the gain at ``reference_distance_m``; the
    composite gain is ``g0 * (L0 / L) ** theta``.
    """

    bandwidth_hz: float = 1e6
    pathloss_const_linear: float = 1e-4
    pathloss_exponent: float = 4.0
    reference_distance_m: float = 1.0
    distance_m: float = 100.0
    noise_psd_w_per_hz: float = dbm_to_watts(-174.0)
    p_max_w: float = 0.1
    gain: float = field(init=False, repr=False)
    noise_power_w: float = field(init=False, repr=False)

    def __post_init__(self):
        for name in (
            "bandwidth_hz",
            "pathloss_const_linear",
            "pathloss_exponent",
            "reference_distance_m",
            "distance_m",
            "noise_psd_w_per_hz",
            "p_max_w",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        gain = self.pathloss_const_linear * (
            self.reference_distance_m / self.distance_m
        ) ** self.pathloss_exponent
        noise = self.noise_psd_w_per_hz * self.bandwidth_hz
        if not (gain > 0 and noise > 0):
            raise ValueError("composite gain and noise power must be > 0")
        object.__setattr__(self, "gain", gain)
        object.__setattr__(self, "noise_power_w", noise)

    @classmethod
    def from_db(
        cls,
        *,
        bandwidth_hz=1e6,
        g0_db=-40.0,
        theta=4.0,
        l0_m=1.0,
        l_m=100.0,
        n0_dbm_per_hz=-174.0,
        p_max_w=0.1,
    ):
        return cls(
            bandwidth_hz=float(bandwidth_hz),
            pathloss_const_linear=float(db_to_linear(g0_db)),
            pathloss_exponent=float(theta),
            reference_distance_m=float(l0_m),
            distance_m=float(l_m),
            noise_psd_w_per_hz=float(dbm_to_watts(n0_dbm_per_hz)),
            p_max_w=float(p_max_w),
        )

    def replace(self, **changes):
        kwargs = {
            name: getattr(self, name)
            for name in (
                "bandwidth_hz",
                "pathloss_const_linear",
                "pathloss_exponent",
                "reference_distance_m",
                "distance_m",
                "noise_psd_w_per_hz",
                "p_max_w",
            )
        }
        kwargs.update(changes)
        return ChannelConfig(**kwargs)


def rate(p, ch: ChannelConfig):
    """Achievable rate in bits/s at transmit power ``p`` (scalar or array)."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0) or np.any(np.isnan(p_arr)):
        raise DomainError("transmit power must be >= 0")
    r = ch.bandwidth_hz * np.log1p(ch.gain * p_arr / ch.noise_power_w) / LN2
    return float(r) if r.ndim == 0 else r


def xi_lower_bound(ch: ChannelConfig) -> float:
    """Smallest attainable seconds-per-bit, reached at ``p_max``."""
    return 1.0 / rate(ch.p_max_w, ch)


def rate_inverse_to_power(xi, ch: ChannelConfig):
    """Power whose rate is ``1 / xi``.

    Values within ``XI_FEAS_RTOL`` below the peak-power bound are treated as
    the bound and return exactly ``p_max``.
    """
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(~(xi_arr > 0)):
        raise DomainError("xi must be > 0")
    d = xi_lower_bound(ch)
    if np.any(xi_arr < d * (1.0 - XI_FEAS_RTOL)):
        raise InfeasiblePowerError(
            f"xi={np.min(xi_arr)!r} below peak-power bound D={d!r}"
        )
    with np.errstate(over="ignore"):
        p = np.expm1(LN2 / (ch.bandwidth_hz * xi_arr)) * ch.noise_power_w / ch.gain
    p = np.minimum(p, ch.p_max_w)
    return float(p) if p.ndim == 0 else p


def _check_xi(xi):
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(~(xi_arr > 0)):
        raise DomainError("xi must be > 0")
    return xi_arr


def psi(xi, ch: ChannelConfig):
    """Per-bit energy kernel ``xi * (2**(1/(omega xi)) - 1)``; convex, decreasing."""
    xi_arr = _check_xi(xi)
    with np.errstate(over="ignore"):
        out = xi_arr * np.expm1(LN2 / (ch.bandwidth_hz * xi_arr))
    return _as_out(out)


def _neg_dpsi_from_s(s):
    # -psi' = 1 + e^s (s - 1), with s = ln2 / (omega xi)
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    small = s < 1e-2
    ss = s[small]
    # series: sum_{k>=2} (k - 1) s^k / k!
    term = ss * ss / 2.0
    acc = term.copy()
    for k in range(3, 12):
        term = term * ss / k
        acc += (k - 1) * term
    out[small] = acc
    sb = s[~small]
    with np.errstate(over="ignore", invalid="ignore"):
        out[~small] = 1.0 + np.exp(sb) * (sb - 1.0)
    return out


def psi_derivatives(xi, ch: ChannelConfig):
    """Closed-form ``(psi', psi'')``; ``psi' <= 0`` and ``psi'' >= 0``."""
    xi_arr = _check_xi(xi)
    s = LN2 / (ch.bandwidth_hz * xi_arr)
    first = -_neg_dpsi_from_s(s)
    with np.errstate(over="ignore"):
        second = np.exp(s) * s * s / xi_arr
    return _as_out(first), _as_out(second)


def phi(x: float, ch: ChannelConfig, weight_c: float) -> float:
    """Root ``xi`` of ``-psi'(xi) = x / weight_c``; ``UNBOUNDED`` when ``x == 0``.

    Bisection (geometric midpoints) on a bracket grown by doubling from
    ``[D/10, 10 D]``, run until the bracket cannot be split in floating point.
    """
    if not weight_c > 0:
        raise DomainError("weight_c must be > 0")
    if x < 0 or math.isnan(x):
        raise DomainError("dual aggregate must be >= 0")
    if x == 0:
        return UNBOUNDED
    y = x / weight_c
    omega = ch.bandwidth_hz

    def resid(xi):
        return float(_neg_dpsi_from_s(np.array([LN2 / (omega * xi)]))[0]) - y

    d = xi_lower_bound(ch)
    lo, hi = d / 10.0, d * 10.0
    # residual is decreasing in xi
    while resid(lo) < 0:
        lo /= 2.0
    while resid(hi) > 0:
        hi *= 2.0
    while True:
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        r = resid(mid)
        if r == 0:
            return mid
        if r > 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(resid(lo)) <= abs(resid(hi)) else hi


def phi_closed_form(x, ch: ChannelConfig, weight_c: float):
    """Vectorised :func:`phi` via the Lambert W function.

    With ``s = ln2 / (omega xi)`` the stationarity equation reads
    ``(s - 1) e^(s - 1) = (y - 1) / e``, so ``s = 1 + W0((y - 1) / e)``.
    Newton steps on ``s`` polish the result.
    """
    if not weight_c > 0:
        raise DomainError("weight_c must be > 0")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or np.any(np.isnan(x_arr)):
        raise DomainError("dual aggregate must be >= 0")
    y = x_arr / weight_c
    pos = y > 0
    yp = y[pos]
    s = np.real(lambertw((yp - 1.0) / math.e, 0)) + 1.0
    # near the branch point W is inaccurate; sqrt(2y) over-estimates the root
    # there, so Newton on the convex residual descends monotonically
    tiny = yp < 1e-3
    s[tiny] = np.sqrt(2.0 * yp[tiny])
    for _ in range(6):
        g = _neg_dpsi_from_s(s) - yp
        with np.errstate(over="ignore"):
            step = g / (s * np.exp(s))
        s = np.where(np.isfinite(step), s - step, s)
        s = np.maximum(s, 1e-300)
    out = np.full(y.shape, UNBOUNDED)
    out[pos] = LN2 / (ch.bandwidth_hz * s)
    return _as_out(out)
