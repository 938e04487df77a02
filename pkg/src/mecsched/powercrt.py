"""Optimal transmit powers for a fixed offloading order.

Working in ``xi = 1 / R(p)`` (seconds per bit) makes the problem convex:

    minimize   max_i [ sum_{j<=i} d_j xi_j + sum_{k>=i} e_k ]  +  C * sum_j d_j psi(xi_j)
    subject to D <= xi_j <= xi_upper

with positions ``j`` in schedule order, ``e_k`` the server execution times,
``C = eta * N0 * omega / G`` and ``D`` the peak-power bound.

Two solvers are provided.

``"dual"`` (default) solves the Lagrange dual exactly. Writing the max as a
convex combination with weights ``alpha`` on the simplex and
``A_j = sum_{i>=j} alpha_i`` (so ``A_0 = 1 >= A_1 >= ... >= A_{N-1} >= 0``),
the dual is separable concave in ``A`` under a chain order, and the
minimizing ``xi_j`` depends on ``A_j`` alone: ``xi_j = clip(phi(A_j))``.
Pool-adjacent-violators therefore finds the optimal ``A``; each pooled
block has a closed-form value (its transmission must exactly cover the
preceding executions). Powers come out non-increasing along the schedule by
construction, and the duality gap is reported as ``kkt_residual``.

``"smoothed"`` is an independent primal route: log-sum-exp smoothing of the
max with temperature continuation, each stage minimized by projected Newton
with Armijo backtracking.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ChannelConfig,
    psi,
    psi_derivatives,
    phi_closed_form,
    rate_inverse_to_power,
    xi_lower_bound,
)
from .delay import Instance, check_permutation, makespan_from_stages

XI_UPPER_FACTOR = 1e4
MAX_UPPER_EXPANSIONS = 2
BOX_RTOL = 1e-12
SMOOTHING_SCHEDULE = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9)


@dataclass(frozen=True)
class P3Problem:
    sigma: np.ndarray
    weight_c: float
    xi_lower: float
    xi_upper: float
    tx_bits: np.ndarray
    exec_seconds: np.ndarray
    channel: ChannelConfig
    eta: float

    @property
    def n(self) -> int:
        return self.tx_bits.size

    def with_upper(self, xi_upper: float) -> "P3Problem":
        return P3Problem(
            self.sigma,
            self.weight_c,
            self.xi_lower,
            xi_upper,
            self.tx_bits,
            self.exec_seconds,
            self.channel,
            self.eta,
        )


@dataclass
class P3Solution:
    xi_star: np.ndarray
    t_tilde_star: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    kkt_residual: float
    powers: np.ndarray  # schedule order
    sigma: np.ndarray
    p_max: float
    method: str
    objective_trace: list = field(default_factory=list)
    dual_aggregate: np.ndarray | None = None

    @property
    def powers_by_task(self) -> np.ndarray:
        p = np.empty_like(self.powers)
        p[self.sigma] = self.powers
        return p


def build_p3(sigma, inst: Instance, eta: float, xi_upper_factor: float = XI_UPPER_FACTOR) -> P3Problem:
    if eta < 0:
        raise ValueError("eta must be >= 0")
    sigma = check_permutation(sigma, inst.n)
    ch = inst.channel
    d = xi_lower_bound(ch)
    return P3Problem(
        sigma=sigma,
        weight_c=eta * ch.noise_power_w / ch.gain,
        xi_lower=d,
        xi_upper=xi_upper_factor * d,
        tx_bits=inst.input_bits[sigma].copy(),
        exec_seconds=inst.exec_s[sigma].copy(),
        channel=ch,
        eta=float(eta),
    )


def _check_box(prob: P3Problem, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (prob.n,):
        raise ValueError(f"xi has shape {xi.shape}, expected ({prob.n},)")
    lo = prob.xi_lower * (1.0 - BOX_RTOL)
    hi = prob.xi_upper * (1.0 + BOX_RTOL)
    if np.any(~(xi >= lo)) or np.any(~(xi <= hi)):
        raise ValueError("xi outside [xi_lower, xi_upper]")
    return xi


def _energy_term(prob: P3Problem, xi) -> float:
    if prob.weight_c == 0:
        return 0.0
    return prob.weight_c * float(np.dot(prob.tx_bits, psi(xi, prob.channel)))


def objective_in_xi(prob: P3Problem, xi) -> float:
    """Makespan (closed form) plus the weighted energy kernel, in seconds."""
    xi = _check_box(prob, xi)
    return makespan_from_stages(prob.tx_bits * xi, prob.exec_seconds) + _energy_term(prob, xi)


def completion_bounds(prob: P3Problem, xi) -> np.ndarray:
    """Tight auxiliary completion times rebuilt by the forward recursion."""
    ready = np.cumsum(prob.tx_bits * np.asarray(xi, dtype=float))
    out = np.empty_like(ready)
    prev = -math.inf
    for j in range(ready.size):
        prev = max(prev, ready[j]) + prob.exec_seconds[j]
        out[j] = prev
    return out


def _xi_of_aggregate(prob: P3Problem, a) -> np.ndarray:
    xi = phi_closed_form(np.asarray(a, dtype=float), prob.channel, prob.weight_c)
    return np.clip(np.atleast_1d(xi), prob.xi_lower, prob.xi_upper)


def _block_value(prob: P3Problem, num: float, den: float) -> float:
    # maximizer over [0, 1] of the pooled dual term; xi(A) must equal num / den
    target = num / den
    if target <= prob.xi_lower:
        return 1.0
    if target >= prob.xi_upper:
        return 0.0
    neg_slope = -psi_derivatives(target, prob.channel)[0]
    return min(1.0, prob.weight_c * neg_slope)


def dual_aggregate(prob: P3Problem) -> np.ndarray:
    """Optimal ``A_j`` (suffix sums of the makespan multipliers), ``A_0 = 1``."""
    n = prob.n
    agg = np.ones(n)
    if n == 1:
        return agg
    d = prob.tx_bits
    e = prob.exec_seconds
    # blocks: [start, stop, num, den, value]
    blocks: list[list] = []
    for j in range(1, n):
        blk = [j, j + 1, float(e[j - 1]), float(d[j]), 0.0]
        blk[4] = _block_value(prob, blk[2], blk[3])
        blocks.append(blk)
        while len(blocks) > 1 and blocks[-2][4] < blocks[-1][4]:
            top = blocks.pop()
            prev = blocks[-1]
            prev[1] = top[1]
            prev[2] += top[2]
            prev[3] += top[3]
            prev[4] = _block_value(prob, prev[2], prev[3])
    for start, stop, _, _, value in blocks:
        agg[start:stop] = value
    return agg


def dual_value(prob: P3Problem, agg) -> float:
    """Lagrange dual function at aggregate ``agg`` (a lower bound on the optimum)."""
    agg = np.asarray(agg, dtype=float)
    xi = _xi_of_aggregate(prob, agg)
    d = prob.tx_bits
    e = prob.exec_seconds
    inner = d * agg * xi
    if prob.weight_c > 0:
        inner = inner + prob.weight_c * d * psi(xi, prob.channel)
    return float(np.sum(e) + np.sum(inner) - np.dot(agg[1:], e[:-1]))


def _solve_dual(prob: P3Problem):
    if prob.weight_c == 0:
        xi = np.full(prob.n, prob.xi_lower)
        return xi, np.ones(prob.n), 0.0
    agg = dual_aggregate(prob)
    xi = _xi_of_aggregate(prob, agg)
    # box-clip after phi can leave xi a few ulps under D; snap
    xi = np.maximum(xi, prob.xi_lower)
    primal = objective_in_xi(prob, xi)
    gap = primal - dual_value(prob, agg)
    return xi, agg, max(gap, 0.0) / max(abs(primal), 1e-300)


def _smoothed_model(prob: P3Problem, xi, mu, lower_tri):
    """Value, gradient and Hessian of the log-sum-exp smoothed objective."""
    d, e = prob.tx_bits, prob.exec_seconds
    pieces = np.cumsum(d * xi) + np.cumsum(e[::-1])[::-1]
    top = pieces.max()
    w = np.exp((pieces - top) / mu)
    total = w.sum()
    val = top + mu * math.log(total)
    w /= total
    grad = d * np.cumsum(w[::-1])[::-1]
    m = lower_tri * d  # m[i, j] = d_j for j <= i
    mw = m.T @ w
    hess = (m.T * w) @ m - np.outer(mw, mw)
    hess /= mu
    if prob.weight_c > 0:
        first, second = psi_derivatives(xi, prob.channel)
        val += prob.weight_c * float(np.dot(d, psi(xi, prob.channel)))
        grad = grad + prob.weight_c * d * first
        hess[np.diag_indices_from(hess)] += prob.weight_c * d * second
    return val, grad, hess


def _solve_smoothed(prob: P3Problem, xi0, tol: float, max_iter: int):
    scale = prob.xi_lower
    zlo, zhi = 1.0, prob.xi_upper / scale
    z = np.clip(np.asarray(xi0, dtype=float) / scale, zlo, zhi)
    lower_tri = np.tril(np.ones((prob.n, prob.n)))
    best_val = objective_in_xi(prob, z * scale)
    best_z = z.copy()
    trace = [best_val]
    m0 = makespan_from_stages(prob.tx_bits * z * scale, prob.exec_seconds)
    iters = 0
    converged = True

    def model(zz, mu):
        v, g, h = _smoothed_model(prob, zz * scale, mu, lower_tri)
        return v, g * scale, h * (scale * scale)

    for mu_rel in SMOOTHING_SCHEDULE:
        mu = mu_rel * m0
        stage_done = False
        while iters < max_iter and not stage_done:
            iters += 1
            fz, g, h = model(z, mu)
            # variables held at a bound by the gradient stay fixed
            eps = 1e-12 * zhi
            held = ((z <= zlo + eps) & (g > 0)) | ((z >= zhi - eps) & (g < 0))
            free = ~held
            step = np.zeros_like(z)
            if free.any():
                hf = h[np.ix_(free, free)]
                ridge = 1e-14 * max(float(np.max(np.abs(np.diag(hf)))), 1e-300)
                try:
                    step[free] = -np.linalg.solve(hf + ridge * np.eye(hf.shape[0]), g[free])
                except np.linalg.LinAlgError:
                    step[free] = -g[free]
            if not (g @ step < 0):
                step = -g
            alpha = 1.0
            while True:
                z_new = np.clip(z + alpha * step, zlo, zhi)
                f_new = model(z_new, mu)[0]
                if f_new <= fz + 1e-4 * (g @ (z_new - z)) + 1e-15 * abs(fz):
                    break
                alpha *= 0.5
                if alpha < 1e-12:
                    z_new, f_new = z, fz
                    break
            moved = np.max(np.abs(z_new - z))
            z = z_new
            val = objective_in_xi(prob, z * scale)
            if val < best_val:
                best_val, best_z = val, z.copy()
            trace.append(best_val)
            if moved <= 1e-12 * np.max(z) or fz - f_new <= 1e-3 * tol * mu:
                stage_done = True
        if not stage_done:
            converged = False
            break
    return best_z * scale, iters, converged, trace


def solve_p3(
    prob: P3Problem,
    tol: float = 1e-7,
    *,
    method: str = "dual",
    xi0=None,
    max_iter: int = 2_000,
) -> P3Solution:
    """Minimize the power subproblem for ``prob.sigma``.

    ``xi0`` (defaults to full power) is kept if nothing better is found, so
    the returned objective never exceeds the starting one.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if method not in ("dual", "smoothed"):
        raise ValueError(f"unknown method {method!r}")
    start = np.full(prob.n, prob.xi_lower) if xi0 is None else np.asarray(xi0, dtype=float)

    for expansion in range(MAX_UPPER_EXPANSIONS + 1):
        agg = None
        if method == "dual":
            xi, agg, resid = _solve_dual(prob)
            iters, converged = 1, resid <= tol
            trace = []
        else:
            xi, iters, converged, trace = _solve_smoothed(prob, start, tol, max_iter)
            resid = math.nan
        at_upper = prob.weight_c > 0 and np.any(xi >= prob.xi_upper * (1.0 - 1e-9))
        if not at_upper or expansion == MAX_UPPER_EXPANSIONS:
            break
        warnings.warn(
            f"upper xi bound active at optimum; widening to {10 * prob.xi_upper:.3e} s/bit",
            RuntimeWarning,
            stacklevel=2,
        )
        prob = prob.with_upper(10.0 * prob.xi_upper)

    value = objective_in_xi(prob, xi)
    start_in_box = np.all(start >= prob.xi_lower * (1 - BOX_RTOL)) and np.all(
        start <= prob.xi_upper * (1 + BOX_RTOL)
    )
    if start_in_box:
        start_value = objective_in_xi(prob, start)
        if start_value < value:
            xi, value = start.copy(), start_value
        if method == "dual":
            trace = [start_value, value]
    elif method == "dual":
        trace = [value]

    powers = np.asarray(rate_inverse_to_power(xi, prob.channel), dtype=float).reshape(-1)
    return P3Solution(
        xi_star=xi,
        t_tilde_star=completion_bounds(prob, xi),
        objective_value=value,
        iterations=iters,
        converged=bool(converged),
        kkt_residual=float(resid),
        powers=powers,
        sigma=prob.sigma.copy(),
        p_max=prob.channel.p_max_w,
        method=method,
        objective_trace=trace,
        dual_aggregate=agg,
    )


def check_monotonicity(solution: P3Solution, rtol: float = 1e-6):
    """Whether powers are non-increasing along the schedule.

    Returns ``(ok, max_violation)`` with the violation in watts; ``ok`` means
    no later position exceeds an earlier one by more than ``rtol * p_max``.
    """
    p = solution.powers
    if p.size < 2:
        return True, 0.0
    running_min = np.minimum.accumulate(p)
    worst = max(float(np.max(p[1:] - running_min[:-1])), 0.0)
    return worst <= rtol * solution.p_max, worst
