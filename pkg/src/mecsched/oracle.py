"""Brute-force references for small instances.

Deliberately naive: full permutation enumeration and dense grids, evaluated
through the plain completion-time recursion. Nothing here shares code with
the schedulers or the power solver beyond the instance model.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import rate, rate_inverse_to_power, xi_lower_bound
from .delay import Instance, check_permutation, objective

MAX_SCHEDULE_N = 10
MAX_GRID_N = 3
MAX_JOINT_SOLVER_N = 6
_CHUNK = 50_000


class OracleSizeError(ValueError):
    """Instance too large for exhaustive search."""


@dataclass(frozen=True)
class OracleResult:
    best_value: float
    best_sigma: np.ndarray
    best_p: np.ndarray  # by task index
    evaluations: int


def _batch_makespan(tx, ex):
    """Completion-time recursion over rows of stage-time matrices."""
    ready = np.cumsum(tx, axis=1)
    comp = ready[:, 0] + ex[:, 0]
    for j in range(1, tx.shape[1]):
        comp = np.maximum(ready[:, j], comp) + ex[:, j]
    return comp


def brute_force_schedule(inst: Instance, p) -> OracleResult:
    """Makespan-minimal order by enumerating all ``N!`` permutations.

    Permutations are visited in lexicographic order and ties keep the first,
    so the lexicographically smallest optimal order is returned.
    """
    n = inst.n
    if n > MAX_SCHEDULE_N:
        raise OracleSizeError(f"exhaustive schedule search is capped at N={MAX_SCHEDULE_N}, got N={n}")
    p = np.asarray(p, dtype=float)
    tx_task = inst.tx_times(p)
    ex_task = inst.exec_s
    best_val, best_sigma, count = math.inf, None, 0
    perms = itertools.permutations(range(n))
    while True:
        chunk = np.array(list(itertools.islice(perms, _CHUNK)), dtype=np.int64)
        if chunk.size == 0:
            break
        vals = _batch_makespan(tx_task[chunk], ex_task[chunk])
        k = int(np.argmin(vals))
        count += len(chunk)
        if vals[k] < best_val:
            best_val, best_sigma = float(vals[k]), chunk[k].copy()
    return OracleResult(best_val, best_sigma, p.copy(), count)


def grid_power_search(
    sigma,
    inst: Instance,
    eta: float,
    grid_points_per_dim: int = 200,
    *,
    refinements: int = 0,
    span: float = 50.0,
    zoom_cells: int = 8,
) -> OracleResult:
    """Grid minimum of the weighted objective over powers for a fixed order.

    The grid is log-spaced in seconds-per-bit over ``[D, span * D]`` per task
    and mapped to powers. Each refinement re-grids the box spanned by the
    ``zoom_cells`` neighbours of the incumbent on a log scale; a window wider
    than one cell matters because the minimum of a max-type objective sits on
    a ridge and the coarse incumbent can be several cells off it.
    """
    n = inst.n
    if n > MAX_GRID_N:
        raise OracleSizeError(f"grid power search is capped at N={MAX_GRID_N}, got N={n}")
    if grid_points_per_dim < 100:
        raise ValueError("grid_points_per_dim must be >= 100")
    sigma = check_permutation(sigma, n)
    ch = inst.channel
    d_bound = xi_lower_bound(ch)
    lows = np.full(n, d_bound)
    highs = np.full(n, span * d_bound)
    best_val, best_xi, count = math.inf, None, 0
    shape = (grid_points_per_dim,) * n
    for _ in range(refinements + 1):
        # axis j of the mesh is the task at position j; conversions are per axis
        axes, tx_ax, en_ax = [], [], []
        for j, task in enumerate(sigma):
            xi = np.geomspace(lows[task], highs[task], grid_points_per_dim)
            powers = rate_inverse_to_power(xi, ch)
            # rates recomputed from powers, as the delay model sees them
            tx = inst.input_bits[task] / rate(powers, ch)
            view = [1] * n
            view[j] = grid_points_per_dim
            axes.append(xi)
            tx_ax.append(tx.reshape(view))
            en_ax.append((powers * tx).reshape(view))
        ready = np.zeros((1,) * n)
        comp = np.full((1,) * n, -math.inf)
        energy = np.zeros((1,) * n)
        for j, task in enumerate(sigma):
            ready = ready + tx_ax[j]
            comp = np.maximum(ready, comp) + inst.exec_s[task]
            energy = energy + en_ax[j]
        vals = comp + eta * energy
        k = int(np.argmin(vals))
        count += vals.size
        idx = np.unravel_index(k, shape)
        if vals.flat[k] < best_val:
            best_val = float(vals.flat[k])
            best_xi = np.empty(n)
            for j, task in enumerate(sigma):
                best_xi[task] = axes[j][idx[j]]
        for i in range(n):
            ratio = (highs[i] / lows[i]) ** (zoom_cells / (grid_points_per_dim - 1))
            lows[i] = max(d_bound, best_xi[i] / ratio)
            highs[i] = best_xi[i] * ratio
    best_p = np.asarray(rate_inverse_to_power(best_xi, ch), dtype=float)
    # re-evaluate through the reference objective
    best_val = objective(sigma, best_p, eta, inst).weighted
    return OracleResult(best_val, sigma, best_p, count)


_INV_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo, hi, xatol):
    """Golden-section minimizer of a unimodal ``f`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - _INV_GOLD * (b - a)
    d = a + _INV_GOLD * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xatol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLD * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLD * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def nested_power_search(
    sigma,
    inst: Instance,
    eta: float,
    *,
    span: float = 1e4,
    xatol: float = 1e-6,
) -> OracleResult:
    """Optimal powers for a fixed order by nested one-dimensional searches.

    The objective is convex in seconds-per-bit, and minimizing a convex
    function over one coordinate leaves a convex function of the rest, so a
    bounded scalar search per coordinate (outermost first) reaches the joint
    minimum. Searches run on ``log(xi / D)`` over ``[0, log span]``; each
    level also tries the full-power endpoint when the search ends next to it,
    since golden-section search never evaluates the endpoint itself. Pure-Python evaluation, capped at N = 3.
    """
    n = inst.n
    if n > MAX_GRID_N:
        raise OracleSizeError(f"nested power search is capped at N={MAX_GRID_N}, got N={n}")
    sigma = check_permutation(sigma, n)
    ch = inst.channel
    d_bound = xi_lower_bound(ch)
    bits = [float(inst.input_bits[t]) for t in sigma]
    ex = [float(inst.exec_s[t]) for t in sigma]
    count = 0

    # scalar math kept local: power needed to send one bit per xi seconds
    snr_unit = ch.noise_power_w / ch.gain
    w = ch.bandwidth_hz

    def stage(j, u):
        xi = d_bound * math.exp(u)
        p = min(snr_unit * math.expm1(math.log(2.0) / (w * xi)), ch.p_max_w)
        tx = bits[j] * xi
        return tx, p * tx

    def best_from(j, ready, comp, energy):
        """Minimum over coordinates ``j..n-1`` given the state after ``j - 1``."""
        nonlocal count

        def extend(u):
            tx, e = stage(j, u)
            r = ready + tx
            return r, max(r, comp) + ex[j], energy + e

        if j == n - 1:

            def f(u):
                nonlocal count
                count += 1
                _, c, e = extend(u)
                return c + eta * e

            def rest(u):
                return f(u), [u]

        else:

            def rest(u):
                val, tail = best_from(j + 1, *extend(u))
                return val, [u] + tail

            def f(u):
                return rest(u)[0]

        u = _golden_min(f, 0.0, math.log(span), xatol)
        best = rest(u)
        if u < 1e3 * xatol:
            best = min(best, rest(0.0), key=lambda c: c[0])
        return best

    _, us = best_from(0, 0.0, -math.inf, 0.0)
    p_pos = np.array([float(rate_inverse_to_power(d_bound * math.exp(u), ch)) for u in us])
    best_p = np.empty(n)
    best_p[sigma] = p_pos
    return OracleResult(objective(sigma, best_p, eta, inst).weighted, sigma, best_p, count)


def joint_brute_force(
    inst: Instance,
    eta: float,
    grid_points_per_dim: int = 200,
    *,
    inner: str | None = None,
    refinements: int = 0,
) -> OracleResult:
    """Minimum over all orders of the best power allocation for that order.

    ``inner="grid"`` (default for N <= 3) uses :func:`grid_power_search`;
    ``inner="solver"`` (allowed up to N = 6) uses the convex power solver.
    """
    n = inst.n
    if inner is None:
        inner = "grid" if n <= MAX_GRID_N else "solver"
    if inner == "grid" and n > MAX_GRID_N:
        raise OracleSizeError(f"joint grid search is capped at N={MAX_GRID_N}, got N={n}")
    if inner == "solver" and n > MAX_JOINT_SOLVER_N:
        raise OracleSizeError(f"joint search is capped at N={MAX_JOINT_SOLVER_N}, got N={n}")
    if inner not in ("grid", "solver"):
        raise ValueError(f"unknown inner oracle {inner!r}")
    if inner == "solver":
        from .powercrt import build_p3, solve_p3

    best = None
    count = 0
    for perm in itertools.permutations(range(n)):
        sigma = np.array(perm)
        if inner == "grid":
            res = grid_power_search(sigma, inst, eta, grid_points_per_dim, refinements=refinements)
            value, p, count = res.best_value, res.best_p, count + res.evaluations
        else:
            sol = solve_p3(build_p3(sigma, inst, eta))
            p = sol.powers_by_task
            value = objective(sigma, p, eta, inst).weighted
            count += 1
        if best is None or value < best.best_value:
            best = OracleResult(value, sigma, p, 0)
    return OracleResult(best.best_value, best.best_sigma, best.best_p, count)
