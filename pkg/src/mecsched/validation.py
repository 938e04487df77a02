"""Quick invariant checks on seeded random instances, used by ``mecsched validate``."""

from __future__ import annotations

import numpy as np

from .altmin import alternate
from .core import ChannelConfig, psi_derivatives, rate, rate_inverse_to_power, xi_lower_bound
from .delay import Instance, makespan_closed_form, timeline, transmit_energy
from .flowshop import johnson_schedule
from .oracle import brute_force_schedule
from .powercrt import build_p3, check_monotonicity, objective_in_xi, solve_p3


def _random_instance(rng, n):
    return Instance(rng.uniform(1.0, 2000.0, n), rng.uniform(1.0, 1595.0, n))


def _powers(rng, n, ch):
    return ch.p_max_w * rng.uniform(0.01, 1.0, n)


def check_rate_round_trip(rng, trials=100):
    ch = ChannelConfig()
    p = ch.p_max_w * rng.uniform(1e-6, 1.0, trials)
    back = rate_inverse_to_power(1.0 / rate(p, ch), ch)
    err = float(np.max(np.abs(back - p) / p))
    return err <= 1e-9, f"max relative error {err:.2e}"


def check_psi_curvature(rng, trials=100):
    ch = ChannelConfig()
    d = xi_lower_bound(ch)
    xi = d * 10 ** rng.uniform(0, 4, trials)
    h = 1e-5 * xi
    _, second = psi_derivatives(xi, ch)
    first_p, _ = psi_derivatives(xi + h, ch)
    first_m, _ = psi_derivatives(xi - h, ch)
    fd = (first_p - first_m) / (2 * h)
    err = float(np.max(np.abs(fd - second) / second))
    return bool(np.all(second > 0)) and err <= 1e-5, f"max relative error {err:.2e}"


def check_makespan_identity(rng, trials=300):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 13))
        inst = _random_instance(rng, n)
        p = _powers(rng, n, inst.channel)
        sigma = rng.permutation(n)
        a = timeline(sigma, p, inst).makespan_s
        b = makespan_closed_form(sigma, p, inst)
        worst = max(worst, abs(a - b) / a)
    return worst <= 1e-12, f"max relative gap {worst:.2e}"


def check_johnson_optimality(rng, trials=40):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 8))
        inst = _random_instance(rng, n)
        p = _powers(rng, n, inst.channel)
        jm = makespan_closed_form(johnson_schedule(inst, p), p, inst)
        bf = brute_force_schedule(inst, p).best_value
        worst = max(worst, (jm - bf) / bf)
    return worst <= 1e-12, f"max relative excess {worst:.2e}"


def check_power_solver(rng, trials=40):
    bad = 0
    for _ in range(trials):
        n = int(rng.integers(1, 8))
        inst = _random_instance(rng, n)
        eta = float(10 ** rng.uniform(-1, 3))
        prob = build_p3(rng.permutation(n), inst, eta)
        exact = solve_p3(prob)
        other = solve_p3(prob, method="smoothed")
        ok, _ = check_monotonicity(exact)
        agree = other.objective_value >= exact.objective_value * (1 - 1e-9)
        agree &= other.objective_value <= exact.objective_value * (1 + 1e-6)
        consistent = abs(objective_in_xi(prob, exact.xi_star) - exact.objective_value) <= 1e-9 * exact.objective_value
        bad += not (ok and agree and consistent)
    return bad == 0, f"{bad} of {trials} solves failed"


def check_altmin_descent(rng, trials=10):
    bad = 0
    for _ in range(trials):
        inst = _random_instance(rng, 20)
        w = [v.weighted for v in alternate(inst, 10.0).objective_trace]
        bad += any(b > a + 1e-9 for a, b in zip(w, w[1:]))
    return bad == 0, f"{bad} of {trials} traces increased"


def check_energy_order_free(rng, trials=50):
    bad = 0
    for _ in range(trials):
        n = int(rng.integers(1, 12))
        inst = _random_instance(rng, n)
        p = _powers(rng, n, inst.channel)
        perm = rng.permutation(n)
        shuffled = Instance(inst.input_bits[perm], inst.cycles_per_bit[perm])
        e1 = transmit_energy(p, inst)
        e2 = transmit_energy(p[perm], shuffled)
        bad += abs(e1 - e2) > 1e-12 * e1
    return bad == 0, f"{bad} mismatches"


CHECKS = (
    ("rate round trip", check_rate_round_trip),
    ("psi curvature", check_psi_curvature),
    ("makespan identity", check_makespan_identity),
    ("johnson optimality", check_johnson_optimality),
    ("power solver", check_power_solver),
    ("alternating descent", check_altmin_descent),
    ("energy order independence", check_energy_order_free),
)


def run_all(seed: int = 0):
    """Run every check; returns a list of ``(name, ok, detail)``."""
    results = []
    for name, fn in CHECKS:
        ok, detail = fn(np.random.default_rng([seed, len(results)]))
        results.append((name, bool(ok), detail))
    return results
