"""Independent reference computations shared by the test modules."""

import math

import numpy as np
from scipy.optimize import minimize_scalar

from mecsched import Instance, objective, rate_inverse_to_power, xi_lower_bound

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def random_instance(rng, n, d_hi=2000.0, c_hi=1595.0):
    return Instance(rng.uniform(1.0, d_hi, n), rng.uniform(1.0, c_hi, n))


def scalar_optimum(inst, eta, span=1e4):
    """Single-task optimum by bounded golden/Brent search on log(seconds-per-bit)."""
    assert inst.n == 1
    ch = inst.channel
    d = xi_lower_bound(ch)

    def f(log_ratio):
        p = rate_inverse_to_power(d * math.exp(log_ratio), ch)
        return objective([0], np.array([float(p)]), eta, inst).weighted

    res = minimize_scalar(f, bounds=(0.0, math.log(span)), method="bounded", options={"xatol": 1e-12})
    return min(float(res.fun), f(0.0))
