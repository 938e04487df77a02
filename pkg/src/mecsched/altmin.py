"""Alternating minimization over offloading order and transmit powers.

Each round reschedules with Johnson's rule for the current powers, then
re-solves the power subproblem for the new order. Both updates are exact, so
the weighted objective never increases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .delay import Instance, ObjectiveValue, check_permutation, objective
from .flowshop import johnson_schedule
from .powercrt import build_p3, solve_p3


@dataclass(frozen=True)
class AltMinConfig:
    iter_max: int = 50
    epsilon: float = 1e-7  # absolute, seconds
    p3_tol: float = 1e-7
    p3_method: str = "dual"

    def __post_init__(self):
        if self.iter_max < 1:
            raise ValueError("iter_max must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")


@dataclass
class SolveReport:
    final_sigma: np.ndarray
    final_p: np.ndarray  # by task index
    objective_trace: list[ObjectiveValue] = field(default_factory=list)
    iterations_used: int = 0
    converged: bool = True

    @property
    def objective(self) -> ObjectiveValue:
        return min(self.objective_trace, key=lambda v: v.weighted)


def alternate(inst: Instance, eta: float, cfg: AltMinConfig | None = None, *, sigma0=None, p0=None) -> SolveReport:
    """Run the alternating scheme from ``(sigma0, p0)``.

    Defaults start from the identity order at full power. ``objective_trace``
    holds the starting value followed by one entry per round; the best
    iterate is returned.
    """
    cfg = cfg or AltMinConfig()
    if eta < 0:
        raise ValueError("eta must be >= 0")
    ch = inst.channel
    sigma = np.arange(inst.n) if sigma0 is None else check_permutation(sigma0, inst.n)
    p = np.full(inst.n, ch.p_max_w) if p0 is None else np.asarray(p0, dtype=float).copy()

    val = objective(sigma, p, eta, inst)
    trace = [val]
    best = (val.weighted, sigma, p)
    inner_ok = True
    rounds = 0
    while rounds < cfg.iter_max:
        rounds += 1
        val_old = val.weighted
        sigma = johnson_schedule(inst, p)
        prob = build_p3(sigma, inst, eta)
        # warm start: the solver keeps this point unless it finds better
        xi0 = np.maximum(inst.tx_times(p)[sigma] / inst.input_bits[sigma], prob.xi_lower)
        sol = solve_p3(prob, cfg.p3_tol, method=cfg.p3_method, xi0=xi0)
        inner_ok &= sol.converged
        candidate = sol.powers_by_task
        if objective(sigma, candidate, eta, inst).weighted <= objective(sigma, p, eta, inst).weighted:
            p = candidate
        val = objective(sigma, p, eta, inst)
        trace.append(val)
        if val.weighted < best[0]:
            best = (val.weighted, sigma, p)
        if val_old - val.weighted < cfg.epsilon:
            break
    return SolveReport(
        final_sigma=np.asarray(best[1]),
        final_p=np.asarray(best[2]),
        objective_trace=trace,
        iterations_used=rounds,
        converged=inner_ok,
    )
