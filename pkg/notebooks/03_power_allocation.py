# %% [markdown]
# # Transmit power for a fixed order
#
# With the order fixed, the weighted delay plus energy objective is convex in
# seconds-per-bit. Two independent solvers are compared: an exact dual method
# (the default) and a smoothed primal Newton method. A nested scalar search and
# a grid act as references on tiny instances.

# %%
import numpy as np

from mecsched import (
    Instance,
    build_p3,
    check_monotonicity,
    grid_power_search,
    nested_power_search,
    objective,
    solve_p3,
)

rng = np.random.default_rng(3)
inst = Instance(rng.uniform(1, 2000, 8), rng.uniform(1, 1595, 8))
sigma = rng.permutation(8)

for eta in (0.0, 1.0, 10.0, 100.0):
    prob = build_p3(sigma, inst, eta)
    exact = solve_p3(prob)
    smooth = solve_p3(prob, method="smoothed")
    print(
        f"eta={eta:6.1f}  dual {exact.objective_value:.9e}  smoothed {smooth.objective_value:.9e}"
        f"  gap {exact.kkt_residual:.1e}  powers non-increasing: {check_monotonicity(exact)[0]}"
    )

# %% [markdown]
# Powers along the order come out non-increasing: tasks sent early delay
# everything behind them, so they are worth more energy.

# %%
sol = solve_p3(build_p3(sigma, inst, 100.0))
print(np.round(sol.powers, 5))

# %% [markdown]
# Tiny instances against the references.

# %%
small = Instance([800.0, 1500.0], [1200.0, 300.0])
for eta in (1.0, 100.0):
    sol = solve_p3(build_p3([0, 1], small, eta))
    v = objective([0, 1], sol.powers_by_task, eta, small).weighted
    print(
        eta,
        v,
        nested_power_search([0, 1], small, eta).best_value,
        grid_power_search([0, 1], small, eta, 400, refinements=4, span=1e4).best_value,
    )
