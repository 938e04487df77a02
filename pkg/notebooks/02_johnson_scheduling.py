# %% [markdown]
# # Offloading order for fixed powers
#
# Upload and execution form a two-machine flow shop. Johnson's rule gives the
# makespan-optimal order; brute force confirms it on small instances.

# %%
import time

import numpy as np

from mecsched import Instance, brute_force_schedule, johnson_schedule, makespan_closed_form, partition

rng = np.random.default_rng(0)
inst = Instance(rng.uniform(1, 2000, 7), rng.uniform(1, 1595, 7))
p = rng.uniform(0.01, 0.1, 7)

part = partition(inst, p)
print("upload shorter than execution:", part.set_f, " the rest:", part.set_g)

sigma = johnson_schedule(inst, p)
print("johnson order", sigma, "makespan", makespan_closed_form(sigma, p, inst))

bf = brute_force_schedule(inst, p)
print("brute force  ", bf.best_sigma, "makespan", bf.best_value, "after", bf.evaluations, "orders")

# %% [markdown]
# Sorting scales to very large task sets.

# %%
n = 200_000
big = Instance(rng.uniform(1, 2000, n), rng.uniform(1, 1595, n))
pb = np.full(n, 0.1)
t0 = time.perf_counter()
order = johnson_schedule(big, pb)
print(f"{n} tasks scheduled in {time.perf_counter() - t0:.3f}s")
print("random order makespan ", makespan_closed_form(rng.permutation(n), pb, big))
print("johnson order makespan", makespan_closed_form(order, pb, big))
