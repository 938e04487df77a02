# %% [markdown]
# # Channel model and the two-stage timeline
#
# A task is first uploaded over the wireless link, then executed on the edge
# server. This script walks through the rate model, the per-bit energy kernel
# and the completion-time recursion on a tiny instance.

# %%
import numpy as np

from mecsched import (
    ChannelConfig,
    Instance,
    makespan_closed_form,
    psi,
    rate,
    rate_inverse_to_power,
    timeline,
    transmit_energy,
    xi_lower_bound,
)

ch = ChannelConfig()
print("gain", ch.gain, "noise power", ch.noise_power_w)
print("full-power rate  %.4e bit/s" % rate(ch.p_max_w, ch))
print("seconds per bit at full power (D)  %.4e" % xi_lower_bound(ch))

# %% [markdown]
# Working in seconds-per-bit instead of watts makes the energy convex.
# The energy of one bit sent at `xi` seconds per bit is `psi(xi)` times a constant.

# %%
d = xi_lower_bound(ch)
xi = d * np.array([1, 2, 5, 10, 100])
p = rate_inverse_to_power(xi, ch)
for x, pw in zip(xi, p):
    print(f"xi={x:.3e}  p={pw:.3e} W  energy/bit={pw * x:.3e} J  psi={psi(x, ch):.3e}")

# %% [markdown]
# Two tasks sent at 1 Mbit/s to a 1 GHz server.

# %%
inst = Instance([1000.0, 2000.0], [800.0, 400.0])
p1 = np.full(2, rate_inverse_to_power(1e-6, ch))
tl = timeline([0, 1], p1, inst)
print("ready", tl.ready_s, "completion", tl.completion_s)
print("closed form makespan", makespan_closed_form([0, 1], p1, inst))
print("energy", transmit_energy(p1, inst), "J")
