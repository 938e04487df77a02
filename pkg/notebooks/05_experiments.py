# %% [markdown]
# # Experiment data
#
# Reduced-size runs of the three experiments. The CLI produces the full-size
# CSVs (`mecsched experiment fig2 --seed 7 --out results`).

# %%
import numpy as np

from mecsched.harness import linear_fit_r2, run_fig2, run_fig3, run_fig4

fig2 = run_fig2((5, 15, 25, 35), replicates=50, seed=7)
for series in sorted({r.series for r in fig2.rows}):
    n, gain = fig2.series("relative_gain", series)
    x, m = fig2.series("makespan_optimal_s", series)
    print(series, "gain %:", np.round(100 * gain, 2), " linear fit R^2 %.4f" % linear_fit_r2(x, m))

# %%
etas = (0.01, 1.0, 100.0, 1e4)
fig3 = run_fig3(etas, replicates=20, seed=7)
for eta in etas:
    prop = fig3.row("fig3", eta, "objective_proposed_s").mean
    bench = fig3.row("fig3", eta, "objective_benchmark_s").mean
    print(f"eta={eta:g}: proposed {prop:.4e}  benchmark {bench:.4e}")

# %%
fig4 = run_fig4((0.01, 1.0, 100.0), (1e9,), replicates=50, seed=7)
for eta in (0.01, 1.0, 100.0):
    row = lambda m: fig4.row("f_ser=1e+09", eta, m).mean  # noqa: E731
    print(f"eta={eta:g}: delay {row('delay_s'):.4e} s  energy {row('energy_j'):.3e} J  saving {100 * row('energy_saving'):.1f}%")
