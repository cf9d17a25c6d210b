# %% [markdown]
# # Time response with a delayed wide-area link
#
# We excite the inter-area mode and compare the angle difference between
# the two areas with and without a 200 ms delay on one remote channel.
# The delay is modeled by a second-order Pade block.

# %%
import numpy as np

from sparsewac.cases import two_area_four_machine
from sparsewac.grid_model import build_cost_average, linearize_swing
from sparsewac.loop_analysis import SimScenario, eigvec_initial_state, mode_report, simulate
from sparsewac.sparse_h2 import decompose_gain, gamma_sweep

net, actuated, _ = two_area_four_machine()
plant = linearize_swing(net, actuated)
cost = build_cost_average(plant, 2.0, 2.0, 0.1)
K = gamma_sweep(plant, cost, [0.01]).records[-1].gain.K

# the lowest-frequency open-loop oscillation is the inter-area mode
inter_area = min(mode_report(plant.A).modes, key=lambda m: m.frequency if m.frequency > 0 else np.inf)
print(f"inter-area mode: {inter_area.eigenvalue:.4f} ({inter_area.frequency:.3f} Hz)")
x0 = 0.1 * eigvec_initial_state(plant.A, inter_area.eigenvalue)

# %%
_, K_rem = decompose_gain(K, plant.labels)
links = [(int(i), int(k)) for i, k in zip(*np.nonzero(np.abs(K_rem) > 1e-8))]
print(f"remote links: {links}")

base = SimScenario(horizon=15.0, step=0.005, x0=x0)
runs = {"open loop": (np.zeros_like(K), base), "no delay": (K, base)}
if links:
    i, k = links[0]
    runs["200 ms on first link"] = (K, SimScenario(horizon=15.0, step=0.005, x0=x0,
                                                   delayed=[(i, k, 0.2)]))

# %% [markdown]
# ## Angle difference across the tie line

# %%
for name, (gain, scen) in runs.items():
    tr = simulate(plant, gain, scen)
    d = tr.angle_diff[:, 0]
    print(f"{name}: peak |{tr.angle_diff_names[0]}| after 5 s = {np.max(np.abs(d[tr.t > 5])):.3e}")
    for t in (0, 2.5, 5, 10, 15):
        print(f"  t={t:5.1f}  {d[np.argmin(np.abs(tr.t - t))]:+.5f}")
