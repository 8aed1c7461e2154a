"""
How much entanglement does R need?
==================================

Sweep the shared state cos(θ/2)|00> + sin(θ/2)|11> and find where the best
protocol found stops beating two classical bits.
"""

# %%
import numpy as np

from eacomm import SeesawConfig, functional_RAC, sweep_partial_entanglement
from eacomm.protocols import dense_coding_capability

# %%
grid = np.linspace(0.60, 0.76, 9)
sweep = sweep_partial_entanglement(functional_RAC(2, 4), grid, SeesawConfig(restarts=4), threshold=5 / 8)
for t, v in zip(sweep.thetas, sweep.values):
    print(f"theta {t:.3f}: {v:.5f}{'  *' if v > 5 / 8 else ''}")

# %% At the crossing the same state still dense-codes well
print(f"crossing at theta = {sweep.crossing:.4f}")
print(f"four-message success there: {dense_coding_capability(sweep.crossing):.4f}")

# %% Plot-ready output
print(sweep.to_csv())
