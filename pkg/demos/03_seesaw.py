"""
See-saw search for good protocols
=================================

Alternating optimisation: measurements for fixed unitaries, then unitaries
for fixed measurements. Each step never lowers the score, so every restart
climbs to a local optimum; the best of many restarts is a lower bound.
"""

# %%
from eacomm import SeesawConfig, functional_RAC, functional_S, seesaw_eaq

# %% Unrestricted search beats the reference protocol for S
res = seesaw_eaq(functional_S(), SeesawConfig(restarts=20, seed=0))
print(f"S: best {res.value:.6f} after {res.iterations} iterations")
print("spread over restarts:", sorted(round(v, 4) for v in res.per_restart_values)[-5:])

# %% Restricting the receiver to product observables
res = seesaw_eaq(functional_RAC(3, 2), SeesawConfig(restarts=10, restriction="product"))
print(f"T with product measurements: {res.value:.9f}")

# %% One classical bit plus shared entanglement
for name, fn in (("S", functional_S()), ("T", functional_RAC(3, 2))):
    res = seesaw_eaq(fn, SeesawConfig(restarts=20, restriction="entbit"))
    print(f"{name} with one bit and an entangled pair: {res.value:.6f}")
