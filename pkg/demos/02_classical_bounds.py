"""
Exact classical bounds
======================

With shared randomness the best classical score is reached by a
deterministic strategy, so enumerating one side of the strategy and
optimising the other pointwise is exact.
"""

# %%
from eacomm import BudgetExceededError, functional_RAC, functional_S, max_classical_value
from eacomm.classical import enumeration_costs

# %% Bounds for one bit, two bits and a five-symbol message
for name, fn in (("S", functional_S()), ("R", functional_RAC(2, 4)), ("T", functional_RAC(3, 2))):
    values = {d: max_classical_value(fn, d).value for d in (2, 4, 5)}
    print(name, values)

# %% The witness is an explicit strategy
res = max_classical_value(functional_S(), 4)
print("encoder", res.witness.encoder, "via", res.enumerated_side, "over", res.count, "candidates")
for y, dec in enumerate(res.witness.decoders, start=1):
    print(f"  question {y}: message -> answer index {dec}")

# %% Oversized enumerations are refused up front
print(enumeration_costs(functional_RAC(2, 4), 8))
try:
    max_classical_value(functional_RAC(2, 4), 8)
except BudgetExceededError as exc:
    print("refused:", exc)
