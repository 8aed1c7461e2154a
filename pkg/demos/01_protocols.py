"""
Reference protocols and their scores
====================================

A sender holds half of a maximally entangled pair, applies a unitary chosen
by her input and forwards her qubit. The receiver measures both qubits.
"""

# %%
import numpy as np

from eacomm import functional_RAC, functional_S, protocol_R, protocol_S, protocol_T
from eacomm.protocols import critical_visibility, dense_coding_capability, s_noise_threshold_report

# %% Scores with a perfect shared pair
for name, proto, fn in (("S", protocol_S(), functional_S()),
                        ("R", protocol_R(), functional_RAC(2, 4)),
                        ("T", protocol_T(), functional_RAC(3, 2))):
    print(f"{name}: score {proto.score(fn):.6f}, receiver measurements {set(proto.measurement_kinds())}")

# %% White noise on the pair lowers every score linearly
fn = functional_RAC(2, 4)
for v in (1.0, 0.9, 0.75, 0.5):
    print(f"R at visibility {v:.2f}: {protocol_R().score(fn, v):.4f}")
print("R drops to the two-bit value 5/8 at v =", critical_visibility(protocol_R(), fn, 5 / 8))

rep = s_noise_threshold_report()
print(f"S drops to 5 at v = {rep['computed']:.4f} (quoted elsewhere: {rep['quoted']:.4f})")

# %% Dense coding with a partially entangled pair
for theta in np.linspace(0, np.pi / 2, 5):
    print(f"theta {theta:.3f}: four-message success {dense_coding_capability(theta):.4f}")
