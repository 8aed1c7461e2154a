"""
From counts to confidence
=========================

Simulate runs of the S experiment, estimate the score from the events and
bound the probability that a two-bit model produced the observed excess.
"""

# %%
import numpy as np

from eacomm import functional_RAC, functional_S, protocol_S
from eacomm import stats
from eacomm.scenario import behavior_from_protocol, evaluate

fn = functional_S()
beh = behavior_from_protocol(protocol_S())
settings = stats.uniform_settings(fn.scenario)

# %% Estimates tighten like 1/sqrt(N)
for n in (10**3, 10**5, 10**7):
    est = stats.estimate_score(stats.simulate_events(beh, settings, n, seed=1), fn, settings)
    print(f"N = {n:>8}: estimate {est:.4f}")

# %% The measured tables
for task, name, fnc in (("S", "table3.csv", fn), ("T", "table6.csv", functional_RAC(3, 2))):
    table = stats.ingest_results_table(name, fnc)
    err = stats.REPORTED_AGGREGATE_ERROR[task]
    rep = stats.certify(table, fnc, err, stats.default_rounds(fnc))
    print(f"{task}: score {evaluate(fnc, table):.4f}, {rep['sigmaViolation']:.1f} sigma above {rep['bound']:.4f}")

# %% The tail bound underflows double precision, so its logarithm is the useful number
inp = stats.CertificationInput(0.379, stats.S_ROUNDS, 30.0, 9.0)
print(f"log p-value bound: {stats.azuma_log_bound(inp):.1f}  (p < {stats.azuma_bound(inp):.1e})")
print("log10:", stats.azuma_log_bound(inp) / np.log(10))
