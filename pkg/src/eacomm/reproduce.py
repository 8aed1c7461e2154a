"""Full reproduction battery: the summary table and the golden-value checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import optics, stats
from .classical import max_classical_value
from .protocols import (
    TASK_FUNCTIONALS,
    TASK_PROTOCOLS,
    critical_visibility,
    dense_coding_capability,
    protocol_R,
    protocol_S,
    protocol_T,
    r_eigen_report,
    s_noise_threshold_report,
)
from .scenario import behavior_from_protocol, evaluate, functional_RAC, functional_S
from .seesaw import SeesawConfig, seesaw_eaq, sweep_partial_entanglement

__all__ = ["Check", "summary_table", "acceptance_checks", "SWEEP_GRID", "TASK_TABLES"]

T_QUANTUM = 0.5 + 1 / math.sqrt(6)
S_QUANTUM = 3 + 3 * math.sqrt(3) / 2
# Coarse grid bracketing the R crossing; the crossing is linearly interpolated.
SWEEP_GRID = tuple(np.linspace(0.62, 0.72, 6))
TASK_TABLES = {"S": "table3.csv", "T": "table6.csv"}


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    value: float
    expected: str
    passed: bool
    flagged: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "passed", bool(self.passed))

    def line(self) -> str:
        tag = "FLAG" if self.flagged else ("PASS" if self.passed else "FAIL")
        return f"[{tag}] {self.criterion}. {self.name}: {self.value!r} (expected {self.expected})"

    def to_dict(self) -> dict:
        return asdict(self)


def _within(value, target, tol) -> bool:
    return abs(value - target) <= tol


def summary_table(seed: int = 0, restarts: int = 50) -> list[dict]:
    """Per task: 1-bit, ent+bit, 2-bit and 5-symbol bounds, quantum and measured values."""
    rows = []
    for task, make in TASK_FUNCTIONALS.items():
        fn = make()
        entbit = seesaw_eaq(fn, SeesawConfig(restarts=restarts, seed=seed, restriction="entbit"))
        measured = None
        if task in TASK_TABLES:
            measured = evaluate(fn, stats.ingest_results_table(TASK_TABLES[task], fn))
        rows.append({
            "task": task,
            "oneBit": max_classical_value(fn, 2).value,
            "entBit": entbit.value,
            "twoBit": max_classical_value(fn, 4).value,
            "fiveSymbol": max_classical_value(fn, 5).value,
            "quantum": TASK_PROTOCOLS[task]().score(fn),
            "experiment": measured,
        })
    return rows


def _classical_checks() -> list[Check]:
    s, r, t = functional_S(), functional_RAC(2, 4), functional_RAC(3, 2)
    s2 = max_classical_value(s, 2).value
    s4 = max_classical_value(s, 4).value
    r4 = max_classical_value(r, 4, side="decoders").value
    t4 = max_classical_value(t, 4).value
    t5 = max_classical_value(t, 5).value
    return [
        Check(1, "S bound, one bit", s2, "3", s2 == 3),
        Check(1, "S bound, two bits", s4, "5", s4 == 5),
        Check(1, "R bound, two bits (decoder side)", r4, "5/8", r4 == 5 / 8),
        Check(1, "T bound, two bits", t4, "5/6", _within(t4, 5 / 6, 1e-12)),
        Check(1, "T bound, five symbols below quantum", t5, f"< {T_QUANTUM}", t5 < T_QUANTUM),
    ]


def _protocol_checks() -> list[Check]:
    s, r, t = functional_S(), functional_RAC(2, 4), functional_RAC(3, 2)
    vs, vr, vt = protocol_S().score(s), protocol_R().score(r), protocol_T().score(t)
    table = behavior_from_protocol(protocol_R()).table
    win = np.array([table[x, y, r.coefficients[x, y].argmax()] for x in range(16) for y in range(2)])
    eig = r_eigen_report()
    lam = np.array([row["lambdaMax"] for row in eig])
    schmidt = np.array([row["schmidt"] for row in eig])
    lam_err = float(np.abs(lam - 1.5).max())
    sch_err = float(np.abs(schmidt - 1 / math.sqrt(2)).max())
    win_err = float(np.abs(win - 0.75).max())
    return [
        Check(2, "protocol S score", vs, "3 + 3*sqrt(3)/2 +- 1e-9", _within(vs, S_QUANTUM, 1e-9)),
        Check(2, "protocol R score", vr, "3/4 +- 1e-9", _within(vr, 0.75, 1e-9)),
        Check(2, "protocol R winning probabilities, max deviation", win_err, "<= 1e-9",
              win_err <= 1e-9),
        Check(2, "protocol T score", vt, "1/2 + 1/sqrt(6) +- 1e-9", _within(vt, T_QUANTUM, 1e-9)),
        Check(3, "R top eigenvalues, max deviation from 3/2", lam_err, "<= 1e-9", lam_err <= 1e-9),
        Check(3, "R top eigenvectors, max Schmidt deviation", sch_err, "<= 1e-9", sch_err <= 1e-9),
    ]


def _seesaw_checks(seed: int) -> list[Check]:
    s, r, t = functional_S(), functional_RAC(2, 4), functional_RAC(3, 2)

    def run(fn, restriction="none"):
        return seesaw_eaq(fn, SeesawConfig(restarts=50, seed=seed, restriction=restriction)).value

    vs = run(s)
    es, et = run(s, "entbit"), run(t, "entbit")
    tp = run(t, "product")
    vr, vt = run(r), run(t)
    return [
        Check(4, "see-saw S", vs, ">= 5.640", vs >= 5.640),
        Check(4, "see-saw ent+bit S", es, ">= 3.795", es >= 3.795),
        Check(4, "see-saw ent+bit T", et, ">= 0.787", et >= 0.787),
        Check(4, "see-saw product-restricted T", tp, "1/2 + 1/sqrt(6) +- 1e-6",
              _within(tp, T_QUANTUM, 1e-6)),
        Check(4, "see-saw R below 3/4", vr, "<= 3/4 + 1e-7", vr <= 0.75 + 1e-7),
        Check(4, "see-saw T below quantum value", vt, "<= 1/2 + 1/sqrt(6) + 1e-7",
              vt <= T_QUANTUM + 1e-7),
    ]


def _noise_checks() -> list[Check]:
    vr = critical_visibility(protocol_R(), functional_RAC(2, 4), 5 / 8)
    rep = s_noise_threshold_report(5.0)
    at = protocol_S().score(functional_S(), rep["computed"])
    return [
        Check(5, "critical visibility R", vr, "3/4 +- 1e-9", _within(vr, 0.75, 1e-9)),
        Check(5, "S score at computed critical visibility", at, "5 +- 1e-9", _within(at, 5, 1e-9)),
        Check(5, "S critical visibility vs quoted 16/(12+3*sqrt(3))", rep["computed"],
              f"quoted {float(rep['quoted'])!r}", True, flagged=rep["flagged"]),
    ]


def _sweep_checks(seed: int) -> list[Check]:
    sweep = sweep_partial_entanglement(functional_RAC(2, 4), SWEEP_GRID,
                                       SeesawConfig(restarts=4, seed=seed), threshold=5 / 8)
    cross = sweep.crossing
    if cross is None:
        return [Check(6, "R sweep crossing of 5/8", float("nan"), "0.672 +- 0.01", False)]
    cap = dense_coding_capability(cross)
    return [
        Check(6, "R sweep crossing of 5/8", cross, "0.672 +- 0.01", _within(cross, 0.672, 0.01)),
        Check(6, "dense coding capability at crossing", cap, "0.81 +- 0.01", _within(cap, 0.81, 0.01)),
    ]


def _optics_checks() -> list[Check]:
    rows = optics.verify_settings_tables()
    out = []
    for table, tol in ((1, 1e-6), (2, 1e-6), (4, 1e-2), (5, 1e-2)):
        dist = max(r["distance"] for r in rows if r["table"] == table)
        out.append(Check(7, f"settings table {table}, max distance", dist, f"<= {tol:g}", dist <= tol))
    return out


def _ingest_checks() -> list[Check]:
    s, t = functional_S(), functional_RAC(3, 2)
    vs = evaluate(s, stats.ingest_results_table("table3.csv", s))
    vt = evaluate(t, stats.ingest_results_table("table6.csv", t))
    sig_s = stats.sigma_violation(5.379, stats.REPORTED_AGGREGATE_ERROR["S"], 5)
    sig_t = stats.sigma_violation(0.8987, stats.REPORTED_AGGREGATE_ERROR["T"], 5 / 6)
    return [
        Check(8, "S on measured table", vs, "5.378 +- 0.001", _within(vs, 5.378, 0.001)),
        Check(8, "T on measured table", vt, "0.8988 +- 0.0001", _within(vt, 0.8988, 0.0001)),
        Check(8, "S sigma violation", sig_s, "42 +- 0.5", _within(sig_s, 42, 0.5)),
        Check(8, "T sigma violation", sig_t, "21.8 +- 0.1", _within(sig_t, 21.8, 0.1)),
    ]


def unbiasedness(seed: int = 0, streams: int = 100, n: int = 10**5) -> dict:
    """Mean of independent simulated S estimates against the exact score."""
    fn = functional_S()
    beh = behavior_from_protocol(protocol_S())
    settings = stats.uniform_settings(fn.scenario)
    children = np.random.SeedSequence(seed).spawn(streams)
    est = np.array([stats.estimate_score(stats.simulate_events(beh, settings, n, ch), fn, settings)
                    for ch in children])
    mean, std = float(est.mean()), float(est.std(ddof=1))
    return {"mean": mean, "std": std, "deviation": abs(mean - S_QUANTUM),
            "allowed": 3 * std / math.sqrt(streams)}


def _stats_checks(seed: int) -> list[Check]:
    ub = unbiasedness(seed)
    tiny = stats.azuma_bound(stats.CertificationInput(0.379, stats.S_ROUNDS, 30.0, 9.0))
    one = stats.azuma_bound(stats.CertificationInput(0.0, stats.S_ROUNDS, 30.0, 9.0))
    return [
        Check(9, "estimator mean deviation over 100 streams", ub["deviation"],
              f"< {ub['allowed']:.3g}", ub["deviation"] < ub["allowed"]),
        Check(9, "Azuma bound at measured parameters", tiny, "< 1e-100", tiny < 1e-100),
        Check(9, "Azuma bound at zero violation", one, "1", one == 1.0),
    ]


def acceptance_checks(seed: int = 0) -> list[Check]:
    """Every golden value with its tolerance; ``flagged`` rows are reported deviations."""
    return (_classical_checks() + _protocol_checks() + _seesaw_checks(seed) + _noise_checks()
            + _sweep_checks(seed) + _optics_checks() + _ingest_checks() + _stats_checks(seed))
