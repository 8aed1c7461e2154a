"""Acceptance battery: one test and one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (or directly with python).
Each value is compared with an oracle computed independently of the module
that produced it where that is practical.
"""

import csv
import itertools
import math
import sys
import time

import numpy as np
import pytest

from eacomm import optics, stats
from eacomm.classical import max_classical_value
from eacomm.protocols import (
    critical_visibility,
    dense_coding_capability,
    protocol_R,
    protocol_S,
    protocol_T,
    r_bases,
    s_noise_threshold_report,
)
from eacomm.scenario import behavior_from_protocol, evaluate, functional_RAC, functional_S
from eacomm.seesaw import SeesawConfig, seesaw_eaq, sweep_partial_entanglement

S_Q = 3 + 3 * math.sqrt(3) / 2
T_Q = 0.5 + 1 / math.sqrt(6)
SEED = 0


@pytest.fixture
def report(capsys):
    """Collects named sub-checks and prints one verdict line for the criterion."""
    checks = []

    def add(name, value, ok):
        checks.append((name, value, bool(ok)))

    def finish(criterion, title):
        ok = all(c[2] for c in checks)
        detail = "; ".join(f"{n}={v:.10g}" + ("" if g else " (FAIL)") for n, v, g in checks)
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion} {title}: {detail}")
        assert ok, detail

    add.finish = finish
    return add


def born_table(proto):
    """p(b|x,y) by explicit loops over Tr(E (U⊗I) ρ (U⊗I)†)."""
    rho = np.outer(proto.shared, proto.shared.conj())
    out = np.zeros((proto.n_x, proto.n_y, proto.n_b))
    for x, y, b in itertools.product(range(proto.n_x), range(proto.n_y), range(proto.n_b)):
        big = np.kron(proto.unitaries[x], np.eye(2))
        out[x, y, b] = np.trace(proto.effects[y, b] @ big @ rho @ big.conj().T).real
    return out


def score_of(fn, table):
    return fn.normalization * float(np.sum(fn.coefficients * table))


def test_criterion_1_classical_bounds(report):
    s, r, t = functional_S(), functional_RAC(2, 4), functional_RAC(3, 2)
    report("S d=2", max_classical_value(s, 2).value, max_classical_value(s, 2).value == 3)
    start = time.perf_counter()
    enc = max_classical_value(s, 4, side="encoders")
    t_enc = time.perf_counter() - start
    start = time.perf_counter()
    dec = max_classical_value(s, 4, side="decoders")
    t_dec = time.perf_counter() - start
    # the two enumerations share no code path beyond the scenario
    report("S d=4 encoders", enc.value, enc.value == 5 and enc.count == 1024)
    report("S d=4 decoders", dec.value, dec.value == 5 and dec.count == 2 ** 24)
    report("S d=4 encoder seconds", t_enc, t_enc < 10)
    report("S d=4 decoder seconds", t_dec, t_dec < 60)
    rr = max_classical_value(r, 4, side="decoders")
    report("R d=4", rr.value, rr.value == 5 / 8)
    tt = max_classical_value(t, 4)
    report("T d=4", tt.value, abs(tt.value - 5 / 6) < 1e-12)
    t5 = max_classical_value(t, 5).value
    report("T d=5", t5, t5 < T_Q)
    for res, fn in ((enc, s), (dec, s), (rr, r), (tt, t)):
        w = res.witness
        raw = sum(fn.coefficients[x, y, w.decoders[y][w.encoder[x]]]
                  for x in range(fn.scenario.n_x) for y in range(fn.scenario.n_y))
        assert fn.normalization * raw == pytest.approx(res.value)
    report.finish(1, "classical bounds by enumeration")


def test_criterion_2_protocol_values(report):
    s, r, t = functional_S(), functional_RAC(2, 4), functional_RAC(3, 2)
    vs, vr, vt = protocol_S().score(s), protocol_R().score(r), protocol_T().score(t)
    report("S", vs, abs(vs - S_Q) <= 1e-9)
    report("R", vr, abs(vr - 0.75) <= 1e-9)
    report("T", vt, abs(vt - T_Q) <= 1e-9)
    # independent Born-rule evaluation
    loops = score_of(s, born_table(protocol_S()))
    report("S by explicit loops", loops, abs(loops - S_Q) <= 1e-9)
    table = born_table(protocol_R())
    wins = (table * r.coefficients).sum(axis=2)
    dev = float(np.abs(wins - 0.75).max())
    report("R max |p_win - 3/4|", dev, dev <= 1e-9)
    report.finish(2, "protocol golden values")


def test_criterion_3_eigen_construction(report):
    bases = r_bases()
    lam_dev = sch_dev = 0.0
    for x1, x2 in itertools.product(range(4), repeat=2):
        m = np.outer(bases[0, x1], bases[0, x1].conj()) + np.outer(bases[1, x2], bases[1, x2].conj())
        w, v = np.linalg.eigh(m)
        lam_dev = max(lam_dev, abs(w[-1] - 1.5))
        sv = np.linalg.svd(v[:, -1].reshape(2, 2), compute_uv=False)
        sch_dev = max(sch_dev, float(np.abs(sv - 1 / math.sqrt(2)).max()))
        # the protocol's sender ket is that eigenvector up to phase
        ket = protocol_R().sender_kets()[4 * x1 + x2]
        assert abs(np.vdot(ket, v[:, -1])) == pytest.approx(1.0, abs=1e-9)
    report("max |lambda - 3/2|", lam_dev, lam_dev <= 1e-9)
    report("max Schmidt deviation", sch_dev, sch_dev <= 1e-9)
    report.finish(3, "eigenvalue construction for R")


def test_criterion_4_seesaw_targets(report):
    s, r, t = functional_S(), functional_RAC(2, 4), functional_RAC(3, 2)

    def run(fn, restriction="none"):
        res = seesaw_eaq(fn, SeesawConfig(restarts=50, seed=SEED, restriction=restriction))
        if restriction != "entbit":
            assert score_of(fn, born_table(res.protocol)) == pytest.approx(res.value, abs=1e-9)
        else:
            assert score_of(fn, res.protocol.behavior_table()) == pytest.approx(res.value, abs=1e-9)
        return res.value

    vs = run(s)
    report("S", vs, vs >= 5.640)
    es = run(s, "entbit")
    report("ent+bit S", es, es >= 3.795)
    et = run(t, "entbit")
    report("ent+bit T", et, et >= 0.787)
    tp = run(t, "product")
    report("product T", tp, abs(tp - T_Q) <= 1e-6)
    vr = run(r)
    report("R", vr, vr <= 0.75 + 1e-7)
    vt = run(t)
    report("T", vt, vt <= T_Q + 1e-7)
    report.finish(4, "see-saw targets (50 restarts, seed 0)")


def test_criterion_5_noise_thresholds(report):
    vr = critical_visibility(protocol_R(), functional_RAC(2, 4), 5 / 8)
    report("R v*", vr, abs(vr - 0.75) <= 1e-9)
    rep = s_noise_threshold_report(5.0)
    at = protocol_S().score(functional_S(), rep["computed"])
    report("S v*", rep["computed"], True)
    report("S score at v*", at, abs(at - 5) <= 1e-9)
    # affine oracle: v S_Q + (1 - v) S_noise = 5, with p(b|x,y) = Tr(E_b)/4 under white noise
    effects = protocol_S().effects
    noise_table = np.broadcast_to(np.trace(effects, axis1=2, axis2=3).real / 4, (5, 6, 2))
    noise = score_of(functional_S(), noise_table)
    report("S v* affine oracle", (5 - noise) / (S_Q - noise),
           abs((5 - noise) / (S_Q - noise) - rep["computed"]) <= 1e-9)
    # reported next to the quoted figure; a deviation, not a failure
    report("quoted v* (flagged)", rep["quoted"], rep["flagged"])
    report.finish(5, "noise thresholds")


def test_criterion_6_partial_entanglement(report):
    grid = np.linspace(0.62, 0.72, 6)
    sweep = sweep_partial_entanglement(functional_RAC(2, 4), grid, SeesawConfig(restarts=4, seed=SEED),
                                       threshold=5 / 8)
    cross = sweep.crossing if sweep.crossing is not None else float("nan")
    report("theta*", cross, abs(cross - 0.672) <= 0.01)
    cap = dense_coding_capability(cross)
    report("capability(theta*)", cap, abs(cap - 0.81) <= 0.01)
    report("capability oracle", (1 + math.sin(cross)) / 2, abs((1 + math.sin(cross)) / 2 - cap) < 1e-12)
    report("monotone", float(sweep.is_monotone()), sweep.is_monotone())
    report.finish(6, "partial-entanglement sweep")


def trace_distance(a, b):
    return math.sqrt(max(0.0, 2 - abs(np.trace(a.conj().T @ b))))


def test_criterion_7_optics(report):
    rows = optics.verify_settings_tables()
    for table, tol in ((1, 1e-6), (2, 1e-6), (4, 1e-2), (5, 1e-2)):
        sel = [r for r in rows if r["table"] == table]
        worst = max(r["distance"] for r in sel)
        report(f"table {table} rows", len(sel), len(sel) == {1: 5, 2: 6, 4: 8, 5: 3}[table])
        report(f"table {table} max distance", worst, worst <= tol)
    # trace-formula oracle for table 4 (its floor of ~1e-8 is far below 1e-2)
    worst4 = max(trace_distance(optics.compile_circuit(optics.table4_circuit(b)), optics.table4_circuit(b).target)
                 for b in itertools.product((0, 1), repeat=3))
    report("table 4 trace-formula oracle", worst4, worst4 <= 1e-2)
    both = [r["alternative"] for r in rows if r["table"] == 5]
    report("table 5 assignments tried", len(both[0]), all(len(a) == 2 for a in both))
    report.finish(7, "optics verification")


def test_criterion_8_ingestion(report):
    s, t = functional_S(), functional_RAC(3, 2)
    vs = evaluate(s, stats.ingest_results_table("table3.csv", s))
    vt = evaluate(t, stats.ingest_results_table("table6.csv", t))
    report("S on table 3", vs, abs(vs - 5.378) <= 0.001)
    report("T on table 6", vt, abs(vt - 0.8988) <= 0.0001)
    # plain-csv oracle: S = Σ c_xy p, T = mean of the 24 reported probabilities
    with stats.fixture_path("table3.csv").open() as fh:
        raw = sum(s.coefficients[int(r["x"]) - 1, int(r["y"]) - 1, 0] * float(r["p"])
                  for r in csv.DictReader(fh))
    with stats.fixture_path("table6.csv").open() as fh:
        probs = [float(r["p"]) for r in csv.DictReader(fh)]
    report("S csv oracle", raw, abs(raw - vs) < 1e-12)
    report("T csv oracle", sum(probs) / 24, len(probs) == 24 and abs(sum(probs) / 24 - vt) < 1e-12)
    sig_s = stats.sigma_violation(5.379, 0.009, 5)
    sig_t = stats.sigma_violation(0.8987, 0.003, 5 / 6)
    report("sigma S", sig_s, abs(sig_s - 42) <= 0.5)
    report("sigma T", sig_t, abs(sig_t - 21.8) <= 0.1)
    report.finish(8, "experimental-data ingestion")


def test_criterion_9_statistics(report):
    fn = functional_S()
    beh = behavior_from_protocol(protocol_S())
    settings = stats.uniform_settings(fn.scenario)
    children = np.random.SeedSequence(SEED).spawn(100)
    est = np.array([stats.estimate_score(stats.simulate_events(beh, settings, 10**5, c), fn, settings)
                    for c in children])
    dev = abs(est.mean() - S_Q)
    allowed = 3 * est.std(ddof=1) / math.sqrt(100)
    report("|mean - 5.598|", dev, dev < allowed)
    report("allowed", allowed, True)
    inp = stats.CertificationInput(0.379, 18 * 30 * 10**6, 30.0, 9.0)
    p = stats.azuma_bound(inp)
    report("Azuma bound", p, p < 1e-100)
    log_oracle = -2 * 18 * 30 * 10**6 * 0.379 ** 2 / 39 ** 2
    log_p = stats.azuma_log_bound(inp)
    report("log Azuma bound", log_p, abs(log_p - log_oracle) < 1e-6)
    one = stats.azuma_bound(stats.CertificationInput(0.0, 100, 30.0, 9.0))
    report("Azuma at mu=0", one, one == 1.0)
    report.finish(9, "statistics")


def test_criterion_10_experiment_replaced(report):
    # the photonic experiment is represented by the bundled tables and the simulator
    for name in ("table3.csv", "table6.csv"):
        report(f"{name} bundled", 1.0, stats.fixture_path(name).is_file())
    report.finish(10, "physical experiment replaced by criteria 8-9")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
