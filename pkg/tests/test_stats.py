import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eacomm import stats
from eacomm.protocols import protocol_S
from eacomm.scenario import Behavior, behavior_from_protocol, evaluate, functional_RAC, functional_S


@pytest.fixture(scope="module")
def s_setup():
    fn = functional_S()
    return fn, behavior_from_protocol(protocol_S()), stats.uniform_settings(fn.scenario)


def test_frequencies_within_three_sigma(s_setup):
    fn, beh, settings = s_setup
    n = 10**6
    counts = stats.count_events(stats.simulate_events(beh, settings, n, seed=0, chunk=300_000),
                                fn.scenario)
    assert counts.sum() == n
    per_setting = counts.sum(axis=2)
    freq = counts[:, :, 0] / per_setting
    p = beh.table[:, :, 0]
    sigma = np.sqrt(p * (1 - p) / per_setting)
    assert np.all(np.abs(freq - p) <= 3 * sigma + 1e-12)


def test_deterministic_behavior_gives_decoder_output():
    scen = functional_RAC(1, 2).scenario
    table = np.array([[[0.0, 1.0]], [[1.0, 0.0]]])
    events = next(stats.simulate_events(Behavior(scen, table), stats.uniform_settings(scen), 500, 3))
    assert np.all(events.b == 1 - events.x)
    assert len(events) == 500
    assert all(r.b == 1 - r.x for r in events.records())


def test_simulation_is_seeded(s_setup):
    fn, beh, settings = s_setup
    a = stats.count_events(stats.simulate_events(beh, settings, 5000, seed=9), fn.scenario)
    b = stats.count_events(stats.simulate_events(beh, settings, 5000, seed=9), fn.scenario)
    assert np.array_equal(a, b)


def test_simulation_rejects_bad_input(s_setup):
    fn, beh, settings = s_setup
    with pytest.raises(ValueError):
        next(stats.simulate_events(beh, settings, 0))
    with pytest.raises(ValueError):
        next(stats.simulate_events(beh, settings[:2], 10))
    partial = stats.ingest_results_table("table3.csv", fn)
    with pytest.raises(ValueError):
        next(stats.simulate_events(partial, settings, 10))


def test_estimator_close_to_score(s_setup):
    fn, beh, settings = s_setup
    est = stats.estimate_score(stats.simulate_events(beh, settings, 10**7, seed=1), fn, settings)
    assert abs(est - 3 - 1.5 * math.sqrt(3)) < 0.01


def test_estimator_on_exact_frequencies_equals_evaluate(s_setup):
    fn, beh, settings = s_setup
    # counts proportional to p(x,y) p(b|x,y): the estimator becomes exact
    counts = np.rint(beh.table * 10**9).astype(np.int64)
    assert stats.estimate_score(counts, fn, settings) == pytest.approx(evaluate(fn, beh), rel=1e-8)


def test_single_zero_coefficient_event_contributes_nothing(s_setup):
    fn, _, settings = s_setup
    ev = [stats.EventRecord(0, 0, 1)]
    assert stats.estimate_score(ev, fn, settings) == 0.0


def test_zero_probability_setting_is_a_data_error(s_setup):
    fn, _, _ = s_setup
    dist = np.zeros((5, 6))
    dist[1, 1] = 1.0
    with pytest.raises(ValueError, match="zero probability"):
        stats.estimate_score([stats.EventRecord(0, 0, 0)], fn, dist)
    with pytest.raises(ValueError, match="empty"):
        stats.estimate_score([], fn, dist)


def test_variance_scales_as_one_over_n(s_setup):
    fn, beh, settings = s_setup
    seeds = np.random.SeedSequence(5).spawn(60)

    def spread(n, children):
        return np.var([stats.estimate_score(stats.simulate_events(beh, settings, n, c), fn, settings)
                       for c in children], ddof=1)

    ratio = spread(10**3, seeds[:30]) / spread(10**5, seeds[30:])
    assert 100 / 1.7 < ratio < 100 * 1.7


def test_azuma_examples():
    inp = stats.CertificationInput(0.379, stats.S_ROUNDS, 30.0, 9.0)
    assert stats.azuma_bound(inp) < 1e-300
    assert stats.azuma_log_bound(inp) == pytest.approx(-2 * stats.S_ROUNDS * 0.379 ** 2 / 39 ** 2)
    assert stats.azuma_bound(stats.CertificationInput(0.0, 10, 30.0, 9.0)) == 1.0


@given(st.floats(1e-3, 0.5), st.integers(1, 10**4))
def test_azuma_properties(mu, n):
    a = stats.CertificationInput(mu, n, 30.0, 9.0)
    b = stats.CertificationInput(mu, 2 * n, 30.0, 9.0)
    pa, pb = stats.azuma_bound(a), stats.azuma_bound(b)
    assert 0 < pa <= 1 and 0 < pb <= 1
    assert stats.azuma_log_bound(b) == pytest.approx(2 * stats.azuma_log_bound(a))
    bigger = stats.CertificationInput(mu * 1.1, n, 30.0, 9.0)
    assert stats.azuma_log_bound(bigger) < stats.azuma_log_bound(a)


def test_certification_input_validation():
    with pytest.raises(ValueError):
        stats.CertificationInput(0.1, 0, 30.0, 9.0)
    with pytest.raises(ValueError):
        stats.CertificationInput(-0.1, 1, 30.0, 9.0)
    with pytest.raises(ValueError):
        stats.CertificationInput(0.1, 1, 30.0, 9.0, settings=np.full((2, 2), 0.5))


def test_sigma_violation():
    assert stats.sigma_violation(5.379, 0.009, 5) == pytest.approx(42.11, abs=0.01)
    assert stats.sigma_violation(0.8987, 0.003, 5 / 6) == pytest.approx(21.79, abs=0.01)
    assert stats.sigma_violation(5, 0.1, 5) == 0
    with pytest.raises(ValueError):
        stats.sigma_violation(5, 0, 5)


def test_fixture_rows():
    s = stats.ingest_results_table("table3.csv", functional_S())
    assert s.table[0, 0, 0] == 0.9725 and s.errors[0, 0, 0] == 0.0003
    assert s.is_partial
    t = stats.ingest_results_table("table6.csv", functional_RAC(3, 2))
    # U_010, E_1: x = 2 in 0-based order, answer bit x_1 = 0
    assert t.table[2, 0, 0] == 0.9814
    assert np.nansum(t.errors) == pytest.approx(0.24)


def test_fixture_aggregates():
    assert evaluate(functional_S(), stats.ingest_results_table("table3.csv", functional_S())) == \
        pytest.approx(5.378, abs=1e-3)
    t = functional_RAC(3, 2)
    assert evaluate(t, stats.ingest_results_table("table6.csv", t)) == pytest.approx(0.8988, abs=1e-4)


def test_ingest_parse_errors():
    with pytest.raises(ValueError, match="empty"):
        stats.ingest_results_table(io.StringIO(""), functional_S())
    with pytest.raises(ValueError, match="line 2"):
        stats.ingest_results_table(io.StringIO("x,y,b,p\n1,1,1,2\n"), functional_S())


def test_certify_report_keys():
    fn = functional_S()
    beh = stats.ingest_results_table("table3.csv", fn)
    rep = stats.certify(beh, fn, 0.009, stats.S_ROUNDS)
    for key in ("score", "bound", "mu", "sigmaViolation", "pValueUpperBound", "N"):
        assert key in rep
    assert rep["bound"] == 5 and rep["cMax"] == 30 and rep["tBound"] == 9
    assert stats.propagated_error(fn, beh) == pytest.approx(0.0087, abs=1e-4)
