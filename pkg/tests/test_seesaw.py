import math

import numpy as np
import pytest

from eacomm.protocols import EAQProtocol, protocol_R
from eacomm.scenario import functional_RAC, functional_S
from eacomm.seesaw import (
    EntBitStrategy,
    SeesawConfig,
    seesaw_eaq,
    seesaw_ent_bit,
    sweep_partial_entanglement,
)

T_Q = 0.5 + 1 / math.sqrt(6)


def test_config_validation():
    with pytest.raises(ValueError):
        SeesawConfig(restarts=0)
    with pytest.raises(ValueError):
        SeesawConfig(restriction="magic")
    with pytest.raises(ValueError):
        SeesawConfig(restriction="theta")
    with pytest.raises(ValueError):
        SeesawConfig(tol=0)


def test_result_is_a_valid_protocol_with_matching_score():
    fn = functional_RAC(2, 2)
    res = seesaw_eaq(fn, SeesawConfig(restarts=3, seed=1))
    assert isinstance(res.protocol, EAQProtocol)
    assert res.protocol.score(fn) == pytest.approx(res.value, abs=1e-9)
    assert res.value == max(res.per_restart_values)
    # dense coding carries both bits, so the optimum is 1
    assert res.value == pytest.approx(1.0, abs=1e-7)


def test_deterministic_per_seed():
    fn = functional_RAC(3, 2)
    a = seesaw_eaq(fn, SeesawConfig(restarts=3, seed=7))
    b = seesaw_eaq(fn, SeesawConfig(restarts=3, seed=7))
    assert a.per_restart_values == b.per_restart_values


def test_t_unrestricted_and_product():
    fn = functional_RAC(3, 2)
    free = seesaw_eaq(fn, SeesawConfig(restarts=10, seed=0))
    assert free.value <= T_Q + 1e-7
    prod = seesaw_eaq(fn, SeesawConfig(restarts=10, seed=0, restriction="product"))
    assert prod.value == pytest.approx(T_Q, abs=1e-6)
    assert set(prod.protocol.measurement_kinds()) == {"product-observable"}


def test_product_needs_binary_outcomes():
    with pytest.raises(ValueError):
        seesaw_eaq(functional_RAC(2, 4), SeesawConfig(restriction="product"))


def test_r_does_not_exceed_three_quarters():
    res = seesaw_eaq(functional_RAC(2, 4), SeesawConfig(restarts=10, seed=0))
    assert res.value <= 0.75 + 1e-7


def test_warm_start_from_optimum_stays_there():
    fn = functional_RAC(2, 4)
    res = seesaw_eaq(fn, SeesawConfig(restarts=1, seed=0), warm_start=protocol_R())
    assert res.per_restart_values[-1] == pytest.approx(0.75, abs=1e-9)


def test_s_reaches_beyond_reference_protocol():
    res = seesaw_eaq(functional_S(), SeesawConfig(restarts=20, seed=0))
    assert res.value >= 5.640


def test_ent_bit():
    # one bit plus entanglement decodes a single bit perfectly
    assert seesaw_ent_bit(functional_RAC(1, 2), SeesawConfig(restarts=2)).value == pytest.approx(1.0)
    res = seesaw_ent_bit(functional_RAC(3, 2), SeesawConfig(restarts=10, seed=0))
    assert res.value >= 0.787
    assert isinstance(res.protocol, EntBitStrategy)
    table = res.protocol.behavior_table()
    assert np.allclose(table.sum(axis=2), 1)
    fn = functional_RAC(3, 2)
    assert fn.normalization * np.sum(fn.coefficients * table) == pytest.approx(res.value)


def test_entbit_restriction_dispatch():
    fn = functional_RAC(1, 2)
    res = seesaw_eaq(fn, SeesawConfig(restarts=1, restriction="entbit"))
    assert res.config.restriction == "entbit"


def test_sweep_small_grid():
    fn = functional_RAC(2, 2)
    res = sweep_partial_entanglement(fn, [0.3, 0.8, 1.2], SeesawConfig(restarts=2, seed=0),
                                     threshold=0.75, anchor_restarts=5)
    assert res.thetas == (0.3, 0.8, 1.2)
    assert res.is_monotone()
    assert res.to_csv().startswith("theta,value\n")
    with pytest.raises(ValueError):
        sweep_partial_entanglement(fn, [2.0], SeesawConfig(restarts=1))
    with pytest.raises(ValueError):
        sweep_partial_entanglement(fn, [], SeesawConfig(restarts=1))
