
import numpy as np
import pytest

from qfn.arith_networks import NetworkConfig, build_expn, ModulusContext
from qfn.machine_model import circuit_pulses, count_gates, validate, BASIC
from qfn.shor_demo import (
    STYLES, UNITS_15, build_expn15, build_mod2k, build_period_demo, convergents, extract_order,
    factor_from_order, lookup_table_15, run_factoring_experiment, y_distribution,
    y_distribution_permutation,
)
from qfn.simulator import Batch, build_qft, ft_reference_prob, prepare_uniform, run_batch
from qfn.gate_ir import compose


def outputs(c):
    batch, final = run_batch(c, Batch.from_values(c, {"alpha": list(range(4))}))
    return batch.values(final["alpha"]), batch.values(final["beta"])


@pytest.mark.parametrize("style", STYLES)
@pytest.mark.parametrize("x", UNITS_15)
def test_lookup_circuits_compute_powers(x, style):
    c = build_expn15(x, style)
    assert c.qubit_count == 6
    assert validate(c, BASIC) == []
    alpha, beta = outputs(c)
    table = lookup_table_15(x)
    assert sorted(alpha) == [0, 1, 2, 3]
    # cheaper styles may leave the input relabelled; each branch's output
    # must still be the power of the input value it is left holding
    assert beta == [table[a] for a in alpha]
    if style == "standard":
        assert alpha == [0, 1, 2, 3]


def test_lookup_pulse_counts_for_seven():
    got = [circuit_pulses(build_expn15(7, s)) for s in STYLES]
    assert got == [34, 33, 30]
    assert 2 + got[2] == 32
    assert circuit_pulses(compose(prepare_uniform(2), build_qft(2))) == 2 + 6
    assert 2 + got[2] + 6 == 38


def test_lookup_pulse_counts_are_bounded():
    for x in UNITS_15:
        for s in STYLES:
            assert circuit_pulses(build_expn15(x, s)) <= 34
    assert circuit_pulses(build_expn15(1)) <= 2
    assert build_expn15(1).qubit_count == 6


@pytest.mark.parametrize("L, K", [(2, 1), (3, 1), (3, 2), (4, 2), (5, 3), (6, 6)])
def test_mod2k_transform_support(L, K):
    demo = build_period_demo(build_mod2k(L, K), L)
    p = y_distribution(demo, L)
    want = np.zeros(2**L)
    want[:: 2 ** (L - K)] = 2.0**-K
    assert np.abs(p - want).max() < 1e-12
    assert np.abs(p - ft_reference_prob(L, 2**K).probabilities).max() < 1e-12


def test_mod2k_smallest_pulse_count():
    demo = build_period_demo(build_mod2k(2, 1), 2)
    assert circuit_pulses(demo) == 13
    assert count_gates(build_mod2k(2, 1)) == [0, 1]


def test_period_demo_matches_reference_for_seven():
    p = y_distribution(build_period_demo(build_expn15(7), 2), 2)
    assert np.allclose(p, 0.25)
    p = y_distribution(build_period_demo(build_expn15(7), 4), 4)
    assert np.allclose(p, ft_reference_prob(4, 4).probabilities)


@pytest.mark.parametrize("x", [2, 4, 7, 11])
def test_permutation_path_matches_dense(x):
    f = build_expn15(x)
    for L in (2, 3, 4):
        dense = y_distribution(build_period_demo(f, L), L)
        assert np.abs(dense - y_distribution_permutation(f, L)).max() < 1e-12
    g = build_expn(x, ModulusContext(15), 3, NetworkConfig("E2K1"))
    assert np.allclose(y_distribution_permutation(g, 3), y_distribution_permutation(f, 3))


def test_convergents():
    assert list(convergents(3, 4)) == [(0, 1), (1, 1), (3, 4)]
    assert list(convergents(192, 256))[-1] == (3, 4)


@pytest.mark.parametrize("y, L, bound, r", [(3, 2, 15, 4), (2, 2, 15, 2), (1, 2, 15, 4), (192, 8, None, 4),
                                            (85, 8, None, 3), (43, 8, 21, 6)])
def test_extract_order(y, L, bound, r):
    o = extract_order(y, L, bound)
    assert o.success and o.candidate_r == r


def test_extract_order_failures():
    assert not extract_order(0, 4).success
    with pytest.raises(ValueError):
        extract_order(16, 4)


@pytest.mark.parametrize("x, r, N, want", [
    (7, 4, 15, (3, 5)), (2, 4, 15, (3, 5)), (4, 2, 15, (3, 5)), (11, 2, 15, (3, 5)),
    (14, 2, 15, None), (2, 6, 21, (3, 7)), (7, 2, 15, None), (2, 3, 7, None),
])
def test_factor_from_order(x, r, N, want):
    assert factor_from_order(x, r, N).factors == want


def test_factor_from_order_reasons():
    assert factor_from_order(14, 2, 15).reason == "square root is -1"
    assert factor_from_order(7, 3, 15).reason == "odd order"
    assert factor_from_order(7, 2, 15).reason.startswith("not the order")


def test_pipeline_seven():
    rep = run_factoring_experiment(15, 7, 2, seed=1, trials=4000)
    assert np.allclose(rep.y_probabilities, 0.25)
    # y = 1 or 3 gives r = 4 and the factors; y = 2 gives r = 2 which fails x^r = 1
    assert abs(rep.success_rate - 0.5) < 0.03
    assert all(t.factors == (3, 5) for t in rep.trials if t.y in (1, 3))
    assert sum(rep.y_counts()) == 4000


def test_pipeline_is_seeded():
    a = run_factoring_experiment(15, 7, 4, seed=5, trials=50)
    b = run_factoring_experiment(15, 7, 4, seed=5, trials=50)
    assert [t.y for t in a.trials] == [t.y for t in b.trials]


def test_pipeline_small_orders():
    rep = run_factoring_experiment(15, 4, 2, seed=0, trials=200)
    assert {t.y for t in rep.trials} <= {0, 2}
    assert rep.success_rate > 0.3
    rep = run_factoring_experiment(15, 1, 2, seed=0, trials=20)
    assert {t.y for t in rep.trials} == {0} and rep.success_rate == 0


def test_pipeline_through_modular_networks():
    rep = run_factoring_experiment(21, 2, 9, cfg=NetworkConfig("E2K1"), seed=3, trials=300)
    assert rep.circuit == "expn-E2K1"
    assert 0.1 < rep.success_rate < 0.9
    assert all(t.factors == (3, 7) for t in rep.trials if t.factors)
    with pytest.raises(ValueError):
        run_factoring_experiment(15, 5, 2)
