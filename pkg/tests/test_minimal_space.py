import itertools
from fractions import Fraction as F

import pytest

from qfn.arith_networks import ModulusContext
from qfn.cost_analysis import add_ltr_avg_pulses, add_ltr_worst_pulses, oaddn_min_avg_pulses
from qfn.machine_model import BASIC, ENHANCED, count_gates, pulses, validate
from qfn.minimal_space import build_add_ltr, build_expn_min, build_madd_prime, build_oaddn_min
from qfn.simulator import Batch, run_batch


def table(c, **columns):
    keys = list(columns)
    rows = list(itertools.product(*(columns[k] for k in keys)))
    cols = {k: [r[i] for r in rows] for i, k in enumerate(keys)}
    batch, final = run_batch(c, Batch.from_values(c, cols))
    outs = {n: batch.values(q) for n, q in final.items()}
    return [(dict(zip(keys, r)), {n: v[j] for n, v in outs.items()}) for j, r in enumerate(rows)]


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_add_ltr_is_full_sum(K):
    for a in range(2**K):
        for en in (0, 1, 2):
            c = build_add_ltr(a, K, en)
            for i, o in table(c, en=range(2**en), beta=range(2**K)):
                add = a if i["en"] == 2**en - 1 else 0
                s = i["beta"] + add
                assert (o["beta"], o["overflow"]) == (s % 2**K, s >> K)


def test_add_ltr_worst_case_counts():
    K = 6
    assert count_gates(build_add_ltr(2**K - 1, K)) == [K, K, K - 1, K - 2, K - 3, 2, 1]
    assert pulses(count_gates(build_add_ltr(2**K - 1, K))) == add_ltr_worst_pulses(K)


@pytest.mark.parametrize("K", range(1, 7))
def test_add_ltr_average_pulses(K):
    for en in (0, 1, 2, 3):
        avg = F(sum(pulses(count_gates(build_add_ltr(a, K, en))) for a in range(2**K)), 2**K)
        assert avg == add_ltr_avg_pulses(K, en)


@pytest.mark.parametrize("K", range(1, 6))
def test_oaddn_min_average_pulses(K):
    for en in (1, 2):
        add = F(sum(pulses(count_gates(build_add_ltr(a, K, en))) for a in range(2**K)), 2**K)
        madd = F(sum(pulses(count_gates(build_madd_prime(a, b, K, en)))
                     for a in range(2**K) for b in range(2**K)), 4**K)
        assert 2 * add + madd == oaddn_min_avg_pulses(K, en)


def test_madd_prime_selects():
    K = 3
    for a, a2 in itertools.product(range(8), repeat=2):
        c = build_madd_prime(a, a2, K, 1)
        for i, o in table(c, en=(0, 1), overflow=(0, 1), beta=range(8)):
            add = (a2 if i["overflow"] else a) if i["en"] else 0
            assert o["beta"] == (i["beta"] + add) % 8 and o["overflow"] == i["overflow"]


@pytest.mark.parametrize("N", [5, 7, 11, 13, 15, 21, 27])
def test_oaddn_min(N):
    ctx = ModulusContext(N)
    for a in range(N):
        c = build_oaddn_min(a, ctx, 2)
        for i, o in table(c, en=range(4), beta=range(N)):
            want = (i["beta"] + a) % N if i["en"] == 3 else i["beta"]
            assert o["beta"] == want and o["overflow"] == 0


@pytest.mark.parametrize("N, x, L", [(15, 7, 2), (15, 2, 4), (13, 6, 4), (21, 10, 5), (9, 4, 3)])
def test_expn_min(N, x, L):
    c = build_expn_min(x, ModulusContext(N), L)
    for i, o in table(c, alpha=range(2**L)):
        assert o["beta"] == pow(x, i["alpha"], N)
        assert o["gamma"] == 0 and o["overflow"] == 0 and o["alpha"] == i["alpha"]


def test_expn_min_storage_and_gate_set():
    ctx = ModulusContext(15)
    c = build_expn_min(7, ctx, 2)
    assert c.qubit_count == 11
    assert validate(c, ENHANCED)  # needs wide controlled-NOTs
    arity = max(g.arity for g in c.gates())
    assert arity == ctx.K + 2
    assert validate(build_add_ltr(3, 2), BASIC) == []


def test_expn_min_errors():
    with pytest.raises(ValueError):
        build_expn_min(5, ModulusContext(15), 2)
    with pytest.raises(ValueError):
        build_expn_min(7, ModulusContext(15), 0)
    with pytest.raises(ValueError):
        build_oaddn_min(15, ModulusContext(15))
