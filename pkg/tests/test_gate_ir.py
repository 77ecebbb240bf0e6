import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from qfn.gate_ir import (
    Circuit, CircuitBuilder, CircuitError, Contract, Control, CPhase, Gate, Relabel, Rotation,
    cknot, compose, empty, inverse, neg, parse, serialize,
)
from qfn.simulator import basis_state, run_basis


def test_gate_rejects_repeated_qubit():
    with pytest.raises(CircuitError):
        cknot(1, 1)
    with pytest.raises(CircuitError):
        cknot(0, 1, neg(1))


def test_cknot_shorthand():
    g = cknot(3, 0, neg(2))
    assert g.controls == (Control(0), Control(2, True))
    assert g.arity == 2


def test_cphase_angle_must_be_dyadic():
    CPhase(0, 1, Fraction(1, 8))
    with pytest.raises(CircuitError):
        CPhase(0, 1, Fraction(1, 3))


def test_circuit_validation():
    with pytest.raises(CircuitError):
        Circuit(2, (("a", (0,)), ("b", (0,))))
    with pytest.raises(CircuitError):
        Circuit(2, (), (cknot(2, 0),))
    with pytest.raises(CircuitError):
        Circuit(3, (("a", (0,)), ("b", (1, 2))), (Relabel("a", "b"),))
    with pytest.raises(CircuitError):
        Circuit(1, (("a", (0,)),), (), (Contract("pre", "zz", "zero"),))


def test_relabel_tracks_final_layout():
    b = CircuitBuilder()
    b.alloc("a", 2)
    b.alloc("b", 2)
    b.x(b.q("a", 0))
    b.relabel("a", "b")
    b.x(b.q("a", 0))
    c = b.circuit()
    assert c.final_layout() == {"a": (2, 3), "b": (0, 1)}
    s = run_basis(c, basis_state(c))
    assert s["b"] == 1 and s["a"] == 1


def test_document_example():
    doc = """
    # full adder, a = 0
    qubits 3
    reg b 0
    reg c 1
    reg cout 2
    require cout zero
    cknot 0 1 :2
    cknot 0 :1
    """
    c = parse(doc)
    assert [op.arity for op in c.ops] == [2, 1]
    assert c.contracts == (Contract("pre", "cout", "zero"),)
    assert parse(serialize(c)) == c


@pytest.mark.parametrize("doc, where", [
    ("cknot 0 :1\n", "line 1"),
    ("qubits 2\ncknot 0 :5\n", "line 2"),
    ("qubits 2\nfoo 1\n", "line 2"),
    ("qubits 2\ncknot 0 1\n", "line 2"),
    ("qubits 2\ncphase 0 1 1/3\n", "line 2"),
    ("qubits 2\nrot spin 0\n", "line 2"),
    ("qubits 2\nreg a 0\nrequire a odd\n", "line 3"),
    ("qubits x\n", "line 1"),
])
def test_parse_errors_name_the_line(doc, where):
    with pytest.raises(CircuitError, match=where):
        parse(doc)


def random_circuit(rng: random.Random, phases: bool = True) -> Circuit:
    n = rng.randint(2, 7)
    cut = rng.randint(1, n - 1)
    regs = (("r0", tuple(range(cut))), ("r1", tuple(range(cut, n))))
    ops = []
    for _ in range(rng.randint(0, 25)):
        kind = rng.random()
        if kind < 0.6 or not phases:
            qs = rng.sample(range(n), rng.randint(1, min(n, 5)))
            ops.append(Gate(tuple(Control(q, rng.random() < 0.3) for q in qs[1:]), qs[0]))
        elif kind < 0.75:
            ops.append(Rotation(rng.randrange(n), rng.choice(("hat", "tilde", "tilde-dag"))))
        elif kind < 0.9:
            q1, q2 = rng.sample(range(n), 2)
            ops.append(CPhase(q1, q2, Fraction(rng.choice((-1, 1)), 2 ** rng.randint(0, 6))))
        elif cut * 2 == n:
            ops.append(Relabel("r0", "r1"))
    contracts = (Contract("pre", "r0", "zero"), Contract("post", "r1", "lt", rng.randint(1, 9)))
    return Circuit(n, regs, tuple(ops), contracts[: rng.randint(0, 2)])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=300, deadline=None, derandomize=True)
def test_serialize_round_trip(seed):
    c = random_circuit(random.Random(seed))
    assert parse(serialize(c)) == c


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None, derandomize=True)
def test_inverse_undoes_gate_circuits(seed):
    rng = random.Random(seed)
    c = random_circuit(rng, phases=False)
    both = compose(c, inverse(c))
    x = rng.getrandbits(c.qubit_count)
    assert run_basis(both, x).bits == x


def test_inverse_of_inverse():
    rng = random.Random(7)
    for _ in range(50):
        c = random_circuit(rng)
        assert inverse(inverse(c)).ops == c.ops


def test_compose_checks_layout():
    a = Circuit(2, (("x", (0,)), ("y", (1,))), (Relabel("x", "y"),))
    b = Circuit(2, (("x", (0,)), ("y", (1,))), ())
    with pytest.raises(CircuitError):
        compose(a, b)
    assert compose(empty(), b) is b
    assert compose(a, inverse(a)).final_layout() == a.layout


def test_emit_inverse_with_relabels():
    def step(bb):
        bb.x(bb.q("acc"), bb.q("src"))
        bb.relabel("acc", "out")
        bb.x(bb.q("acc"), bb.q("src"))

    b = CircuitBuilder()
    b.alloc("src", 1)
    b.alloc("acc", 1)
    b.alloc("out", 1)
    step(b)
    b.emit_inverse(step)
    c = b.circuit()
    assert c.final_layout() == c.layout
    for x in range(8):
        assert run_basis(c, x).bits == x


def test_counting_builder_matches_full_builder():
    from qfn.arith_networks import ModulusContext, NetworkConfig, expn_builder
    from qfn.machine_model import count_gates
    ctx = ModulusContext(23)
    for v in ("E2K1", "B2K3", "S3K1"):
        full = count_gates(expn_builder(5, ctx, 4, NetworkConfig(v)).circuit())
        fast = count_gates(expn_builder(5, ctx, 4, NetworkConfig(v), counting=True).ops)
        assert full == fast
    with pytest.raises(CircuitError):
        CircuitBuilder(counting=True).circuit()
