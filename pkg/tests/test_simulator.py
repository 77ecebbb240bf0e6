import random

import numpy as np
import pytest

from qfn.arith_networks import ModulusContext, build_expn
from qfn.gate_ir import Circuit, CircuitBuilder, Rotation, cknot, neg
from qfn.machine_model import circuit_pulses
from qfn.simulator import (
    MAX_STATEVECTOR_QUBITS, Batch, ContractViolation, SimulationError, StateVector, basis_state,
    bit_reverse, build_qft, distribution, ft_reference_prob, prepare_uniform, run_basis, run_batch,
    run_statevector, sample,
)


def unitary(c: Circuit) -> np.ndarray:
    n = c.qubit_count
    cols = [run_statevector(c, StateVector.basis(n, i)).amplitudes for i in range(2**n)]
    return np.array(cols).T


def dft_bit_reversed(L: int) -> np.ndarray:
    Q = 2**L
    F = np.exp(2j * np.pi * np.outer(range(Q), range(Q)) / Q) / np.sqrt(Q)
    P = np.zeros((Q, Q))
    for y in range(Q):
        P[bit_reverse(y, L), y] = 1
    return P @ F


@pytest.mark.parametrize("L", range(1, 9))
def test_hat_transform_is_bit_reversed_dft(L):
    assert np.abs(unitary(build_qft(L)) - dft_bit_reversed(L)).max() < 1e-12


@pytest.mark.parametrize("L", range(1, 7))
def test_tilde_transform_has_same_moduli(L):
    hat, tilde = unitary(build_qft(L, "hat")), unitary(build_qft(L, "tilde"))
    assert np.abs(np.abs(hat) - np.abs(tilde)).max() < 1e-12


@pytest.mark.parametrize("L", range(1, 10))
def test_transform_pulses(L):
    assert circuit_pulses(build_qft(L)) == L * (2 * L - 1)


def test_pruned_transform_drops_small_phases():
    full, cut = build_qft(6), build_qft(6, prune_below=2)
    assert len(full.ops) - len(cut.ops) == sum(1 for j in range(6) for k in range(j + 1, 6) if k - j > 2)


def test_rotation_inverses():
    for kind, inv in (("hat", "hat"), ("tilde", "tilde-dag")):
        c = Circuit(1, (), (Rotation(0, kind), Rotation(0, inv)))
        assert np.abs(unitary(c) - np.eye(2)).max() < 1e-12


def test_basis_and_vector_agree_on_gates():
    rng = random.Random(3)
    for _ in range(40):
        n = 5
        ops = []
        for _ in range(15):
            qs = rng.sample(range(n), rng.randint(1, 4))
            ops.append(cknot(qs[0], *[neg(q) if rng.random() < 0.3 else q for q in qs[1:]]))
        c = Circuit(n, (), tuple(ops))
        x = rng.randrange(2**n)
        psi = run_statevector(c, StateVector.basis(n, x)).amplitudes
        assert psi[run_basis(c, x).bits] == pytest.approx(1)


def test_batch_matches_single_runs():
    c = build_expn(7, ModulusContext(15), 4)
    vals = list(range(16))
    batch, final = run_batch(c, Batch.from_values(c, {"alpha": vals}))
    got = batch.values(final["beta"])
    assert got == [run_basis(c, basis_state(c, alpha=a))["beta"] for a in vals]
    assert batch.nonzero(final["gamma"] + final["delta"] + final["ell"]) == 0


def test_contract_violations_are_reported():
    c = build_expn(7, ModulusContext(15), 2)
    with pytest.raises(ContractViolation, match="gamma"):
        run_basis(c, basis_state(c, gamma=3), contract_checks=True)
    with pytest.raises(SimulationError):
        run_basis(build_qft(2), 0)


def test_statevector_guard():
    big = Circuit(MAX_STATEVECTOR_QUBITS + 1)
    with pytest.raises(SimulationError):
        run_statevector(big)


def test_uniform_preparation_and_marginals():
    psi = run_statevector(prepare_uniform(3))
    assert np.allclose(psi.amplitudes, 1 / np.sqrt(8))
    assert psi.norm() == pytest.approx(1)
    b = CircuitBuilder()
    q = b.alloc("q", 3)
    b.emit(Rotation(q[2], "hat"))
    d = distribution(run_statevector(b.circuit()), [q[2], q[0]])
    assert np.allclose(d.probabilities, [0.5, 0.5, 0, 0])
    assert [r[0] for r in d.as_records(1e-12)] == ["00", "01"]


def test_sampling_is_seeded():
    d = distribution(run_statevector(prepare_uniform(3)), [0, 1, 2])
    a, b = sample(d, 11, 100), sample(d, 11, 100)
    assert (a == b).all()
    assert isinstance(sample(d, 1), int)


@pytest.mark.parametrize("L, r, offset", [(4, 4, 0), (4, 4, 3), (6, 3, 1), (5, 5, 2), (3, 1, 0)])
def test_reference_probabilities_match_simulation(L, r, offset):
    Q = 2**L
    v = np.zeros(Q, dtype=complex)
    members = list(range(offset, Q, r))
    v[members] = 1 / np.sqrt(len(members))  # one output branch, normalized
    psi = run_statevector(build_qft(L), StateVector(v)).amplitudes
    probs = np.zeros(Q)
    for raw, a in enumerate(psi):
        probs[bit_reverse(raw, L)] += abs(a) ** 2
    ref = ft_reference_prob(L, r, offset).probabilities
    assert np.abs(probs - ref).max() < 1e-12
