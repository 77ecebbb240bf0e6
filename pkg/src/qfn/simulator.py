"""Classical reversible simulation and a small dense state-vector simulator.

``run_basis`` pushes one basis state through a gate-only circuit.
``run_batch`` does the same for many inputs at once by bit slicing: qubit q
of every input is packed into one Python integer, so a controlled-NOT on a
thousand inputs is a handful of big-integer AND/XOR operations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .gate_ir import Circuit, CircuitBuilder, CPhase, Gate, Relabel, Rotation

MAX_STATEVECTOR_QUBITS = 26

_SQ = 1 / math.sqrt(2)
ROTATIONS = {
    "hat": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ,
    "tilde": np.array([[1, 1], [-1, 1]], dtype=complex) * _SQ,
    "tilde-dag": np.array([[1, -1], [1, 1]], dtype=complex) * _SQ,
}


class SimulationError(RuntimeError):
    pass


class ContractViolation(SimulationError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class BasisState:
    """One bit per qubit, packed into ``bits`` (qubit q is bit q)."""

    width: int
    bits: int
    layout: Mapping[str, tuple[int, ...]] = field(default_factory=dict)

    def value(self, register: str) -> int:
        return read_bits(self.bits, self.layout[register])

    def values(self) -> dict[str, int]:
        return {name: self.value(name) for name in self.layout}

    def __getitem__(self, register: str) -> int:
        return self.value(register)


def read_bits(bits: int, qubits: Sequence[int]) -> int:
    v = 0
    for i, q in enumerate(qubits):
        v |= ((bits >> q) & 1) << i
    return v


def write_bits(bits: int, qubits: Sequence[int], value: int) -> int:
    for i, q in enumerate(qubits):
        bits = (bits & ~(1 << q)) | (((value >> i) & 1) << q)
    return bits


def basis_state(c: Circuit, /, **values: int) -> BasisState:
    """Build an input state from register values; unnamed qubits are 0."""
    bits = 0
    lay = c.layout
    for name, v in values.items():
        ids = lay[name]
        if v < 0 or v >> len(ids):
            raise ValueError(f"value {v} does not fit register {name!r}")
        bits = write_bits(bits, ids, v)
    return BasisState(c.qubit_count, bits, lay)


def _compile(c: Circuit):
    prog = []
    for op in c.ops:
        if isinstance(op, Gate):
            pos = 0
            negm = 0
            for ctl in op.controls:
                pos |= 1 << ctl.qubit
                if ctl.negative:
                    negm |= 1 << ctl.qubit
            prog.append((pos, negm, 1 << op.target))
        elif isinstance(op, (Rotation, CPhase)):
            raise SimulationError("phase gate in basis simulation; use run_statevector")
    return prog


def check_contracts(c: Circuit, s: BasisState, when: str, layout) -> list[str]:
    problems = []
    for k in c.contracts:
        if k.when != when:
            continue
        v = read_bits(s.bits, layout[k.register])
        if not k.holds(v):
            rule = "== 0" if k.kind == "zero" else f"< {k.bound}"
            problems.append(f"{'precondition' if when == 'pre' else 'postcondition'} {k.register} {rule} violated (value {v})")
    return problems


def run_basis(c: Circuit, s: BasisState | int, contract_checks: bool = False) -> BasisState:
    """Apply every gate of ``c`` to a basis state.

    The returned state carries the register bindings in force at the end of
    the stream, so ``out.value("beta")`` follows any relabelling.
    """
    if isinstance(s, int):
        s = BasisState(c.qubit_count, s, c.layout)
    if s.width != c.qubit_count:
        raise SimulationError(f"state width {s.width} != circuit width {c.qubit_count}")
    if contract_checks:
        bad = check_contracts(c, s, "pre", c.layout)
        if bad:
            raise ContractViolation(bad)
    bits = s.bits
    for pos, negm, t in _compile(c):
        if (bits ^ negm) & pos == pos:
            bits ^= t
    out = BasisState(c.qubit_count, bits, c.final_layout())
    if contract_checks:
        bad = check_contracts(c, out, "post", out.layout)
        if bad:
            raise ContractViolation(bad)
    return out


class Batch:
    """Bit-sliced set of basis states: ``slices[q]`` has bit j = qubit q of input j."""

    def __init__(self, width: int, count: int, slices: list[int] | None = None):
        self.width, self.count = width, count
        self.slices = slices if slices is not None else [0] * width
        self.mask = (1 << count) - 1

    @classmethod
    def from_values(cls, c: Circuit, columns: Mapping[str, Sequence[int]]) -> "Batch":
        counts = {len(v) for v in columns.values()}
        if len(counts) != 1:
            raise ValueError("all register columns must have the same length")
        n = counts.pop()
        batch = cls(c.qubit_count, n)
        lay = c.layout
        for name, vals in columns.items():
            for i, q in enumerate(lay[name]):
                sl = 0
                for j, v in enumerate(vals):
                    if (v >> i) & 1:
                        sl |= 1 << j
                batch.slices[q] = sl
        return batch

    def values(self, qubits: Sequence[int]) -> list[int]:
        out = [0] * self.count
        for i, q in enumerate(qubits):
            sl = self.slices[q]
            j = 0
            while sl:
                if sl & 1:
                    out[j] |= 1 << i
                sl >>= 1
                j += 1
        return out

    def nonzero(self, qubits: Sequence[int]) -> int:
        """Bitmask of inputs whose ``qubits`` are not all zero."""
        m = 0
        for q in qubits:
            m |= self.slices[q]
        return m


def run_batch(c: Circuit, batch: Batch) -> tuple[Batch, dict[str, tuple[int, ...]]]:
    """Bit-sliced ``run_basis`` over every state of ``batch``; returns the
    output batch and the final register bindings."""
    sl = list(batch.slices)
    full = batch.mask
    for op in c.ops:
        if isinstance(op, Gate):
            m = full
            for ctl in op.controls:
                v = sl[ctl.qubit]
                m &= (~v & full) if ctl.negative else v
                if not m:
                    break
            if m:
                sl[op.target] ^= m
        elif isinstance(op, Relabel):
            continue
        else:
            raise SimulationError("phase gate in basis simulation; use run_statevector")
    return Batch(batch.width, batch.count, sl), c.final_layout()


# -- state vectors -------------------------------------------------------------------------

class StateVector:
    """Amplitudes over 2^n basis states; index bit q is qubit q."""

    def __init__(self, amplitudes: np.ndarray):
        n = int(round(math.log2(len(amplitudes))))
        if 1 << n != len(amplitudes):
            raise ValueError("length is not a power of two")
        if n > MAX_STATEVECTOR_QUBITS:
            raise SimulationError(f"{n} qubits exceeds the state-vector guard of {MAX_STATEVECTOR_QUBITS}")
        self.n = n
        self.amplitudes = np.asarray(amplitudes, dtype=complex)

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "StateVector":
        if n > MAX_STATEVECTOR_QUBITS:
            raise SimulationError(f"{n} qubits exceeds the state-vector guard of {MAX_STATEVECTOR_QUBITS}")
        a = np.zeros(1 << n, dtype=complex)
        a[index] = 1
        return cls(a)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def _axis_view(psi: np.ndarray, n: int) -> np.ndarray:
    # reshape so that axis (n-1-q) is qubit q
    return psi.reshape((2,) * n) if n else psi


def run_statevector(c: Circuit, psi: StateVector | None = None) -> StateVector:
    n = c.qubit_count
    if n > MAX_STATEVECTOR_QUBITS:
        raise SimulationError(f"{n} qubits exceeds the state-vector guard of {MAX_STATEVECTOR_QUBITS}")
    if psi is None:
        psi = StateVector.basis(n, 0)
    if psi.n != n:
        raise SimulationError("state width does not match circuit")
    amp = psi.amplitudes.copy()
    idx = np.arange(1 << n, dtype=np.int64)
    for op in c.ops:
        if isinstance(op, Gate):
            want = np.ones(1 << n, dtype=bool)
            for ctl in op.controls:
                on = (idx >> ctl.qubit) & 1
                want &= on == (0 if ctl.negative else 1)
            tbit = 1 << op.target
            sel = idx[want & ((idx & tbit) == 0)]
            amp[sel], amp[sel | tbit] = amp[sel | tbit].copy(), amp[sel].copy()
        elif isinstance(op, Rotation):
            U = ROTATIONS[op.kind]
            t = _axis_view(amp, n)
            ax = n - 1 - op.qubit
            t = np.moveaxis(t, ax, 0)
            a0, a1 = t[0].copy(), t[1].copy()
            t[0] = U[0, 0] * a0 + U[0, 1] * a1
            t[1] = U[1, 0] * a0 + U[1, 1] * a1
        elif isinstance(op, CPhase):
            both = ((idx >> op.q1) & 1) & ((idx >> op.q2) & 1)
            amp[both == 1] *= np.exp(1j * math.pi * float(op.theta))
    return StateVector(amp)


# -- Fourier transform ---------------------------------------------------------------------

def emit_qft(b: CircuitBuilder, qubits: Sequence[int], variant: str = "hat", prune_below: int | None = None):
    """In-place Fourier transform; the output appears bit-reversed.

    Execution order: U on the top qubit first, then for j = L-2 .. 0 the phases
    V(j, k)(pi / 2^(k-j)) for k = L-1 .. j+1 followed by U on qubit j.
    ``prune_below = m`` drops phases with angle smaller than pi / 2^m.
    """
    kind = {"hat": "hat", "tilde": "tilde"}[variant]
    L = len(qubits)
    for j in range(L - 1, -1, -1):
        for k in range(L - 1, j, -1):
            if prune_below is not None and k - j > prune_below:
                continue
            b.emit(CPhase(qubits[j], qubits[k], Fraction(1, 2 ** (k - j))))
        b.emit(Rotation(qubits[j], kind))


def build_qft(L: int, variant: str = "hat", prune_below: int | None = None) -> Circuit:
    if L < 1:
        raise ValueError("L must be at least 1")
    b = CircuitBuilder()
    q = b.alloc("alpha", L)
    emit_qft(b, q, variant, prune_below)
    return b.circuit()


def emit_uniform(b: CircuitBuilder, qubits: Sequence[int], kind: str = "hat"):
    for q in qubits:
        b.emit(Rotation(q, kind))


def prepare_uniform(L: int) -> Circuit:
    b = CircuitBuilder()
    q = b.alloc("alpha", L)
    emit_uniform(b, q)
    return b.circuit()


def bit_reverse(y: int, L: int) -> int:
    return int(format(y, f"0{L}b")[::-1], 2) if L else 0


# -- measurement ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementDistribution:
    width: int
    probabilities: np.ndarray  # index = register value

    def as_records(self, tol: float = 0.0) -> list[tuple[str, float]]:
        return [
            (format(v, f"0{self.width}b"), float(p))
            for v, p in enumerate(self.probabilities)
            if p > tol
        ]

    def __getitem__(self, v: int) -> float:
        return float(self.probabilities[v])


def distribution(psi: StateVector, qubits: Sequence[int]) -> MeasurementDistribution:
    """Marginal law of the listed qubits (qubits[0] is the low bit)."""
    n = psi.n
    probs = np.abs(psi.amplitudes) ** 2
    t = probs.reshape((2,) * n) if n else probs
    keep = [n - 1 - q for q in qubits]
    drop = tuple(ax for ax in range(n) if ax not in keep)
    m = t.sum(axis=drop) if drop else t
    # remaining axes are in increasing axis order; reorder to (qubits[-1], ..., qubits[0])
    remaining = sorted(keep)
    order = [remaining.index(n - 1 - q) for q in reversed(qubits)]
    m = np.transpose(m, order).reshape(-1) if qubits else np.array([m.sum()])
    return MeasurementDistribution(len(qubits), m)


def register_distribution(c: Circuit, psi: StateVector, register: str) -> MeasurementDistribution:
    return distribution(psi, c.final_layout()[register])


def sample(d: MeasurementDistribution, seed: int, size: int | None = None):
    """Seeded draw(s) of a register value (PCG64 generator)."""
    rng = np.random.default_rng(seed)
    p = d.probabilities / d.probabilities.sum()
    if size is None:
        return int(rng.choice(len(p), p=p))
    return rng.choice(len(p), p=p, size=size)


def ft_reference_prob(L: int, r: int, offset: int = 0) -> MeasurementDistribution:
    """Closed-form P(y) after the transform of a period-r comb starting at ``offset``:

    P(y) = (M / 2^L) |(1/M) sum_{j<M} exp(2 pi i y r j / 2^L)|^2,
    with M - 1 the greatest integer below (2^L - offset) / r.
    """
    if r < 1 or r > 2 ** L:
        raise ValueError("need 1 <= r <= 2^L")
    Q = 2 ** L
    M = -(-(Q - offset) // r)
    y = np.arange(Q)
    j = np.arange(M)
    s = np.exp(2j * np.pi * np.outer(y, j) * r / Q).sum(axis=1) / M
    return MeasurementDistribution(L, (M / Q) * np.abs(s) ** 2)
