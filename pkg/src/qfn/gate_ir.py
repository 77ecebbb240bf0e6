"""Circuit intermediate representation.

A circuit is an ordered stream of instructions over numbered qubits plus a
named register layout.  The first instruction in ``ops`` acts first.

Three kinds of instruction exist:

* ``Gate``      a controlled^k-NOT; controls may require 0 (negative polarity)
* ``Rotation``  / ``CPhase``  the single-qubit rotations and conditional phases
  used by the Fourier transform
* ``Relabel``   a zero-cost swap of two register names

Register names are bindings to physical qubits.  A ``Relabel`` swaps the
bindings of two equal-width registers; gates always address physical qubits,
so relabelling never moves a bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

ROTATION_KINDS = ("hat", "tilde", "tilde-dag")
_ROTATION_INVERSE = {"hat": "hat", "tilde": "tilde-dag", "tilde-dag": "tilde"}


class CircuitError(ValueError):
    """Raised for malformed circuits or documents."""


@dataclass(frozen=True, slots=True)
class Control:
    qubit: int
    negative: bool = False

    def __str__(self) -> str:
        return ("!" if self.negative else "") + str(self.qubit)


@dataclass(frozen=True, slots=True)
class Gate:
    """Flip ``target`` iff every control reads its required value."""

    controls: tuple[Control, ...]
    target: int

    def __post_init__(self):
        seen = {self.target}
        for c in self.controls:
            if c.qubit in seen:
                raise CircuitError(f"qubit {c.qubit} repeated in gate")
            seen.add(c.qubit)

    @property
    def arity(self) -> int:
        return len(self.controls)

    def qubits(self) -> Iterator[int]:
        for c in self.controls:
            yield c.qubit
        yield self.target


@dataclass(frozen=True, slots=True)
class Rotation:
    """Single-qubit rotation.

    hat:       [[1, 1], [1, -1]] / sqrt2
    tilde:     [[1, 1], [-1, 1]] / sqrt2   (determinant one)
    tilde-dag: inverse of tilde
    Matrices act on the amplitude column (a0, a1).
    """

    qubit: int
    kind: str = "hat"

    def __post_init__(self):
        if self.kind not in ROTATION_KINDS:
            raise CircuitError(f"unknown rotation kind {self.kind!r}")

    def qubits(self) -> Iterator[int]:
        yield self.qubit


@dataclass(frozen=True, slots=True)
class CPhase:
    """Multiply the |11> component of (q1, q2) by exp(i * theta * pi)."""

    q1: int
    q2: int
    theta: Fraction

    def __post_init__(self):
        if self.q1 == self.q2:
            raise CircuitError("conditional phase needs two distinct qubits")
        th = Fraction(self.theta)
        d = th.denominator
        if d & (d - 1):
            raise CircuitError(f"phase denominator {d} is not a power of two")
        object.__setattr__(self, "theta", th)

    def qubits(self) -> Iterator[int]:
        yield self.q1
        yield self.q2


@dataclass(frozen=True, slots=True)
class Relabel:
    a: str
    b: str

    def qubits(self) -> Iterator[int]:
        return iter(())


Instruction = Gate | Rotation | CPhase | Relabel


@dataclass(frozen=True, slots=True)
class Contract:
    """Register predicate attached to a builder output.

    ``when`` is "pre" or "post"; ``kind`` is "zero" or "lt" (value < bound).
    Names refer to the bindings at that point of the stream.
    """

    when: str
    register: str
    kind: str
    bound: int = 0

    def holds(self, value: int) -> bool:
        if self.kind == "zero":
            return value == 0
        return value < self.bound

    def __str__(self) -> str:
        tail = f" {self.bound}" if self.kind == "lt" else ""
        return f"{'require' if self.when == 'pre' else 'ensure'} {self.register} {self.kind}{tail}"


def cknot(target: int, *controls: int | Control) -> Gate:
    """Shorthand: ints are positive controls, ``Control`` objects pass through."""
    cs = tuple(c if isinstance(c, Control) else Control(c) for c in controls)
    return Gate(cs, target)


def neg(q: int) -> Control:
    return Control(q, True)


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    registers: tuple[tuple[str, tuple[int, ...]], ...] = ()
    ops: tuple = ()
    contracts: tuple[Contract, ...] = ()

    def __post_init__(self):
        n = self.qubit_count
        if n < 0:
            raise CircuitError("negative qubit count")
        used: set[int] = set()
        names: dict[str, int] = {}
        for name, ids in self.registers:
            if name in names:
                raise CircuitError(f"register {name!r} declared twice")
            names[name] = len(ids)
            for q in ids:
                if not 0 <= q < n:
                    raise CircuitError(f"register {name!r}: qubit {q} out of range")
                if q in used:
                    raise CircuitError(f"qubit {q} belongs to two registers")
                used.add(q)
        for i, op in enumerate(self.ops):
            if isinstance(op, Relabel):
                if op.a not in names or op.b not in names:
                    raise CircuitError(f"op {i}: relabel of unknown register")
                if names[op.a] != names[op.b]:
                    raise CircuitError(f"op {i}: relabel of unequal widths")
                continue
            for q in op.qubits():
                if not 0 <= q < n:
                    raise CircuitError(f"op {i}: qubit {q} out of range")
        for c in self.contracts:
            if c.register not in names:
                raise CircuitError(f"contract on unknown register {c.register!r}")

    @property
    def layout(self) -> dict[str, tuple[int, ...]]:
        return dict(self.registers)

    def register(self, name: str) -> tuple[int, ...]:
        for n, ids in self.registers:
            if n == name:
                return ids
        raise KeyError(name)

    def final_layout(self) -> dict[str, tuple[int, ...]]:
        """Register bindings after every Relabel in the stream."""
        lay = self.layout
        for op in self.ops:
            if isinstance(op, Relabel):
                lay[op.a], lay[op.b] = lay[op.b], lay[op.a]
        return lay

    def gates(self) -> Iterator[Gate]:
        return (op for op in self.ops if isinstance(op, Gate))

    def __len__(self) -> int:
        return len(self.ops)


def empty(qubit_count: int = 0, registers=()) -> Circuit:
    return Circuit(qubit_count, tuple(registers), ())


def compose(first: Circuit, second: Circuit) -> Circuit:
    """``first`` then ``second``.  Layouts must agree (an empty layout is a wildcard)."""
    if first.qubit_count != second.qubit_count:
        if not first.ops and not first.registers:
            return second
        if not second.ops and not second.registers:
            return first
        raise CircuitError("qubit counts differ")
    if first.registers and second.registers:
        if first.final_layout() != second.layout:
            raise CircuitError("register layouts do not line up")
    regs = first.registers or second.registers
    pre = [c for c in first.contracts if c.when == "pre"]
    post = [c for c in second.contracts if c.when == "post"]
    return Circuit(first.qubit_count, regs, first.ops + second.ops, tuple(pre + post))


def invert_op(op):
    if isinstance(op, CPhase):
        return CPhase(op.q1, op.q2, -op.theta)
    if isinstance(op, Rotation):
        return Rotation(op.qubit, _ROTATION_INVERSE[op.kind])
    return op


def inverse(c: Circuit) -> Circuit:
    """Reverse the stream; the result starts from ``c``'s final register layout."""
    final = c.final_layout()
    regs = tuple((name, final[name]) for name, _ in c.registers)
    flip = {"pre": "post", "post": "pre"}
    contracts = tuple(Contract(flip[k.when], k.register, k.kind, k.bound) for k in c.contracts)
    return Circuit(c.qubit_count, regs, tuple(invert_op(op) for op in reversed(c.ops)), contracts)


# -- builder -----------------------------------------------------------------

class CountSink:
    """Stands in for an op list when only per-arity tallies are wanted."""

    def __init__(self):
        self.by_arity: dict[int, int] = {}
        self.other = 0
        self.swaps: list[tuple[str, str]] = []

    def append(self, op):
        if isinstance(op, Gate):
            k = len(op.controls)
            self.by_arity[k] = self.by_arity.get(k, 0) + 1
        elif isinstance(op, Relabel):
            self.swaps.append((op.a, op.b))
        else:
            self.other += 1

    def absorb_reversed(self, other: "CountSink"):
        for k, v in other.by_arity.items():
            self.by_arity[k] = self.by_arity.get(k, 0) + v
        self.other += other.other
        self.swaps.extend(reversed(other.swaps))

    def extend(self, ops):
        for op in ops:
            self.append(op)


class CircuitBuilder:
    """Accumulates instructions while tracking register-name bindings.

    Network builders address registers by name; ``reg(name)`` returns the
    physical qubits currently bound to it.
    """

    def __init__(self, counting: bool = False):
        self.n = 0
        self.initial: dict[str, tuple[int, ...]] = {}
        self.bind: dict[str, tuple[int, ...]] = {}
        self.ops = CountSink() if counting else []
        self._tally = self.ops.by_arity if counting else None
        self.contracts: list[Contract] = []

    def alloc(self, name: str, width: int) -> tuple[int, ...]:
        if name in self.bind:
            raise CircuitError(f"register {name!r} already allocated")
        ids = tuple(range(self.n, self.n + width))
        self.n += width
        self.initial[name] = ids
        self.bind[name] = ids
        return ids

    def reg(self, name: str) -> tuple[int, ...]:
        return self.bind[name]

    def q(self, name: str, i: int = 0) -> int:
        return self.bind[name][i]

    def x(self, target: int, *controls: int | Control):
        if self._tally is not None:
            # counting mode: skip building the gate, only its arity matters
            k = len(controls)
            self._tally[k] = self._tally.get(k, 0) + 1
            return
        self.ops.append(cknot(target, *controls))

    def emit(self, op):
        self.ops.append(op)

    def relabel(self, a: str, b: str):
        self.bind[a], self.bind[b] = self.bind[b], self.bind[a]
        self.ops.append(Relabel(a, b))

    def require(self, register: str, kind: str = "zero", bound: int = 0):
        self.contracts.append(Contract("pre", register, kind, bound))

    def ensure(self, register: str, kind: str = "zero", bound: int = 0):
        self.contracts.append(Contract("post", register, kind, bound))

    def emit_inverse(self, build, *args, fixed_layout: bool = False, **kwargs):
        """Append the inverse of the sub-network ``build(self, *args)``.

        The sub-network may relabel registers.  It is generated from bindings
        chosen so that its forward run would end at the current bindings;
        reversing it therefore starts exactly where we are now.  Pass
        ``fixed_layout=True`` when the sub-network never relabels.
        """
        if fixed_layout:
            sub = CircuitBuilder(counting=isinstance(self.ops, CountSink))
            sub.n, sub.bind = self.n, dict(self.bind)
            build(sub, *args, **kwargs)
            if isinstance(self.ops, CountSink):
                self.ops.absorb_reversed(sub.ops)
            else:
                self.ops.extend(invert_op(op) for op in reversed(sub.ops))
            return
        probe = CircuitBuilder(counting=True)
        probe.n, probe.bind = self.n, dict(self.bind)
        build(probe, *args, **kwargs)
        start = dict(self.bind)
        for a, b in reversed(probe.ops.swaps):
            start[a], start[b] = start[b], start[a]
        if isinstance(self.ops, CountSink):
            # bindings do not affect tallies, so the probe run is the answer
            self.ops.absorb_reversed(probe.ops)
            self.bind = start
            return
        sub = CircuitBuilder()
        sub.n, sub.bind = self.n, dict(start)
        build(sub, *args, **kwargs)
        if sub.bind != self.bind:
            raise CircuitError("sub-network did not end at the expected bindings")
        for op in reversed(sub.ops):
            self.ops.append(invert_op(op))
        self.bind = start

    def circuit(self) -> Circuit:
        if isinstance(self.ops, CountSink):
            raise CircuitError("counting builder holds no instructions")
        regs = tuple(self.initial.items())
        return Circuit(self.n, regs, tuple(self.ops), tuple(self.contracts))


# -- text document format ------------------------------------------------------

def _fmt(op) -> str:
    if isinstance(op, Gate):
        return "cknot " + " ".join(str(c) for c in op.controls) + (" " if op.controls else "") + f":{op.target}"
    if isinstance(op, Rotation):
        return f"rot {op.kind} {op.qubit}"
    if isinstance(op, CPhase):
        return f"cphase {op.q1} {op.q2} {op.theta.numerator}/{op.theta.denominator}"
    if isinstance(op, Relabel):
        return f"relabel {op.a} {op.b}"
    raise CircuitError(f"cannot serialize {op!r}")


def serialize(c: Circuit) -> bytes:
    lines = [f"qubits {c.qubit_count}"]
    for name, ids in c.registers:
        lines.append(" ".join(["reg", name, *map(str, ids)]))
    lines.extend(str(k) for k in c.contracts)
    lines.extend(_fmt(op) for op in c.ops)
    return ("\n".join(lines) + "\n").encode()


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise CircuitError(f"line {lineno}: {what} {tok!r} is not an integer") from None
    if v < 0:
        raise CircuitError(f"line {lineno}: {what} must be nonnegative")
    return v


def parse(data: bytes | str) -> Circuit:
    text = data.decode() if isinstance(data, bytes) else data
    qubits = None
    regs: list[tuple[str, tuple[int, ...]]] = []
    contracts: list[Contract] = []
    ops: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if kind == "qubits":
            if qubits is not None or len(tok) != 2:
                raise CircuitError(f"line {lineno}: bad qubits header")
            qubits = _int(tok[1], lineno, "qubit count")
            continue
        if qubits is None:
            raise CircuitError(f"line {lineno}: missing 'qubits' header")

        def qb(t: str, what: str = "qubit") -> int:
            v = _int(t, lineno, what)
            if v >= qubits:
                raise CircuitError(f"line {lineno}: {what} {v} out of range (qubits {qubits})")
            return v

        try:
            if kind == "reg":
                if len(tok) < 2:
                    raise CircuitError(f"line {lineno}: reg needs a name")
                regs.append((tok[1], tuple(qb(t) for t in tok[2:])))
            elif kind in ("require", "ensure"):
                if len(tok) not in (3, 4) or tok[2] not in ("zero", "lt"):
                    raise CircuitError(f"line {lineno}: bad contract line")
                bound = _int(tok[3], lineno, "bound") if tok[2] == "lt" else 0
                contracts.append(Contract("pre" if kind == "require" else "post", tok[1], tok[2], bound))
            elif kind == "cknot":
                body = " ".join(tok[1:])
                if ":" not in body:
                    raise CircuitError(f"line {lineno}: cknot needs ':<target>'")
                left, right = body.rsplit(":", 1)
                controls = []
                for t in left.split():
                    negative = t.startswith("!")
                    controls.append(Control(qb(t.lstrip("!"), "control"), negative))
                ops.append(Gate(tuple(controls), qb(right.strip(), "target")))
            elif kind == "rot":
                if len(tok) != 3:
                    raise CircuitError(f"line {lineno}: rot takes a kind and a qubit")
                ops.append(Rotation(qb(tok[2]), tok[1]))
            elif kind == "cphase":
                if len(tok) != 4 or "/" not in tok[3]:
                    raise CircuitError(f"line {lineno}: cphase takes q1 q2 num/den")
                num, den = tok[3].split("/")
                try:
                    theta = Fraction(int(num), int(den))
                except (ValueError, ZeroDivisionError):
                    raise CircuitError(f"line {lineno}: bad angle {tok[3]!r}") from None
                ops.append(CPhase(qb(tok[1]), qb(tok[2]), theta))
            elif kind == "relabel":
                if len(tok) != 3:
                    raise CircuitError(f"line {lineno}: relabel takes two names")
                ops.append(Relabel(tok[1], tok[2]))
            else:
                raise CircuitError(f"line {lineno}: unknown op kind {kind!r}")
        except CircuitError as e:
            msg = str(e)
            raise CircuitError(msg if msg.startswith("line") else f"line {lineno}: {msg}") from None
    if qubits is None:
        raise CircuitError("empty document")
    return Circuit(qubits, tuple(regs), tuple(ops), tuple(contracts))


def gate_list(ops: Iterable) -> list[str]:
    """Readable one-line-per-op rendering (debugging aid)."""
    return [_fmt(op) for op in ops]


def on_qubits(ops: Sequence, mapping: Sequence[int]) -> list:
    """Re-address ops written for qubits 0..m-1 onto ``mapping``."""
    out = []
    for op in ops:
        if isinstance(op, Gate):
            out.append(Gate(tuple(Control(mapping[c.qubit], c.negative) for c in op.controls), mapping[op.target]))
        elif isinstance(op, Rotation):
            out.append(Rotation(mapping[op.qubit], op.kind))
        elif isinstance(op, CPhase):
            out.append(CPhase(mapping[op.q1], mapping[op.q2], op.theta))
        else:
            out.append(op)
    return out
