"""Target machines, gate-set validation and pulse accounting.

Pulse law on the ion trap: a NOT costs 1 pulse and a controlled^k-NOT
(k >= 1) costs 2k + 3.  Fourier-transform gates: 1 pulse per rotation,
4 per conditional phase.  Negated controls cost the same as plain ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .gate_ir import Circuit, CountSink, CPhase, Gate, Rotation

ROTATION_PULSES = 1
CPHASE_PULSES = 4


@dataclass(frozen=True)
class MachineModel:
    kind: str
    max_control_arity: float

    def admits(self, arity: int) -> bool:
        return arity <= self.max_control_arity

    def __str__(self) -> str:
        return self.kind


BASIC = MachineModel("basic", 2)
ENHANCED = MachineModel("enhanced", 4)
UNRESTRICTED = MachineModel("unrestricted", math.inf)
MACHINES = {m.kind: m for m in (BASIC, ENHANCED, UNRESTRICTED)}


class CostVector(tuple):
    """Per-arity gate counts [c0, c1, c2, ...]; entries may be Fractions.

    Comparison ignores trailing zeros, so [0, 1, 1] == [0, 1, 1, 0, 0].
    """

    def __new__(cls, counts: Iterable = ()):
        vals = [Fraction(v) if not isinstance(v, int) else v for v in counts]
        for v in vals:
            if v < 0:
                raise ValueError("negative gate count")
        while vals and vals[-1] == 0:
            vals.pop()
        vals = [int(v) if isinstance(v, Fraction) and v.denominator == 1 else v for v in vals]
        return super().__new__(cls, vals)

    def __getitem__(self, k):
        if isinstance(k, int) and k >= len(self):
            return 0
        return tuple.__getitem__(self, k)

    def padded(self, width: int) -> list:
        return [self[k] for k in range(max(width, len(self)))]

    def __add__(self, other):
        other = CostVector(other)
        w = max(len(self), len(other))
        return CostVector(self[k] + other[k] for k in range(w))

    __radd__ = __add__

    def scale(self, s) -> "CostVector":
        return CostVector(v * s for v in self)

    def __eq__(self, other):
        if not isinstance(other, (tuple, list)):
            return NotImplemented
        w = max(len(self), len(other))
        get = lambda v, k: v[k] if k < len(v) else 0
        return all(get(self, k) == get(other, k) for k in range(w))

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = tuple.__hash__

    @property
    def total_gates(self):
        return sum(self)

    def __repr__(self) -> str:
        return "[" + ",".join(str(v) for v in self) + "]"


def gate_pulses(arity: int) -> int:
    return 1 if arity == 0 else 2 * arity + 3


def pulses(v: Sequence) -> Fraction | int:
    """Pulse total of a cost vector."""
    total = sum(c * gate_pulses(k) for k, c in enumerate(v))
    if isinstance(total, Fraction) and total.denominator == 1:
        return int(total)
    return total


def count_gates(c: Circuit | CountSink) -> CostVector:
    if isinstance(c, CountSink):
        top = max(c.by_arity, default=-1)
        return CostVector(c.by_arity.get(k, 0) for k in range(top + 1))
    tally: dict[int, int] = {}
    for op in c.ops:
        if isinstance(op, Gate):
            k = len(op.controls)
            tally[k] = tally.get(k, 0) + 1
    top = max(tally, default=-1)
    return CostVector(tally.get(k, 0) for k in range(top + 1))


def phase_pulses(c: Circuit) -> int:
    n = 0
    for op in c.ops:
        if isinstance(op, Rotation):
            n += ROTATION_PULSES
        elif isinstance(op, CPhase):
            n += CPHASE_PULSES
    return n


def circuit_pulses(c: Circuit) -> int:
    """All pulses of a circuit: NOT-family gates plus FT gates."""
    return pulses(count_gates(c)) + phase_pulses(c)


@dataclass(frozen=True)
class Violation:
    index: int
    arity: int

    def __str__(self) -> str:
        return f"op {self.index}: controlled^{self.arity}-NOT not available"


def validate(c: Circuit, m: MachineModel) -> list[Violation]:
    """Empty list means every gate is native to ``m``.  Phase gates always pass."""
    return [
        Violation(i, len(op.controls))
        for i, op in enumerate(c.ops)
        if isinstance(op, Gate) and not m.admits(len(op.controls))
    ]


def worst(vectors: Iterable[Sequence]) -> CostVector:
    vs = list(vectors)
    w = max((len(v) for v in vs), default=0)
    return CostVector(max((v[k] if k < len(v) else 0) for v in vs) for k in range(w))


def average(vectors: Iterable[Sequence]) -> CostVector:
    vs = list(vectors)
    if not vs:
        return CostVector()
    w = max(len(v) for v in vs)
    return CostVector(
        Fraction(sum((v[k] if k < len(v) else 0) for v in vs), len(vs)) for k in range(w)
    )
