"""Small end-to-end demonstrations and the classical post-processing.

* Lookup-table circuits preparing sum_a |a>|x^a mod 15> on 6 qubits.
* The a mod 2^K copy circuit used to test the Fourier transform.
* Order extraction by continued fractions and factor extraction by gcd.

The Fourier transform leaves its output bit-reversed on the input qubits,
so the measured integer y is read with the register's qubit order reversed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith_networks import ModulusContext, NetworkConfig, expn_builder
from .gate_ir import Circuit, CircuitBuilder, neg, on_qubits
from .machine_model import count_gates, pulses
from .simulator import (
    Batch, StateVector, bit_reverse, build_qft, distribution, emit_qft, emit_uniform, run_batch,
    run_statevector,
)

UNITS_15 = (1, 2, 4, 7, 8, 11, 13, 14)
STYLES = ("standard", "drop-final-not", "custom")
DENSE_QUBITS = 16


def lookup_table_15(x: int) -> dict[int, int]:
    if x not in UNITS_15:
        raise ValueError(f"x must be one of {UNITS_15}")
    return {a: pow(x, a, 15) for a in range(4)}


# Order in which the input patterns are visited: after XOR-ing alpha with
# each mask, a 2-controlled gate fires on the branch whose input reads 11.
_MASKS = (0, 1, 3, 2)


def _column_source(col: tuple[int, ...]):
    """(input bit, complemented) if the column copies one input bit, else None."""
    for i in (0, 1):
        for inv in (0, 1):
            if all(col[a] == ((a >> i) & 1) ^ inv for a in range(4)):
                return i, bool(inv)
    return None


def _lookup_plan(x: int, final: int):
    """Split the x^a mod 15 table into copied columns and a corrected lookup.

    ``final`` is the value XOR-ed into alpha when the circuit ends; each
    branch's output must match the input value it is left with.  Returns
    (copies, base, [(mask, bits to flip)]) where ``copies`` maps an output
    bit to (input bit, complemented).
    """
    table = lookup_table_15(x)
    want = [table[a ^ final] for a in range(4)]
    copies, base, rest = {}, 0, 0
    for j in range(4):
        col = tuple((want[a] >> j) & 1 for a in range(4))
        src = _column_source(col)
        if src is not None:
            copies[j] = src
            continue
        rest |= 1 << j
        # a column bit costs 1 pulse as a NOT, each correction costs 7
        if sum(col) >= 3 or col == (1, 1, 1, 1):
            base |= 1 << j
    return copies, base, [(m, (base ^ want[3 ^ m]) & rest) for m in _MASKS]


def build_expn15(x: int, style: str = "standard") -> Circuit:
    """Registers: alpha (2 qubits, input a), beta (4 qubits, output, preset 0).

    ``standard`` leaves alpha unchanged; ``drop-final-not`` skips the last
    NOT on alpha and so leaves alpha_1 flipped; ``custom`` replaces the NOTs
    on alpha by negated controls.  Output bits that merely copy an input bit
    are written with controlled-NOTs; the others come from the lookup.
    """
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}; choose from {STYLES}")
    if style == "drop-final-not":
        # leaving alpha_1 flipped only pays off when the lookup walk is used
        options = [_build_expn15(x, style, f) for f in (2, 0)]
        return min(options, key=lambda c: pulses(count_gates(c)))
    return _build_expn15(x, style, 0)


def _build_expn15(x: int, style: str, final: int) -> Circuit:
    copies, base, steps = _lookup_plan(x, final)
    b = CircuitBuilder()
    alpha = b.alloc("alpha", 2)
    beta = b.alloc("beta", 4)
    b.require("beta")

    def walk(cur, mask):
        for i in (0, 1):
            if ((cur ^ mask) >> i) & 1:
                b.x(alpha[i])
        return mask

    for j in range(4):
        if (base >> j) & 1:
            b.x(beta[j])
    for j, (i, inv) in sorted(copies.items()):
        if inv and style == "custom":
            b.x(beta[j], neg(alpha[i]))
            continue
        if inv:
            b.x(beta[j])
        b.x(beta[j], alpha[i])
    cur = 0
    for mask, flips in steps:
        if not flips:
            continue
        if style == "custom":
            ctl = [neg(alpha[i]) if (mask >> i) & 1 else alpha[i] for i in (1, 0)]
        else:
            cur = walk(cur, mask)
            ctl = [alpha[1], alpha[0]]
        for j in range(4):
            if (flips >> j) & 1:
                b.x(beta[j], *ctl)
    if style != "custom":
        walk(cur, final)
    return b.circuit()


def build_mod2k(L: int, K: int) -> Circuit:
    """beta <- a mod 2^K: K CNOTs from the low input bits."""
    if not 1 <= K <= L:
        raise ValueError("need 1 <= K <= L")
    b = CircuitBuilder()
    alpha = b.alloc("alpha", L)
    beta = b.alloc("beta", K)
    b.require("beta")
    for i in range(K):
        b.x(beta[i], alpha[i])
    return b.circuit()


def build_period_demo(expn: Circuit, L: int) -> Circuit:
    """Uniform input, the given function circuit on the low input bits, then
    the Fourier transform on all L input qubits."""
    width = len(expn.register("alpha"))
    if width > L:
        raise ValueError("function circuit reads more input bits than L")
    b = CircuitBuilder()
    alpha = b.alloc("alpha", L)
    names = [n for n, _ in expn.registers if n != "alpha"]
    regs = {n: b.alloc(n, len(expn.register(n))) for n in names}
    emit_uniform(b, alpha)
    remap = {}
    for i, q in enumerate(expn.register("alpha")):
        remap[q] = alpha[i]
    for n in names:
        for q_old, q_new in zip(expn.register(n), regs[n]):
            remap[q_old] = q_new
    mapping = [remap[q] for q in range(expn.qubit_count)]
    for op in on_qubits(expn.ops, mapping):
        b.emit(op)
    emit_qft(b, alpha)
    return b.circuit()


def read_y(bits_value: int, L: int) -> int:
    """Integer y from the raw alpha register after the (bit-reversing) transform."""
    return bit_reverse(bits_value, L)


def y_distribution(demo: Circuit, L: int) -> np.ndarray:
    psi = run_statevector(demo)
    raw = distribution(psi, demo.final_layout()["alpha"]).probabilities
    out = np.zeros(1 << L)
    for v, p in enumerate(raw):
        out[read_y(v, L)] += p
    return out


def y_distribution_permutation(f: Circuit, L: int) -> np.ndarray:
    """Same law as ``y_distribution(build_period_demo(f, L), L)`` for a
    gate-only ``f``, without the full state vector.

    ``f`` permutes basis states, so the state after it is a uniform sum over
    2^L branches.  Branches are grouped by the value of the non-input
    registers; groups are orthogonal, so each one's input register is
    transformed on its own and the probabilities add.
    """
    w = len(f.register("alpha"))
    if w > L:
        raise ValueError("function circuit reads more input bits than L")
    low = list(range(1 << w))
    batch, final = run_batch(f, Batch.from_values(f, {"alpha": low}))
    alpha_out = batch.values(final["alpha"])
    others = [n for n, _ in f.registers if n != "alpha"]
    rest = list(zip(*(batch.values(final[n]) for n in others))) if others else [()] * len(low)
    groups: dict[tuple, list[int]] = {}
    for a in range(1 << L):
        j = a & ((1 << w) - 1)
        groups.setdefault(rest[j], []).append(alpha_out[j] | (a >> w << w))
    ft = build_qft(L)
    amp = 2.0 ** (-L / 2)
    out = np.zeros(1 << L)
    for members in groups.values():
        v = np.zeros(1 << L, dtype=complex)
        v[members] = amp
        psi = run_statevector(ft, StateVector(v)).amplitudes
        for raw, a in enumerate(psi):
            out[read_y(raw, L)] += abs(a) ** 2
    return out


# -- classical post-processing ---------------------------------------------------------------

@dataclass(frozen=True)
class OrderResult:
    candidate_r: int
    numerator: int
    success: bool
    reason: str = ""


def convergents(num: int, den: int):
    """Continued-fraction convergents p/q of num/den, in order."""
    p0, q0, p1, q1 = 0, 1, 1, 0
    while den:
        t, r = divmod(num, den)
        p0, p1 = p1, t * p1 + p0
        q0, q1 = q1, t * q1 + q0
        yield p1, q1
        num, den = den, r


def extract_order(y: int, L: int, bound: int | None = None) -> OrderResult:
    """Reduced denominator of the last convergent of y/2^L with denominator
    strictly below ``bound`` (default 2^(L/2))."""
    if not 0 <= y < 1 << L:
        raise ValueError("need 0 <= y < 2^L")
    if bound is None:
        bound = math.isqrt(1 << L) if L % 2 == 0 else 2 ** (L / 2)
    if y == 0:
        return OrderResult(1, 0, False, "y = 0 carries no information")
    best = None
    for p, q in convergents(y, 1 << L):
        if q >= bound:
            break
        best = (p, q)
    if best is None or best[0] == 0:
        return OrderResult(1, 0, False, "no convergent within bound")
    return OrderResult(best[1], best[0], True)


@dataclass(frozen=True)
class FactorResult:
    factors: tuple[int, int] | None
    reason: str = ""

    @property
    def success(self) -> bool:
        return self.factors is not None


def factor_from_order(x: int, r: int, N: int) -> FactorResult:
    if r < 1:
        raise ValueError("r must be positive")
    if r % 2:
        return FactorResult(None, "odd order")
    if pow(x, r, N) != 1:
        return FactorResult(None, "not the order: x^r != 1")
    h = pow(x, r // 2, N)
    if h == N - 1:
        return FactorResult(None, "square root is -1")
    f1, f2 = math.gcd(h - 1, N), math.gcd(h + 1, N)
    if f1 in (1, N) or f2 in (1, N):
        return FactorResult(None, "trivial gcd")
    return FactorResult((min(f1, f2), max(f1, f2)))


# -- the full pipeline -------------------------------------------------------------------------

@dataclass
class Trial:
    y: int
    r: int
    factors: tuple[int, int] | None
    reason: str


@dataclass
class FactoringReport:
    N: int
    x: int
    L: int
    seed: int
    circuit: str
    y_probabilities: list[float]
    trials: list[Trial] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return sum(t.factors is not None for t in self.trials) / len(self.trials) if self.trials else 0.0

    def y_counts(self) -> list[int]:
        c = [0] * (1 << self.L)
        for t in self.trials:
            c[t.y] += 1
        return c


def _function_circuit(N: int, x: int, L: int, cfg: NetworkConfig | None) -> tuple[Circuit, str]:
    if N == 15 and cfg is None:
        return build_expn15(x, "standard"), "lookup"
    cfg = cfg or NetworkConfig()
    c = expn_builder(x, ModulusContext(N), L, cfg).circuit()
    return c, f"expn-{cfg.variant}"


def run_factoring_experiment(N: int, x: int, L: int, cfg: NetworkConfig | None = None,
                             seed: int = 0, trials: int = 1) -> FactoringReport:
    """Simulate order finding for x mod N and post-process each sample.

    For N = 15 without an explicit config the 6-qubit lookup circuit is used
    (it reads only the low two input bits).  Small circuits run as one dense
    state vector, larger ones through ``y_distribution_permutation``.
    Candidate orders come from convergents with denominator below N and are
    accepted only if x^r = 1 mod N.  Samples with y = 0 count as failures.
    """
    if math.gcd(x, N) != 1:
        raise ValueError(f"gcd({x}, {N}) != 1")
    f, name = _function_circuit(N, x, L, cfg)
    if f.qubit_count - len(f.register("alpha")) + L <= DENSE_QUBITS:
        probs = y_distribution(build_period_demo(f, L), L)
    else:
        probs = y_distribution_permutation(f, L)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    ys = rng.choice(1 << L, p=probs, size=trials)
    report = FactoringReport(N, x, L, seed, name, [float(p) for p in probs])
    cache: dict[int, Trial] = {}
    for y in map(int, ys):
        if y not in cache:
            o = extract_order(y, L, bound=N)
            if not o.success:
                cache[y] = Trial(y, o.candidate_r, None, o.reason)
            else:
                fr = factor_from_order(x, o.candidate_r, N)
                cache[y] = Trial(y, o.candidate_r, fr.factors, fr.reason)
        report.trials.append(cache[y])
    return report
