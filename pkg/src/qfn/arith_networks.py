"""Reversible arithmetic networks for modular exponentiation.

Every builder emits controlled^k-NOT gates in execution order (first gate
acts first).  Operator products in the usual right-to-left notation have
already been reversed.

Register conventions (bit 0 least significant):

    alpha  L-qubit input a of EXPN
    beta   K-qubit accumulator, holds x^a mod N at the end
    gamma  K-qubit scratch; MULN writes its product here
    delta  K-qubit scratch; OADDN writes its sum here, then relabels
    ell    select line of the multiplexed adder
    and    AND of two enable bits            (E2K2, B2K3, B2K2, S3K1)
    mux    MUXFA'' scratch bit               (B2K3)
    junk   K-1 comparator scratch bits       (S3K1)

The scratch plan per variant is listed in ``VARIANTS``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .gate_ir import Circuit, CircuitBuilder, CircuitError, Control, neg
from .machine_model import BASIC, ENHANCED, UNRESTRICTED, MachineModel

FORMS = ("prime", "plain", "double", "triple", "quad")


@dataclass(frozen=True)
class Variant:
    name: str
    machine: MachineModel
    form: str                  # MUXFA form used by MADD
    and_line: bool             # combine two enables into one scratch line
    extra: tuple[tuple[str, str], ...] = ()   # extra scratch: (name, width rule "1" | "K-1")
    keep_lt_junk: bool = False  # comparator junk kept in its own register (3K+1 plan)


VARIANTS = {
    "E2K1": Variant("E2K1", ENHANCED, "plain", False),
    "E2K2": Variant("E2K2", ENHANCED, "plain", True, (("and", "1"),)),
    "B2K3": Variant("B2K3", BASIC, "double", True, (("and", "1"), ("mux", "1"))),
    "B2K2": Variant("B2K2", BASIC, "triple", True, (("and", "1"),)),
    "B2K1": Variant("B2K1", BASIC, "quad", False),
    "S3K1": Variant("S3K1", ENHANCED, "plain", True, (("and", "1"), ("junk", "K-1")), True),
}


@dataclass(frozen=True)
class NetworkConfig:
    variant: str = "E2K1"
    first_mul_optimized: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {sorted(VARIANTS)}")

    @property
    def spec(self) -> Variant:
        return VARIANTS[self.variant]

    @property
    def machine(self) -> MachineModel:
        return self.spec.machine

    def scratch_width(self, K: int) -> int:
        return 2 * K + 1 + sum(1 if w == "1" else K - 1 for _, w in self.spec.extra)


@dataclass(frozen=True)
class ModulusContext:
    N: int
    K: int = 0
    x: int | None = None

    def __post_init__(self):
        K = self.K or self.N.bit_length()
        object.__setattr__(self, "K", K)
        if self.N < 2 or not (2 ** (K - 1) <= self.N < 2 ** K):
            raise ValueError(f"N={self.N} is not a {K}-bit number")
        if self.x is not None and not (0 < self.x < self.N):
            raise ValueError("need 0 < x < N")


def modinv(a: int, N: int) -> int:
    try:
        return pow(a, -1, N)
    except ValueError:
        raise ValueError(f"{a} has no inverse mod {N}") from None


def classical_precompute(x: int, ctx: ModulusContext, L: int) -> dict:
    """Everything the classical computer hands to the network builders.

    ``powers[i] = (x^(2^i) mod N, x^(-2^i) mod N)`` by repeated squaring from a
    single inverse; ``doublings[i][j] = 2^j * powers[i][k] mod N``.
    """
    N, K = ctx.N, ctx.K
    if math.gcd(x, N) != 1:
        raise ValueError(f"gcd({x}, {N}) != 1")
    p, q = x % N, modinv(x, N)
    powers = []
    for _ in range(L):
        powers.append((p, q))
        p, q = p * p % N, q * q % N
    for f, g in powers:
        assert f * g % N == 1 % N
    doublings = [
        ([(f << j) % N for j in range(K)], [(g << j) % N for j in range(K)]) for f, g in powers
    ]
    return {"powers": powers, "doublings": doublings}


def bit(v: int, i: int) -> int:
    return (v >> i) & 1


# -- gate-level helpers ----------------------------------------------------------

def _ctl(q: int, negative: bool) -> Control | int:
    return neg(q) if negative else q


def emit_cx(b: CircuitBuilder, target: int, controls: Sequence, basic: bool, borrow: Sequence[int] = ()):
    """Controlled-NOT of any arity; on the basic machine arity 3 and 4 are
    expanded with a borrowed bit of arbitrary value:

        C[A+B],t = C[w,B],t C[A],w C[w,B],t C[A],w   (product form)
    """
    controls = list(controls)
    if not basic or len(controls) <= 2:
        b.x(target, *controls)
        return
    used = {c.qubit if isinstance(c, Control) else c for c in controls} | {target}
    w = next((q for q in borrow if q not in used), None)
    if w is None:
        raise CircuitError("no qubit available to borrow for gate expansion")
    A, B = controls[:2], controls[2:]
    rest = [q for q in borrow if q != w]
    for _ in range(2):
        b.x(w, *A)
        emit_cx(b, target, [w, *B], basic, rest)


# -- full adders --------------------------------------------------------------------

def emit_fa(b: CircuitBuilder, a: int, q1: int, q2: int, q3: int, custom: bool = False):
    """Full adder: q2 <- a^b^c, q3 <- carry, with (q1, q2, q3) = (b, c, 0)."""
    if a == 0:
        b.x(q3, q1, q2)
        b.x(q2, q1)
    elif custom:
        b.x(q3, q1)
        b.x(q3, neg(q1), q2)
        b.x(q2, neg(q1))
    else:
        b.x(q3, q2)
        b.x(q2)
        b.x(q3, q1, q2)
        b.x(q2, q1)


def emit_muxfa(b, form, a0, a1, E, l, bq, c, cout, scratch=None, bneg=False):
    """Multiplexed full adder on (l, bq, c, cout) with enable qubits E.

    Adds a = E and (a1 if l else a0) to (bq, c); c <- sum, cout <- carry.
    ``bneg`` means the b line holds the complement of b.
    """
    B = _ctl(bq, bneg)
    E = tuple(E)
    if form == "prime" and E:
        raise CircuitError("the prime form takes no enable bits")
    if form == "double" and len(E) != 1:
        raise CircuitError("the double-prime form takes one enable bit")
    if form == "triple" and len(E) > 1:
        form = "triple2"  # Barenco trick still leaves arity-3 gates
    if form == "quad" and len(E) < 2:
        form = "triple"
    swapped = (a0, a1) == (1, 0)
    if swapped:
        b.x(l)
    if a0 == a1 == 1:
        if form == "quad":
            _barenco(b, cout, E, (c,), bq)
        else:
            b.x(cout, *E, c)
        b.x(c, *E)
    elif a0 != a1:
        if form in ("plain", "prime", "triple2"):
            if form == "triple2":
                _barenco(b, cout, (*E, l), (c,), bq)
            else:
                b.x(cout, *E, l, c)
            b.x(c, *E, l)
        elif form == "double":
            b.x(scratch, *E, l)
            b.x(cout, scratch, c)
            b.x(c, scratch)
        elif form == "triple":
            _barenco(b, cout, (*E, l), (c,), bq)
            b.x(c, *E, l)
        elif form == "quad":
            # C[E,l,c],cout via b, then each controlled^3 via cout / the borrowed b
            for _ in range(2):
                _barenco(b, bq, E, (l,), cout)
                b.x(cout, bq, c)
            _barenco(b, c, E, (l,), cout)
        else:
            raise CircuitError(f"unknown MUXFA form {form!r}")
    b.x(cout, B, c)
    b.x(c, B)
    if form == "double" and a0 != a1:
        b.x(scratch, *E, l)
    if swapped:
        b.x(l)


def _barenco(b, target, A, Bc, w):
    """C[A+Bc],target as four gates using borrowed qubit w (any value)."""
    for _ in range(2):
        b.x(w, *A)
        b.x(target, w, *Bc)


def emit_muxha(b, a0, a1, E, l, bq, c, basic=False, bneg=False):
    """Multiplexed half adder: c <- a^b^c, no carry out."""
    B = _ctl(bq, bneg)
    swapped = (a0, a1) == (1, 0)
    if swapped:
        b.x(l)
    if a0 == a1 == 1:
        b.x(c, *E)
    elif a0 != a1:
        if basic and len(E) + 1 > 2:
            _barenco(b, c, tuple(E), (l,), bq)
        else:
            b.x(c, *E, l)
    b.x(c, B)
    if swapped:
        b.x(l)


def emit_madd(b, form, a, a2, E, l, beta, gamma, scratch=None, basic=False, bmask=0):
    """gamma <- beta + E*(a2 if l else a) mod 2^K, gamma preset to 0."""
    K = len(beta)
    for i in range(K - 1):
        emit_muxfa(b, form, bit(a, i), bit(a2, i), E, l, beta[i], gamma[i], gamma[i + 1],
                   scratch, bool(bit(bmask, i)))
    emit_muxha(b, bit(a, K - 1), bit(a2, K - 1), E, l, beta[K - 1], gamma[K - 1],
               basic, bool(bit(bmask, K - 1)))


# -- comparison -----------------------------------------------------------------------

def lt_mask(a: int, K: int) -> int:
    """Bits of b complemented by LT(a): every bit above 0, and bit 0 iff a is odd."""
    return ((1 << K) - 2) | (a & 1)


def emit_lt(b, a, beta, line, hat):
    """line ^= (b < a), scanning from the top bit down.

    hat[i-1] ends up holding "b and a agree on bits K-1..i".  beta is left
    complemented on the bits of ``lt_mask(a)``.
    """
    K = len(beta)
    if K == 1:
        if bit(a, 0):
            b.x(beta[0])
            b.x(line, beta[0])
        return
    top = K - 1
    if bit(a, top):
        b.x(hat[top - 1], beta[top])
        b.x(beta[top])
        b.x(line, beta[top])
    else:
        b.x(beta[top])
        b.x(hat[top - 1], beta[top])
    for i in range(top - 1, 0, -1):
        if bit(a, i):
            b.x(hat[i - 1], hat[i], beta[i])
            b.x(beta[i])
            b.x(line, hat[i], beta[i])
        else:
            b.x(beta[i])
            b.x(hat[i - 1], hat[i], beta[i])
    if bit(a, 0):
        b.x(beta[0])
        b.x(line, hat[0], beta[0])


def _lt_fn(b, a, beta, line, hat):
    emit_lt(b, a, beta, line, hat)


def emit_xlt(b, a, E, beta, target, copy, hat, basic=False, borrow=()):
    """target ^= E and (b < a); copy and hat restored to 0, beta restored."""
    emit_lt(b, a, beta, copy, hat)
    emit_cx(b, target, [*E, copy], basic, borrow)
    b.emit_inverse(_lt_fn, a, beta, copy, hat, fixed_layout=True)


# -- the network family ------------------------------------------------------------------

class Network:
    """Emits the mod-N networks for one variant into a builder.

    Methods take register *names* whenever a register can be relabelled, so
    that re-running a sub-network for inversion picks up the right qubits.
    """

    def __init__(self, b: CircuitBuilder, N: int, K: int, cfg: NetworkConfig):
        self.b, self.N, self.K, self.cfg = b, N, K, cfg
        self.v = cfg.spec
        self.basic = self.v.machine is BASIC

    # helpers
    def _scratch(self):
        return self.b.q("mux") if "mux" in self.b.bind else None

    def _form(self, E):
        f = self.v.form
        if f == "double" and len(E) != 1:
            raise CircuitError("double-prime cells need the enables combined first")
        return f

    def madd(self, a, a2, E, src, dst, bmask=0):
        b = self.b
        emit_madd(b, self._form(E), a, a2, E, b.q("ell"), b.reg(src), b.reg(dst),
                  self._scratch(), self.basic, bmask)

    def addn(self, a, E, src, dst):
        """dst <- src + E*a mod N; ell <- E and (src + a < N)."""
        b, N, K = self.b, self.N, self.K
        out = b.reg(dst)
        emit_xlt(b, N - a, E, b.reg(src), b.q("ell"), out[K - 1], out[: K - 1],
                 self.basic, borrow=b.reg(src))
        self.madd(((1 << K) + a - N) % (1 << K), a, E, src, dst)

    def addn_kept(self, a, E, src, dst):
        """3K+1 plan: comparator result goes straight to ell, its junk to the
        extra register, MADD reads the complemented source, then the
        comparator is undone.  ell and junk end at 0."""
        b, N, K = self.b, self.N, self.K
        v = N - a
        hat = b.reg("junk")
        emit_lt(b, v, b.reg(src), b.q("ell"), hat)
        self.madd(((1 << K) + a - N) % (1 << K), a, E, src, dst, bmask=lt_mask(v, K))
        b.emit_inverse(_lt_fn, v, b.reg(src), b.q("ell"), hat, fixed_layout=True)

    def _enable(self, E):
        """Combine two enable bits on the AND line when the variant has one."""
        if self.v.and_line and len(E) == 2:
            return True, (self.b.q("and"),)
        return False, tuple(E)

    def oaddn(self, a, E, acc, out):
        """acc <- acc + E*a mod N (after relabelling acc <-> out)."""
        b, N = self.b, self.N
        combined, E1 = self._enable(E)
        if combined:
            b.x(E1[0], *E)
        if self.v.keep_lt_junk:
            self.addn_kept(a, E1, acc, out)
            b.emit_inverse(lambda bb: Network(bb, N, self.K, self.cfg).addn_kept(N - a, E1, out, acc), fixed_layout=True)
        else:
            self.addn(a, E1, acc, out)
            emit_cx(b, b.q("ell"), E1, self.basic)
            b.emit_inverse(lambda bb: Network(bb, N, self.K, self.cfg).addn(N - a, E1, out, acc), fixed_layout=True)
        if combined:
            b.x(E1[0], *E)
        b.relabel(acc, out)

    def emul(self, a, E, ctrl, dst):
        """dst ^= (E and ctrl) * a."""
        b = self.b
        combined, E1 = self._enable((*E, ctrl))
        if combined:
            b.x(E1[0], *E, ctrl)
        for j in range(self.K):
            if bit(a, j):
                b.x(b.reg(dst)[j], *E1)
        if combined:
            b.x(E1[0], *E, ctrl)

    def xor(self, E, src, dst):
        b = self.b
        for s, d in zip(b.reg(src), b.reg(dst)):
            b.x(d, *E, s)

    def muln(self, a, E, src, acc, out):
        """acc <- E * (a * src mod N); src unchanged."""
        N, K = self.N, self.K
        self.emul(a, E, self.b.reg(src)[0], acc)
        for i in range(1, K):
            self.oaddn((a << i) % N, (*E, self.b.reg(src)[i]), acc, out)

    def omuln(self, a, E, main="beta", acc="gamma", out="delta"):
        """main <- a * main mod N when E, unchanged otherwise."""
        N = self.N
        ainv = modinv(a, N)
        self.muln(a, E, main, acc, out)
        self.b.emit_inverse(lambda bb: Network(bb, N, self.K, self.cfg).muln(ainv, E, acc, main, out))
        self.xor(E, acc, main)
        self.xor(E, main, acc)

    def expn(self, x, L):
        b = self.b
        ctx = ModulusContext(self.N, self.K)
        powers = classical_precompute(x, ctx, L)["powers"]
        alpha = b.reg("alpha")
        start = 0
        if self.cfg.first_mul_optimized and L >= 1:
            beta = b.reg("beta")
            for j in range(self.K):
                if bit(powers[0][0], j):
                    b.x(beta[j], alpha[0])
            b.x(alpha[0])
            b.x(beta[0], alpha[0])
            b.x(alpha[0])
            start = 1
        else:
            b.x(b.reg("beta")[0])
        for i in range(start, L):
            self.omuln(powers[i][0], (alpha[i],))


# -- standalone builders -------------------------------------------------------------------

def _alloc_scratch(b: CircuitBuilder, K: int, cfg: NetworkConfig):
    b.alloc("gamma", K)
    b.alloc("ell", 1)
    b.alloc("delta", K)
    for name, w in cfg.spec.extra:
        b.alloc(name, 1 if w == "1" else K - 1)


def _zero_contracts(b: CircuitBuilder, names):
    for n in names:
        b.require(n)
        b.ensure(n)


def build_fa(a: int, custom: bool = False) -> Circuit:
    b = CircuitBuilder()
    q1, = b.alloc("b", 1)
    q2, = b.alloc("c", 1)
    q3, = b.alloc("cout", 1)
    b.require("cout")
    emit_fa(b, a, q1, q2, q3, custom)
    return b.circuit()


def build_muxfa(form: str, a0: int, a1: int, enables: int = 0) -> Circuit:
    """Registers: en (enable bits), sel, b, c, cout and, for the double-prime
    form, a preset-0 scratch bit ``mux``."""
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}")
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    l, = b.alloc("sel", 1)
    bq, = b.alloc("b", 1)
    c, = b.alloc("c", 1)
    cout, = b.alloc("cout", 1)
    s = b.alloc("mux", 1)[0] if form == "double" else None
    b.require("cout")
    if s is not None:
        _zero_contracts(b, ["mux"])
    emit_muxfa(b, form, a0, a1, E, l, bq, c, cout, s)
    return b.circuit()


def build_muxha(a0: int, a1: int, enables: int = 0, basic: bool = False) -> Circuit:
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    l, = b.alloc("sel", 1)
    bq, = b.alloc("b", 1)
    c, = b.alloc("c", 1)
    emit_muxha(b, a0, a1, E, l, bq, c, basic)
    return b.circuit()


def build_madd(a: int, a2: int, K: int, enables: int = 1, form: str = "plain") -> Circuit:
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    beta = b.alloc("beta", K)
    gamma = b.alloc("gamma", K)
    l, = b.alloc("ell", 1)
    s = b.alloc("mux", 1)[0] if form == "double" else None
    _zero_contracts(b, ["gamma"] + (["mux"] if s is not None else []))
    emit_madd(b, form, a, a2, E, l, beta, gamma, s, basic=form in ("double", "triple", "quad"))
    return b.circuit()


def build_lt(a: int, K: int) -> Circuit:
    b = CircuitBuilder()
    beta = b.alloc("beta", K)
    line, = b.alloc("line", 1)
    hat = b.alloc("hat", K - 1)
    b.require("line")
    b.require("hat")
    emit_lt(b, a, beta, line, hat)
    return b.circuit()


def build_xlt(a: int, K: int, enables: int = 1, basic: bool = False) -> Circuit:
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    beta = b.alloc("beta", K)
    t, = b.alloc("target", 1)
    copy, = b.alloc("copy", 1)
    hat = b.alloc("hat", K - 1)
    _zero_contracts(b, ["copy", "hat"])
    emit_xlt(b, a, E, beta, t, copy, hat, basic, borrow=beta)
    return b.circuit()


def _network_builder(ctx: ModulusContext, cfg: NetworkConfig, enables: int, with_delta=True):
    b = CircuitBuilder()
    b.alloc("en", enables)
    b.alloc("beta", ctx.K)
    _alloc_scratch(b, ctx.K, cfg)
    return b, Network(b, ctx.N, ctx.K, cfg)


def build_addn(a: int, ctx: ModulusContext, enables: int = 1, cfg: NetworkConfig = NetworkConfig()) -> Circuit:
    """gamma <- beta + E*a mod N; ell <- E and (beta + a < N)."""
    if not 0 <= a <= ctx.N:
        raise ValueError("need 0 <= a <= N")
    b, net = _network_builder(ctx, cfg, enables)
    b.require("beta", "lt", ctx.N)
    _zero_contracts(b, ["gamma", "ell", "delta"])
    E = b.reg("en")
    if cfg.spec.keep_lt_junk:
        net.addn_kept(a, E, "beta", "gamma")
    else:
        net.addn(a, E, "beta", "gamma")
    return b.circuit()


def build_oaddn(a: int, ctx: ModulusContext, enables: int = 1, cfg: NetworkConfig = NetworkConfig()) -> Circuit:
    """beta <- beta + E*a mod N (the sum lands in beta's name after a relabel)."""
    if not 0 <= a < ctx.N:
        raise ValueError("need 0 <= a < N")
    b, net = _network_builder(ctx, cfg, enables)
    b.require("beta", "lt", ctx.N)
    _scratch_names = ["gamma", "ell", "delta"] + [n for n, _ in cfg.spec.extra]
    _zero_contracts(b, _scratch_names)
    net.oaddn(a, b.reg("en"), "beta", "gamma")
    return b.circuit()


def build_emul(a: int, K: int, enables: int = 1) -> Circuit:
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    ctrl, = b.alloc("src", 1)
    g = b.alloc("gamma", K)
    _zero_contracts(b, ["gamma"])
    for j in range(K):
        if bit(a, j):
            b.x(g[j], *E, ctrl)
    return b.circuit()


def build_xor(K: int, enables: int = 1) -> Circuit:
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    alpha = b.alloc("alpha", K)
    beta = b.alloc("beta", K)
    for s, d in zip(alpha, beta):
        b.x(d, *E, s)
    return b.circuit()


def build_muln(a: int, ctx: ModulusContext, cfg: NetworkConfig = NetworkConfig()) -> Circuit:
    """gamma <- E*(a*beta mod N), one enable line ``en``."""
    b, net = _network_builder(ctx, cfg, 1)
    b.require("beta", "lt", ctx.N)
    _zero_contracts(b, ["ell", "delta"] + [n for n, _ in cfg.spec.extra])
    net.muln(a % ctx.N, tuple(b.reg("en")), "beta", "gamma", "delta")
    return b.circuit()


def build_omuln(a: int, ctx: ModulusContext, cfg: NetworkConfig = NetworkConfig()) -> Circuit:
    if math.gcd(a, ctx.N) != 1:
        raise ValueError(f"gcd({a}, {ctx.N}) != 1; no inverse")
    b, net = _network_builder(ctx, cfg, 1)
    b.require("beta", "lt", ctx.N)
    _zero_contracts(b, ["gamma", "ell", "delta"] + [n for n, _ in cfg.spec.extra])
    net.omuln(a % ctx.N, tuple(b.reg("en")))
    return b.circuit()


def expn_builder(x: int, ctx: ModulusContext, L: int, cfg: NetworkConfig, counting: bool = False):
    if L < 1:
        raise ValueError("L must be at least 1")
    if math.gcd(x, ctx.N) != 1:
        raise ValueError(f"gcd({x}, {ctx.N}) != 1")
    b = CircuitBuilder(counting=counting)
    b.alloc("alpha", L)
    b.alloc("beta", ctx.K)
    _alloc_scratch(b, ctx.K, cfg)
    _zero_contracts(b, ["gamma", "ell", "delta"] + [n for n, _ in cfg.spec.extra])
    b.require("beta")
    b.ensure("beta", "lt", ctx.N)
    Network(b, ctx.N, ctx.K, cfg).expn(x, L)
    return b


def build_expn(x: int, ctx: ModulusContext, L: int, cfg: NetworkConfig = NetworkConfig()) -> Circuit:
    """beta <- x^a mod N for a in alpha; all scratch returned to 0."""
    return expn_builder(x, ctx, L, cfg).circuit()
