"""Modular exponentiation with K+1 qubits of scratch.

Addition without scratch space works from the most significant end: adding
2^i to the register means incrementing the sub-register beta[i..], and an
increment is the cascade

    flip beta[top] if everything below it is 1, ..., flip beta[i+1] if beta[i] is 1, flip beta[i]

Every gate carries the enable bits as extra controls, so these circuits need
controlled^k-NOT gates of unbounded k (the "unrestricted" machine).
"""
from __future__ import annotations

import math

from .arith_networks import ModulusContext, bit, classical_precompute, modinv
from .gate_ir import Circuit, CircuitBuilder


def emit_increment(b: CircuitBuilder, qubits, E=()):
    """qubits <- qubits + 1 mod 2^len (qubits[0] is the low bit)."""
    for t in range(len(qubits) - 1, -1, -1):
        b.x(qubits[t], *E, *qubits[:t])


def emit_add_ltr(b: CircuitBuilder, a: int, E, reg):
    """(reg) <- reg + a mod 2^len(reg); with an overflow qubit on top of a
    K-qubit register this is the full (K+1)-bit sum."""
    for i in range(len(reg)):
        if bit(a, i):
            emit_increment(b, reg[i:], E)


def emit_madd_prime(b: CircuitBuilder, a0: int, a1: int, E, sel: int, beta):
    """beta <- beta + (a1 if sel else a0) mod 2^K when all of E are 1."""
    for i in range(len(beta)):
        p, q = bit(a0, i), bit(a1, i)
        if p == q == 0:
            continue
        if p == q:
            emit_increment(b, beta[i:], E)
            continue
        if p:
            b.x(sel)
        emit_increment(b, beta[i:], (*E, sel))
        if p:
            b.x(sel)


def emit_oaddn_min(b: CircuitBuilder, a: int, N: int, E, beta, over: int):
    """beta <- beta + E*a mod N using the single overflow qubit ``over``."""
    K = len(beta)
    reg = (*beta, over)
    emit_add_ltr(b, (1 << K) - N + a, E, reg)
    emit_madd_prime(b, N - a, ((1 << K) - a) % (1 << K), E, over, beta)
    emit_add_ltr(b, a, E, reg)


def _muln_min(b: CircuitBuilder, a: int, N: int, E, src, acc, over):
    for j in range(len(acc)):
        if bit(a, j):
            b.x(acc[j], *E, src[0])
    for i in range(1, len(src)):
        emit_oaddn_min(b, (a << i) % N, N, (*E, src[i]), acc, over)


def emit_omuln_min(b: CircuitBuilder, a: int, N: int, E, beta, gamma, over):
    _muln_min(b, a, N, E, beta, gamma, over)
    b.emit_inverse(_muln_min, modinv(a, N), N, E, gamma, beta, over, fixed_layout=True)
    for s, d in zip(gamma, beta):
        b.x(d, *E, s)
    for s, d in zip(beta, gamma):
        b.x(d, *E, s)


def build_add_ltr(a: int, K: int, enables: int = 0) -> Circuit:
    """Registers: en, beta (K), overflow (1, preset 0)."""
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    beta = b.alloc("beta", K)
    over = b.alloc("overflow", 1)
    b.require("overflow")
    emit_add_ltr(b, a, E, (*beta, *over))
    return b.circuit()


def build_madd_prime(a: int, a2: int, K: int, enables: int = 0) -> Circuit:
    """Adds ``a`` when the select qubit (``overflow``) is 0 and ``a2`` when it is 1."""
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    beta = b.alloc("beta", K)
    sel, = b.alloc("overflow", 1)
    emit_madd_prime(b, a, a2, E, sel, beta)
    return b.circuit()


def build_oaddn_min(a: int, ctx: ModulusContext, enables: int = 1) -> Circuit:
    if not 0 <= a < ctx.N:
        raise ValueError("need 0 <= a < N")
    b = CircuitBuilder()
    E = b.alloc("en", enables)
    beta = b.alloc("beta", ctx.K)
    over, = b.alloc("overflow", 1)
    b.require("beta", "lt", ctx.N)
    b.require("overflow")
    b.ensure("overflow")
    emit_oaddn_min(b, a, ctx.N, E, beta, over)
    return b.circuit()


def build_expn_min(x: int, ctx: ModulusContext, L: int, first_mul_optimized: bool = True,
                   counting: bool = False):
    """beta <- x^a mod N with scratch gamma (K) and one overflow qubit."""
    if L < 1:
        raise ValueError("L must be at least 1")
    if math.gcd(x, ctx.N) != 1:
        raise ValueError(f"gcd({x}, {ctx.N}) != 1")
    N, K = ctx.N, ctx.K
    b = CircuitBuilder(counting=counting)
    alpha = b.alloc("alpha", L)
    beta = b.alloc("beta", K)
    gamma = b.alloc("gamma", K)
    over, = b.alloc("overflow", 1)
    for name in ("beta", "gamma", "overflow"):
        b.require(name)
    for name in ("gamma", "overflow"):
        b.ensure(name)
    b.ensure("beta", "lt", N)
    powers = classical_precompute(x, ctx, L)["powers"]
    start = 0
    if first_mul_optimized:
        for j in range(K):
            if bit(powers[0][0], j):
                b.x(beta[j], alpha[0])
        b.x(alpha[0])
        b.x(beta[0], alpha[0])
        b.x(alpha[0])
        start = 1
    else:
        b.x(beta[0])
    for i in range(start, L):
        emit_omuln_min(b, powers[i][0], N, (alpha[i],), beta, gamma, over)
    return b if counting else b.circuit()
