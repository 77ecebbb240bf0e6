"""Command-line front end: ``qfn <command> ...`` (or ``python3 -m qfn``).

Every run prints a manifest first (command, parameters, seed, version), then
its results either as aligned text or, with ``--format records``, as one
JSON object per line.  ``--check`` turns the published reference values that
apply to the run into pass/fail gates and sets the exit status.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .arith_networks import (
    FORMS, VARIANTS, ModulusContext, NetworkConfig, build_addn, build_emul, build_expn, build_fa,
    build_lt, build_madd, build_muln, build_muxfa, build_muxha, build_oaddn, build_omuln,
    build_xlt, build_xor,
)
from .cost_analysis import (
    MIN_SPACE, TABLE_VARIANTS, empirical_average, formula_counts, leading_coefficients,
    primitive_count_table, published_primitive_table, projection,
)
from .gate_ir import Circuit, CircuitError, CPhase, Rotation, parse, serialize
from .machine_model import MACHINES, circuit_pulses, count_gates, validate
from .minimal_space import build_add_ltr, build_expn_min, build_oaddn_min
from .shor_demo import (
    STYLES, build_expn15, build_mod2k, build_period_demo, run_factoring_experiment, y_distribution,
)
from .simulator import (
    SimulationError, StateVector, basis_state, build_qft, ft_reference_prob, run_basis,
    run_statevector,
)

DEFAULT_SEED = 20240601
NETWORKS = ("fa", "muxfa", "muxha", "madd", "lt", "xlt", "addn", "oaddn", "emul", "muln",
            "omuln", "xor", "expn", "add-ltr", "oaddn-min", "expn-min", "qft", "expn15", "mod2k")


class UsageError(Exception):
    pass


def _default_seed() -> int:
    env = os.environ.get("QFN_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"QFN_SEED must be an integer, got {env!r}") from None


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


class Output:
    """Collects result rows and check outcomes; prints deterministically."""

    def __init__(self, fmt: str, stream=None):
        self.fmt, self._stream = fmt, stream
        self.failures = 0

    @property
    def stream(self):
        return self._stream or sys.stdout

    def record(self, kind: str, **fields):
        if self.fmt == "records":
            print(json.dumps({"record": kind, **_jsonable(fields)}, sort_keys=True), file=self.stream)
        else:
            body = "  ".join(f"{k}={_fmt(v)}" for k, v in fields.items())
            print(f"{kind:<10} {body}", file=self.stream)

    def text(self, line: str):
        if self.fmt != "records":
            print(line, file=self.stream)

    def check(self, name: str, ok: bool, detail: str = ""):
        self.failures += not ok
        self.record("check", name=name, status="PASS" if ok else "FAIL", detail=detail)


# -- build -------------------------------------------------------------------------------------

def _variant(s: str) -> str:
    v = s.upper()
    if v not in VARIANTS:
        raise UsageError(f"unknown variant {s!r}; choose from {', '.join(VARIANTS)}")
    return v


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"'{args.network}' needs " + ", ".join("--" + m.replace("_", "-") for m in missing))


def make_circuit(args) -> Circuit:
    n = args.network
    cfg = NetworkConfig(_variant(args.variant))
    en = args.enables
    if n == "fa":
        _need(args, "a")
        return build_fa(args.a, args.custom)
    if n == "muxfa":
        _need(args, "a", "a2")
        return build_muxfa(args.form, args.a, args.a2, 0 if en is None else en)
    if n == "muxha":
        _need(args, "a", "a2")
        return build_muxha(args.a, args.a2, 0 if en is None else en, args.basic)
    if n == "madd":
        _need(args, "a", "a2", "K")
        return build_madd(args.a, args.a2, args.K, 1 if en is None else en, args.form)
    if n == "lt":
        _need(args, "a", "K")
        return build_lt(args.a, args.K)
    if n == "xlt":
        _need(args, "a", "K")
        return build_xlt(args.a, args.K, 1 if en is None else en, args.basic)
    if n == "emul":
        _need(args, "a", "K")
        return build_emul(args.a, args.K, 1 if en is None else en)
    if n == "xor":
        _need(args, "K")
        return build_xor(args.K, 1 if en is None else en)
    if n == "add-ltr":
        _need(args, "a", "K")
        return build_add_ltr(args.a, args.K, 0 if en is None else en)
    if n == "qft":
        _need(args, "L")
        return build_qft(args.L, args.ft, args.prune)
    if n == "expn15":
        _need(args, "x")
        return build_expn15(args.x, args.style)
    if n == "mod2k":
        _need(args, "L", "K")
        return build_mod2k(args.L, args.K)
    _need(args, "N")
    ctx = ModulusContext(args.N)
    if n == "addn":
        _need(args, "a")
        return build_addn(args.a, ctx, 1 if en is None else en, cfg)
    if n == "oaddn":
        _need(args, "a")
        return build_oaddn(args.a, ctx, 1 if en is None else en, cfg)
    if n == "oaddn-min":
        _need(args, "a")
        return build_oaddn_min(args.a, ctx, 1 if en is None else en)
    if n == "muln":
        _need(args, "a")
        return build_muln(args.a, ctx, cfg)
    if n == "omuln":
        _need(args, "a")
        return build_omuln(args.a, ctx, cfg)
    _need(args, "x", "L")
    if n == "expn":
        return build_expn(args.x, ctx, args.L, cfg)
    if n == "expn-min":
        return build_expn_min(args.x, ctx, args.L)
    raise UsageError(f"unknown network {n!r}")


def _circuit_report(out: Output, c: Circuit, name: str):
    v = count_gates(c)
    phase = sum(isinstance(op, (Rotation, CPhase)) for op in c.ops)
    native = [m for m, model in MACHINES.items() if not validate(c, model)]
    out.record("circuit", network=name, qubits=c.qubit_count, ops=len(c.ops), gates=list(v),
               phase_ops=phase, pulses=circuit_pulses(c), machines=",".join(native))


def cmd_build(args, out: Output):
    c = make_circuit(args)
    doc = serialize(c)
    if args.out:
        Path(args.out).write_bytes(doc)
        out.record("wrote", path=args.out, bytes=len(doc))
    else:
        out.text(doc.decode().rstrip("\n"))
    _circuit_report(out, c, args.network)
    if args.check:
        for name, ok, detail in _build_checks(args, c):
            out.check(name, ok, detail)


def _build_checks(args, c: Circuit):
    p = circuit_pulses(c)
    if args.network == "qft":
        yield "ft pulses = L(2L-1)", p == args.L * (2 * args.L - 1) or args.prune is not None, f"{p}"
    if args.network == "fa" and args.a == 0 and not args.custom:
        yield "FA(0) has 2 gates", len(c.ops) == 2, f"{len(c.ops)}"
    if args.network == "expn15" and args.x == 7:
        want = {"standard": 34, "drop-final-not": 33, "custom": 30}[args.style]
        yield f"EXPN(7,15) {args.style} pulses", p == want, f"{p} vs {want}"
    if args.network == "mod2k":
        yield "MOD pulses + prep = 5K+L", p + args.L == 5 * args.K + args.L, f"{p + args.L}"
    if args.network == "expn-min" and args.L == 2 and args.N.bit_length() == 4:
        yield "minimal-space storage = 11 qubits", c.qubit_count == 11, f"{c.qubit_count}"
    if args.network == "expn":
        K = args.N.bit_length()
        want = args.L + NetworkConfig(_variant(args.variant)).scratch_width(K) + K
        yield "register plan size", c.qubit_count == want, f"{c.qubit_count} vs {want}"
        model = MACHINES[NetworkConfig(_variant(args.variant)).machine.kind]
        yield f"native on {model}", not validate(c, model), ""


# -- simulate ----------------------------------------------------------------------------------

def _assignments(items):
    vals = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"expected REG=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            vals[k] = int(v, 0) if not set(v) <= {"0", "1"} or len(v) == 1 else int(v, 2)
        except ValueError:
            raise UsageError(f"bad value in {item!r}") from None
    return vals


def cmd_simulate(args, out: Output):
    try:
        c = parse(Path(args.circuit).read_bytes())
    except OSError as e:
        raise UsageError(str(e)) from None
    fixed = _assignments(args.set)
    has_phase = any(isinstance(op, (Rotation, CPhase)) for op in c.ops)
    mode = args.mode or ("vector" if has_phase else "basis")
    if mode == "basis" and has_phase:
        raise UsageError("circuit contains rotations or phases; use --mode vector")
    if mode == "vector":
        s = basis_state(c, **fixed)
        psi = run_statevector(c, StateVector.basis(c.qubit_count, s.bits))
        for i, a in enumerate(psi.amplitudes):
            if abs(a) > 1e-12:
                out.record("amplitude", index=format(i, f"0{c.qubit_count}b"),
                           re=round(float(a.real), 12), im=round(float(a.imag), 12))
        return
    sweeps = [(None, None)]
    if args.sweep:
        reg, _, rng = args.sweep.partition("=")
        lo, _, hi = rng.partition(":")
        try:
            sweeps = [(reg, v) for v in range(int(lo), int(hi))]
        except ValueError:
            raise UsageError("sweep must look like REG=LO:HI") from None
    for reg, v in sweeps:
        vals = dict(fixed)
        if reg is not None:
            vals[reg] = v
        s = run_basis(c, basis_state(c, **vals), contract_checks=args.contracts)
        out.record("state", **{k: s.values()[k] for k in sorted(s.layout)})


# -- count -------------------------------------------------------------------------------------

def cmd_count(args, out: Output):
    configs = list(TABLE_VARIANTS) if args.all else [_variant(args.variant)]
    out.text(f"Coefficient of L*K^2 ({args.case} case)")
    for cfg in configs:
        if cfg not in TABLE_VARIANTS:
            out.record("table", config=cfg, note="leading pulse coefficient 140 (average case only)")
            continue
        vec, p = leading_coefficients(cfg, args.case)
        out.record("table", config=cfg, gates=list(vec), pulses=p)
    if args.K is not None and args.L is not None:
        for cfg in configs + ([MIN_SPACE] if args.all else []):
            try:
                fr = formula_counts(cfg, args.case, args.K, args.L)
            except ValueError as e:
                out.record("formula", config=cfg, note=str(e))
                continue
            out.record("formula", config=cfg, K=args.K, L=args.L,
                       gates=list(fr.gate_vector) if fr.gate_vector else "-",
                       pulses=fr.pulse_total, leading_only=fr.leading_only)
        if args.measure:
            for cfg in configs:
                res = empirical_average(cfg, args.K, args.L, args.measure, args.seed, args.jobs)
                coeffs, pc = res.per_lk2()
                out.record("measured", config=cfg, K=args.K, L=args.L, trials=args.measure,
                           mean_pulses=float(res.mean_pulses), per_LK2=[round(c, 3) for c in coeffs],
                           pulses_per_LK2=round(pc, 2))
    if args.primitives:
        K = args.K or 6
        for name, row in primitive_count_table(K).items():
            out.record("primitive", name=name, worst=list(row["worst"]), avg=list(row["avg"]))
    if args.projection:
        for cfg, v in projection().items():
            out.record("projection", config=cfg, K=432, L=864, pulses=float(v))
    if args.check:
        for name, ok, detail in _formula_checks():
            out.check(name, ok, detail)


def _formula_checks():
    for cfg, want in (("E2K1", 15284), ("E2K2", 14878)):
        got = formula_counts(cfg, "avg", 4, 8).pulse_total
        yield f"{cfg} avg pulses K=4 L=8", got == want, f"{got}"
    got = formula_counts(MIN_SPACE, "avg", 4, 2).pulse_total
    yield "minimal-space avg pulses K=4 L=2", got == 1406, f"{got}"
    table, pub = primitive_count_table(6), published_primitive_table(6)
    for name, row in pub.items():
        yield f"{name} worst/avg", table[name] == row, f"{table[name]}"


# -- factor / qft-test ---------------------------------------------------------------------------

def cmd_factor(args, out: Output):
    cfg = NetworkConfig(_variant(args.variant)) if args.variant else None
    rep = run_factoring_experiment(args.N, args.x, args.L, cfg, args.seed, args.trials)
    if args.per_trial:
        for i, t in enumerate(rep.trials):
            out.record("trial", index=i, y=t.y, r=t.r, factors=list(t.factors) if t.factors else "-",
                       reason=t.reason or "ok")
    out.record("summary", N=args.N, x=args.x, L=args.L, circuit=rep.circuit, trials=args.trials,
               success_rate=rep.success_rate, y_counts=rep.y_counts(),
               note="y=0 counts as a failure")
    if args.check:
        ok = all(t.factors is None or (t.factors[0] * t.factors[1] == args.N and min(t.factors) > 1)
                 for t in rep.trials)
        out.check("reported factors multiply to N", ok)
        if (args.N, args.x, args.L) == (15, 7, 2) and args.trials >= 1000:
            out.check("success rate 1/2 +- 0.02", abs(rep.success_rate - 0.5) <= 0.02,
                      f"{rep.success_rate:.4f}")


def qft_test_report(L: int, K: int):
    demo = build_period_demo(build_mod2k(L, K), L)
    probs = y_distribution(demo, L)
    ref = ft_reference_prob(L, 2 ** K).probabilities
    prep_and_mod = circuit_pulses(build_mod2k(L, K)) + L
    return demo, probs, ref, prep_and_mod


def cmd_qft_test(args, out: Output):
    L, K = args.L, args.K
    if K > L:
        raise UsageError("need K <= L")
    demo, probs, ref, prep = qft_test_report(L, K)
    total = circuit_pulses(demo)
    out.record("pulses", prep_and_function=prep, fourier=total - prep, total=total)
    for y, p in enumerate(probs):
        if p > 1e-12:
            out.record("outcome", y=format(y, f"0{L}b"), probability=round(float(p), 12))
    rng = np.random.default_rng(args.seed)
    draws = rng.choice(2 ** L, p=probs / probs.sum(), size=args.shots)
    out.record("samples", shots=args.shots, distinct=sorted(set(int(d) for d in draws)))
    if args.check:
        step = 2 ** (L - K)
        support = all((p > 1e-10) == (y % step == 0) for y, p in enumerate(probs))
        mass = all(abs(p - 2 ** -K) <= 1e-10 for y, p in enumerate(probs) if y % step == 0)
        out.check("support on multiples of 2^(L-K)", support)
        out.check("mass 1/2^K on each", mass)
        out.check("matches closed form", float(np.max(np.abs(probs - ref))) <= 1e-10)
        out.check("pulses 5K+L + L(2L-1)", total == 5 * K + L + L * (2 * L - 1), f"{total}")
        if (L, K) == (2, 1):
            out.check("13 pulses", total == 13, f"{total}")


# -- selfcheck ------------------------------------------------------------------------------------

def _selfcheck_items(seed: int):
    yield from _formula_checks()
    c = build_qft(2)
    yield "FT L=2: 3 ops, 6 pulses", len(c.ops) == 3 and circuit_pulses(c) == 6, f"{circuit_pulses(c)}"
    p = {s: circuit_pulses(build_expn15(7, s)) for s in STYLES}
    yield "EXPN(7,15) standard = 34", p["standard"] == 34, f"{p['standard']}"
    yield "EXPN(7,15) drop-final-not = 33", p["drop-final-not"] == 33, f"{p['drop-final-not']}"
    yield "custom lookup + prep = 32", p["custom"] + 2 == 32, f"{p['custom'] + 2}"
    yield "custom lookup + prep + FT = 38", p["custom"] + 2 + 6 == 38, f"{p['custom'] + 8}"
    demo, probs, ref, _ = qft_test_report(2, 1)
    yield "MOD test L=2 K=1: 13 pulses", circuit_pulses(demo) == 13, f"{circuit_pulses(demo)}"
    yield "MOD test: y0 = 0", abs(probs[0] + probs[2] - 1) <= 1e-10, ""
    c = build_expn_min(7, ModulusContext(15), 2)
    yield "minimal-space EXPN uses 11 qubits", c.qubit_count == 11, f"{c.qubit_count}"
    c = build_expn(7, ModulusContext(15), 8)
    yield "E2K1 EXPN K=4 L=8 uses 21 qubits", c.qubit_count == 21, f"{c.qubit_count}"
    ok = all(run_basis(c, basis_state(c, alpha=a), True)["beta"] == pow(7, a, 15) for a in range(256))
    yield "E2K1 EXPN(7,15) over all a < 256", ok, ""
    rep = run_factoring_experiment(15, 7, 2, seed=seed, trials=10_000)
    yield "factor 15: success 1/2 +- 0.02", abs(rep.success_rate - 0.5) <= 0.02, f"{rep.success_rate:.4f}"


def cmd_selfcheck(args, out: Output):
    for name, ok, detail in _selfcheck_items(args.seed):
        out.check(name, ok, detail)
    if out.failures:
        out.text(f"{out.failures} check(s) failed")


# -- entry point -----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "records"), default="text")
    common.add_argument("--seed", type=int, default=None, help="default: $QFN_SEED or a fixed value")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--check", action="store_true", help="gate on published reference values")

    p = argparse.ArgumentParser(prog="qfn", description="Modular exponentiation networks for order finding.")
    p.add_argument("--version", action="version", version=f"qfn {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="emit a circuit document")
    b.add_argument("network", choices=NETWORKS)
    for flag in ("--a", "--a2", "--K", "--N", "--x", "--L", "--enables", "--prune"):
        b.add_argument(flag, type=int)
    b.add_argument("--variant", default="E2K1")
    b.add_argument("--form", choices=FORMS, default="plain")
    b.add_argument("--style", choices=STYLES, default="standard")
    b.add_argument("--ft", choices=("hat", "tilde"), default="hat")
    b.add_argument("--custom", action="store_true")
    b.add_argument("--basic", action="store_true")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("simulate", parents=[common], help="run a circuit document")
    s.add_argument("circuit")
    s.add_argument("--set", action="append", metavar="REG=VALUE")
    s.add_argument("--sweep", metavar="REG=LO:HI")
    s.add_argument("--mode", choices=("basis", "vector"))
    s.add_argument("--contracts", action="store_true", help="enforce register contracts")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("count", parents=[common], help="gate and pulse counts")
    c.add_argument("--variant", default="E2K1")
    c.add_argument("--all", action="store_true")
    c.add_argument("--case", choices=("avg", "worst"), default="avg")
    c.add_argument("--K", type=int)
    c.add_argument("--L", type=int)
    c.add_argument("--measure", type=int, metavar="TRIALS", help="also count real networks")
    c.add_argument("--primitives", action="store_true")
    c.add_argument("--projection", action="store_true", help="closed forms at K=432, L=864")
    c.set_defaults(func=cmd_count)

    f = sub.add_parser("factor", parents=[common], help="simulate order finding")
    f.add_argument("--N", type=int, default=15)
    f.add_argument("--x", type=int, default=7)
    f.add_argument("--L", type=int, default=2)
    f.add_argument("--trials", type=int, default=1000)
    f.add_argument("--variant", help="use the general network instead of the N=15 lookup")
    f.add_argument("--per-trial", action="store_true")
    f.set_defaults(func=cmd_factor)

    q = sub.add_parser("qft-test", parents=[common], help="Fourier transform of a mod 2^K")
    q.add_argument("--L", type=int, default=2)
    q.add_argument("--K", type=int, default=1)
    q.add_argument("--shots", type=int, default=1000)
    q.set_defaults(func=cmd_qft_test)

    sc = sub.add_parser("selfcheck", parents=[common], help="check the published reference values")
    sc.set_defaults(func=cmd_selfcheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args.format)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "format")}
        out.record("manifest", command=args.command, version=__version__, seed=args.seed,
                   parameters=json.dumps(_jsonable(params), sort_keys=True),
                   outputs=getattr(args, "out", None) or "-")
        args.func(args, out)
    except UsageError as e:
        parser.error(str(e))
    except (CircuitError, SimulationError, ValueError) as e:
        print(f"qfn: error: {e}", file=sys.stderr)
        return 2
    return 1 if out.failures else 0


if __name__ == "__main__":
    sys.exit(main())
