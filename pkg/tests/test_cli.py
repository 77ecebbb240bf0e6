import json

import pytest

from qfn.cli import DEFAULT_SEED, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def records(text):
    return [json.loads(line) for line in text.splitlines()]


def test_build_then_simulate(tmp_path, capsys):
    path = tmp_path / "expn.qc"
    code, _ = run(capsys, "build", "expn", "--N", "15", "--x", "7", "--L", "3", "--out", str(path), "--check")
    assert code == 0 and path.read_bytes().startswith(b"qubits")
    code, out = run(capsys, "simulate", str(path), "--sweep", "alpha=0:8", "--contracts", "--format", "records")
    states = [r for r in records(out) if r["record"] == "state"]
    assert [s["beta"] for s in states] == [pow(7, a, 15) for a in range(8)]


def test_simulate_vector_mode(tmp_path, capsys):
    path = tmp_path / "ft.qc"
    run(capsys, "build", "qft", "--L", "2", "--out", str(path))
    code, out = run(capsys, "simulate", str(path), "--format", "records")
    amps = [r for r in records(out) if r["record"] == "amplitude"]
    assert code == 0 and len(amps) == 4
    assert all(abs(a["re"] - 0.5) < 1e-9 for a in amps)


def test_manifest_comes_first_and_uses_seed(capsys, monkeypatch):
    monkeypatch.delenv("QFN_SEED", raising=False)
    _, out = run(capsys, "qft-test", "--format", "records")
    first = records(out)[0]
    assert first["record"] == "manifest" and first["seed"] == DEFAULT_SEED
    monkeypatch.setenv("QFN_SEED", "77")
    _, out = run(capsys, "qft-test", "--format", "records")
    assert records(out)[0]["seed"] == 77


def test_runs_are_deterministic(capsys):
    a = run(capsys, "factor", "--trials", "300", "--seed", "4", "--per-trial")
    b = run(capsys, "factor", "--trials", "300", "--seed", "4", "--per-trial")
    assert a == b


def test_qft_test_checks(capsys):
    code, out = run(capsys, "qft-test", "--L", "2", "--K", "1", "--check", "--format", "records")
    rows = records(out)
    assert code == 0
    assert any(r["record"] == "pulses" and r["total"] == 13 for r in rows)
    assert all(r["status"] == "PASS" for r in rows if r["record"] == "check")


def test_count_checks_and_tables(capsys):
    code, out = run(capsys, "count", "--all", "--K", "4", "--L", "8", "--primitives", "--check",
                    "--format", "records")
    rows = records(out)
    assert code == 0
    formula = {r["config"]: r["pulses"] for r in rows if r["record"] == "formula" and "pulses" in r}
    assert formula["E2K1"] == 15284 and formula["E2K2"] == 14878
    assert any(r["record"] == "primitive" and r["name"] == "MUXFA[2]" for r in rows)


def test_factor_check_exit_status(capsys):
    code, out = run(capsys, "factor", "--trials", "10000", "--check", "--seed", "1")
    assert code == 0 and "success rate" in out
    # a different modulus through the general network
    code, out = run(capsys, "factor", "--N", "21", "--x", "2", "--L", "9", "--variant", "E2K1",
                    "--trials", "50", "--check")
    assert code == 0


def test_build_checks_pass(capsys):
    code, _ = run(capsys, "build", "fa", "--a", "0", "--check")
    assert code == 0
    code, out = run(capsys, "build", "expn15", "--x", "7", "--style", "custom", "--check")
    assert code == 0 and "status=PASS" in out


def test_failed_check_sets_exit_status(capsys, monkeypatch):
    import qfn.cli
    monkeypatch.setattr(qfn.cli, "_formula_checks", lambda: iter([("forced", False, "x")]))
    code, out = run(capsys, "count", "--check")
    assert code == 1 and "status=FAIL" in out


def test_errors(capsys, monkeypatch):
    with pytest.raises(SystemExit) as e:
        main(["build", "expn", "--N", "15"])
    assert e.value.code == 2
    assert main(["build", "expn", "--N", "15", "--x", "5", "--L", "2"]) == 2
    monkeypatch.setenv("QFN_SEED", "abc")
    with pytest.raises(SystemExit):
        main(["selfcheck"])


def test_selfcheck_passes(capsys):
    code, out = run(capsys, "selfcheck")
    assert code == 0 and "FAIL" not in out
