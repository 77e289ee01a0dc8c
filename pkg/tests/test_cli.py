import subprocess
import sys
from pathlib import Path

import pytest

from doctrines.cli import DEMOS, run_command

ROOT = Path(__file__).resolve().parent.parent
CHAIN = str(ROOT / "specs" / "chain.spec")
POW = str(ROOT / "specs" / "powerset.spec")


def report(text):
    block = text.split("```report\n", 1)[1].split("```", 1)[0]
    return dict(line.split("=", 1) for line in block.strip().splitlines())


def test_validate():
    text, status = run_command(["validate", CHAIN])
    assert status == 0, text
    assert report(text)["status"] == "pass"


@pytest.mark.parametrize("kind, status", [("heyting", 0), ("boolean", 1)])
def test_detect_single_kind(kind, status):
    text, got = run_command(["detect", CHAIN, "--doctrine", "P", "--kind", kind])
    assert got == status, text


def test_detect_all_kinds_reports_each():
    text, status = run_command(["detect", CHAIN, "--doctrine", "P"])
    kv = report(text)
    assert status == 0
    assert kv["kind.primary"] == "holds" and kv["kind.boolean"] == "absent"


def test_extend_and_transport_on_chain():
    for cmd in ("extend", "transport", "conservative"):
        text, status = run_command([cmd, CHAIN, "--doctrine", "P", "--object", "s", "--axiom", "h"])
        assert status == 0, text


def test_extend_on_large_powerset_probes():
    args = ["--doctrine", "Pow", "--object", "[0,1]", "--axiom", "[0]"]
    for cmd in ("extend", "transport"):
        text, status = run_command([cmd, POW] + args)
        assert status == 0, text


def test_factorize_exit_codes():
    base = ["factorize", CHAIN, "--doctrine", "P", "--object", "t", "--model", "G",
            "--constant", "t<=t"]
    assert run_command(base + ["--axiom", "h"])[1] == 0
    text, status = run_command(base + ["--axiom", "0"])
    assert status == 1 and "ConstantDoesNotSatisfyAxiom" in text


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["detect", CHAIN, "--doctrine", "Q"],
    ["validate", "/nonexistent.spec"],
    ["factorize", CHAIN, "--doctrine", "P", "--object", "s", "--axiom", "h"],
    ["demo", "nope"],
    ["factorize", CHAIN, "--doctrine", "P", "--object", "s", "--axiom", "h", "--model", "G",
     "--constant", "t<=t"],
])
def test_usage_errors_exit_two(argv):
    assert run_command(argv)[1] == 2


def test_parse_error_exits_two(tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("poset A\n  elements [a\nend\n")
    text, status = run_command(["validate", str(bad)])
    assert status == 2 and "line 2" in text


@pytest.mark.parametrize("name", DEMOS)
def test_demos_pass_and_are_deterministic(name):
    a, sa = run_command(["demo", name])
    b, sb = run_command(["demo", name])
    assert sa == sb == 0, a
    assert a == b


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "doctrines", "demo", "lt-axiom"],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert r.stdout.rstrip().endswith("```")
    r = subprocess.run([sys.executable, "-m", "doctrines", "bogus"], capture_output=True, text=True)
    assert r.returncode == 2 and r.stderr
