import os
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddquiver import tensor_algebra
from ddquiver.cli import TaskError, main, parse_element, parse_task

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).parent / "golden"

GOLDEN_CASES = {
    "verify-loop": ["verify", "loop.quiver"],
    "verify-a2": ["verify", "a2.quiver"],
    "verify-kronecker": ["verify", "kronecker.quiver"],
    "verify-two-cycle": ["verify", "two-cycle.quiver"],
    "verify-free2": ["verify", "free2.quiver"],
    "verify-free2-alg": ["verify", "free2.alg"],
    "verify-kronecker-alg": ["verify", "kronecker.alg"],
    "rho-loop": ["rho", "loop.quiver", "--derivation", "1", "--element", "x*x"],
    "rho-a2": ["rho", "a2.quiver", "--derivation", "1", "--element", "u + a*b"],
    "rho-two-cycle": ["rho", "two-cycle.quiver", "--derivation", "2", "--element", "a*b*a*b"],
    "rho-free2": ["rho", "free2.alg", "--derivation", "2", "--element", "x*y*y"],
    "rho-kronecker": ["rho", "kronecker.quiver", "--derivation", "1", "--element", "e1 + 3/2*a"],
}


def cli(*args):
    """Run the installed command in a fresh interpreter."""
    return subprocess.run([sys.executable, "-m", "ddquiver", *map(str, args)],
                          capture_output=True, text=True, cwd=ROOT)


def golden_run(case):
    cmd, task, *rest = GOLDEN_CASES[case]
    return cli(cmd, CORPUS / task, *rest)


def kronecker():
    return parse_task((CORPUS / "kronecker.quiver").read_text())


# ---------------------------------------------------------------- parsing

def test_parse_kronecker():
    t = kronecker()
    assert t.kind == "quiver" and t.name == "kronecker" and t.cap == 6
    assert len(t.algebra.basis_upto()) == 4
    assert [str(x) for x in t.setup.xs] == ["a", "b"]
    assert not t.overridden


def test_parse_algebra_file():
    t = parse_task((CORPUS / "kronecker.alg").read_text())
    assert t.kind == "algebra" and t.cap == 4
    assert [len(t.algebra.graded_basis(d)) for d in range(3)] == [2, 2, 0]


def test_unknown_vertex():
    text = "quiver bad\nvertices e1 e2\narrow a : e1 -> e9\n"
    with pytest.raises(TaskError) as err:
        parse_task(text)
    assert err.value.message == "unknown vertex e9"
    assert (err.value.line, err.value.col) == (3, 17)


@pytest.mark.parametrize("text,line,col", [
    ("quiver q\nvertices v\nwidth 3\n", 3, 1),
    ("quiver q\n  vertices v\n  colour red\n", 3, 3),
    ("graph q\n", 1, 1),
    ("quiver q\nvertices v\narrow x v -> v\n", 3, 1),
    ("quiver q\nvertices v\ncap 0\n", 3, 1),
    ("algebra b\nbasis p\nmul p q = p\n", 3, 7),
    ("algebra b\nbasis e\nmul e e = e\nidempotent-pair x (2*e, e)\n", 4, 20),
])
def test_parse_errors_have_locations(text, line, col):
    with pytest.raises(TaskError) as err:
        parse_task(text)
    assert (err.value.line, err.value.col) == (line, col)


def test_semantic_errors():
    with pytest.raises(TaskError, match="associative|unit"):
        parse_task("algebra b\nbasis p q\nmul p p = q\nmul q q = p\n")
    with pytest.raises(TaskError, match="dim 3"):
        parse_task("algebra b\ndim 3\nbasis e\nmul e e = e\n")
    with pytest.raises(TaskError, match="unknown generator z"):
        parse_element("a + z", kronecker().algebra)


def test_two_term_expression():
    A = kronecker().algebra
    e = parse_element("3/2 * a + e1", A)
    assert len(e.terms) == 2
    assert e == A.lookup("a").scale(Fraction(3, 2)) + A.lookup("e1")
    assert str(e) == "e1 + 3/2*a"


@pytest.mark.parametrize("text", ["a +", "* a", "a b", "a ** b", "a & b", ""])
def test_bad_expressions(text):
    with pytest.raises(TaskError):
        parse_element(text, kronecker().algebra)


LOOP = parse_task((CORPUS / "loop.quiver").read_text()).algebra
TWO = parse_task((CORPUS / "two-cycle.quiver").read_text()).algebra


@st.composite
def elements(draw, A):
    mons = A.basis_upto(3)
    coeff = st.fractions(min_value=-5, max_value=5, max_denominator=7)
    slots = draw(st.integers(1, 3))
    out = None
    for _ in range(draw(st.integers(0, 3))):
        vals = [draw(st.sampled_from(mons)) for _ in range(slots)]
        term = (vals[0] if slots == 1 else tensor_algebra(A).pure(vals)).scale(draw(coeff))
        out = term if out is None else out + term
    return A, (out if out is not None else A.zero())


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([LOOP, TWO]).flatmap(elements))
def test_print_parse_round_trip(drawn):
    A, e = drawn
    text = str(e)
    back = parse_element(text, A)
    # a zero tensor prints as "0", which reads back as the algebra's zero
    assert back == e or (not back and not e)
    assert str(back) == text


# ---------------------------------------------------------------- subcommands

def run_main(capsys, *args):
    code = main([str(a) for a in args])
    return code, capsys.readouterr()


def test_verify_kronecker(capsys):
    code, out = run_main(capsys, "verify", CORPUS / "kronecker.quiver")
    assert code == 0
    assert out.out.splitlines()[-1] == "SUMMARY PASS"


def test_rho_loop(capsys):
    code, out = run_main(capsys, "rho", CORPUS / "loop.quiver", "--derivation", "1",
                         "--element", "x*x")
    assert code == 0 and out.out == "x*x ; 1|x + x|1 ; 1|1|1\n"


def test_rhobar_outputs(capsys):
    code, out = run_main(capsys, "rhobar", CORPUS / "a2.quiver", "--element", "a*b")
    assert code == 0 and out.out == "u|v|w[a,b]\n"
    for order in ("1,2", "2,1", "direct"):
        code, out2 = run_main(capsys, "rhobar", CORPUS / "a2.quiver", "--element", "a*b",
                              "--order", order)
        assert out2.out == out.out


def test_check_sabotage(capsys):
    code, out = run_main(capsys, "check", CORPUS / "sabotage" / "condition-2.quiver")
    assert code == 1
    assert "CHECK condition-2 FAIL (i=1,j=2)" in out.out.splitlines()
    assert out.out.splitlines()[-1] == "SUMMARY FAIL"


@pytest.mark.parametrize("fixture,check", [("condition-1", "condition-1"),
                                           ("condition-2", "condition-2"),
                                           ("idempotent", "idempotent")])
def test_sabotage_fails_only_intended(capsys, fixture, check):
    code, out = run_main(capsys, "check", CORPUS / "sabotage" / f"{fixture}.quiver")
    fails = [ln.split()[1] for ln in out.out.splitlines() if ln.startswith("CHECK") and " FAIL" in ln]
    assert code == 1 and fails == [check]


def test_constants_and_recognize(capsys):
    code, out = run_main(capsys, "constants", CORPUS / "kronecker.quiver", "--max-degree", "2")
    assert code == 0
    assert out.out.splitlines() == ["DEGREE 0 DIM 2", "  e1", "  e2", "DEGREE 1 DIM 0",
                                    "DEGREE 2 DIM 0"]
    code, out = run_main(capsys, "recognize", CORPUS / "kronecker.alg")
    assert code == 0
    assert "ARROW a : e1 -> e2" in out.out


def test_bad_invocations(capsys):
    assert run_main(capsys, "verify", CORPUS / "missing.quiver")[0] == 2
    assert run_main(capsys, "rho", CORPUS / "loop.quiver", "--derivation", "3",
                    "--element", "x")[0] == 2
    code, out = run_main(capsys, "rho", CORPUS / "loop.quiver", "--derivation", "1",
                         "--element", "x + q")
    assert code == 2 and "unknown generator q" in out.err
    code, out = run_main(capsys, "roundtrip", CORPUS / "free2.alg")
    assert code == 1


ALL_TASKS = sorted(p.relative_to(CORPUS) for p in CORPUS.rglob("*") if p.suffix in (".quiver", ".alg"))


@pytest.mark.parametrize("task", ALL_TASKS, ids=str)
def test_exit_status_matches_summary(capsys, task):
    for cmd in ("check", "verify", "recognize"):
        code, out = run_main(capsys, cmd, CORPUS / task)
        summary = out.out.splitlines()[-1]
        assert (code == 0) == (summary == "SUMMARY PASS")
        if cmd != "recognize":
            assert (summary == "SUMMARY PASS") == (task.parent.name != "sabotage")


# ---------------------------------------------------------------- golden files

@pytest.mark.parametrize("case", sorted(GOLDEN_CASES))
def test_golden_byte_identical(case):
    first, second = golden_run(case), golden_run(case)
    assert first.returncode == 0, first.stderr
    assert first.stdout == second.stdout
    path = GOLDEN / f"{case}.txt"
    if os.environ.get("DDQUIVER_REGEN"):
        path.write_text(first.stdout)
    assert first.stdout == path.read_text()
