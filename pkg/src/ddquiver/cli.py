"""Line-oriented task files and the ``ddquiver`` command line.

Quiver file::

    quiver kronecker
    vertices e1 e2
    arrow a : e1 -> e2
    arrow b : e1 -> e2
    cap 6

Algebra file (the tensor algebra T_B(⊕ B e ⊗ f B) over a structure-constant B)::

    algebra kron
    dim 2
    basis e1 e2
    mul e1 e1 = e1
    mul e2 e2 = e2
    idempotent-pair a (e1, e2)
    idempotent-pair b (e1, e2)

Either kind may add ``idempotent-pair NAME (S, T)`` to replace the pair of a
generator, and ``derivation I NAME = TENSOR`` to replace the value of the
I-th derivation on a generator or base monomial.
"""
from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (Element, PathAlgebra, Presentation, Quiver, StructureConstants,
                      TensorOverBase, tensor_algebra)
from .derivation import (FAIL, PASS, Check, DoubleDerivation, Setup, canonical_setup,
                         check_hypotheses)
from .iso import (HypothesisError, NilpotencyError, NotAQuiver, Rhobar, constants_basis,
                  recognize_quiver, rho, round_trip, verify_isomorphism)

DEFAULT_CAP = 6


class TaskError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message, self.line, self.col = message, line, col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)


# ---------------------------------------------------------------- expressions

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_']*)|(\S))")


def _tokens(text: str, line=None, offset=0):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        col = offset + m.start(m.lastindex) + 1
        if m.group(1):
            out.append(("num", Fraction(m.group(1)), col))
        elif m.group(2):
            out.append(("name", m.group(2), col))
        else:
            ch = m.group(3)
            if ch not in "+-*|;":
                raise TaskError(f"unexpected character {ch!r}", line, col)
            # the printer separates tensor degrees with ';', which reads as '+'
            out.append(("+", ch, col) if ch == ";" else (ch, ch, col))
        pos = m.end()
    return out


def _terms(text: str, line=None, offset=0):
    """Yield (coefficient, slots, col), each slot a list of (name, col)."""
    toks = _tokens(text, line, offset)
    if not toks:
        raise TaskError("empty expression", line, offset + 1)
    i = 0
    sign = 1
    out = []
    expect_term = True
    while i < len(toks):
        kind, val, col = toks[i]
        if expect_term:
            if kind in ("+", "-"):
                if kind == "-":
                    sign = -sign
                i += 1
                continue
            coeff = Fraction(sign)
            slots = [[]]
            start = col
            while True:
                kind, val, col = toks[i]
                if kind == "num":
                    coeff *= val
                elif kind == "name":
                    slots[-1].append((val, col))
                else:
                    raise TaskError(f"expected a factor, got {val!r}", line, col)
                i += 1
                if i < len(toks) and toks[i][0] in "*|":
                    if toks[i][0] == "|":
                        slots.append([])
                    i += 1
                    if i == len(toks):
                        raise TaskError("expression ends after operator", line, toks[i - 1][2])
                    continue
                break
            out.append((coeff, slots, start))
            expect_term = False
            sign = 1
        else:
            if kind not in ("+", "-"):
                raise TaskError(f"expected '+' or '-', got {val!r}", line, col)
            sign = -1 if kind == "-" else 1
            expect_term = True
            i += 1
    if expect_term:
        raise TaskError("expression ends after sign", line, toks[-1][2])
    return out


def parse_element(text: str, algebra: Presentation, line=None, offset=0) -> Element:
    """Parse ``coeff * word + ...``; terms with ``|`` live in T_A(A⊗A), and
    any plain terms alongside them are embedded there as degree 0."""
    terms = []
    for coeff, slots, _ in _terms(text, line, offset):
        vals = []
        for slot in slots:
            e = algebra.one()
            for name, col in slot:
                try:
                    e = e * algebra.lookup(name)
                except KeyError:
                    raise TaskError(f"unknown generator {name}", line, col) from None
            vals.append(e)
        terms.append((coeff, vals))
    if all(len(vals) == 1 for _, vals in terms):
        return sum((vals[0].scale(c) for c, vals in terms), algebra.zero())
    T = tensor_algebra(algebra)
    return sum((T.pure(vals).scale(c) for c, vals in terms), T.zero())


def _linear(text: str, names, line, offset) -> dict:
    out: dict = {}
    for coeff, slots, col in _terms(text, line, offset):
        if len(slots) != 1 or len(slots[0]) > 1:
            raise TaskError("structure constants must be linear in the basis", line, col)
        if not slots[0]:
            raise TaskError("bare number in structure constants", line, col)
        name, ncol = slots[0][0]
        if name not in names:
            raise TaskError(f"unknown basis element {name}", line, ncol)
        out[name] = out.get(name, 0) + coeff
    return out


# ---------------------------------------------------------------- task files

@dataclass
class TaskFile:
    kind: str
    name: str
    cap: int
    algebra: Presentation
    setup: Setup
    text: str
    quiver: Quiver | None = None
    overridden: bool = False


_NAME = r"[A-Za-z_][A-Za-z0-9_']*"


def parse_task(text: str, cap: int | None = None) -> TaskFile:
    lines = []
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if body.strip():
            lines.append((no, body))
    if not lines:
        raise TaskError("empty task file")
    no, body = lines[0]
    m = re.fullmatch(rf"\s*(quiver|algebra)\s+({_NAME})\s*", body)
    if not m:
        raise TaskError("expected 'quiver NAME' or 'algebra NAME'", no, 1)
    kind, name = m.groups()
    file_cap = None
    vertices: list[str] = []
    arrows: list[tuple] = []
    dim = None
    basis: list[str] = []
    muls: list[tuple] = []
    pairs: list[tuple] = []
    derivs: list[tuple] = []
    allowed = ({"vertices", "arrow", "cap", "idempotent-pair", "derivation"} if kind == "quiver"
               else {"dim", "basis", "mul", "idempotent-pair", "cap", "derivation"})
    for no, body in lines[1:]:
        stripped = body.lstrip()
        col0 = len(body) - len(stripped) + 1
        key = stripped.split()[0]
        if key not in allowed:
            raise TaskError(f"unknown key {key!r}", no, col0)
        rest_off = col0 - 1 + len(key)
        rest = body[rest_off:]
        if key == "vertices":
            for m in re.finditer(r"\S+", rest):
                if not re.fullmatch(_NAME, m.group()):
                    raise TaskError(f"bad vertex name {m.group()!r}", no, rest_off + m.start() + 1)
                vertices.append(m.group())
        elif key == "arrow":
            m = re.fullmatch(rf"\s*({_NAME})\s*:\s*({_NAME})\s*->\s*({_NAME})\s*", rest)
            if not m:
                raise TaskError("expected 'arrow NAME : SOURCE -> TARGET'", no, col0)
            for g in (2, 3):
                if m.group(g) not in vertices:
                    raise TaskError(f"unknown vertex {m.group(g)}", no, rest_off + m.start(g) + 1)
            arrows.append((m.group(1), m.group(2), m.group(3), no))
        elif key == "cap":
            m = re.fullmatch(r"\s*(\d+)\s*", rest)
            if not m or int(m.group(1)) < 1:
                raise TaskError("expected 'cap N' with N >= 1", no, col0)
            file_cap = int(m.group(1))
        elif key == "dim":
            m = re.fullmatch(r"\s*(\d+)\s*", rest)
            if not m:
                raise TaskError("expected 'dim N'", no, col0)
            dim = int(m.group(1))
        elif key == "basis":
            basis.extend(rest.split())
        elif key == "mul":
            m = re.fullmatch(rf"\s*({_NAME})\s+({_NAME})\s*=(.*)", rest)
            if not m:
                raise TaskError("expected 'mul B1 B2 = EXPR'", no, col0)
            for g in (1, 2):
                if m.group(g) not in basis:
                    raise TaskError(f"unknown basis element {m.group(g)}", no, rest_off + m.start(g) + 1)
            muls.append((m.group(1), m.group(2), _linear(m.group(3), basis, no, rest_off + m.start(3)), no))
        elif key == "idempotent-pair":
            m = re.fullmatch(rf"\s*({_NAME})?\s*\(([^,]*),([^)]*)\)\s*", rest)
            if not m:
                raise TaskError("expected 'idempotent-pair [NAME] (S, T)'", no, col0)
            pairs.append((m.group(1), m.group(2), rest_off + m.start(2), m.group(3),
                          rest_off + m.start(3), no))
        elif key == "derivation":
            m = re.fullmatch(rf"\s*(\d+)\s+({_NAME})\s*=(.*)", rest)
            if not m:
                raise TaskError("expected 'derivation I NAME = TENSOR'", no, col0)
            derivs.append((int(m.group(1)), m.group(2), m.group(3), rest_off + m.start(3), no))

    cap = cap if cap is not None else (file_cap if file_cap is not None else DEFAULT_CAP)
    overridden = bool(derivs)
    quiver = None
    if kind == "quiver":
        if not vertices:
            raise TaskError("no vertices declared", lines[0][0], 1)
        try:
            quiver = Quiver.build(vertices, [a[:3] for a in arrows])
        except ValueError as e:
            raise TaskError(str(e), lines[0][0], 1) from None
        A = PathAlgebra(quiver, cap)
        st = canonical_setup(A)
        names = list(A.generators())
        for pname, s_txt, s_off, t_txt, t_off, no in pairs:
            if pname not in names:
                raise TaskError(f"unknown arrow {pname}", no, 1)
            i = names.index(pname)
            # overrides build sabotage fixtures, so idempotency is left to `check`
            st.ss[i] = _algebra_element(s_txt, A, no, s_off)
            st.ts[i] = _algebra_element(t_txt, A, no, t_off)
            overridden = True
    else:
        if dim is not None and dim != len(basis):
            raise TaskError(f"dim {dim} does not match {len(basis)} basis elements", lines[0][0], 1)
        table = {}
        for a, b, out, no in muls:
            table[(a, b)] = out
        try:
            B = StructureConstants(basis, table)
        except ValueError as e:
            raise TaskError(str(e), lines[0][0], 1) from None
        tpairs = []
        for k, (pname, s_txt, s_off, t_txt, t_off, no) in enumerate(pairs):
            pname = pname or f"x{k + 1}"
            if pname in basis:
                raise TaskError(f"pair name {pname} clashes with a basis element", no, 1)
            tpairs.append((pname, _idempotent(s_txt, B, no, s_off), _idempotent(t_txt, B, no, t_off)))
        try:
            A = TensorOverBase(B, tpairs, cap=cap, style="words")
        except ValueError as e:
            raise TaskError(str(e), lines[0][0], 1) from None
        st = canonical_setup(A)

    if derivs:
        st = _override(st, derivs)
    return TaskFile(kind, name, cap, A, st, text, quiver, overridden)


def _algebra_element(txt, algebra, no, off) -> Element:
    e = parse_element(txt, algebra, no, off)
    if e.parent is not algebra:
        raise TaskError("expected an algebra element, not a tensor", no, off + 1)
    return e


def _idempotent(txt, algebra, no, off) -> Element:
    e = _algebra_element(txt, algebra, no, off)
    if e * e != e:
        raise TaskError(f"{txt.strip()} is not idempotent", no, off + 1)
    return e


def _override(st: Setup, derivs) -> Setup:
    A = st.algebra
    T = tensor_algebra(A)
    Ds = list(st.derivations)
    images = [dict(D.images) for D in Ds]
    keyimg = [dict(D.key_images) for D in Ds]
    for i, target, txt, off, no in derivs:
        if not 1 <= i <= len(Ds):
            raise TaskError(f"no derivation {i}", no, 1)
        val = parse_element(txt, A, no, off)
        if val.parent is not T:
            if val:
                raise TaskError("derivation value must be a tensor a|b", no, off + 1)
            val = T.zero()
        if target in A.generators():
            images[i - 1][target] = val
        else:
            try:
                base = A.lookup(target)
            except KeyError:
                raise TaskError(f"unknown generator {target}", no, 1) from None
            if len(base.terms) != 1:
                raise TaskError(f"{target} is not a monomial", no, 1)
            keyimg[i - 1][next(iter(base.terms))] = val
    new = [DoubleDerivation(A, images[k], keyimg[k], canonical=False, name=Ds[k].name)
           for k in range(len(Ds))]
    return Setup(A, new, st.xs, st.ss, st.ts)


# ---------------------------------------------------------------- reports

@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    truncated: bool = False

    @property
    def passed(self) -> bool:
        return not self.truncated and all(c.verdict != FAIL for c in self.checks)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.checks]
        out += [f"NOTE {n}" for n in self.notes]
        if self.truncated:
            out.append("NOTE truncated data reached a certified check")
        out.append(f"SUMMARY {'PASS' if self.passed else 'FAIL'}")
        return out


def _order(arg: str | None, n: int):
    if arg is None:
        return "iterated", None
    if arg == "direct":
        return "direct", None
    try:
        order = [int(x) - 1 for x in arg.split(",")]
    except ValueError:
        raise TaskError(f"bad --order {arg!r}") from None
    return "iterated", order


def run(args: argparse.Namespace, out=None) -> int:
    out = sys.stdout if out is None else out
    with open(args.taskfile, encoding="utf-8") as f:
        text = f.read()
    cap = getattr(args, "max_degree", None)
    task = parse_task(text, cap=cap)
    st = task.setup
    A = task.algebra
    Ds, xs, ss, ts = st.derivations, st.xs, st.ss, st.ts

    def emit(lines):
        for line in lines:
            print(line, file=out)

    cmd = args.command
    if cmd == "check":
        hyp = check_hypotheses(Ds, xs, ss, ts, task.cap, algebra=A)
        rep = Report(hyp.checks, truncated=hyp.truncated)
        emit(rep.lines())
        return 0 if rep.passed else 1
    if cmd == "constants":
        cs = constants_basis(Ds, A, task.cap)
        for d, elems in sorted(cs.basis.items()):
            print(f"DEGREE {d} DIM {len(elems)}", file=out)
            for e in elems:
                print(f"  {e}", file=out)
        return 0
    if cmd == "rho":
        if not 1 <= args.derivation <= len(Ds):
            raise TaskError(f"no derivation {args.derivation}")
        a = parse_element(args.element, A)
        try:
            print(rho(Ds[args.derivation - 1], a), file=out)
        except NilpotencyError as e:
            emit(Report([Check("rho", FAIL, str(e))]).lines())
            return 1
        return 0
    if cmd == "rhobar":
        a = parse_element(args.element, A)
        method, order = _order(args.order, len(Ds))
        try:
            rb = Rhobar(Ds, xs, ss, ts, method, order, algebra=A)
            print(rb(a), file=out)
        except (HypothesisError, NilpotencyError) as e:
            emit(Report([Check("rhobar", FAIL, str(e))]).lines())
            return 1
        return 0
    if cmd == "verify":
        method, order = _order(args.order, len(Ds))
        iso = verify_isomorphism(Ds, xs, ss, ts, task.cap, algebra=A, method=method, order=order)
        rep = Report(iso.checks, truncated=iso.truncated)
        src, tgt = iso.total()
        rep.notes.append(f"total dimension {src} -> {tgt} up to degree {task.cap}")
        if iso.filtration_bounded:
            rep.notes.append(f"filtration-bounded: infinite-dimensional, certified up to degree {task.cap}")
        emit(rep.lines())
        return 0 if rep.passed else 1
    if cmd == "recognize":
        cs = constants_basis(Ds, A, task.cap)
        names = list(A.generators())
        q = recognize_quiver(cs, ss, ts, names)
        rep = Report()
        if isinstance(q, NotAQuiver):
            rep.checks.append(Check("recognize", FAIL, q.reason))
        else:
            rep.checks.append(Check("recognize", PASS,
                                    f"{len(q.vertices)} vertices, {len(q.arrows)} arrows"))
            print(f"QUIVER vertices {' '.join(q.vertices)}", file=out)
            for a in q.arrows:
                print(f"ARROW {a.name} : {a.source} -> {a.target}", file=out)
        emit(rep.lines())
        return 0 if rep.passed else 1
    if cmd == "roundtrip":
        if task.quiver is None:
            emit(Report([Check("roundtrip", FAIL, "needs a quiver file")]).lines())
            return 1
        rt = round_trip(task.quiver, task.cap)
        rep = Report(rt.checks)
        emit(rep.lines())
        return 0 if rep.passed and rt.passed else 1
    raise AssertionError(cmd)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ddquiver",
                                description="Double derivations and quiver algebra certificates")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [("check", "check the theorem's hypotheses"),
                        ("constants", "basis of the ring of constants"),
                        ("rho", "exponential morphism of one derivation"),
                        ("rhobar", "image in T_B(M)"),
                        ("verify", "certify that rhobar is an isomorphism"),
                        ("recognize", "recover the quiver from the constants"),
                        ("roundtrip", "quiver -> derivations -> quiver")]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("taskfile")
        if name in ("constants", "verify"):
            sp.add_argument("--max-degree", type=int, default=None)
        if name == "rho":
            sp.add_argument("--derivation", type=int, required=True)
        if name in ("rho", "rhobar"):
            sp.add_argument("--element", required=True)
        if name in ("rhobar", "verify"):
            sp.add_argument("--order", default=None,
                            help="comma-separated 1-based peeling order, or 'direct'")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except TaskError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
