"""Double derivations A → A⊗A, their extension to T_A(A⊗A), and the
hypothesis checks of the characterization theorem.

A double derivation is fixed by its values on generators (arrows, or the
M-summand labels of a tensor algebra); base monomials (trivial paths,
elements of B) are annihilated unless an explicit override says otherwise.
The bimodule structure on A⊗A is the outer one, ``a·(u⊗v)·b = au ⊗ vb``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (AlgebraMismatch, Element, PathAlgebra, Presentation,
                      TensorOverBase, same_algebra, tensor_algebra)

__all__ = [
    "DoubleDerivation", "NotWitnessed", "Check", "HypothesisReport", "Setup",
    "apply", "extend_apply", "apply_to_slot", "iterate", "nilpotency_index",
    "check_hypotheses", "canonical_derivations", "partial_double_derivations",
    "canonical_setup",
]


class DoubleDerivation:
    """Derivation D: A → A⊗A determined by generator images.

    ``images`` maps generator names to degree-1 elements of T_A(A⊗A);
    generators not listed go to zero.  ``key_images`` overrides the value on
    individual generator-free monomials (used only to build deliberately
    broken fixtures).  ``canonical`` marks derivations whose local nilpotency
    follows from counting generator occurrences.
    """

    def __init__(self, algebra: Presentation, images: dict, key_images: dict | None = None,
                 canonical: bool = False, name: str = "D"):
        self.algebra = algebra
        self.tensor = tensor_algebra(algebra)
        for g, img in images.items():
            if g not in algebra.generators():
                raise KeyError(f"{g} is not a generator")
            if not same_algebra(img.parent, self.tensor):
                raise AlgebraMismatch(f"image of {g} must lie in A⊗A")
            if any(self.tensor.degree(k) != 1 for k in img.terms):
                raise ValueError(f"image of {g} is not in A⊗A")
        self.images = dict(images)
        self.key_images = dict(key_images or {})
        self.canonical = canonical and not self.key_images
        self.name = name
        self._cache: dict = {}

    def __repr__(self):
        return f"DoubleDerivation({self.name})"

    def on_key(self, key) -> Element:
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        T = self.tensor
        A = self.algebra
        if key in self.key_images:
            out = self.key_images[key]
        else:
            out = T.zero()
            for prefix, g, suffix in A.factorizations(key):
                img = self.images.get(g)
                if img is None or not img:
                    continue
                out = out + T.embed(A.monomial(prefix)) * img * T.embed(A.monomial(suffix))
        self._cache[key] = out
        return out

    def __call__(self, a: Element) -> Element:
        return apply(self, a)


def apply(D: DoubleDerivation, a: Element) -> Element:
    """D(a) in A⊗A, by linearity and the Leibniz rule."""
    if not same_algebra(a.parent, D.algebra):
        raise AlgebraMismatch("element is not in the derivation's algebra")
    out = D.tensor.zero()
    for k, c in a.terms.items():
        out = out + D.on_key(k).scale(c)
    out.truncated = out.truncated or a.truncated
    return out


def _apply_slots(D: DoubleDerivation, u: Element, slots) -> Element:
    T = D.tensor
    if not same_algebra(u.parent, T):
        raise AlgebraMismatch("element is not in T_A(A⊗A) of the derivation's algebra")
    out: dict = {}
    for key, c in u.terms.items():
        n = len(key) // 2 + 1
        for i in (range(n) if slots is None else slots):
            if i >= n:
                continue
            img = D.on_key(key[2 * i])
            for k2, c2 in img.terms.items():
                new = key[:2 * i] + k2 + key[2 * i + 1:]
                out[new] = out.get(new, 0) + c * c2
    return Element._raw(T, {k: v for k, v in out.items() if v != 0}, u.truncated)


def extend_apply(D: DoubleDerivation, u: Element) -> Element:
    """Extension of D to T_A(A⊗A): sum over slots of a0⊗...⊗D(ai)⊗...⊗an."""
    return _apply_slots(D, u, None)


def apply_to_slot(D: DoubleDerivation, u: Element, slot: int) -> Element:
    """``(id ⊗ ... ⊗ D ⊗ ... ⊗ id)(u)`` with D acting on one tensor slot."""
    return _apply_slots(D, u, (slot,))


def iterate(D: DoubleDerivation, a: Element, n: int) -> Element:
    u = D.tensor.embed(a)
    for _ in range(n):
        if not u:
            break
        u = extend_apply(D, u)
    return u


@dataclass(frozen=True)
class NotWitnessed:
    bound: int

    def __bool__(self):
        return False


def nilpotency_index(D: DoubleDerivation, a: Element, bound: int) -> int | NotWitnessed:
    """Least n ≤ bound with Dⁿ(a) = 0."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    u = D.tensor.embed(a)
    for n in range(bound + 1):
        if not u:
            return n
        if n < bound:
            u = extend_apply(D, u)
    return NotWitnessed(bound)


# ---------------------------------------------------------------- hypotheses

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"


@dataclass(frozen=True)
class Check:
    name: str
    verdict: str
    detail: str = ""

    def line(self) -> str:
        return f"CHECK {self.name} {self.verdict} {self.detail}".rstrip()


@dataclass
class HypothesisReport:
    checks: list[Check] = field(default_factory=list)
    truncated: bool = False

    @property
    def passed(self) -> bool:
        return not self.truncated and all(c.verdict != FAIL for c in self.checks)

    def verdict(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.verdict
        raise KeyError(name)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if c.verdict == FAIL]


def _spanning(a: Presentation, cap: int | None) -> list[Element]:
    return a.basis_upto(cap)


def check_hypotheses(Ds: Sequence[DoubleDerivation], xs: Sequence[Element],
                     ss: Sequence[Element], ts: Sequence[Element],
                     cap: int | None = None, algebra: Presentation | None = None) -> HypothesisReport:
    """Check idempotency, s_i x_i t_i = x_i, conditions (1)-(3) and local
    nilpotency on the monomials of degree ≤ cap."""
    n = len(Ds)
    if not (len(xs) == len(ss) == len(ts) == n):
        raise ValueError("Ds, xs, ss, ts must have equal lengths")
    if algebra is None:
        if not n:
            raise ValueError("algebra is required when there are no derivations")
        algebra = Ds[0].algebra
    for D in Ds:
        if not same_algebra(D.algebra, algebra):
            raise AlgebraMismatch("derivations live on different algebras")
    T = tensor_algebra(algebra)
    rep = HypothesisReport()
    add = rep.checks.append

    bad = next(((name, i) for i in range(n) for name, e in (("s", ss[i]), ("t", ts[i]))
                if e * e != e), None)
    add(Check("idempotent", FAIL, f"({bad[0]}_{bad[1] + 1})") if bad
        else Check("idempotent", PASS, f"{2 * n} elements"))

    bad = next((i for i in range(n) if ss[i] * xs[i] * ts[i] != xs[i]), None)
    add(Check("sxt", FAIL, f"(i={bad + 1})") if bad is not None
        else Check("sxt", PASS, f"n={n}"))

    bad = next(((i, j) for i in range(n) for j in range(n)
                if apply(Ds[i], ss[j]) or apply(Ds[i], ts[j])), None)
    add(Check("condition-1", FAIL, f"(i={bad[0] + 1},j={bad[1] + 1})") if bad
        else Check("condition-1", PASS, f"{n * n} pairs"))

    def cond2(i, j):
        want = T.pure([ss[j], ts[j]]) if i == j else T.zero()
        return apply(Ds[i], xs[j]) == want

    bad = next(((i, j) for i in range(n) for j in range(n) if not cond2(i, j)), None)
    add(Check("condition-2", FAIL, f"(i={bad[0] + 1},j={bad[1] + 1})") if bad
        else Check("condition-2", PASS, f"{n * n} pairs"))

    span = _spanning(algebra, cap)
    rep.truncated = any(m.truncated for m in span)

    def cond3(i, j, m):
        # (D_j ⊗ id) ∘ D_i  ==  (id ⊗ D_i) ∘ D_j
        return apply_to_slot(Ds[j], apply(Ds[i], m), 0) == apply_to_slot(Ds[i], apply(Ds[j], m), 1)

    for name, pick in (("condition-3a", lambda i, j: i < j), ("condition-3b", lambda i, j: i > j)):
        if n < 2:
            add(Check(name, PASS, f"vacuous (n={n})"))
            continue
        bad = next(((i, j, m) for i in range(n) for j in range(n) if i != j and pick(i, j)
                    for m in span if not cond3(i, j, m)), None)
        add(Check(name, FAIL, f"(i={bad[0] + 1},j={bad[1] + 1}) on {bad[2]}") if bad
            else Check(name, PASS, f"{len(span)} monomials"))

    worst = 0
    bad = None
    for i, D in enumerate(Ds):
        for m in span:
            bound = max(cap if cap is not None else (algebra.cap or 0), m.degree()) + 2
            idx = nilpotency_index(D, m, bound)
            if isinstance(idx, NotWitnessed):
                bad = (i, m, bound)
                break
            worst = max(worst, idx)
        if bad:
            break
    if bad:
        add(Check("nilpotency", FAIL, f"(i={bad[0] + 1}) not witnessed on {bad[1]} up to {bad[2]}"))
    elif n and all(D.canonical for D in Ds):
        add(Check("nilpotency", PASS, f"PROVEN generator count; max index {worst}"))
    else:
        add(Check("nilpotency", PASS, f"WITNESSED on {len(span)} monomials; max index {worst}"))
    return rep


# ---------------------------------------------------------------- constructions

@dataclass
class Setup:
    """An algebra with derivations D_i, generators x_i and idempotents s_i, t_i."""

    algebra: Presentation
    derivations: list[DoubleDerivation]
    xs: list[Element]
    ss: list[Element]
    ts: list[Element]

    def names(self) -> list[str]:
        return [self.algebra.generator_name(x) for x in self.xs]


def canonical_derivations(A: PathAlgebra) -> list[DoubleDerivation]:
    """D_a(b) = δ_ab e_source(b) ⊗ e_target(b) for the arrows of Q."""
    T = tensor_algebra(A)
    Ds = []
    for a in A.quiver.arrows:
        img = T.pure([A.vertex(a.source), A.vertex(a.target)])
        Ds.append(DoubleDerivation(A, {a.name: img}, canonical=True, name=f"D_{a.name}"))
    return Ds


def partial_double_derivations(A: TensorOverBase) -> list[DoubleDerivation]:
    """D_i(x_j) = δ_ij s_j ⊗ t_j and D_i(B) = 0 on T_B(⊕ B s_i ⊗ t_i B)."""
    if not isinstance(A, TensorOverBase):
        raise TypeError("partial double derivations live on a tensor algebra over a base")
    T = tensor_algebra(A)
    Ds = []
    for p in A.pairs:
        img = T.pure([A.embed(p.s), A.embed(p.t)])
        Ds.append(DoubleDerivation(A, {p.label: img}, canonical=True, name=f"D_{p.label}"))
    return Ds


def canonical_setup(A: Presentation) -> Setup:
    if isinstance(A, PathAlgebra):
        Ds = canonical_derivations(A)
        arrows = A.quiver.arrows
        return Setup(A, Ds, [A.arrow(a.name) for a in arrows],
                     [A.vertex(a.source) for a in arrows], [A.vertex(a.target) for a in arrows])
    if isinstance(A, TensorOverBase):
        Ds = partial_double_derivations(A)
        return Setup(A, Ds, [A.generator(p.label) for p in A.pairs],
                     [A.embed(p.s) for p in A.pairs], [A.embed(p.t) for p in A.pairs])
    if not A.generators():
        return Setup(A, [], [], [], [])
    raise TypeError(f"no canonical derivations for {type(A).__name__}")
