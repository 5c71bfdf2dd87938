"""The exponential morphism ρ, the reconstruction map ρ̄: A → T_B(M), the
ring of constants, and the finite certificates that ρ̄ is an isomorphism
and that A is a quiver algebra.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (Element, PathAlgebra, Presentation, Quiver, TensorOverBase,
                      coordinates, path_algebra, quotient_project, same_algebra,
                      tensor_algebra)
from .derivation import (FAIL, PASS, SKIPPED, Check, DoubleDerivation, NotWitnessed,
                         apply, canonical_setup, check_hypotheses, extend_apply)
from .linalg import QMatrix, kernel_basis, rank

__all__ = [
    "NilpotencyError", "HypothesisError", "rho", "rhobar_single", "rhobar",
    "target_algebra", "ConstantsSubspace", "constants_basis", "IsoReport",
    "verify_isomorphism", "NotAQuiver", "recognize_quiver", "quivers_isomorphic",
    "round_trip",
]


class NilpotencyError(ValueError):
    pass


class HypothesisError(ValueError):
    pass


def _bound(D: DoubleDerivation, a: Element) -> int:
    return max(D.algebra.cap or 0, a.degree()) + 2


def rho(D: DoubleDerivation, a: Element, bound: int | None = None) -> Element:
    """Σ_k D^k(a)/k!, refusing if D^k(a) does not vanish within ``bound``."""
    bound = _bound(D, a) if bound is None else bound
    u = D.tensor.embed(a)
    out = D.tensor.zero()
    for k in range(bound + 1):
        if not u:
            return out
        out = out + u.scale(Fraction(1, math.factorial(k)))
        u = extend_apply(D, u)
    if not u:
        return out
    raise NilpotencyError(f"D^n({a}) not shown to vanish for n <= {bound}; refusing to truncate rho")


def _lemma_target(A: Presentation, g: str, s: Element, t: Element) -> TensorOverBase:
    cache = A.__dict__.setdefault("_lemma_targets", {})
    key = (g, s, t)
    if key not in cache:
        B = A.quotient([g])
        sb, tb = quotient_project(s, [g]), quotient_project(t, [g])
        cache[key] = TensorOverBase(B, [(g, sb, tb)], cap=A.cap)
    return cache[key]


def _project_tensor(u: Element, g: str, target: TensorOverBase) -> Element:
    """Slot-wise A → A/⟨x⟩, then onto B s̄ ⊗ t̄B ⊗ ... ."""
    A = u.parent.base
    B = target.base
    out = target.zero()
    for key, c in u.terms.items():
        slots = key[0::2]
        if not all(A.avoids(m, (g,)) for m in slots):
            continue
        out = out + target.pure([B.monomial(m) for m in slots], [g] * (len(slots) - 1)).scale(c)
    out.truncated = out.truncated or u.truncated
    return out


def _check_lemma(D, x, s, t):
    T = D.tensor
    A = D.algebra
    for name, e in (("s", s), ("t", t)):
        if e * e != e:
            raise HypothesisError(f"{name} is not idempotent")
    if s * x * t != x:
        raise HypothesisError("s x t != x")
    if apply(D, s) or apply(D, t):
        raise HypothesisError("D(s) or D(t) is nonzero")
    if apply(D, x) != T.pure([s, t]):
        raise HypothesisError("D(x) != s ⊗ t")
    return A.generator_name(x)


def rhobar_single(D: DoubleDerivation, x: Element, s: Element, t: Element, a: Element,
                  check: bool = True) -> Element:
    """π∘ρ: A → T_B(B s̄ ⊗ t̄ B) for B = A/⟨x⟩."""
    g = _check_lemma(D, x, s, t) if check else D.algebra.generator_name(x)
    target = _lemma_target(D.algebra, g, s, t)
    return _project_tensor(rho(D, a), g, target)


def target_algebra(A: Presentation, xs: Sequence[Element], ss, ts,
                   cap: int | None = None) -> TensorOverBase:
    """T_B(M) with B = A/⟨X⟩ and M = ⊕ B s̄_i ⊗ t̄_i B, summands labelled by x_i."""
    names = [A.generator_name(x) for x in xs]
    B = A.quotient(names)
    pairs = [(g, quotient_project(s, names), quotient_project(t, names))
             for g, s, t in zip(names, ss, ts)]
    cap = A.cap if cap is None else cap
    cache = A.__dict__.setdefault("_targets", {})
    key = (tuple(pairs), cap)
    if key not in cache:
        cache[key] = TensorOverBase(B, pairs, cap=cap)
    return cache[key]


def _transport(D: DoubleDerivation, g: str, B: Presentation) -> DoubleDerivation:
    """D restricted to the constants of D_g, read on B = A/⟨g⟩.

    Lifts of B-monomials are D_g-constants; D must map them into B⊗B,
    which is the fact D_i B_n ⊆ B_n used by the induction.
    """
    A = D.algebra
    TB = tensor_algebra(B)
    images = {}
    for h in B.generators():
        img = apply(D, A.generator(h))
        slots = [k[0::2] for k in img.terms]
        if not all(A.avoids(m, (g,)) for sl in slots for m in sl):
            raise HypothesisError(f"{D.name} does not preserve the constants of D_{g}")
        images[h] = TB.zero() + _retag(img, TB)
    key_images = {}
    for k, img in D.key_images.items():
        if A.avoids(k, (g,)):
            key_images[k] = _retag(img, TB)
    return DoubleDerivation(B, images, key_images, canonical=D.canonical, name=D.name)


def _retag(u: Element, T: TensorOverBase) -> Element:
    return Element._raw(T, dict(u.terms), u.truncated)


class _Peeler:
    """ρ̄ by the induction of the theorem: peel one derivation with the
    single-derivation map, then recurse on the constants of the peeled one."""

    def __init__(self, Ds, xs, ss, ts, order, F: TensorOverBase):
        self.F = F
        self.levels = []
        names = [D.algebra.generator_name(x) for D, x in zip(Ds, xs)]
        live = dict(enumerate(zip(Ds, xs, ss, ts)))
        for i in order:
            D, x, s, t = live.pop(i)
            g = names[i]
            A = D.algebra
            _check_lemma(D, x, s, t)
            B = A.quotient([g])
            self.levels.append((D, x, s, t, g))
            live = {j: (_transport(Dj, g, B), quotient_project(xj, [g]),
                        quotient_project(sj, [g]), quotient_project(tj, [g]))
                    for j, (Dj, xj, sj, tj) in live.items()}
        self.caches = [dict() for _ in range(len(order) + 1)]

    def image(self, a: Element, level: int = 0) -> Element:
        F = self.F
        out = F.zero()
        for k, c in a.terms.items():
            out = out + self._key(k, level, a.parent).scale(c)
        out.truncated = out.truncated or a.truncated
        return out

    def _key(self, key, level, parent) -> Element:
        cache = self.caches[level]
        hit = cache.get(key)
        if hit is not None:
            return hit
        F = self.F
        if level == len(self.levels):
            val = F.embed_key(key)
        else:
            D, x, s, t, g = self.levels[level]
            y = rhobar_single(D, x, s, t, D.algebra.monomial(key), check=False)
            B = y.parent.base
            gen = F.generator(g)
            val = F.zero()
            for k2, c in y.terms.items():
                pieces = [self._key(m, level + 1, B) for m in k2[0::2]]
                prod = pieces[0]
                for p in pieces[1:]:
                    prod = prod * gen * p
                val = val + prod.scale(c)
            val.truncated = val.truncated or y.truncated
        cache[key] = val
        return val


def _direct(a: Element, F: TensorOverBase) -> Element:
    """Substitute x_i ↦ s̄_i ⊗ t̄_i in each generator word."""
    A = a.parent
    out = F.zero()
    for key, c in a.terms.items():
        pieces, gens = A.word(key)
        prod = F.embed_key(pieces[0])
        for g, p in zip(gens, pieces[1:]):
            prod = prod * F.generator(g) * F.embed_key(p)
        out = out + prod.scale(c)
    return out


class Rhobar:
    """Reusable ρ̄ for fixed data; ``method`` is ``"iterated"`` or ``"direct"``."""

    def __init__(self, Ds, xs, ss, ts, method: str = "iterated", order=None,
                 algebra: Presentation | None = None):
        n = len(xs)
        if algebra is None:
            algebra = xs[0].parent if n else None
        if algebra is None:
            raise ValueError("algebra is required when there are no generators")
        self.algebra = algebra
        self.F = target_algebra(algebra, xs, ss, ts)
        if method == "auto":
            method = "direct" if isinstance(algebra, PathAlgebra) else "iterated"
        if method not in ("iterated", "direct"):
            raise ValueError(f"unknown rhobar method {method}")
        self.method = method
        if order is None:
            order = list(range(n - 1, -1, -1))
        if sorted(order) != list(range(n)):
            raise ValueError("order must be a permutation of the derivation indices")
        self.order = list(order)
        self._peeler = _Peeler(Ds, xs, ss, ts, self.order, self.F) if method == "iterated" else None

    def __call__(self, a: Element) -> Element:
        if not same_algebra(a.parent, self.algebra):
            raise ValueError("element is not in the source algebra")
        if self._peeler is not None:
            return self._peeler.image(a)
        return _direct(a, self.F)


def rhobar(Ds, xs, ss, ts, a: Element, method: str = "auto", order=None) -> Element:
    """ρ̄(a) ∈ T_B(M).  ``order`` lists derivation indices in peeling order
    (default: last derivation first)."""
    return Rhobar(Ds, xs, ss, ts, method, order, algebra=a.parent)(a)


# ---------------------------------------------------------------- constants

@dataclass
class ConstantsSubspace:
    ambient: Presentation
    basis: dict[int, list[Element]]
    derivations: list[DoubleDerivation]

    def elements(self) -> list[Element]:
        return [e for d in sorted(self.basis) for e in self.basis[d]]

    def dimension(self) -> int:
        return sum(len(v) for v in self.basis.values())

    def dims(self) -> dict[int, int]:
        return {d: len(v) for d, v in sorted(self.basis.items())}


def constants_basis(Ds: Sequence[DoubleDerivation], algebra: Presentation,
                    cap: int | None = None) -> ConstantsSubspace:
    """Per degree, the common kernel of the D_i as an exact linear map."""
    cap = algebra.cap if cap is None else cap
    out: dict[int, list[Element]] = {}
    d = 0
    while cap is None or d <= cap:
        mons = algebra.graded_basis(d)
        if not mons and cap is None:
            break
        if not Ds:
            out[d] = mons
        else:
            blocks = [coordinates([apply(D, m) for m in mons])[1] for D in Ds]
            cols = [[x for b in blocks for x in b[j]] for j in range(len(mons))]
            rows = len(cols[0]) if cols else 0
            ker = kernel_basis(QMatrix.from_columns(cols, rows=rows))
            out[d] = [sum((m.scale(c) for m, c in zip(mons, v) if c), algebra.zero()) for v in ker]
        d += 1
    return ConstantsSubspace(algebra, out, list(Ds))


# ---------------------------------------------------------------- isomorphism certificate

@dataclass
class IsoReport:
    dims: list[tuple[int, int, int, int]] = field(default_factory=list)  # (degree, src, tgt, rank)
    checks: list[Check] = field(default_factory=list)
    truncated: bool = False
    filtration_bounded: bool = False

    @property
    def passed(self) -> bool:
        return not self.truncated and all(c.verdict == PASS for c in self.checks)

    def verdict(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.verdict
        raise KeyError(name)

    def total(self) -> tuple[int, int]:
        return sum(d[1] for d in self.dims), sum(d[2] for d in self.dims)


def verify_isomorphism(Ds, xs, ss, ts, cap: int | None = None, *,
                       algebra: Presentation | None = None, method: str = "iterated",
                       order=None, hypotheses: bool = True) -> IsoReport:
    """Certify ρ̄: A → T_B(M) is an isomorphism up to filtration degree ``cap``."""
    if algebra is None:
        algebra = xs[0].parent if xs else Ds[0].algebra
    cap = algebra.cap if cap is None else cap
    if cap is None:
        raise ValueError("a degree cap is needed")
    rep = IsoReport(filtration_bounded=not algebra.is_finite())
    if hypotheses:
        hyp = check_hypotheses(Ds, xs, ss, ts, cap, algebra=algebra)
        rep.checks.append(Check("hypotheses", PASS if hyp.passed else FAIL,
                                ",".join(hyp.failed()) or "all"))
        if not hyp.passed:
            return rep
    try:
        rb = Rhobar(Ds, xs, ss, ts, method, order, algebra=algebra)
    except (HypothesisError, NilpotencyError) as e:
        rep.checks.append(Check("rhobar", FAIL, str(e)))
        return rep
    F = rb.F
    mons_by_deg = {}
    for d in range(cap + 1):
        src = algebra.graded_basis(d)
        mons_by_deg[d] = src
        tgt = F.graded_basis(d)
        images = [rb(m) for m in src]
        rep.truncated = rep.truncated or any(m.truncated or im.truncated for m, im in zip(src, images))
        graded = all(im.degrees() in ([], [d]) for im in images)
        _, cols = coordinates(images + tgt)
        rows = len(cols[0]) if cols else 0
        r_img = rank(QMatrix.from_columns(cols[:len(src)], rows=rows)) if src else 0
        r_all = rank(QMatrix.from_columns(cols, rows=rows)) if cols else 0
        r_tgt = rank(QMatrix.from_columns(cols[len(src):], rows=rows)) if tgt else 0
        rep.dims.append((d, len(src), len(tgt), r_img))
        ok = graded and len(src) == len(tgt) == r_img == r_tgt == r_all
        rep.checks.append(Check(f"degree-{d}", PASS if ok else FAIL,
                                f"dim {len(src)}->{len(tgt)} rank {r_img}"
                                + ("" if graded else " not graded")))

    pairs = 0
    bad = None
    for d1 in range(cap + 1):
        for d2 in range(cap + 1 - d1):
            for p in mons_by_deg[d1]:
                for q in mons_by_deg[d2]:
                    pq = p * q
                    lhs, rhs = rb(pq), rb(p) * rb(q)
                    rep.truncated = rep.truncated or pq.truncated or lhs.truncated or rhs.truncated
                    pairs += 1
                    if lhs != rhs and bad is None:
                        bad = (p, q)
    rep.checks.append(Check("multiplicative", FAIL, f"on ({bad[0]}, {bad[1]})") if bad
                      else Check("multiplicative", PASS, f"{pairs} pairs"))

    bad = next((i for i, x in enumerate(xs) if rb(x) != F.generator(F.labels()[i])), None)
    rep.checks.append(Check("generators", FAIL, f"(i={bad + 1})") if bad is not None
                      else Check("generators", PASS, f"n={len(xs)}"))

    consts = constants_basis(Ds, algebra, cap).elements()
    names = [algebra.generator_name(x) for x in xs]
    imgs = [rb(c) for c in consts]
    ok = all(im == F.embed(quotient_project(c, names)) for c, im in zip(consts, imgs))
    base0 = F.graded_basis(0)
    if imgs:
        _, cols = coordinates(imgs)
        r = rank(QMatrix.from_columns(cols, rows=len(cols[0])))
    else:
        r = 0
    ok = ok and len(consts) == len(base0) == r
    rep.checks.append(Check("constants", PASS if ok else FAIL,
                            f"dim {len(consts)} onto B of dim {len(base0)}"))
    return rep


# ---------------------------------------------------------------- quiver recognition

@dataclass(frozen=True)
class NotAQuiver:
    reason: str

    def __bool__(self):
        return False


def recognize_quiver(constants: ConstantsSubspace, ss: Sequence[Element], ts: Sequence[Element],
                     arrow_names: Sequence[str] | None = None) -> Quiver | NotAQuiver:
    """Quiver with vertices the distinct s_i, t_i and one arrow s_i → t_i,
    provided these form a complete orthogonal idempotent basis of the constants."""
    A = constants.ambient
    distinct: list[Element] = []
    for e in list(ss) + list(ts):
        if e not in distinct:
            distinct.append(e)
    for e in distinct:
        if e * e != e:
            return NotAQuiver(f"{e} is not idempotent")
    for e, f in itertools.permutations(distinct, 2):
        if e * f:
            return NotAQuiver(f"{e} and {f} are not orthogonal")
    if sum(distinct, A.zero()) != A.one():
        return NotAQuiver("idempotents do not sum to 1")
    const = constants.elements()
    if len(const) != len(distinct):
        return NotAQuiver(f"constants have dimension {len(const)}, not {len(distinct)}")
    if const:
        _, cols = coordinates(const + distinct)
        rows = len(cols[0])
        if rank(QMatrix.from_columns(cols, rows=rows)) != len(const):
            return NotAQuiver("idempotents do not span the constants")
    vname = {}
    for e in distinct:
        label = str(e)
        while label in vname.values():
            label += "'"
        vname[e] = label
    if arrow_names is None:
        arrow_names = [f"x{i + 1}" for i in range(len(ss))]
    return Quiver(tuple(vname[e] for e in distinct),
                  tuple((n, vname[s], vname[t]) for n, s, t in zip(arrow_names, ss, ts)))


def quivers_isomorphic(p: Quiver, q: Quiver) -> bool:
    """Same arrow names with matching endpoints under some vertex bijection."""
    if len(p.vertices) != len(q.vertices):
        return False
    if sorted(a.name for a in p.arrows) != sorted(a.name for a in q.arrows):
        return False
    qa = {a.name: a for a in q.arrows}
    for perm in itertools.permutations(q.vertices):
        phi = dict(zip(p.vertices, perm))
        if all(phi[a.source] == qa[a.name].source and phi[a.target] == qa[a.name].target
               for a in p.arrows):
            return True
    return False


@dataclass
class RoundTrip:
    passed: bool
    checks: list[Check]
    recognized: Quiver | NotAQuiver | None = None


def round_trip(q: Quiver, cap: int) -> RoundTrip:
    """kQ → canonical derivations → hypotheses → ρ̄ certificate → recognized quiver ≅ q."""
    A = path_algebra(q, cap)
    st = canonical_setup(A)
    checks = []
    hyp = check_hypotheses(st.derivations, st.xs, st.ss, st.ts, cap, algebra=A)
    checks.append(Check("hypotheses", PASS if hyp.passed else FAIL, ",".join(hyp.failed()) or "all"))
    iso = verify_isomorphism(st.derivations, st.xs, st.ss, st.ts, cap, algebra=A, hypotheses=False)
    checks.append(Check("isomorphism", PASS if iso.passed else FAIL,
                        "filtration-bounded" if iso.filtration_bounded else "finite"))
    consts = constants_basis(st.derivations, A, cap)
    rec = recognize_quiver(consts, st.ss, st.ts, [a.name for a in q.arrows])
    if isinstance(rec, NotAQuiver):
        checks.append(Check("recognize", FAIL, rec.reason))
        checks.append(Check("quiver-isomorphic", SKIPPED, "no quiver recognized"))
    else:
        checks.append(Check("recognize", PASS,
                            f"{len(rec.vertices)} vertices, {len(rec.arrows)} arrows"))
        iso_ok = quivers_isomorphic(rec, q)
        checks.append(Check("quiver-isomorphic", PASS if iso_ok else FAIL, ""))
    passed = all(c.verdict == PASS for c in checks)
    return RoundTrip(passed, checks, rec)
