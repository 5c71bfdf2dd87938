"""Concrete algebras: path algebras kQ, structure-constant algebras, and
graded tensor algebras T_B(M) over a base algebra B.

Every algebra is a *presentation* whose elements are finite linear
combinations of hashable monomial keys with :class:`~fractions.Fraction`
coefficients.  Tensor algebras ``T_B(⊕ B s_i ⊗ t_i B)`` store a degree-d
monomial as the tuple ``(b0, l1, b1, ..., ld, bd)`` of base monomial keys
``b`` interleaved with summand labels ``l``; the base element in each slot
is kept already multiplied by the neighbouring idempotents, so the tuple
coordinates embed the tensor product faithfully into ``B^{⊗(d+1)}``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .linalg import QMatrix, row_reduce, solve

__all__ = [
    "Arrow", "Quiver", "Path", "Element", "Presentation", "PathAlgebra",
    "StructureConstants", "Pair", "TensorOverBase", "path_algebra",
    "tensor_algebra", "multiply", "tensor_multiply", "flatten",
    "graded_basis", "quotient_project", "coordinates",
]


class AlgebraMismatch(ValueError):
    pass


# ---------------------------------------------------------------- quivers

class Arrow(NamedTuple):
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[str, ...]
    arrows: tuple[Arrow, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arrows", tuple(Arrow(*a) for a in self.arrows))
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex name")
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            raise ValueError("duplicate arrow name")
        clash = set(names) & set(self.vertices)
        if clash:
            raise ValueError(f"arrow names clash with vertex names: {sorted(clash)}")
        for a in self.arrows:
            for v in (a.source, a.target):
                if v not in self.vertices:
                    raise ValueError(f"unknown vertex {v}")

    @classmethod
    def build(cls, vertices: Iterable[str], arrows: Iterable[tuple[str, str, str]] = ()):
        return cls(tuple(vertices), tuple(Arrow(*a) for a in arrows))

    def arrow(self, name: str) -> Arrow:
        for a in self.arrows:
            if a.name == name:
                return a
        raise KeyError(name)

    def is_acyclic(self) -> bool:
        indeg = {v: 0 for v in self.vertices}
        for a in self.arrows:
            indeg[a.target] += 1
        ready = [v for v in self.vertices if indeg[v] == 0]
        seen = 0
        while ready:
            v = ready.pop()
            seen += 1
            for a in self.arrows:
                if a.source == v:
                    indeg[a.target] -= 1
                    if indeg[a.target] == 0:
                        ready.append(a.target)
        return seen == len(self.vertices)

    def without(self, names: Iterable[str]) -> "Quiver":
        names = set(names)
        return Quiver(self.vertices, tuple(a for a in self.arrows if a.name not in names))


class Path(NamedTuple):
    """A path in a quiver; ``arrows == ()`` is the trivial path at ``start``."""

    start: str
    end: str
    arrows: tuple[str, ...] = ()


# ---------------------------------------------------------------- elements

def _clean(terms: dict) -> dict:
    return {k: c for k, c in terms.items() if c != 0}


class Element:
    """A finite linear combination of monomial keys of ``parent``.

    ``truncated`` records that some monomial beyond the parent's degree cap
    was dropped while producing this value.
    """

    __slots__ = ("parent", "terms", "truncated")

    def __init__(self, parent: "Presentation", terms=None, truncated: bool = False):
        self.parent = parent
        self.terms = _clean({k: Fraction(c) for k, c in (terms or {}).items()})
        self.truncated = truncated

    @classmethod
    def _raw(cls, parent, terms, truncated=False) -> "Element":
        e = cls.__new__(cls)
        e.parent = parent
        e.terms = terms
        e.truncated = truncated
        return e

    def _same(self, other: "Element"):
        if not same_algebra(self.parent, other.parent):
            raise AlgebraMismatch("operands belong to different algebras")

    def _coerce(self, other) -> "Element":
        if isinstance(other, Element):
            self._same(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.parent.one().scale(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return Element._raw(self.parent, _clean(out), self.truncated or other.truncated)

    __radd__ = __add__

    def __neg__(self):
        return Element._raw(self.parent, {k: -c for k, c in self.terms.items()}, self.truncated)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Element":
        c = Fraction(c)
        if c == 0:
            return Element._raw(self.parent, {}, self.truncated)
        return Element._raw(self.parent, {k: v * c for k, v in self.terms.items()}, self.truncated)

    def __mul__(self, other):
        if isinstance(other, Element):
            return self.parent.multiply(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        return self.scale(1 / Fraction(other))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self == self.parent.one().scale(other) if other else not self.terms
        if not isinstance(other, Element):
            return NotImplemented
        return same_algebra(self.parent, other.parent) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> list[int]:
        return sorted({self.parent.degree(k) for k in self.terms})

    def degree(self) -> int:
        """Top degree; -1 for zero."""
        return max((self.parent.degree(k) for k in self.terms), default=-1)

    def homogeneous(self, d: int) -> "Element":
        deg = self.parent.degree
        return Element._raw(self.parent, {k: c for k, c in self.terms.items() if deg(k) == d},
                            self.truncated)

    def sorted_terms(self) -> list[tuple[object, Fraction]]:
        sk = self.parent.sort_key
        return sorted(self.terms.items(), key=lambda kc: sk(kc[0]))

    def __str__(self):
        return self.parent.format(self)

    def __repr__(self):
        return f"<{type(self.parent).__name__} element {self}>"


def same_algebra(a, b) -> bool:
    return a is b or a == b


def _format_terms(parent, items) -> str:
    parts = []
    for k, c in items:
        body = parent.format_key(k)
        mag = abs(c)
        if body == "1":
            s = str(mag)
        elif mag == 1:
            s = body
        else:
            s = f"{mag}*{body}"
        if not parts:
            parts.append(s if c > 0 else "-" + s)
        else:
            parts.append((" + " if c > 0 else " - ") + s)
    return "".join(parts)


# ---------------------------------------------------------------- presentations

class Presentation:
    """Common machinery; subclasses supply the monomial-level operations."""

    cap: int | None = None

    def _ident(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        return type(self) is type(other) and self._ident() == other._ident()

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__, self._ident()))
            self.__dict__["_hash"] = h
        return h

    # -- monomial interface
    def mul_keys(self, k1, k2) -> tuple[dict, bool]:
        raise NotImplementedError

    def degree(self, key) -> int:
        return 0

    def sort_key(self, key):
        raise NotImplementedError

    def format_key(self, key) -> str:
        raise NotImplementedError

    def generators(self) -> tuple[str, ...]:
        return ()

    def factorizations(self, key):
        """Yield ``(prefix, generator, suffix)`` for each generator occurrence."""
        return iter(())

    def word(self, key) -> tuple[list, list[str]]:
        """Base pieces and generators with ``key = c0 g1 c1 ... gm cm``.

        The pieces are monomial keys of ``self.quotient(self.generators())``.
        """
        return [key], []

    def avoids(self, key, names) -> bool:
        return True

    def lookup(self, name: str) -> Element:
        raise KeyError(name)

    def is_finite(self) -> bool:
        return True

    # -- element level
    def zero(self) -> Element:
        return Element._raw(self, {})

    def one(self) -> Element:
        raise NotImplementedError

    def monomial(self, key, coeff=1) -> Element:
        return Element._raw(self, {key: Fraction(coeff)})

    def generator(self, name: str) -> Element:
        raise KeyError(name)

    def generator_name(self, x: Element) -> str:
        for g in self.generators():
            if self.generator(g) == x:
                return g
        raise ValueError(f"{x} is not a generator of this algebra")

    def multiply(self, x: Element, y: Element) -> Element:
        if not (same_algebra(x.parent, self) and same_algebra(y.parent, self)):
            raise AlgebraMismatch("operands belong to different algebras")
        cache = self.__dict__.setdefault("_mulcache", {})
        out: dict = {}
        trunc = x.truncated or y.truncated
        for k1, c1 in x.terms.items():
            for k2, c2 in y.terms.items():
                hit = cache.get((k1, k2))
                if hit is None:
                    hit = cache[(k1, k2)] = self.mul_keys(k1, k2)
                prod, t = hit
                trunc = trunc or t
                c = c1 * c2
                for k, v in prod.items():
                    out[k] = out.get(k, 0) + c * v
        return Element._raw(self, _clean(out), trunc)

    def quotient(self, names: Iterable[str]) -> "Presentation":
        names = tuple(names)
        if names:
            raise ValueError(f"{type(self).__name__} has no generators to quotient by")
        return self

    def graded_basis(self, degree: int) -> list[Element]:
        raise NotImplementedError

    def basis_upto(self, cap: int | None = None) -> list[Element]:
        """Graded basis of all degrees up to ``cap`` (default: own cap)."""
        cap = self.cap if cap is None else cap
        out: list[Element] = []
        if cap is None:
            if not self.is_finite():
                raise ValueError("infinite-dimensional algebra needs a degree cap")
            d = 0
            while True:
                part = self.graded_basis(d)
                if not part:
                    break
                out.extend(part)
                d += 1
            return out
        for d in range(cap + 1):
            out.extend(self.graded_basis(d))
        return out

    def format(self, x: Element) -> str:
        if not x.terms:
            return "0"
        return _format_terms(self, x.sorted_terms())


class PathAlgebra(Presentation):
    """The path algebra kQ; paths longer than ``cap`` are dropped."""

    def __init__(self, quiver: Quiver, cap: int):
        if not quiver.vertices:
            raise ValueError("a path algebra needs at least one vertex")
        if cap is None or cap < 1:
            raise ValueError("cap must be >= 1")
        self.quiver = quiver
        self.cap = cap
        self._vidx = {v: i for i, v in enumerate(quiver.vertices)}
        self._aidx = {a.name: i for i, a in enumerate(quiver.arrows)}
        self._arrow = {a.name: a for a in quiver.arrows}

    def _ident(self):
        return (self.quiver, self.cap)

    def __repr__(self):
        return f"PathAlgebra({len(self.quiver.vertices)} vertices, {len(self.quiver.arrows)} arrows, cap={self.cap})"

    def mul_keys(self, p: Path, q: Path):
        if p.end != q.start:
            return {}, False
        arrows = p.arrows + q.arrows
        if len(arrows) > self.cap:
            return {}, True
        return {Path(p.start, q.end, arrows): Fraction(1)}, False

    def degree(self, p: Path) -> int:
        return len(p.arrows)

    def sort_key(self, p: Path):
        if not p.arrows:
            return (0, (self._vidx[p.start],))
        return (len(p.arrows), tuple(self._aidx[a] for a in p.arrows))

    def format_key(self, p: Path) -> str:
        if not p.arrows:
            return "1" if len(self.quiver.vertices) == 1 else p.start
        return "*".join(p.arrows)

    def generators(self):
        return tuple(self._aidx)

    def trivial(self, v: str) -> Path:
        if v not in self._vidx:
            raise KeyError(v)
        return Path(v, v, ())

    def vertex(self, v: str) -> Element:
        return self.monomial(self.trivial(v))

    def arrow(self, name: str) -> Element:
        a = self._arrow[name]
        return self.monomial(Path(a.source, a.target, (name,)))

    generator = arrow

    def generator_name(self, x: Element) -> str:
        if len(x.terms) == 1:
            (k, c), = x.terms.items()
            if c == 1 and len(k.arrows) == 1:
                return k.arrows[0]
        raise ValueError(f"{x} is not an arrow")

    def lookup(self, name: str) -> Element:
        if name == "1":
            return self.one()
        if name in self._vidx:
            return self.vertex(name)
        if name in self._arrow:
            return self.arrow(name)
        raise KeyError(name)

    def one(self) -> Element:
        return Element._raw(self, {self.trivial(v): Fraction(1) for v in self.quiver.vertices})

    def factorizations(self, p: Path):
        arrows = p.arrows
        for k, name in enumerate(arrows):
            a = self._arrow[name]
            yield (Path(p.start, a.source, arrows[:k]), name, Path(a.target, p.end, arrows[k + 1:]))

    def word(self, p: Path):
        pieces = [Path(p.start, p.start, ())]
        for name in p.arrows:
            t = self._arrow[name].target
            pieces.append(Path(t, t, ()))
        return pieces, list(p.arrows)

    def avoids(self, p: Path, names) -> bool:
        return not any(a in names for a in p.arrows)

    def quotient(self, names):
        names = tuple(names)
        unknown = set(names) - set(self._aidx)
        if unknown:
            raise ValueError(f"not arrows of this quiver: {sorted(unknown)}")
        if not names:
            return self
        cache = self.__dict__.setdefault("_quotients", {})
        key = frozenset(names)
        if key not in cache:
            cache[key] = PathAlgebra(self.quiver.without(names), self.cap)
        return cache[key]

    def paths(self, length: int) -> list[Path]:
        if length == 0:
            return [Path(v, v, ()) for v in self.quiver.vertices]
        out = [Path(a.source, a.target, (a.name,)) for a in self.quiver.arrows]
        for _ in range(length - 1):
            out = [Path(p.start, a.target, p.arrows + (a.name,))
                   for p in out for a in self.quiver.arrows if a.source == p.end]
        return out

    def graded_basis(self, degree: int) -> list[Element]:
        if degree > self.cap:
            raise ValueError(f"degree {degree} exceeds cap {self.cap}")
        return [self.monomial(p) for p in self.paths(degree)]

    def is_finite(self) -> bool:
        return self.quiver.is_acyclic()


def path_algebra(q: Quiver, cap: int) -> PathAlgebra:
    return PathAlgebra(q, cap)


class StructureConstants(Presentation):
    """A finite-dimensional algebra given by a multiplication table.

    ``table[(i, j)]`` maps basis name pairs to ``{name: coeff}``; missing
    products are zero.  Associativity is checked exhaustively and the unit
    is solved for.
    """

    def __init__(self, names: Sequence[str], table: dict):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names) or not self.names:
            raise ValueError("basis names must be nonempty and distinct")
        idx = {n: i for i, n in enumerate(self.names)}
        tab = {}
        for (a, b), out in table.items():
            for n in (a, b, *out):
                if n not in idx:
                    raise ValueError(f"unknown basis element {n}")
            out = _clean({k: Fraction(c) for k, c in out.items()})
            if out:
                tab[(a, b)] = out
        self._idx = idx
        self._table = tab
        self.cap = None
        self._check_associative()
        self._unit = self._solve_unit()

    def _ident(self):
        return (self.names, tuple(sorted((k, tuple(sorted(v.items()))) for k, v in self._table.items())))

    def __repr__(self):
        return f"StructureConstants({', '.join(self.names)})"

    def mul_keys(self, a, b):
        return self._table.get((a, b), {}), False

    def _check_associative(self):
        for a, b, c in itertools.product(self.names, repeat=3):
            x, y, z = self.monomial(a), self.monomial(b), self.monomial(c)
            if (x * y) * z != x * (y * z):
                raise ValueError(f"multiplication table is not associative at ({a},{b},{c})")

    def _solve_unit(self) -> dict:
        n = len(self.names)
        rows, rhs = [], []
        for j in self.names:
            for side in (0, 1):
                for m in self.names:
                    row = []
                    for k in self.names:
                        prod = self._table.get((k, j) if side == 0 else (j, k), {})
                        row.append(prod.get(m, Fraction(0)))
                    rows.append(row)
                    rhs.append(Fraction(int(m == j)))
        u = solve(QMatrix.from_rows(rows, cols=n), rhs)
        if u is None:
            raise ValueError("multiplication table has no unit")
        return _clean(dict(zip(self.names, u)))

    def one(self) -> Element:
        return Element._raw(self, dict(self._unit))

    def sort_key(self, name):
        return self._idx[name]

    def format_key(self, name) -> str:
        return name

    def lookup(self, name: str) -> Element:
        if name == "1" and "1" not in self._idx:
            return self.one()
        if name in self._idx:
            return self.monomial(name)
        raise KeyError(name)

    def graded_basis(self, degree: int) -> list[Element]:
        return [self.monomial(n) for n in self.names] if degree == 0 else []


# ---------------------------------------------------------------- tensor algebras

class Pair(NamedTuple):
    label: str
    s: Element
    t: Element


class TensorOverBase(Presentation):
    """T_B(M) for M = ⊕_i B s_i ⊗ t_i B, graded by the number of M factors.

    ``style`` only affects printing: ``"slots"`` writes ``b0|b1|...`` (with a
    ``[labels]`` suffix when there is more than one summand), ``"words"``
    writes monomials as products ``b0*l1*b1*...``.
    """

    def __init__(self, base: Presentation, pairs: Sequence, cap: int | None = None,
                 style: str = "slots"):
        self.base = base
        self.pairs = tuple(Pair(*p) for p in pairs)
        self.cap = cap
        self.style = style
        labels = [p.label for p in self.pairs]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate summand label")
        one = base.one()
        for p in self.pairs:
            for e in (p.s, p.t):
                if not same_algebra(e.parent, base):
                    raise AlgebraMismatch("idempotents must live in the base algebra")
                if e * e != e:
                    raise ValueError(f"{e} is not idempotent")
        self._lidx = {l: i for i, l in enumerate(labels)}
        self._pair = {p.label: p for p in self.pairs}
        self._unital = {p.label: (p.s == one, p.t == one) for p in self.pairs}
        unit_terms = one.terms
        self._base_unit_key = None
        if len(unit_terms) == 1:
            (k, c), = unit_terms.items()
            if c == 1:
                self._base_unit_key = k

    def _ident(self):
        return (self.base, tuple((p.label, p.s, p.t) for p in self.pairs), self.cap, self.style)

    def __repr__(self):
        return f"TensorOverBase({self.base!r}, labels={list(self._lidx)}, cap={self.cap})"

    def labels(self) -> tuple[str, ...]:
        return tuple(self._lidx)

    def mul_keys(self, k1, k2):
        d = len(k1) // 2 + len(k2) // 2
        if self.cap is not None and d > self.cap:
            return {}, True
        junction, trunc = self.base.mul_keys(k1[-1], k2[0])
        head, tail = k1[:-1], k2[1:]
        return {head + (c,) + tail: v for c, v in junction.items()}, trunc

    def degree(self, key) -> int:
        return len(key) // 2

    def sort_key(self, key):
        bs = self.base.sort_key
        return (len(key) // 2,
                tuple(bs(x) if i % 2 == 0 else self._lidx[x] for i, x in enumerate(key)))

    def format_key(self, key) -> str:
        if self.style == "words":
            parts = []
            for i, x in enumerate(key):
                if i % 2:
                    parts.append(x)
                elif x != self._base_unit_key:
                    parts.append(self.base.format_key(x))
            return "*".join(parts) if parts else "1"
        s = "|".join(self.base.format_key(x) for x in key[0::2])
        if len(self.pairs) > 1 and len(key) > 1:
            s += "[" + ",".join(key[1::2]) + "]"
        return s

    def format(self, x: Element) -> str:
        if self.style == "words" or not x.terms:
            return super().format(x)
        groups = itertools.groupby(x.sorted_terms(), key=lambda kc: len(kc[0]))
        return " ; ".join(_format_terms(self, list(g)) for _, g in groups)

    def generators(self):
        return tuple(self._lidx)

    def lookup(self, name: str) -> Element:
        if name in self._pair:
            return self.generator(name)
        if name == "1":
            return self.one()
        return self.embed(self.base.lookup(name))

    def one(self) -> Element:
        return self.embed(self.base.one())

    def embed(self, b: Element) -> Element:
        """Degree-0 inclusion B → T_B(M)."""
        if not same_algebra(b.parent, self.base):
            raise AlgebraMismatch("element is not in the base algebra")
        return Element._raw(self, {(k,): c for k, c in b.terms.items()}, b.truncated)

    def embed_key(self, key, coeff=1) -> Element:
        return Element._raw(self, {(key,): Fraction(coeff)})

    def _expand(self, slots: Sequence[Element], labels: Sequence[str]) -> Element:
        """Pure tensor of base elements taken as is (no idempotent projection)."""
        if self.cap is not None and len(labels) > self.cap:
            return Element._raw(self, {}, True)
        out: dict = {}
        trunc = any(s.truncated for s in slots)
        for combo in itertools.product(*(s.terms.items() for s in slots)):
            c = Fraction(1)
            key = []
            for i, (k, v) in enumerate(combo):
                c *= v
                if i:
                    key.append(labels[i - 1])
                key.append(k)
            key = tuple(key)
            out[key] = out.get(key, 0) + c
        return Element._raw(self, _clean(out), trunc)

    def pure(self, slots: Sequence[Element], labels: Sequence[str] | None = None) -> Element:
        """``b0 ⊗ b1 ⊗ ... ⊗ bd`` with labels, projected onto the summands:
        slot j becomes ``t_{l_j} b_j s_{l_{j+1}}``."""
        slots = list(slots)
        if labels is None:
            if len(self.pairs) != 1:
                raise ValueError("labels are required with several summands")
            labels = [self.pairs[0].label] * (len(slots) - 1)
        labels = list(labels)
        if len(labels) != len(slots) - 1:
            raise ValueError("need one label between consecutive slots")
        for s in slots:
            if not same_algebra(s.parent, self.base):
                raise AlgebraMismatch("slot is not in the base algebra")
        for j, l in enumerate(labels):
            if l not in self._pair:
                raise KeyError(l)
            s_unit, t_unit = self._unital[l]
            if not s_unit:
                slots[j] = slots[j] * self._pair[l].s
            if not t_unit:
                slots[j + 1] = self._pair[l].t * slots[j + 1]
        return self._expand(slots, labels)

    def generator(self, label: str) -> Element:
        p = self._pair[label]
        return self.pure([p.s, p.t], [label])

    def generator_name(self, x: Element) -> str:
        for g in self.generators():
            if self.generator(g) == x:
                return g
        raise ValueError(f"{x} is not a generator s⊗t of this tensor algebra")

    def factorizations(self, key):
        for k in range(1, len(key), 2):
            yield key[:k], key[k], key[k + 1:]

    def word(self, key):
        return [(b,) for b in key[0::2]], list(key[1::2])

    def avoids(self, key, names) -> bool:
        return not any(l in names for l in key[1::2])

    def quotient(self, names):
        names = tuple(names)
        unknown = set(names) - set(self._lidx)
        if unknown:
            raise ValueError(f"not generators of this tensor algebra: {sorted(unknown)}")
        if not names:
            return self
        cache = self.__dict__.setdefault("_quotients", {})
        key = frozenset(names)
        if key not in cache:
            cache[key] = TensorOverBase(self.base, [p for p in self.pairs if p.label not in key],
                                        self.cap, self.style)
        return cache[key]

    # -- bases of graded pieces
    def _slot_basis(self, left: str | None, right: str | None) -> list[Element]:
        """Basis of t_left · B · s_right (missing side = no idempotent)."""
        cache = self.__dict__.setdefault("_slotcache", {})
        if (left, right) in cache:
            return cache[(left, right)]
        images = []
        for b in self.base.basis_upto():
            if left is not None:
                b = self._pair[left].t * b
            if right is not None:
                b = b * self._pair[right].s
            images.append(b)
        keys, cols = coordinates(images)
        if keys:
            _, pivots = row_reduce(QMatrix.from_columns(cols, rows=len(keys)))
        else:
            pivots = []
        cache[(left, right)] = [images[j] for j in pivots]
        return cache[(left, right)]

    def graded_basis(self, degree: int) -> list[Element]:
        if self.cap is not None and degree > self.cap:
            raise ValueError(f"degree {degree} exceeds cap {self.cap}")
        if degree == 0:
            return [self.embed(b) for b in self.base.basis_upto()]
        out = []
        for labels in itertools.product(self.labels(), repeat=degree):
            ends = [None, *labels, None]
            spaces = [self._slot_basis(ends[j], ends[j + 1]) for j in range(degree + 1)]
            for slots in itertools.product(*spaces):
                out.append(self._expand(slots, labels))
        return out

    def is_finite(self) -> bool:
        if not self.base.is_finite():
            return False
        labels = self.labels()
        succ = {l: [m for m in labels if self._slot_basis(l, m)] for l in labels}
        state: dict[str, int] = {}

        def cyclic(l):
            state[l] = 1
            for m in succ[l]:
                if state.get(m) == 1 or (m not in state and cyclic(m)):
                    return True
            state[l] = 2
            return False

        return not any(l not in state and cyclic(l) for l in labels)


def tensor_algebra(a: Presentation) -> TensorOverBase:
    """T_A(A⊗A): tensor powers of A over k, glued by multiplication in A."""
    cache = a.__dict__.setdefault("_tensor_algebra", [])
    if not cache:
        one = a.one()
        cache.append(TensorOverBase(a, [("o", one, one)], cap=None))
    return cache[0]


# ---------------------------------------------------------------- operations

def multiply(x: Element, y: Element) -> Element:
    return x.parent.multiply(x, y)


def tensor_multiply(u: Element, v: Element) -> Element:
    if not isinstance(u.parent, TensorOverBase):
        raise TypeError("tensor_multiply needs tensor algebra elements")
    return u.parent.multiply(u, v)


def flatten(t: TensorOverBase, factors) -> Element:
    """Identify ``(u1 ⊗ v1) ⊗_B ... ⊗_B (un ⊗ vn)`` with the flat tensor
    ``u1 ⊗ v1u2 ⊗ ... ⊗ v_{n-1}un ⊗ vn``.

    ``factors`` is a list of ``(u, v)`` or ``(u, label, v)`` with u ∈ B s and
    v ∈ t B; a bare base element is the degree-0 case.
    """
    if isinstance(factors, Element):
        return t.embed(factors)
    if not factors:
        return t.one()
    us, labels, vs = [], [], []
    for f in factors:
        if len(f) == 2:
            if len(t.pairs) != 1:
                raise ValueError("malformed factor: label required")
            u, v = f
            label = t.pairs[0].label
        elif len(f) == 3:
            u, label, v = f
        else:
            raise ValueError("malformed factor")
        pair = t._pair.get(label)
        if pair is None:
            raise ValueError(f"malformed factor: unknown label {label}")
        if u * pair.s != u or pair.t * v != v:
            raise ValueError(f"malformed factor: ({u}) ⊗ ({v}) is not in B s ⊗ t B")
        us.append(u)
        labels.append(label)
        vs.append(v)
    slots = [us[0]] + [vs[j] * us[j + 1] for j in range(len(us) - 1)] + [vs[-1]]
    return t._expand(slots, labels)


def graded_basis(a: Presentation, degree: int) -> list[Element]:
    return a.graded_basis(degree)


def quotient_project(x: Element, generators) -> Element:
    """Image of x in A/⟨X⟩: drop every monomial containing a generator of X."""
    a = x.parent
    names = tuple(g if isinstance(g, str) else a.generator_name(g) for g in generators)
    if names and not isinstance(a, (PathAlgebra, TensorOverBase)):
        raise ValueError(f"no normal form for quotients of {type(a).__name__}")
    q = a.quotient(names)
    keep = {k: c for k, c in x.terms.items() if a.avoids(k, names)}
    return Element._raw(q, keep, x.truncated)


def coordinates(elements: Sequence[Element], keys=None) -> tuple[list, list[list[Fraction]]]:
    """Column vectors of ``elements`` over a deterministic key order."""
    if keys is None:
        found = {}
        for e in elements:
            for k in e.terms:
                found[k] = e.parent
        keys = sorted(found, key=lambda k: found[k].sort_key(k)) if found else []
    pos = {k: i for i, k in enumerate(keys)}
    cols = []
    for e in elements:
        v = [Fraction(0)] * len(keys)
        for k, c in e.terms.items():
            v[pos[k]] = c
        cols.append(v)
    return keys, cols
