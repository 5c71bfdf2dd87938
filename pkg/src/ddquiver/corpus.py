"""Small standard instances used by the tests, the acceptance suite and the
CLI examples."""
from __future__ import annotations

import random

from .algebra import PathAlgebra, Quiver, StructureConstants, TensorOverBase

LOOP = Quiver.build(["v"], [("x", "v", "v")])
A2 = Quiver.build(["u", "v", "w"], [("a", "u", "v"), ("b", "v", "w")])
KRONECKER = Quiver.build(["e1", "e2"], [("a", "e1", "e2"), ("b", "e1", "e2")])
TWO_CYCLE = Quiver.build(["u", "v"], [("a", "u", "v"), ("b", "v", "u")])
FREE2 = Quiver.build(["v"], [("x", "v", "v"), ("y", "v", "v")])

QUIVERS = {
    "loop": (LOOP, 6),
    "a2": (A2, 4),
    "kronecker": (KRONECKER, 4),
    "two-cycle": (TWO_CYCLE, 6),
    "free2": (FREE2, 5),
}


def corpus_algebras() -> dict[str, PathAlgebra]:
    return {name: PathAlgebra(q, cap) for name, (q, cap) in QUIVERS.items()}


def field_base() -> StructureConstants:
    """B = k."""
    return StructureConstants(["1"], {("1", "1"): {"1": 1}})


def vertex_base(n: int = 2) -> StructureConstants:
    """B = k^n with orthogonal idempotents e1..en."""
    names = [f"e{i + 1}" for i in range(n)]
    return StructureConstants(names, {(e, e): {e: 1} for e in names})


def free_tensor(cap: int = 5) -> TensorOverBase:
    """k<x, y> as T_k(k ⊗ k ⊕ k ⊗ k)."""
    B = field_base()
    one = B.one()
    return TensorOverBase(B, [("x", one, one), ("y", one, one)], cap=cap, style="words")


def kronecker_tensor(cap: int = 4) -> TensorOverBase:
    """The Kronecker path algebra as T_B(M), B = k e1 ⊕ k e2."""
    B = vertex_base(2)
    e1, e2 = B.lookup("e1"), B.lookup("e2")
    return TensorOverBase(B, [("a", e1, e2), ("b", e1, e2)], cap=cap, style="words")


def random_acyclic_quiver(rng: random.Random, max_vertices: int = 4,
                          max_arrows: int = 5) -> Quiver:
    """Acyclic quiver in which every vertex is the end of some arrow.

    Vertices are ordered and arrows only go forward; isolated vertices are
    excluded because they cannot be recovered from the arrow idempotents.
    """
    while True:
        n = rng.randint(2, max_vertices)
        m = rng.randint((n + 1) // 2, max_arrows)
        arrows = []
        for k in range(m):
            i, j = sorted(rng.sample(range(n), 2))
            arrows.append((f"a{k + 1}", f"v{i + 1}", f"v{j + 1}"))
        touched = {v for _, s, t in arrows for v in (s, t)}
        if len(touched) == n:
            return Quiver.build([f"v{i + 1}" for i in range(n)], arrows)
