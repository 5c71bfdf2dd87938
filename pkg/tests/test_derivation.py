from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddquiver import (DoubleDerivation, NotWitnessed, apply, canonical_derivations,
                      canonical_setup, check_hypotheses, extend_apply, iterate,
                      nilpotency_index, partial_double_derivations, path_algebra,
                      tensor_algebra)
from ddquiver.algebra import AlgebraMismatch, Path
from ddquiver.corpus import A2, KRONECKER, LOOP, QUIVERS, free_tensor, kronecker_tensor

CHECKS = ["idempotent", "sxt", "condition-1", "condition-2", "condition-3a",
          "condition-3b", "nilpotency"]


def occurrence_oracle(A, arrow, p: Path):
    """D_arrow(p) summed over the positions of ``arrow`` in the word p."""
    T = tensor_algebra(A)
    src, tgt = A.quiver.arrow(arrow).source, A.quiver.arrow(arrow).target
    out = T.zero()
    for k, letter in enumerate(p.arrows):
        if letter != arrow:
            continue
        left = Path(p.start, src, p.arrows[:k])
        right = Path(tgt, p.end, p.arrows[k + 1:])
        out = out + T.pure([A.monomial(left), A.monomial(right)])
    return out


@pytest.fixture
def loop():
    A = path_algebra(LOOP, 6)
    (D,) = canonical_derivations(A)
    return A, D, tensor_algebra(A)


# ---------------------------------------------------------------- apply / extend / iterate

def test_apply_examples(loop):
    A, D, T = loop
    x, one = A.arrow("x"), A.one()
    assert apply(D, x) == T.pure([one, one])
    assert str(apply(D, x * x)) == "1|x + x|1"
    K = path_algebra(KRONECKER, 4)
    Da, Db = canonical_derivations(K)
    assert apply(Da, K.arrow("b")) == 0
    assert apply(Db, K.arrow("a")) == 0
    assert str(apply(Da, K.arrow("a"))) == "e1|e2"


def test_apply_rejects_foreign_element(loop):
    _, D, _ = loop
    with pytest.raises(AlgebraMismatch):
        apply(D, path_algebra(A2, 3).arrow("a"))
    with pytest.raises(AlgebraMismatch):
        extend_apply(D, path_algebra(LOOP, 6).arrow("x"))


def test_extend_apply_examples(loop):
    A, D, T = loop
    x, one = A.arrow("x"), A.one()
    assert extend_apply(D, T.embed(x * x)) == apply(D, x * x)
    assert extend_apply(D, T.pure([x, one])) == T.pure([one, one, one])
    assert extend_apply(D, T.pure([one, x])) == T.pure([one, one, one])


def test_iterate_examples(loop):
    A, D, T = loop
    x, one = A.arrow("x"), A.one()
    assert iterate(D, x * x, 0) == T.embed(x * x)
    assert iterate(D, x * x, 2) == T.pure([one, one, one]).scale(2)
    assert iterate(D, x * x, 3) == 0


def test_nilpotency_examples(loop):
    A, D, _ = loop
    x = A.arrow("x")
    assert nilpotency_index(D, A.one(), 4) == 1
    assert nilpotency_index(D, A.zero(), 4) == 0
    assert nilpotency_index(D, x * x, 4) == 3
    assert isinstance(nilpotency_index(D, x * x, 2), NotWitnessed)
    assert not nilpotency_index(D, x * x, 2)
    K = path_algebra(KRONECKER, 4)
    Da, _ = canonical_derivations(K)
    assert nilpotency_index(Da, K.arrow("b"), 3) == 1
    with pytest.raises(ValueError):
        nilpotency_index(D, x, 0)


def test_images_must_be_degree_one(loop):
    A, _, T = loop
    with pytest.raises(ValueError):
        DoubleDerivation(A, {"x": T.embed(A.one())})
    with pytest.raises(KeyError):
        DoubleDerivation(A, {"z": T.pure([A.one(), A.one()])})


# ---------------------------------------------------------------- properties

@pytest.mark.parametrize("name", sorted(QUIVERS))
def test_canonical_matches_occurrence_oracle(name, corpus):
    A = corpus[name]
    for D, arrow in zip(canonical_derivations(A), A.quiver.arrows):
        for m in A.basis_upto():
            (p,) = m.terms
            assert apply(D, m) == occurrence_oracle(A, arrow.name, p)


def _random_element(A, data, c):
    mons = A.basis_upto(c)
    picks = data.draw(st.lists(st.tuples(st.sampled_from(mons), st.integers(-3, 3)), max_size=3))
    out = A.zero()
    for m, k in picks:
        out = out + m.scale(k)
    return out


SETUPS = {name: canonical_setup(path_algebra(q, cap)) for name, (q, cap) in QUIVERS.items()}
SETUPS["free2-tensor"] = canonical_setup(free_tensor(5))
SETUPS["kronecker-tensor"] = canonical_setup(kronecker_tensor(4))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(SETUPS)), st.data())
def test_leibniz(name, data):
    S = SETUPS[name]
    A = S.algebra
    T = tensor_algebra(A)
    c = A.cap // 2
    p, q = _random_element(A, data, c), _random_element(A, data, c)
    for D in S.derivations:
        assert apply(D, p * q) == apply(D, p) * T.embed(q) + T.embed(p) * apply(D, q)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(SETUPS)), st.data())
def test_extension_is_derivation(name, data):
    S = SETUPS[name]
    A = S.algebra
    T = tensor_algebra(A)
    c = A.cap // 3

    def rand():
        n = data.draw(st.integers(1, 3))
        return T.pure([_random_element(A, data, c) for _ in range(n)])

    u, v = rand(), rand()
    for D in S.derivations:
        assert extend_apply(D, u * v) == extend_apply(D, u) * v + u * extend_apply(D, v)
        # u is homogeneous, so its image sits one degree higher
        d = {T.degree(k) for k in u.terms}
        assert {T.degree(k) for k in extend_apply(D, u).terms} <= {e + 1 for e in d}


@pytest.mark.parametrize("name", sorted(SETUPS))
def test_delta_ij(name):
    S = SETUPS[name]
    T = tensor_algebra(S.algebra)
    for i, D in enumerate(S.derivations):
        for j, x in enumerate(S.xs):
            want = T.pure([S.ss[j], S.ts[j]]) if i == j else T.zero()
            assert apply(D, x) == want


@pytest.mark.parametrize("name", sorted(QUIVERS))
def test_local_nilpotency_bound(name):
    S = SETUPS[name]
    A = S.algebra
    for D, arrow in zip(S.derivations, A.quiver.arrows):
        for m in A.basis_upto():
            (p,) = m.terms
            idx = nilpotency_index(D, m, len(p.arrows) + 2)
            assert idx == p.arrows.count(arrow.name) + 1


# ---------------------------------------------------------------- hypotheses

@pytest.mark.parametrize("name", sorted(SETUPS))
def test_hypotheses_pass(name):
    S = SETUPS[name]
    rep = check_hypotheses(S.derivations, S.xs, S.ss, S.ts)
    assert [c.name for c in rep.checks] == CHECKS
    assert rep.passed and not rep.failed()
    assert "PROVEN" in rep.checks[-1].detail


def test_loop_condition3_vacuous():
    S = SETUPS["loop"]
    rep = check_hypotheses(S.derivations, S.xs, S.ss, S.ts)
    assert rep.checks[4].detail == "vacuous (n=1)"


def test_sabotage_condition2():
    S = SETUPS["kronecker"]
    A = S.algebra
    T = tensor_algebra(A)
    e1, e2 = A.vertex("e1"), A.vertex("e2")
    D1 = DoubleDerivation(A, {"a": T.pure([e1, e2]), "b": T.pure([e1, e2])})
    rep = check_hypotheses([D1, S.derivations[1]], S.xs, S.ss, S.ts)
    assert rep.failed() == ["condition-2"]
    assert rep.checks[3].line() == "CHECK condition-2 FAIL (i=1,j=2)"


def test_sabotage_condition1():
    A = path_algebra(A2, 4)
    S = canonical_setup(A)
    T = tensor_algebra(A)
    u, w = A.trivial("u"), A.vertex("w")
    D1 = DoubleDerivation(A, S.derivations[0].images, key_images={u: T.pure([w, w])})
    rep = check_hypotheses([D1, S.derivations[1]], S.xs, S.ss, S.ts)
    assert rep.failed() == ["condition-1"]
    assert "WITNESSED" in rep.checks[-1].detail


def test_sabotage_idempotent():
    S = SETUPS["kronecker"]
    A = S.algebra
    ss = [S.ss[0].scale(2), S.ss[1]]
    ts = [S.ts[0].scale(Fraction(1, 2)), S.ts[1]]
    rep = check_hypotheses(S.derivations, S.xs, ss, ts)
    assert rep.failed() == ["idempotent"]
    assert rep.checks[0].detail == "(s_1)"


def test_length_mismatch():
    S = SETUPS["kronecker"]
    with pytest.raises(ValueError):
        check_hypotheses(S.derivations, S.xs[:1], S.ss, S.ts)


# ---------------------------------------------------------------- converse

def test_partial_free():
    F = free_tensor(5)
    Ds = partial_double_derivations(F)
    T = tensor_algebra(F)
    one = F.one()
    for i, D in enumerate(Ds):
        for j, lab in enumerate(("x", "y")):
            want = T.pure([one, one]) if i == j else T.zero()
            assert apply(D, F.generator(lab)) == want


def test_partial_kronecker():
    K = kronecker_tensor(4)
    Da, Db = partial_double_derivations(K)
    assert str(apply(Da, K.generator("a"))) == "e1|e2"
    assert apply(Da, K.generator("b")) == 0
    for D in (Da, Db):
        for b in K.graded_basis(0):
            assert apply(D, b) == 0


def test_partial_rejects_path_algebra():
    with pytest.raises(TypeError):
        partial_double_derivations(path_algebra(LOOP, 3))

