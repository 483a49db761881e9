from fractions import Fraction
from itertools import combinations

import pytest

from helpers import broken_so3, so3
from nplectic.linfty import (ArityOutOfRange, DegreeMismatch, FiniteLInfty,
                             FiniteLInftyShifted, GradedElement, GradedSpace,
                             WordSum, all_words, canonical_word,
                             check_generalized_jacobi, check_L1condition,
                             check_liealg_morphism, check_square_zero,
                             check_strict_morphism, coderivation,
                             coleibniz_residual, decalage_shift, decalage_unshift,
                             full_signed_expansion, lie_algebra_structure,
                             morphism_residual, reduced_comultiplication,
                             reduced_diagonal)


def ge(space, **coeffs):
    return GradedElement(space, {k: Fraction(v) for k, v in coeffs.items()})


def test_eval_bracket_so3():
    A = so3()
    assert A.eval_bracket(2, ["e1", "e2"]) == ge(A.space, e3=1)
    assert A.eval_bracket(2, ["e2", "e1"]) == ge(A.space, e3=-1)
    assert A.eval_bracket(2, ["e1", "e1"]).is_zero()
    assert A.eval_bracket(2, ["e1", GradedElement.zero(A.space)]).is_zero()
    with pytest.raises(ArityOutOfRange):
        A.eval_bracket(2, ["e1"])


def test_degree_invariant_enforced():
    space = GradedSpace((("u", 0), ("w", -1)))
    with pytest.raises(DegreeMismatch):
        FiniteLInfty(space, {1: {("u",): GradedElement(space, {"w": 1})}})
    # a structure concentrated in degrees 0..1-n admits no brackets of arity
    # beyond n+1: the required value degree falls below every basis degree
    big = GradedSpace((("a", 0), ("b", 0), ("c", -1), ("d", -1)))
    for label in big.labels:
        with pytest.raises(DegreeMismatch):
            FiniteLInfty(big, {4: {("a", "b", "c", "d"):
                                   GradedElement(big, {label: 1})}})


def test_generalized_jacobi_so3():
    rows = check_generalized_jacobi(so3(), 3)
    assert all(not r.residual_nonzero for r in rows)


def test_generalized_jacobi_broken_witness():
    rows = check_generalized_jacobi(broken_so3(), 3)
    bad = [r for r in rows if r.residual_nonzero]
    assert [(r.arity, r.tuple) for r in bad] == [(3, ("e1", "e2", "e3"))]
    assert str(bad[0].residual) == "e1"


def test_two_term_complex():
    space = GradedSpace((("u", 0), ("w", -1)))
    cx = FiniteLInfty(space, {1: {("w",): GradedElement(space, {"u": 1})}})
    rows = check_generalized_jacobi(cx, 3)
    assert all(not r.residual_nonzero for r in rows)


def test_decalage_roundtrip():
    A = so3()
    B = decalage_shift(A)
    assert B.space.basis == (("e1", -1), ("e2", -1), ("e3", -1))
    back = decalage_unshift(B)
    assert back.space == A.space and back.tables == A.tables
    # the suspension prefactor on degree (0,0) inputs is +1
    assert B.eval_bracket(2, ["e1", "e2"]) == GradedElement(B.space, {"e3": 1})
    # shifted bracket is graded symmetric: at odd degrees swapping flips sign
    assert B.eval_bracket(2, ["e2", "e1"]) == GradedElement(B.space, {"e3": -1})


def test_L1_matches_generalized_jacobi():
    for A in (so3(), broken_so3()):
        gj = {r.tuple for r in check_generalized_jacobi(A, 3) if r.residual_nonzero}
        l1 = {r.tuple for r in check_L1condition(decalage_shift(A), 3)
              if r.residual_nonzero}
        assert gj == l1


def test_single_differential_squares_to_zero():
    space = GradedSpace((("u", -1), ("w", -2)))
    B = FiniteLInftyShifted(space, {1: {("w",): GradedElement(space, {"u": 1})}})
    rows = check_L1condition(B, 3)
    assert all(not r.residual_nonzero for r in rows)


def test_coderivation_words():
    B = decalage_shift(so3())
    q = coderivation(B, 4)
    # length-1 word: Q(x) = m1(x) = 0 here
    assert q(WordSum.word(B.space, ("e1",))).is_zero()
    # length-2 word: Q(x&y) = m2(x,y) plus re-inserted m1 terms (zero here)
    out = q(WordSum.word(B.space, ("e1", "e2")))
    assert out == WordSum(B.space, {("e3",): Fraction(1)})


def test_coderivation_with_differential_term():
    # nontrivial m1: check the unshuffle re-insertion with the Koszul sign
    space = GradedSpace((("a", -1), ("b", -2)))
    B = FiniteLInftyShifted(space, {1: {("b",): GradedElement(space, {"a": 1})}})
    q = coderivation(B, 3)
    out = q(WordSum.word(space, ("a", "b")))
    # Q(a&b) = m1(a)&b + eps * m1(b)&a = 0 + (+1)* a&a which dies (odd square)
    assert out.is_zero()
    out2 = q(WordSum.word(space, ("b", "b")))
    # word b&b survives (even degree), Q gives a&b terms from both slots
    assert out2 == WordSum(space, {("a", "b"): Fraction(2)})


def test_square_zero_matches_tower():
    assert check_square_zero(decalage_shift(so3()), 4) == []
    bad = check_square_zero(decalage_shift(broken_so3()), 4)
    assert [w for w, _ in bad] == [("e1", "e2", "e3")]
    assert str(bad[0][1]) == "e1"


def test_coleibniz():
    for A in (so3(), broken_so3()):
        B = decalage_shift(A)
        for w in all_words(B.space, 4):
            assert coleibniz_residual(B, w, 4).is_zero()


def test_reduced_comultiplication_examples():
    sp = GradedSpace((("x", 0), ("y", 1)))
    assert reduced_comultiplication(sp, ("x",)).is_zero()
    t = reduced_comultiplication(sp, ("x", "y"))
    assert t.terms == {(("x",), ("y",)): Fraction(1), (("y",), ("x",)): Fraction(1)}
    # with two odd letters the swap picks up the Koszul sign
    sp2 = GradedSpace((("a", 1), ("b", 1)))
    t2 = reduced_comultiplication(sp2, ("a", "b"))
    assert t2.terms == {(("a",), ("b",)): Fraction(1), (("b",), ("a",)): Fraction(-1)}


def test_reduced_diagonal_lemma():
    sp = GradedSpace((("a", 0), ("b", 1), ("c", -1), ("d", 2)))
    for n in range(1, 5):
        for word in combinations("abcd", n):
            assert reduced_diagonal(sp, n - 1, word) == \
                full_signed_expansion(sp, word)


def test_kernel_of_iterated_diagonal():
    sp = GradedSpace((("a", 0), ("b", 1), ("c", -1)))
    for word in [("a",), ("a", "b"), ("a", "b", "c")]:
        assert reduced_diagonal(sp, len(word), word).is_zero()


def test_strict_morphism():
    A = so3()
    ident = {b: GradedElement.basis(A.space, b) for b in A.space.labels}
    assert all(not r.residual_nonzero
               for r in check_strict_morphism(ident, A, A, 2))
    doubling = {b: GradedElement(A.space, {b: 2}) for b in A.space.labels}
    bad = [r for r in check_strict_morphism(doubling, A, A, 2)
           if r.residual_nonzero]
    assert {r.arity for r in bad} == {2}
    assert str(bad[0].residual) == "2*e3"  # 4 e3 - 2 e3
    zero = {b: GradedElement.zero(A.space) for b in A.space.labels}
    assert all(not r.residual_nonzero
               for r in check_strict_morphism(zero, A, A, 2))
    shifted_source = FiniteLInfty(A.space.shifted(), {})
    with pytest.raises(DegreeMismatch):
        check_strict_morphism(
            {b: GradedElement.basis(A.space, "e1") for b in A.space.labels},
            shifted_source, A, 1)


class _Abelian:
    labels = ("g1", "g2")

    def bracket_basis(self, a, b):
        return {}


def test_liealg_morphism_abelian_zero():
    space = GradedSpace((("u", 0), ("w", -1)))
    A = FiniteLInfty(space, {1: {("w",): GradedElement(space, {"u": 1})}})
    f = {1: {("g1",): GradedElement.zero(space), ("g2",): GradedElement.zero(space)}}
    rows = check_liealg_morphism(f, _Abelian(), A, 2)
    assert all(not r.residual_nonzero for r in rows)


def test_liealg_morphism_dropped_component_fails():
    # L = two-term complex, l2(u, u) impossible; instead take an honest
    # instance where f2 absorbs a curvature term, then drop f2
    space = GradedSpace((("u", 0), ("w", -1)))
    l1 = {("w",): GradedElement(space, {"u": 1})}
    A = FiniteLInfty(space, {1: l1})
    f_full = {1: {("g1",): GradedElement.zero(space),
                  ("g2",): GradedElement.zero(space)},
              2: {("g1", "g2"): GradedElement(space, {"w": 1})}}
    rows = check_liealg_morphism(f_full, _Abelian(), A, 2)
    bad = [r for r in rows if r.residual_nonzero]
    # the l1 f2 term is the whole residual at m = 2
    assert [(r.arity, str(r.residual)) for r in bad] == [(2, "-u")]
    f_dropped = {1: f_full[1]}
    rows2 = check_liealg_morphism(f_dropped, _Abelian(), A, 2)
    assert all(not r.residual_nonzero for r in rows2)


def test_morphism_residual_small_arity():
    B = decalage_shift(so3())
    ident = {1: {(b,): GradedElement.basis(B.space, b) for b in B.space.labels}}
    for k in (1, 2, 3):
        for tup in combinations(B.space.labels, k):
            assert morphism_residual(ident, B, B, tup).is_zero()
    doubling = {1: {(b,): GradedElement(B.space, {b: 2}) for b in B.space.labels}}
    r = morphism_residual(doubling, B, B, ("e1", "e2"))
    assert str(r) == "-2*e3"


def test_canonical_word_signs():
    sp = GradedSpace((("a", -1), ("b", -1)))
    assert canonical_word(sp, ("b", "a")) == (-1, ("a", "b"))
    assert canonical_word(sp, ("a", "a")) is None
    sp2 = GradedSpace((("a", 0), ("b", -1)))
    assert canonical_word(sp2, ("b", "a")) == (1, ("a", "b"))
    assert canonical_word(sp2, ("a", "a")) == (1, ("a", "a"))
