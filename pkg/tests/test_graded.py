from itertools import combinations, permutations, product

import pytest

from nplectic.graded import (LengthMismatch, Permutation, decalage_koszul,
                             koszul_sign, multi_unshuffles, signed_koszul,
                             sorting_permutation, suspension_sign, unshuffles)


def test_sh21_matches_listed_cycles():
    # identity, the transposition (23), and the 3-cycle (123)
    assert [s.images for s in unshuffles(2, 1)] == [(1, 2, 3), (1, 3, 2), (2, 3, 1)]


def test_unshuffle_count():
    assert len(unshuffles(2, 2)) == 6
    assert [s.images for s in unshuffles(1, 0)] == [(1,)]


def test_unshuffle_monotonicity():
    for p, q in [(1, 2), (2, 2), (3, 1), (0, 3)]:
        for s in unshuffles(p, q):
            assert list(s.images[:p]) == sorted(s.images[:p])
            assert list(s.images[p:]) == sorted(s.images[p:])
            assert sorted(s.images) == list(range(1, p + q + 1))


def test_multi_unshuffles():
    blocks = (1, 2, 1)
    shs = multi_unshuffles(*blocks)
    assert len(shs) == 12  # 4! / (1! 2! 1!)
    for s in shs:
        pos = 0
        for b in blocks:
            seg = s.images[pos:pos + b]
            assert list(seg) == sorted(seg)
            pos += b


def test_koszul_examples():
    assert koszul_sign(Permutation((2, 1)), (1, 1)) == -1
    # x1 x2 x3 -> x3 x1 x2 picks up (-1)^(|x3||x2| + |x3||x1|)
    s = Permutation((3, 1, 2))
    for a, b, c in product(range(-1, 3), repeat=3):
        want = -1 if (c * b + c * a) % 2 else 1
        assert koszul_sign(s, (a, b, c)) == want
    for imgs in permutations(range(1, 4)):
        assert koszul_sign(Permutation(imgs), (0, 0, 0)) == 1


def test_koszul_length_mismatch():
    with pytest.raises(LengthMismatch):
        koszul_sign(Permutation((1, 2)), (1,))


def test_koszul_composition_law():
    # eps(sigma o tau; degs) = eps(tau; sigma.degs) * eps(sigma; degs)
    for k in range(1, 5):
        for si in permutations(range(1, k + 1)):
            for ti in permutations(range(1, k + 1)):
                sg, tu = Permutation(si), Permutation(ti)
                for degs in product((0, 1), repeat=k):
                    lhs = koszul_sign(sg * tu, degs)
                    rhs = koszul_sign(tu, sg.permute(degs)) * koszul_sign(sg, degs)
                    assert lhs == rhs


def test_suspension_sign():
    assert suspension_sign(2, (1, 0)) == -1
    assert suspension_sign(1, (7,)) == 1
    assert suspension_sign(3, (1, 1, 1)) == -1
    with pytest.raises(LengthMismatch):
        suspension_sign(2, (1,))


def test_decalage_examples():
    ident = Permutation((1, 2, 3))
    assert decalage_koszul(ident, (4, -1, 2)) == 1
    swap = Permutation((2, 1))
    assert decalage_koszul(swap, (1, 1)) == 1
    assert decalage_koszul(swap, (0, 0)) == -1


def test_decalage_equals_shifted_koszul_small():
    for k in range(1, 5):
        for imgs in permutations(range(1, k + 1)):
            s = Permutation(imgs)
            for degs in product((-2, -1, 0, 1, 2), repeat=k):
                assert decalage_koszul(s, degs) == \
                    koszul_sign(s, [d - 1 for d in degs])


def test_permutation_algebra():
    s = Permutation((2, 3, 1))
    assert (s * s.inverse()).images == (1, 2, 3)
    assert s.sign() == 1
    assert Permutation((2, 1, 3)).sign() == -1
    assert s.permute(["a", "b", "c"]) == ["b", "c", "a"]
    assert sorting_permutation([30, 10, 20]).permute([30, 10, 20]) == [10, 20, 30]
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))
