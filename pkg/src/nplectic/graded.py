"""Permutations, unshuffles, Koszul signs, suspension and decalage signs.

Permutations are 1-indexed throughout.  The Koszul sign eps(sigma; x) is
defined by  x_1 ... x_k = eps * x_{sigma(1)} ... x_{sigma(k)}  in the free
graded commutative algebra, so a transposition of adjacent letters of
degrees a, b contributes (-1)^(a*b).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence


class LengthMismatch(Exception):
    pass


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        k = len(self.images)
        if sorted(self.images) != list(range(1, k + 1)):
            raise ValueError(f"{self.images} is not a permutation of 1..{k}")

    @property
    def k(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        # function composition: (self * other)(i) = self(other(i))
        if self.k != other.k:
            raise LengthMismatch("composing permutations of different sizes")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.k
        for i, im in enumerate(self.images, start=1):
            inv[im - 1] = i
        return Permutation(tuple(inv))

    def permute(self, items: Sequence) -> list:
        """Return [items[sigma(1)-1], ..., items[sigma(k)-1]]."""
        if len(items) != self.k:
            raise LengthMismatch("sequence length does not match permutation")
        return [items[im - 1] for im in self.images]

    def sign(self) -> int:
        s = 1
        imgs = self.images
        for i in range(len(imgs)):
            for j in range(i + 1, len(imgs)):
                if imgs[i] > imgs[j]:
                    s = -s
        return s

    @classmethod
    def identity(cls, k: int) -> "Permutation":
        return cls(tuple(range(1, k + 1)))


def unshuffles(p: int, q: int) -> list[Permutation]:
    """All (p,q)-unshuffles: sigma(1)<...<sigma(p) and
    sigma(p+1)<...<sigma(p+q), in lexicographic order of the first block."""
    if p < 0 or q < 0 or p + q < 1:
        raise ValueError("need p, q >= 0 and p+q >= 1")
    n = p + q
    out = []
    universe = range(1, n + 1)
    for first in combinations(universe, p):
        rest = tuple(i for i in universe if i not in first)
        out.append(Permutation(first + rest))
    return out


def multi_unshuffles(*blocks: int) -> list[Permutation]:
    """Unshuffles with several consecutive increasing blocks,
    lexicographic in the earlier blocks."""
    n = sum(blocks)
    if n < 1 or any(b < 0 for b in blocks):
        raise ValueError("invalid block sizes")

    def rec(avail: tuple[int, ...], sizes: tuple[int, ...]):
        if not sizes:
            yield ()
            return
        for first in combinations(avail, sizes[0]):
            rest = tuple(i for i in avail if i not in first)
            for tail in rec(rest, sizes[1:]):
                yield first + tail

    return [Permutation(images) for images in rec(tuple(range(1, n + 1)), blocks)]


def _check_len(sigma: Permutation, degs: Sequence[int]):
    if sigma.k != len(degs):
        raise LengthMismatch("permutation size does not match degree vector")


def koszul_sign(sigma: Permutation, degs: Sequence[int]) -> int:
    """eps(sigma; x_1..x_k) for homogeneous x_i of the given degrees."""
    _check_len(sigma, degs)
    imgs = sigma.images
    s = 1
    for i in range(len(imgs)):
        di = degs[imgs[i] - 1]
        if di % 2 == 0:
            continue
        for j in range(i + 1, len(imgs)):
            if imgs[i] > imgs[j] and degs[imgs[j] - 1] % 2 != 0:
                s = -s
    return s


def signed_koszul(sigma: Permutation, degs: Sequence[int]) -> int:
    """(-1)^sigma * eps(sigma; degs): the sign of the odd representation."""
    return sigma.sign() * koszul_sign(sigma, degs)


def suspension_sign(k: int, degs: Sequence[int]) -> int:
    """Prefactor of s^{+-k} on a k-fold tensor: (-1)^(sum (k-i)|x_i|)."""
    if len(degs) != k:
        raise LengthMismatch("degree vector length does not match k")
    e = sum((k - i) * d for i, d in enumerate(degs, start=1))
    return -1 if e % 2 else 1


def decalage_koszul(sigma: Permutation, degs: Sequence[int]) -> int:
    """Koszul sign after shifting every degree down by one, written in
    terms of the unshifted data:
    (-1)^(sum (k-i)(|x_i|+|x_{sigma(i)}|)) * (-1)^sigma * eps(sigma)."""
    _check_len(sigma, degs)
    k = sigma.k
    e = sum((k - i) * (degs[i - 1] + degs[sigma(i) - 1]) for i in range(1, k + 1))
    base = -1 if e % 2 else 1
    return base * signed_koszul(sigma, degs)


def sorting_permutation(keys: Sequence) -> Permutation:
    """Permutation sigma with keys[sigma(i)-1] sorted ascending (stable)."""
    order = sorted(range(1, len(keys) + 1), key=lambda i: keys[i - 1])
    return Permutation(tuple(order))
