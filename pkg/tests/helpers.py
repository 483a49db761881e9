"""Shared builders for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from nplectic.exterior import Chart, basis_form, basis_field, scalar_form
from nplectic.linfty import FiniteLInfty, GradedElement, GradedSpace, lie_algebra_structure
from nplectic.plectic import check_plectic


def plane():
    """(R^2, dx^dy) as a symplectic chart."""
    M = Chart("R2", ("x", "y"))
    return check_plectic(M, 1, basis_form(M, "x").wedge(basis_form(M, "y")))


def volume3():
    M = Chart("R3", ("x", "y", "z"))
    w = basis_form(M, "x").wedge(basis_form(M, "y")).wedge(basis_form(M, "z"))
    return check_plectic(M, 2, w)


def volume4():
    M = Chart("R4", ("x", "y", "u", "v"))
    w = basis_form(M, "x").wedge(basis_form(M, "y")) \
        .wedge(basis_form(M, "u")).wedge(basis_form(M, "v"))
    return check_plectic(M, 3, w)


def so3() -> FiniteLInfty:
    return lie_algebra_structure(["e1", "e2", "e3"], {
        ("e1", "e2"): {"e3": 1},
        ("e2", "e3"): {"e1": 1},
        ("e1", "e3"): {"e2": -1},
    })


def broken_so3() -> FiniteLInfty:
    """A table violating the Jacobi identity (the binary bracket of e1,e2 is
    redirected onto e2; every single sign flip of so(3) stays a Lie algebra,
    so a sign flip is not a usable failure case)."""
    return lie_algebra_structure(["e1", "e2", "e3"], {
        ("e1", "e2"): {"e2": 1},
        ("e2", "e3"): {"e1": 1},
        ("e1", "e3"): {"e2": -1},
    })


def seeded(n: int) -> random.Random:
    return random.Random(n)
