from fractions import Fraction

import pytest

from helpers import plane, seeded
from nplectic.exterior import (Chart, basis_field, basis_form, exterior_derivative,
                               interior_product, random_form, scalar_form,
                               vf_bracket)
from nplectic.plectic import bracket2, check_plectic, hamiltonian_vf
from nplectic.moment import (BracketIncompatible, LieAlgebra, MomentCandidate,
                             NondegenerateFailure, NotHamiltonianAction,
                             NotPreserving, PlecticAction, abelian_algebra,
                             check_action, check_moment, cs_a, cs_b, h_omega,
                             h_omega_defect, h_x, is_lift, lift_hamiltonian,
                             moment_residuals, product_moment, product_plectic,
                             restrict_to_diagonal, symplectic_H_check)


def translations_2d():
    P = plane()
    M = P.chart
    g = abelian_algebra(["e1", "e2"])
    return P, check_action(P, g, {"e1": -basis_field(M, "x"),
                                  "e2": -basis_field(M, "y")})


def test_lie_algebra_jacobi_enforced():
    LieAlgebra(["a", "b", "c"], {("a", "b"): {"c": 1}})  # heisenberg: fine
    with pytest.raises(ValueError):
        LieAlgebra(["a", "b", "c"], {("a", "b"): {"b": 1},
                                     ("b", "c"): {"a": 1},
                                     ("a", "c"): {"b": -1}})


def test_check_action_valid_translations():
    P, act = translations_2d()
    assert act.convention == "morphism"
    assert vf_bracket(act.field("e1"), act.field("e2")).is_zero()


def test_check_action_not_preserving():
    P = plane()
    M = P.chart
    with pytest.raises(NotPreserving) as exc:
        check_action(P, abelian_algebra(["s"]),
                     {"s": basis_field(M, "x") * M.coordinate("x")})
    assert exc.value.witness == basis_form(M, "x").wedge(basis_form(M, "y"))


def test_check_action_rotation_hamiltonian():
    P = plane()
    M = P.chart
    x, y = M.coordinate("x"), M.coordinate("y")
    u = basis_field(M, "y") * x - basis_field(M, "x") * y
    act = check_action(P, abelian_algebra(["r"]), {"r": u})
    alpha = scalar_form(M, 1) * ((x * x + y * y) * Fraction(1, 2))
    assert exterior_derivative(alpha) == -interior_product(u, P.omega)


def test_check_action_bracket_incompatible():
    P = plane()
    M = P.chart
    h3 = LieAlgebra(["X", "Y", "Z"], {("X", "Y"): {"Z": 1}})
    with pytest.raises(BracketIncompatible):
        check_action(P, h3, {"X": basis_field(M, "x"), "Y": basis_field(M, "y"),
                             "Z": basis_field(M, "y")})
    # anti convention flips the expected bracket
    g = LieAlgebra(["a", "b"], {})
    act = check_action(P, g, {"a": basis_field(M, "x"), "b": basis_field(M, "y")},
                       convention="anti")
    assert act.convention == "anti"


def test_moment_obstruction_smoke():
    """Translations with the standard linear components fail the top
    condition with residual exactly -1: the classical obstruction."""
    P, act = translations_2d()
    M = P.chart
    x, y = M.coordinate("x"), M.coordinate("y")
    F = MomentCandidate(act, {1: {("e1",): scalar_form(M, 1) * y,
                                  ("e2",): scalar_form(M, 1) * (-x)}})
    rows, _ = check_moment(F)
    by_cond = {(r.k, r.condition): r for r in rows}
    assert not by_cond[(1, "lift")].residual_nonzero
    top = by_cond[(2, "top")]
    assert top.residual == scalar_form(M, -1)
    # the audit cannot repair it either: no sign choice makes it vanish
    rows2, signs = check_moment(F, sign_audit=True)
    assert any(r.residual_nonzero for r in rows2)


def test_moment_so2_passes():
    P = plane()
    M = P.chart
    x, y = M.coordinate("x"), M.coordinate("y")
    u = basis_field(M, "y") * x - basis_field(M, "x") * y
    act = check_action(P, abelian_algebra(["r"]), {"r": u})
    F = MomentCandidate(act, {1: {("r",): scalar_form(M, 1) *
                                  ((x * x + y * y) * Fraction(1, 2))}})
    rows, _ = check_moment(F)
    assert all(not r.residual_nonzero for r in rows)


def test_moment_trivial_action():
    P = plane()
    M = P.chart
    act = check_action(P, abelian_algebra(["z"]),
                       {"z": basis_field(M, "x") * M.scalar(0)})
    F = MomentCandidate(act, {1: {}})
    rows, _ = check_moment(F)
    assert all(not r.residual_nonzero for r in rows)


def symplectic_pair():
    A = Chart("A", ("x", "y"))
    B = Chart("B", ("u", "v"))
    PA = check_plectic(A, 1, basis_form(A, "x").wedge(basis_form(A, "y")))
    PB = check_plectic(B, 1, basis_form(B, "u").wedge(basis_form(B, "v")))
    return PA, PB


def test_product_plectic():
    PA, PB = symplectic_pair()
    Q = product_plectic(PA, PB)
    assert Q.n == 3
    assert Q.manifold.chart.variables == ("a.x", "a.y", "b.u", "b.v")
    C = Q.manifold.chart
    expected = basis_form(C, "a.x").wedge(basis_form(C, "a.y")) \
        .wedge(basis_form(C, "b.u")).wedge(basis_form(C, "b.v"))
    assert Q.manifold.omega == expected


def test_lift_identity_random():
    PA, PB = symplectic_pair()
    Q = product_plectic(PA, PB)
    rng = seeded(30)
    for _ in range(6):
        fa = random_form(PA.chart, 0, rng, 2, 2)
        fb = random_form(PB.chart, 0, rng, 2, 2)
        X, alpha = lift_hamiltonian(Q, fa, fb)
        assert interior_product(X, Q.manifold.omega) == \
            -exterior_derivative(alpha)


def test_h_omega_defect_formula():
    PA, PB = symplectic_pair()
    Q = product_plectic(PA, PB)
    rng = seeded(31)
    # constants are closed: defect vanishes
    ca = scalar_form(PA.chart, 3)
    cb = scalar_form(PB.chart, Fraction(1, 2))
    d0, _ = h_omega_defect(Q, ca, cb, ca, cb)
    assert d0.is_zero()
    # equal pairs: antisymmetry kills the defect
    fa = random_form(PA.chart, 0, rng, 2, 2)
    fb = random_form(PB.chart, 0, rng, 2, 2)
    d1, _ = h_omega_defect(Q, fa, fb, fa, fb)
    assert d1.is_zero()
    # generic pairs match the printed formula with one global sign
    signs = set()
    for _ in range(6):
        aa, ba = (random_form(PA.chart, 0, rng, 2, 2) for _ in range(2))
        ab, bb = (random_form(PB.chart, 0, rng, 2, 2) for _ in range(2))
        _, s = h_omega_defect(Q, aa, ab, ba, bb)
        signs.add(s)
    assert signs == {-1}


def test_h_x_preserves_brackets():
    PA, PB = symplectic_pair()
    Q = product_plectic(PA, PB)
    rng = seeded(32)
    for _ in range(6):
        fa, ga = (random_form(PA.chart, 0, rng, 2, 2) for _ in range(2))
        fb, gb = (random_form(PB.chart, 0, rng, 2, 2) for _ in range(2))
        Xa, Ya = hamiltonian_vf(PA, fa), hamiltonian_vf(PA, ga)
        Xb, Yb = hamiltonian_vf(PB, fb), hamiltonian_vf(PB, gb)
        assert h_x(Q, vf_bracket(Xa, Ya), vf_bracket(Xb, Yb)) == \
            vf_bracket(h_x(Q, Xa, Xb), h_x(Q, Ya, Yb))


def test_symplectic_H_morphism():
    PA, PB = symplectic_pair()
    Q = product_plectic(PA, PB)
    rng = seeded(33)
    tuples = [tuple((random_form(PA.chart, 0, rng, 2, 2),
                     random_form(PB.chart, 0, rng, 2, 2)) for _ in range(4))
              for _ in range(3)]
    rows, signs = symplectic_H_check(Q, tuples, sign_audit=True)
    assert all(not r.residual_nonzero for r in rows)
    # the three-argument component needs the opposite global sign
    assert signs == {2: 1, 3: -1}
    # constants: everything vanishes without any audit
    const_tuple = [tuple((scalar_form(PA.chart, i + 1), scalar_form(PB.chart, 1))
                         for i in range(4))]
    rows0, _ = symplectic_H_check(Q, const_tuple)
    for r in rows0:
        if r.k == 2:
            assert not r.residual_nonzero


def test_cs_coefficients():
    assert cs_a(1, 1, 1) == 1 and cs_b(1, 0, 1) == 1
    assert cs_a(2, 1, 1) == Fraction(-1, 2)
    assert cs_b(2, 1, 1) == Fraction(1, 2)


def trans_times_rot():
    PA, PB = symplectic_pair()
    A, B = PA.chart, PB.chart
    ga = abelian_algebra(["t"])
    acta = check_action(PA, ga, {"t": basis_field(A, "x")})
    Fa = MomentCandidate(acta, {1: {("t",): scalar_form(A, 1) *
                                    (-A.coordinate("y"))}})
    gb = abelian_algebra(["r"])
    u_, v_ = B.coordinate("u"), B.coordinate("v")
    ub = basis_field(B, "v") * u_ - basis_field(B, "u") * v_
    actb = check_action(PB, gb, {"r": ub})
    Fb = MomentCandidate(actb, {1: {("r",): scalar_form(B, 1) *
                                    ((u_ * u_ + v_ * v_) * Fraction(1, 2))}})
    return PA, PB, Fa, Fb


def test_product_moment_translations_rotations():
    PA, PB, Fa, Fb = trans_times_rot()
    for F in (Fa, Fb):
        rows, _ = check_moment(F)
        assert all(not r.residual_nonzero for r in rows)
    Q = product_plectic(PA, PB)
    FP = product_moment(Q, Fa, Fb)
    rows, signs = check_moment(FP, sign_audit=True)
    assert all(not r.residual_nonzero for r in rows)
    assert signs == {2: 1, 3: 1}  # the printed coefficients verify exactly
    rows_plain, _ = check_moment(FP)
    assert all(not r.residual_nonzero for r in rows_plain)


def test_product_moment_heisenberg_exercises_top_arities():
    PA, PB = symplectic_pair()
    A, B = PA.chart, PB.chart
    h3 = LieAlgebra(["X", "Y", "Z"], {("X", "Y"): {"Z": 1}})
    acta = check_action(PA, h3, {"X": basis_field(A, "x"),
                                 "Y": basis_field(A, "y"),
                                 "Z": basis_field(A, "x") * A.scalar(0)})
    Fa = MomentCandidate(acta, {1: {
        ("X",): scalar_form(A, 1) * (-A.coordinate("y")),
        ("Y",): scalar_form(A, 1) * A.coordinate("x"),
        ("Z",): scalar_form(A, 1)}})
    rows, _ = check_moment(Fa)
    assert all(not r.residual_nonzero for r in rows)
    gb = abelian_algebra(["r"])
    u_, v_ = B.coordinate("u"), B.coordinate("v")
    actb = check_action(PB, gb, {"r": basis_field(B, "v") * u_ -
                                 basis_field(B, "u") * v_})
    Fb = MomentCandidate(actb, {1: {("r",): scalar_form(B, 1) *
                                    ((u_ * u_ + v_ * v_) * Fraction(1, 2))}})
    Q = product_plectic(PA, PB)
    FP = product_moment(Q, Fa, Fb)
    rows = moment_residuals(FP)
    assert {r.k for r in rows} == {1, 2, 3, 4}
    assert all(not r.residual_nonzero for r in rows)


def test_is_lift_membership():
    C = Chart("C", ("x", "y"))
    D = Chart("D", ("x", "y"))
    xc, xd = C.coordinate("x"), D.coordinate("x")
    PC = check_plectic(C, 1, basis_form(C, "x").wedge(basis_form(C, "y")) *
                       (1 + xc * xc))
    PD = check_plectic(D, 1, basis_form(D, "x").wedge(basis_form(D, "y")) *
                       (1 + xd * xd))
    Q = product_plectic(PC, PD)
    E = Q.manifold.chart
    alpha = basis_form(E, "b.x").wedge(basis_form(E, "b.y")) * E.coordinate("a.y")
    X = hamiltonian_vf(Q.manifold, alpha)
    assert not is_lift(Q, X)
    Xl, _ = lift_hamiltonian(Q, scalar_form(C, 1) * xc, scalar_form(D, 1) * xd)
    assert is_lift(Q, Xl)


def test_restrict_to_diagonal():
    M = Chart("M", ("x", "y", "u", "v"))
    w = basis_form(M, "x").wedge(basis_form(M, "y")) + \
        basis_form(M, "u").wedge(basis_form(M, "v"))
    PM = check_plectic(M, 1, w)
    g = abelian_algebra(["e1", "e2"])
    act = check_action(PM, g, {"e1": basis_field(M, "x"),
                               "e2": basis_field(M, "u")})
    F = MomentCandidate(act, {1: {("e1",): scalar_form(M, 1) * (-M.coordinate("y")),
                                  ("e2",): scalar_form(M, 1) * (-M.coordinate("v"))}})
    Q = product_plectic(PM, PM)
    FP = product_moment(Q, F, F)
    FD, P2 = restrict_to_diagonal(FP, Q)
    assert P2.n == 3
    two_vol = basis_form(M, "x").wedge(basis_form(M, "y")) \
        .wedge(basis_form(M, "u")).wedge(basis_form(M, "v")) * 2
    assert P2.omega == two_vol
    rows, _ = check_moment(FD)
    assert rows and all(not r.residual_nonzero for r in rows)


def test_restrict_to_diagonal_degenerate():
    P = plane()
    M = P.chart
    g = abelian_algebra(["t"])
    act = check_action(P, g, {"t": basis_field(M, "x")})
    F = MomentCandidate(act, {1: {("t",): scalar_form(M, 1) *
                                  (-M.coordinate("y"))}})
    Q = product_plectic(P, P)
    FP = product_moment(Q, F, F)
    with pytest.raises(NondegenerateFailure):
        restrict_to_diagonal(FP, Q)


def test_moment_invariance_under_closed_shift():
    """Adding a closed form to f_1(y) changes the lift residual by exactly the
    derivative of the added form (an exact bookkeeping identity)."""
    P, act = translations_2d()
    M = P.chart
    x, y = M.coordinate("x"), M.coordinate("y")
    base = {("e1",): scalar_form(M, 1) * y, ("e2",): scalar_form(M, 1) * (-x)}
    F = MomentCandidate(act, {1: dict(base)})
    shift = scalar_form(M, 5)  # closed 0-form
    shifted = dict(base)
    shifted[("e1",)] = shifted[("e1",)] + shift
    F2 = MomentCandidate(act, {1: shifted})
    r1 = {(r.k, r.tuple, r.condition): r.residual for r in moment_residuals(F)}
    r2 = {(r.k, r.tuple, r.condition): r.residual for r in moment_residuals(F2)}
    for key, res in r1.items():
        diff = r2[key] - res
        if key[1] == ("e1",) and key[2] == "lift":
            assert diff == -exterior_derivative(shift)
        elif key[2] == "lift":
            assert diff.is_zero()
