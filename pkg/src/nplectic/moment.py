"""Lie algebra actions, homotopy moment map residuals, products, diagonals.

A moment candidate for an action on an n-plectic chart is a family of
antisymmetric maps f_k: g^(x k) -> (n-k)-forms, 1 <= k <= n.  Its residuals:

  (i)   per generator y:            -iota_{u_y} omega - d f_1(y)
  (ii)  for 2 <= k <= n, per tuple:
          s_{k-1} sum_{i<j} (-1)^(i+j+1) f_{k-1}([y_i,y_j], ..rest..)
            - s_k d f_k(y_1..y_k) - xi(k) * iota(u_1^..^u_k) omega
  (iii) at k = n+1: the same sum (with s_n f_n) minus xi(n+1) * iota(..) omega

where s_k is a global per-arity sign on the component f_k, defaulting to +1
(s_1 is pinned by (i)).  Sign-audit mode solves for s_2..s_n sequentially
(condition k involves only s_{k-1} and s_k) and reports the choices; a
component whose arity admits no sign leaves its rows failing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .arith import RationalFunction, as_rational
from .exterior import (Chart, ChartEmbedding, ChartMismatch, DegreeError,
                       DifferentialForm, MultivectorField, basis_form,
                       exterior_derivative, interior_product, lie_derivative,
                       poincare_primitive, scalar_form, vf_bracket)
from .graded import Permutation
from .plectic import (LElement, NotHamiltonian, PlecticManifold, check_plectic,
                      hamiltonian_vf, xi)


class NotPreserving(Exception):
    def __init__(self, label, witness):
        super().__init__(f"field for {label!r} does not preserve omega; "
                         f"L_u omega = {witness}")
        self.label = label
        self.witness = witness


class NotHamiltonianAction(Exception):
    def __init__(self, label, reason):
        super().__init__(f"field for {label!r} is not Hamiltonian: {reason}")
        self.label = label
        self.reason = reason


class BracketIncompatible(Exception):
    def __init__(self, pair, witness, convention):
        super().__init__(f"[u_x, u_y] != u_[x,y] at {pair} "
                         f"({convention} convention); difference {witness}")
        self.pair = pair
        self.witness = witness
        self.convention = convention


class NondegenerateFailure(Exception):
    pass


class LieAlgebra:
    """Finite-dimensional Lie algebra by structure constants; the Jacobi
    identity is verified exactly at construction."""

    __slots__ = ("labels", "_table")

    def __init__(self, labels: Sequence[str],
                 brackets: Mapping[tuple[str, str], Mapping[str, Fraction]]):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate basis labels")
        table: dict[tuple[str, str], dict[str, Fraction]] = {}
        for (a, b), value in brackets.items():
            if a not in labels or b not in labels:
                raise KeyError(f"unknown label in bracket ({a},{b})")
            if labels.index(a) >= labels.index(b):
                raise ValueError("bracket keys must be strictly ordered pairs")
            cleaned = {k: as_rational(c) for k, c in value.items() if as_rational(c) != 0}
            for k in cleaned:
                if k not in labels:
                    raise KeyError(f"unknown label {k!r} in bracket value")
            if cleaned:
                table[(a, b)] = cleaned
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_table", table)
        self._check_jacobi()

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("LieAlgebra is immutable")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def bracket_basis(self, a: str, b: str) -> dict[str, Fraction]:
        if a == b:
            return {}
        if self.labels.index(a) < self.labels.index(b):
            return dict(self._table.get((a, b), {}))
        return {k: -c for k, c in self._table.get((b, a), {}).items()}

    def bracket(self, x: Mapping[str, Fraction],
                y: Mapping[str, Fraction]) -> dict[str, Fraction]:
        out: dict[str, Fraction] = {}
        for a, ca in x.items():
            for b, cb in y.items():
                for k, c in self.bracket_basis(a, b).items():
                    out[k] = out.get(k, Fraction(0)) + ca * cb * c
        return {k: c for k, c in out.items() if c != 0}

    def _check_jacobi(self):
        for a, b, c in combinations(self.labels, 3):
            total: dict[str, Fraction] = {}
            for (x, y, z) in ((a, b, c), (c, a, b), (b, c, a)):
                inner = self.bracket_basis(x, y)
                for k, coeff in self.bracket({k2: v for k2, v in inner.items()},
                                             {z: Fraction(1)}).items():
                    total[k] = total.get(k, Fraction(0)) + coeff
            if any(v != 0 for v in total.values()):
                raise ValueError(f"structure constants violate Jacobi at {(a, b, c)}")


def abelian_algebra(labels: Sequence[str]) -> LieAlgebra:
    return LieAlgebra(labels, {})


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlecticAction:
    algebra: LieAlgebra
    manifold: PlecticManifold
    fundamental: Mapping[str, MultivectorField]
    convention: str  # "morphism" or "anti"

    def field(self, label: str) -> MultivectorField:
        return self.fundamental[label]

    def field_of(self, x: Mapping[str, Fraction]) -> MultivectorField:
        out = MultivectorField.zero(self.manifold.chart, 1)
        for label, c in x.items():
            out = out + self.fundamental[label] * c
        return out


def check_action(P: PlecticManifold, algebra: LieAlgebra,
                 fundamental: Mapping[str, MultivectorField],
                 convention: str = "morphism") -> PlecticAction:
    """Verify omega-preservation, Hamiltonian-ness (via the radial homotopy
    primitive on polynomial data) and bracket compatibility."""
    if convention not in ("morphism", "anti"):
        raise ValueError("convention must be 'morphism' or 'anti'")
    for label in algebra.labels:
        if label not in fundamental:
            raise KeyError(f"no fundamental field for {label!r}")
        u = fundamental[label]
        if u.chart != P.chart:
            raise ChartMismatch(f"field for {label!r} on the wrong chart")
        lu = lie_derivative(u, P.omega)
        if not lu.is_zero():
            raise NotPreserving(label, lu)
        eta = -interior_product(u, P.omega)
        try:
            alpha = poincare_primitive(eta) if not eta.is_zero() \
                else DifferentialForm.zero(P.chart, P.n - 1)
        except DegreeError as exc:
            raise NotHamiltonianAction(label, str(exc)) from exc
        if exterior_derivative(alpha) != eta:
            raise NotHamiltonianAction(
                label, "closed contraction admits no polynomial primitive")
    for i, a in enumerate(algebra.labels):
        for b in algebra.labels[i + 1:]:
            lhs = vf_bracket(fundamental[a], fundamental[b])
            target = MultivectorField.zero(P.chart, 1)
            for k, c in algebra.bracket_basis(a, b).items():
                target = target + fundamental[k] * c
            if convention == "anti":
                target = -target
            if lhs != target:
                raise BracketIncompatible((a, b), lhs - target, convention)
    return PlecticAction(algebra, P, dict(fundamental), convention)


# ---------------------------------------------------------------------------
# moment candidates
# ---------------------------------------------------------------------------


MomentTable = Mapping[int, Mapping[tuple[str, ...], DifferentialForm]]


class MomentCandidate:
    """Components f_k on strictly ordered basis tuples, extended
    antisymmetrically; f_k(tuple) is an (n-k)-form."""

    __slots__ = ("action", "components")

    def __init__(self, action: PlecticAction, components: MomentTable):
        P = action.manifold
        tables: dict[int, dict[tuple[str, ...], DifferentialForm]] = {}
        for k, table in components.items():
            if not 1 <= k <= P.n:
                raise DegreeError(f"component index {k} outside 1..{P.n}")
            cleaned = {}
            for tup, form in table.items():
                tup = tuple(tup)
                order = [action.algebra.labels.index(b) for b in tup]
                if order != sorted(set(order)) or len(tup) != k:
                    raise ValueError(f"component keys must be strictly ordered "
                                     f"{k}-tuples: {tup}")
                if form.chart != P.chart:
                    raise ChartMismatch("component form on the wrong chart")
                if not form.is_zero() and form.degree != P.n - k:
                    raise DegreeError(f"f_{k} values must be {P.n - k}-forms")
                cleaned[tup] = form
            tables[k] = cleaned
        object.__setattr__(self, "action", action)
        object.__setattr__(self, "components", tables)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("MomentCandidate is immutable")

    def component(self, k: int, labels: Sequence[str]) -> DifferentialForm:
        P = self.action.manifold
        zero = DifferentialForm.zero(P.chart, max(P.n - k, 0))
        table = self.components.get(k, {})
        labs = list(labels)
        if len(set(labs)) != len(labs):
            return zero
        order = sorted(range(len(labs)),
                       key=lambda i: self.action.algebra.labels.index(labs[i]))
        sign = Permutation(tuple(i + 1 for i in order)).sign()
        tup = tuple(labs[i] for i in order)
        form = table.get(tup)
        if form is None:
            return zero
        return form * sign

    def component_linear(self, k: int,
                         args: Sequence[Mapping[str, Fraction]]) -> DifferentialForm:
        P = self.action.manifold
        out = DifferentialForm.zero(P.chart, max(P.n - k, 0))
        supports = [list(a.items()) for a in args]
        if any(not s for s in supports):
            return out

        def rec(i, labels, coeff):
            nonlocal out
            if i == k:
                out = out + self.component(k, labels) * coeff
                return
            for label, c in supports[i]:
                rec(i + 1, labels + [label], coeff * c)

        rec(0, [], Fraction(1))
        return out


@dataclass(frozen=True)
class MomentRow:
    """(k, tuple, condition-id, residual) quadruple."""

    k: int
    tuple: tuple[str, ...]
    condition: str
    residual: DifferentialForm
    sign: int = 1

    @property
    def residual_nonzero(self) -> bool:
        return not self.residual.is_zero()

    def as_json(self) -> dict:
        return {"k": self.k, "tuple": list(self.tuple), "condition": self.condition,
                "residual_nonzero": self.residual_nonzero,
                "witness": str(self.residual), "iota_sign": self.sign}


def _moment_lhs(F: MomentCandidate, k: int, tup: Sequence[str]) -> DifferentialForm:
    P = F.action.manifold
    lhs = DifferentialForm.zero(P.chart, max(P.n - (k - 1), 0))
    for i in range(k):
        for j in range(i + 1, k):
            rest = [tup[t] for t in range(k) if t not in (i, j)]
            br = F.action.algebra.bracket_basis(tup[i], tup[j])
            args = [br] + [{r: Fraction(1)} for r in rest]
            sign = (-1) ** (i + j + 1)  # (i+1)+(j+1)+1 mod 2
            lhs = lhs + F.component_linear(k - 1, args) * sign
    return lhs


def _contract_fields(P: PlecticManifold,
                     fields: Sequence[MultivectorField]) -> DifferentialForm:
    out = P.omega
    for u in fields:
        out = interior_product(u, out)
    return out


def moment_residuals(F: MomentCandidate, component_signs: Mapping[int, int] | None = None
                     ) -> list[MomentRow]:
    """All residual rows at the given per-arity component signs (default +1)."""
    signs = dict(component_signs or {})
    s = lambda k: signs.get(k, 1)
    P = F.action.manifold
    algebra = F.action.algebra
    rows: list[MomentRow] = []
    for y in algebra.labels:
        u = F.action.field(y)
        res = -interior_product(u, P.omega) - exterior_derivative(F.component(1, [y]))
        rows.append(MomentRow(1, (y,), "lift", res))
    for k in range(2, P.n + 2):
        for tup in combinations(algebra.labels, k):
            fields = [F.action.field(y) for y in tup]
            iota = _contract_fields(P, fields) * xi(k)
            lhs = _moment_lhs(F, k, tup) * s(k - 1)
            if k <= P.n:
                res = lhs - exterior_derivative(F.component(k, tup)) * s(k) - iota
                rows.append(MomentRow(k, tup, "chain", res, s(k)))
            else:
                res = lhs - iota
                rows.append(MomentRow(k, tup, "top", res, s(P.n)))
    return rows


def check_moment(F: MomentCandidate, sign_audit: bool = False
                 ) -> tuple[list[MomentRow], dict[int, int]]:
    """Residual report.  Without audit, the printed signs (+1) are used on
    every component.  With audit, s_2..s_n are solved sequentially: condition
    k involves only s_{k-1} (already fixed) and s_k, so each arity gets the
    unique working sign if one exists (preferring +1)."""
    P = F.action.manifold
    if not sign_audit:
        return moment_residuals(F), {}
    chosen: dict[int, int] = {}
    for k in range(2, P.n + 1):
        for cand in (1, -1):
            trial = dict(chosen)
            trial[k] = cand
            rows = moment_residuals(F, trial)
            if all(not r.residual_nonzero for r in rows if r.k == k):
                chosen[k] = cand
                break
    rows = moment_residuals(F, chosen)
    return rows, chosen


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductPlectic:
    factor_a: PlecticManifold
    factor_b: PlecticManifold
    manifold: PlecticManifold
    embed_a: ChartEmbedding
    embed_b: ChartEmbedding

    @property
    def n(self) -> int:
        return self.manifold.n


def product_plectic(P_a: PlecticManifold, P_b: PlecticManifold,
                    prefix_a: str = "a.", prefix_b: str = "b.") -> ProductPlectic:
    """Product chart with factor-prefixed variables and
    omega = pr_a* omega_a ^ pr_b* omega_b, an (n_a + n_b + 1)-plectic form."""
    va = tuple(prefix_a + v for v in P_a.chart.variables)
    vb = tuple(prefix_b + v for v in P_b.chart.variables)
    chart = Chart(f"{P_a.chart.name}x{P_b.chart.name}", va + vb)
    emb_a = ChartEmbedding(P_a.chart, chart,
                           {v: prefix_a + v for v in P_a.chart.variables})
    emb_b = ChartEmbedding(P_b.chart, chart,
                           {v: prefix_b + v for v in P_b.chart.variables})
    omega = emb_a.pull_form(P_a.omega).wedge(emb_b.pull_form(P_b.omega))
    n = P_a.n + P_b.n + 1
    P = check_plectic(chart, n, omega)
    return ProductPlectic(P_a, P_b, P, emb_a, emb_b)


def lift_hamiltonian(Q: ProductPlectic, alpha_a: DifferentialForm,
                     alpha_b: DifferentialForm):
    """The product Hamiltonian pair
         X = pr_a* X_a + pr_b* X_b,
         alpha = pr_a* alpha_a ^ pr_b* omega_b + pr_a* omega_a ^ pr_b* alpha_b,
    with iota_X omega = -d alpha verified exactly."""
    Xa = hamiltonian_vf(Q.factor_a, alpha_a)
    Xb = hamiltonian_vf(Q.factor_b, alpha_b)
    X = Q.embed_a.push(Xa) + Q.embed_b.push(Xb)
    alpha = h_omega(Q, alpha_a, alpha_b)
    lhs = interior_product(X, Q.manifold.omega)
    rhs = -exterior_derivative(alpha)
    if lhs != rhs:
        raise AssertionError("product lift identity failed")
    return X, alpha


def h_omega(Q: ProductPlectic, alpha_a: DifferentialForm,
            alpha_b: DifferentialForm) -> DifferentialForm:
    wa = Q.embed_a.pull_form(Q.factor_a.omega)
    wb = Q.embed_b.pull_form(Q.factor_b.omega)
    return Q.embed_a.pull_form(alpha_a).wedge(wb) + \
        wa.wedge(Q.embed_b.pull_form(alpha_b))


def h_x(Q: ProductPlectic, Xa: MultivectorField, Xb: MultivectorField) -> MultivectorField:
    return Q.embed_a.push(Xa) + Q.embed_b.push(Xb)


def is_lift(Q: ProductPlectic, X: MultivectorField) -> bool:
    """Decide membership in pr_a* Ham(a) + pr_b* Ham(b): the factor parts must
    only involve their own variables and be Hamiltonian on the factors."""
    if X.degree != 1 or X.chart != Q.manifold.chart:
        raise ChartMismatch("expects a vector field on the product chart")
    dim_a = Q.factor_a.chart.dim
    parts = {"a": {}, "b": {}}
    for (i,), c in X.comps.items():
        parts["a" if i < dim_a else "b"][(i,)] = c
    for key, emb, factor, offset in (("a", Q.embed_a, Q.factor_a, 0),
                                     ("b", Q.embed_b, Q.factor_b, dim_a)):
        own = {emb.var_map[v] for v in factor.chart.variables}
        own_idx = {Q.manifold.chart.index_of(v) for v in own}
        comps = {}
        for (i,), c in parts[key].items():
            used = set(c.num.variables[j] for e in c.num.terms for j, k in enumerate(e) if k)
            used |= set(c.den.variables[j] for e in c.den.terms for j, k in enumerate(e) if k)
            if not used <= own:
                return False
            # restrict to the factor chart
            back = {emb.var_map[v]: v for v in factor.chart.variables}
            restricted = _restrict_scalar(c, factor.chart, back)
            comps[(i - offset,)] = restricted
        v_factor = MultivectorField(factor.chart, 1, comps)
        eta = -interior_product(v_factor, factor.omega)
        if exterior_derivative(eta).is_zero():
            try:
                if eta.is_zero():
                    continue
                alpha = poincare_primitive(eta)
                if exterior_derivative(alpha) != eta:
                    return False
            except DegreeError:
                return False
        else:
            return False
    return True


def _restrict_scalar(c: RationalFunction, chart: Chart,
                     rename: Mapping[str, str]) -> RationalFunction:
    assign = {big: chart.coordinate(small) for big, small in rename.items()}
    # variables of the big chart not in rename must not occur; map them to 0
    for v in c.variables:
        if v not in assign:
            assign[v] = chart.scalar(0)
    return c.substitute(assign, chart.variables)


def h_omega_defect(Q: ProductPlectic, alpha_a, alpha_b, beta_a, beta_b):
    """Bracket defect of the product map on Hamiltonian factor pairs:

        h_omega({.,.}_0) - {h_omega(.), h_omega(.)}
            = s * (-1)^(n_a) d[pr_a* alpha_a ^ pr_b* d beta_b
                              - pr_a* beta_a ^ pr_b* d alpha_b]

    Returns (defect, s) where s in {+1,-1} is determined empirically; raises
    when no global sign matches.
    """
    Pa, Pb, P = Q.factor_a, Q.factor_b, Q.manifold
    from .plectic import bracket2
    br_a = bracket2(Pa, alpha_a, beta_a)
    br_b = bracket2(Pb, alpha_b, beta_b)
    lhs = h_omega(Q, br_a, br_b)
    ha = h_omega(Q, alpha_a, alpha_b)
    hb = h_omega(Q, beta_a, beta_b)
    bracket_prod = bracket2(P, ha, hb)
    defect = lhs - bracket_prod
    inner = Q.embed_a.pull_form(alpha_a).wedge(
        Q.embed_b.pull_form(exterior_derivative(beta_b))) - \
        Q.embed_a.pull_form(beta_a).wedge(
            Q.embed_b.pull_form(exterior_derivative(alpha_b)))
    printed = exterior_derivative(inner) * ((-1) ** Pa.n)
    for s in (1, -1):
        if defect == printed * s:
            return defect, s
    raise AssertionError("defect does not match the printed formula up to sign")


# ---------------------------------------------------------------------------
# symplectic pair morphism (two 1-plectic factors into the 3-plectic product)
# ---------------------------------------------------------------------------


def _pair_field(Q: ProductPlectic, f: DifferentialForm, g: DifferentialForm):
    return h_x(Q, hamiltonian_vf(Q.factor_a, f), hamiltonian_vf(Q.factor_b, g))


def symplectic_H1(Q: ProductPlectic, x) -> DifferentialForm:
    return h_omega(Q, x[0], x[1])


def symplectic_H2(Q: ProductPlectic, x, y) -> DifferentialForm:
    f1, f2 = x
    g1, g2 = y
    pa, pb = Q.embed_a.pull_form, Q.embed_b.pull_form
    d = exterior_derivative
    return (pa(f1).wedge(pb(d(g2))) - pa(d(f1)).wedge(pb(g2))
            - pa(g1).wedge(pb(d(f2))) + pa(d(g1)).wedge(pb(f2))) * Fraction(1, 2)


def symplectic_H3(Q: ProductPlectic, x, y, z) -> DifferentialForm:
    from .plectic import bracket2
    f1, f2 = x
    g1, g2 = y
    h1, h2 = z
    Pa, Pb = Q.factor_a, Q.factor_b
    pa, pb = Q.embed_a.pull_form, Q.embed_b.pull_form
    ba = lambda u, v: bracket2(Pa, u, v)
    bb = lambda u, v: bracket2(Pb, u, v)
    return (pa(f1).wedge(pb(bb(g2, h2))) + pb(f2).wedge(pa(ba(g1, h1)))
            - pa(g1).wedge(pb(bb(f2, h2))) - pb(g2).wedge(pa(ba(f1, h1)))
            + pa(h1).wedge(pb(bb(f2, g2))) + pb(h2).wedge(pa(ba(f1, g1)))
            ) * Fraction(1, 2)


def symplectic_H_residuals(Q: ProductPlectic, tuples, component_signs=None):
    """Morphism residuals (arities 2, 3, 4) for the explicit two-, three- and
    four-argument components built from symplectic factor functions.

    ``tuples`` is a sequence of 4-tuples of (f_a, f_b) pairs of 0-forms.
    ``component_signs`` maps arity -> +-1 multiplying that component map.
    Rows are (k, tuple-index, condition, residual)."""
    from .plectic import bracket2
    signs = dict(component_signs or {})
    s = lambda k: signs.get(k, 1)
    Pa, Pb, P = Q.factor_a, Q.factor_b, Q.manifold
    rows = []

    def pair_bracket(x, y):
        return (bracket2(Pa, x[0], y[0]), bracket2(Pb, x[1], y[1]))

    for t_idx, tup in enumerate(tuples):
        x1, x2, x3, x4 = tup
        # k = 2 on (x1, x2)
        lhs = symplectic_H1(Q, pair_bracket(x1, x2))
        fields = [_pair_field(Q, *x) for x in (x1, x2)]
        res = lhs - exterior_derivative(symplectic_H2(Q, x1, x2)) * s(2) \
            - _contract_fields(P, fields) * xi(2)
        rows.append(MomentRow(2, (f"t{t_idx}",), "chain", res, s(2)))
        # k = 3 on (x1, x2, x3)
        lhs = (symplectic_H2(Q, pair_bracket(x1, x2), x3)
               - symplectic_H2(Q, pair_bracket(x1, x3), x2)
               + symplectic_H2(Q, pair_bracket(x2, x3), x1)) * s(2)
        fields = [_pair_field(Q, *x) for x in (x1, x2, x3)]
        res = lhs - exterior_derivative(symplectic_H3(Q, x1, x2, x3)) * s(3) \
            - _contract_fields(P, fields) * xi(3)
        rows.append(MomentRow(3, (f"t{t_idx}",), "chain", res, s(3)))
        # k = 4 on all
        lhs = DifferentialForm.zero(P.chart, P.n - 3)
        xs = [x1, x2, x3, x4]
        for i in range(4):
            for j in range(i + 1, 4):
                rest = [xs[t] for t in range(4) if t not in (i, j)]
                sign = (-1) ** (i + j + 1)
                lhs = lhs + symplectic_H3(Q, pair_bracket(xs[i], xs[j]), *rest) * sign
        lhs = lhs * s(3)
        fields = [_pair_field(Q, *x) for x in xs]
        res = lhs - _contract_fields(P, fields) * xi(4)
        rows.append(MomentRow(4, (f"t{t_idx}",), "top", res, s(3)))
    return rows


def symplectic_H_check(Q: ProductPlectic, tuples, sign_audit: bool = False):
    """Audit solves the component signs s_2, s_3 sequentially (condition k
    involves s_{k-1} and s_k; the arity-4 condition is then determined)."""
    if not sign_audit:
        return symplectic_H_residuals(Q, tuples), {}
    chosen: dict[int, int] = {}
    for k in (2, 3):
        for cand in (1, -1):
            trial = dict(chosen)
            trial[k] = cand
            rows = symplectic_H_residuals(Q, tuples, trial)
            if all(not r.residual_nonzero for r in rows if r.k == k):
                chosen[k] = cand
                break
    return symplectic_H_residuals(Q, tuples, chosen), chosen


# ---------------------------------------------------------------------------
# product moment maps
# ---------------------------------------------------------------------------


def cs_a(k: int, l: int, n_a: int) -> Fraction:
    """Coefficient on the a-side term of the product moment components."""
    if k == 1:
        return Fraction(1) if l == 1 else Fraction(0)
    if l == 0:
        return Fraction(0)  # multiplies the empty a-component
    return Fraction(1, 2) * xi(k) * xi(l) * ((-1) ** ((n_a + 1 - l) * (k - l)))


def cs_b(k: int, l: int, n_a: int) -> Fraction:
    """Coefficient on the b-side term (l counts a-arguments)."""
    if k == 1:
        return Fraction(1) if l == 0 else Fraction(0)
    if l == k:
        return Fraction(0)
    return Fraction(1, 2) * xi(k) * xi(k - l) * ((-1) ** ((n_a + 1 - l) * (k - l - 1)))


def product_action(Q: ProductPlectic, act_a: PlecticAction, act_b: PlecticAction,
                   prefix_a: str = "a.", prefix_b: str = "b.") -> PlecticAction:
    """The direct-sum algebra acting on the product chart by pushed fields."""
    if act_a.manifold != Q.factor_a or act_b.manifold != Q.factor_b:
        raise ChartMismatch("actions do not match the product factors")
    labels = tuple(prefix_a + b for b in act_a.algebra.labels) + \
        tuple(prefix_b + b for b in act_b.algebra.labels)
    brackets = {}
    for (x, y), val in act_a.algebra._table.items():
        brackets[(prefix_a + x, prefix_a + y)] = {prefix_a + k: c for k, c in val.items()}
    for (x, y), val in act_b.algebra._table.items():
        brackets[(prefix_b + x, prefix_b + y)] = {prefix_b + k: c for k, c in val.items()}
    algebra = LieAlgebra(labels, brackets)
    fundamental = {}
    for b in act_a.algebra.labels:
        fundamental[prefix_a + b] = Q.embed_a.push(act_a.field(b))
    for b in act_b.algebra.labels:
        fundamental[prefix_b + b] = Q.embed_b.push(act_b.field(b))
    return check_action(Q.manifold, algebra, fundamental, act_a.convention)


def product_moment(Q: ProductPlectic, F_a: MomentCandidate, F_b: MomentCandidate,
                   prefix_a: str = "a.", prefix_b: str = "b.") -> MomentCandidate:
    """Moment candidate on the product built from the factor candidates.

    On a sorted mixed tuple with p a-generators then q b-generators,

      F_k = cs_a(k,p) pr_a* f^a_p(a's) ^ iota(v_b's) pr_b* omega_b
          + cs_b(k,p) iota(v_a's) pr_a* omega_a ^ pr_b* f^b_q(b's),

    where the contracted fields are the pushed Hamiltonian fields of the
    one-argument factor components.
    """
    act = product_action(Q, F_a.action, F_b.action, prefix_a, prefix_b)
    P = Q.manifold
    n_a = Q.factor_a.n
    wa = Q.embed_a.pull_form(Q.factor_a.omega)
    wb = Q.embed_b.pull_form(Q.factor_b.omega)
    pushed_a = {b: Q.embed_a.push(F_a.action.field(b)) for b in F_a.action.algebra.labels}
    pushed_b = {b: Q.embed_b.push(F_b.action.field(b)) for b in F_b.action.algebra.labels}

    def contracted(omega_pulled, fields):
        out = omega_pulled
        for u in fields:
            out = interior_product(u, out)
        return out

    tables: dict[int, dict[tuple[str, ...], DifferentialForm]] = {}
    labels = act.algebra.labels
    for k in range(1, P.n + 1):
        table = {}
        for tup in combinations(labels, k):
            a_labs = [b[len(prefix_a):] for b in tup if b.startswith(prefix_a)]
            b_labs = [b[len(prefix_b):] for b in tup if b.startswith(prefix_b)]
            p = len(a_labs)
            value = DifferentialForm.zero(P.chart, P.n - k)
            ca = cs_a(k, p, n_a)
            if ca != 0 and p >= 1:
                fa = F_a.component(p, a_labs)
                if not fa.is_zero():
                    iota_b = contracted(wb, [pushed_b[b] for b in b_labs])
                    value = value + Q.embed_a.pull_form(fa).wedge(iota_b) * ca
            cb = cs_b(k, p, n_a)
            if cb != 0 and len(b_labs) >= 1:
                fb = F_b.component(len(b_labs), b_labs)
                if not fb.is_zero():
                    iota_a = contracted(wa, [pushed_a[b] for b in a_labs])
                    value = value + iota_a.wedge(Q.embed_b.pull_form(fb)) * cb
            table[tup] = value
        tables[k] = table
    return MomentCandidate(act, tables)


# ---------------------------------------------------------------------------
# diagonal restriction
# ---------------------------------------------------------------------------


def restrict_to_diagonal(F: MomentCandidate, Q: ProductPlectic,
                         prefix_a: str = "a.", prefix_b: str = "b."):
    """Pull a product-moment candidate back along the diagonal embedding of a
    common factor chart, precomposed with x -> (x, x) on generators.

    Requires both factors to be copies of one chart (same variables, same
    omega) and the squared form to stay generically nondegenerate."""
    if Q.factor_a.chart.variables != Q.factor_b.chart.variables \
            or Q.factor_a.omega.comps != Q.factor_b.omega.comps \
            or Q.factor_a.n != Q.factor_b.n:
        raise NondegenerateFailure("factors are not copies of one chart")
    base = Q.factor_a.chart
    omega2 = Q.factor_a.omega.wedge(Q.factor_a.omega)
    if omega2.is_zero():
        raise NondegenerateFailure("omega ^ omega vanishes on the factor chart")
    from .plectic import GenericallyDegenerate
    try:
        P2 = check_plectic(base, 2 * Q.factor_a.n + 1, omega2)
    except GenericallyDegenerate as exc:
        raise NondegenerateFailure(str(exc)) from exc

    from .exterior import ChartMap
    assign = {}
    for v in Q.factor_a.chart.variables:
        assign[prefix_a + v] = base.coordinate(v)
        assign[prefix_b + v] = base.coordinate(v)
    diag = ChartMap(Q.manifold.chart, base, assign)

    act = F.action
    a_labels = [b[len(prefix_a):] for b in act.algebra.labels if b.startswith(prefix_a)]
    diag_algebra = LieAlgebra(
        a_labels,
        {(x, y): {k[len(prefix_a):]: c
                  for k, c in act.algebra._table.get((prefix_a + x, prefix_a + y), {}).items()}
         for x, y in combinations(a_labels, 2)
         if act.algebra._table.get((prefix_a + x, prefix_a + y))})
    fundamental = {}
    for b in a_labels:
        ua = act.field(prefix_a + b)
        comps = {}
        dim_a = Q.factor_a.chart.dim
        for (i,), c in ua.comps.items():
            back = {Q.embed_a.var_map[v]: v for v in base.variables}
            back.update({Q.embed_b.var_map[v]: v for v in base.variables})
            comps[(i,)] = _restrict_scalar(c, base, back)
        fundamental[b] = MultivectorField(base, 1, comps)
    diag_action = check_action(P2, diag_algebra, fundamental, act.convention)

    tables: dict[int, dict[tuple[str, ...], DifferentialForm]] = {}
    for k in range(1, P2.n + 1):
        table = {}
        for tup in combinations(a_labels, k):
            args = [{prefix_a + b: Fraction(1), prefix_b + b: Fraction(1)} for b in tup]
            big = F.component_linear(k, args)
            table[tup] = diag.pullback(big)
        tables[k] = table
    return MomentCandidate(diag_action, tables), P2
