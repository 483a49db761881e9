"""n-plectic structures on a chart and the graded bracket tower they induce.

A chart with a closed, generically nondegenerate (n+1)-form omega carries a
complex of differential forms

    L^0 = Hamiltonian (n-1)-forms,   L^i = Omega^{n-1+i}  for 1-n <= i < 0,

with l_1 = d on negative levels and, on level-zero tuples,
l_k = xi(k) * iota(u_1 ^ ... ^ u_k) omega  where  xi(k) = -(-1)^(k(k+1)/2)
and u_i is the unique Hamiltonian vector field with  d(alpha_i) = -iota_{u_i} omega.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .arith import RationalFunction, Scalar, as_rational
from .exterior import (Chart, ChartMismatch, DegreeError, DifferentialForm,
                       MultivectorField, exterior_derivative, interior_product,
                       random_form, vf_bracket)
from .graded import Permutation, koszul_sign, unshuffles


class NotClosed(Exception):
    def __init__(self, witness: DifferentialForm):
        super().__init__(f"form is not closed; d(omega) = {witness}")
        self.witness = witness


class GenericallyDegenerate(Exception):
    def __init__(self, kernel: MultivectorField):
        super().__init__(f"omega is degenerate over the fraction field; "
                         f"kernel vector {kernel}")
        self.kernel = kernel


class DegenerateAtPoint(Exception):
    def __init__(self, point, kernel):
        super().__init__(f"omega degenerate at {point}; kernel vector {kernel}")
        self.point = point
        self.kernel = kernel


class NotHamiltonian(Exception):
    pass


class ArityOutOfRange(Exception):
    pass


class LevelMismatch(Exception):
    pass


def xi(k: int) -> int:
    """Bracket normalization xi(k) = -(-1)^(k(k+1)/2)."""
    return -((-1) ** (k * (k + 1) // 2))


def _rf_size(f: RationalFunction) -> int:
    return len(f.num.terms) + len(f.den.terms)


def _solve_linear(rows: list[list[RationalFunction]],
                  rhs: list[RationalFunction], zero: RationalFunction):
    """Exact Gaussian elimination over the rational-function field.

    Returns (solution or None, rank, kernel_vector or None).  Pivots prefer
    the structurally simplest nonzero entry (fewest stored monomials).
    ``solution`` is None when the system is inconsistent; when consistent but
    underdetermined the free variables are set to zero.
    """
    m = len(rows)
    ncols = len(rows[0]) if m else 0
    A = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    pivots: list[tuple[int, int]] = []
    used_rows: set[int] = set()
    for col in range(ncols):
        best = None
        for r in range(m):
            if r in used_rows:
                continue
            e = A[r][col]
            if e.is_zero():
                continue
            size = _rf_size(e)
            if best is None or size < best[0]:
                best = (size, r)
        if best is None:
            continue
        r = best[1]
        used_rows.add(r)
        pivots.append((r, col))
        inv = A[r][col]
        for rr in range(m):
            if rr == r:
                continue
            factor = A[rr][col]
            if factor.is_zero():
                continue
            scale = factor / inv
            for cc in range(col, ncols + 1):
                A[rr][cc] = A[rr][cc] - scale * A[r][cc]
    rank = len(pivots)
    # consistency
    for r in range(m):
        if r in used_rows:
            continue
        if not A[r][ncols].is_zero():
            return None, rank, None
    solution = [zero for _ in range(ncols)]
    pivot_cols = {c for _, c in pivots}
    for r, c in pivots:
        val = A[r][ncols]
        for cc in range(ncols):
            if cc != c and cc not in pivot_cols and not A[r][cc].is_zero():
                pass  # free variables are zero
        solution[c] = val / A[r][c]
    kernel = None
    if rank < ncols:
        free = next(c for c in range(ncols) if c not in pivot_cols)
        kernel = [zero for _ in range(ncols)]
        kernel[free] = zero + 1
        for r, c in pivots:
            if not A[r][free].is_zero():
                kernel[c] = -(A[r][free] / A[r][c])
    return solution, rank, kernel


def _contraction_matrix(chart: Chart, omega: DifferentialForm):
    """Matrix of v -> iota_v omega over increasing n-tuples (rows) and basis
    vector indices (columns)."""
    n = omega.degree - 1
    rows_idx = list(combinations(range(chart.dim), n))
    zero = chart.scalar(0)
    rows = []
    for I in rows_idx:
        row = []
        for j in range(chart.dim):
            if j in I:
                row.append(zero)
                continue
            merged = tuple(sorted((j,) + I))
            pos = merged.index(j)
            c = omega.comps.get(merged)
            row.append(zero if c is None else c * ((-1) ** pos))
        rows.append(row)
    return rows_idx, rows


@dataclass(frozen=True)
class NondegeneracyCertificate:
    generic_rank: int
    dim: int
    sample_points: tuple


@dataclass(frozen=True)
class PlecticManifold:
    chart: Chart
    n: int
    omega: DifferentialForm
    certificate: NondegeneracyCertificate

    @property
    def dim(self) -> int:
        return self.chart.dim

    def level_range(self) -> range:
        return range(1 - self.n, 1)

    def form_degree(self, level: int) -> int:
        return self.n - 1 + level


def check_plectic(chart: Chart, n: int, omega: DifferentialForm,
                  sample_points: Sequence[Mapping[str, Scalar]] = ()) -> PlecticManifold:
    """Validate closedness and nondegeneracy, returning the manifold value."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if omega.degree != n + 1:
        raise DegreeError(f"omega must be an {n + 1}-form, got degree {omega.degree}")
    if n + 1 > chart.dim:
        raise DegreeError("n+1 exceeds the chart dimension")
    if omega.chart != chart:
        raise ChartMismatch("omega lives on a different chart")
    dw = exterior_derivative(omega)
    if not dw.is_zero():
        raise NotClosed(dw)
    _, rows = _contraction_matrix(chart, omega)
    zero = chart.scalar(0)
    _, rank, kernel = _solve_linear(rows, [zero] * len(rows), zero)
    if rank < chart.dim:
        kv = MultivectorField(chart, 1,
                              {(j,): kernel[j] for j in range(chart.dim)})
        raise GenericallyDegenerate(kv)
    checked = []
    for pt in sample_points:
        full = {v: as_rational(pt.get(v, 0)) for v in chart.variables}
        num_rows = []
        for row in rows:
            try:
                num_rows.append([chart.scalar(e.evaluate(full)) for e in row])
            except Exception as exc:
                raise DegenerateAtPoint(full, f"pole in omega at sample: {exc}") from exc
        _, prank, pkern = _solve_linear(num_rows, [zero] * len(num_rows), zero)
        if prank < chart.dim:
            kv = MultivectorField(chart, 1,
                                  {(j,): pkern[j] for j in range(chart.dim)})
            raise DegenerateAtPoint(full, kv)
        checked.append(tuple(sorted(full.items())))
    cert = NondegeneracyCertificate(rank, chart.dim, tuple(checked))
    return PlecticManifold(chart, n, omega, cert)


def hamiltonian_vf(P: PlecticManifold, alpha: DifferentialForm) -> MultivectorField:
    """The unique vector field u with iota_u omega = -d(alpha)."""
    if alpha.chart != P.chart:
        raise ChartMismatch("form lives on a different chart")
    if not alpha.is_zero() and alpha.degree != P.n - 1:
        raise DegreeError(f"Hamiltonian candidates must be {P.n - 1}-forms")
    rows_idx, rows = _contraction_matrix(P.chart, P.omega)
    target = -exterior_derivative(alpha)
    rhs = [target.comps.get(I, P.chart.scalar(0)) for I in rows_idx]
    zero = P.chart.scalar(0)
    solution, rank, _ = _solve_linear(rows, rhs, zero)
    if solution is None:
        raise NotHamiltonian(f"no vector field solves iota_u omega = -d({alpha})")
    comps = {(j,): c for j, c in enumerate(solution) if not c.is_zero()}
    return MultivectorField(P.chart, 1, comps)


def is_hamiltonian(P: PlecticManifold, alpha: DifferentialForm) -> bool:
    try:
        hamiltonian_vf(P, alpha)
        return True
    except NotHamiltonian:
        return False


def is_locally_hamiltonian(P: PlecticManifold, v: MultivectorField) -> bool:
    """d(iota_v omega) = 0, i.e. the field preserves omega."""
    return exterior_derivative(interior_product(v, P.omega)).is_zero()


class LElement:
    """Element of the complex attached to (chart, omega): a form at a level
    in {1-n, ..., 0}; level-zero elements cache their Hamiltonian field."""

    __slots__ = ("manifold", "level", "form", "_vf")

    def __init__(self, manifold: PlecticManifold, level: int,
                 form: DifferentialForm, _vf: MultivectorField | None = None):
        if level not in manifold.level_range():
            raise LevelMismatch(f"level {level} outside {list(manifold.level_range())}")
        if form.chart != manifold.chart:
            raise ChartMismatch("form lives on a different chart")
        if not form.is_zero() and form.degree != manifold.form_degree(level):
            raise DegreeError(
                f"level {level} elements are {manifold.form_degree(level)}-forms")
        object.__setattr__(self, "manifold", manifold)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "form", form)
        if level == 0 and _vf is None and not form.is_zero():
            _vf = hamiltonian_vf(manifold, form)
        if level == 0 and form.is_zero():
            _vf = MultivectorField.zero(manifold.chart, 1)
        object.__setattr__(self, "_vf", _vf)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("LElement is immutable")

    @property
    def vector_field(self) -> MultivectorField:
        if self.level != 0:
            raise LevelMismatch("only level-0 elements carry a Hamiltonian field")
        return self._vf

    def is_zero(self) -> bool:
        return self.form.is_zero()

    def __eq__(self, other):
        if not isinstance(other, LElement):
            return NotImplemented
        if self.manifold is not other.manifold and self.manifold != other.manifold:
            return False
        if self.form.is_zero() and other.form.is_zero():
            return True
        return self.level == other.level and self.form == other.form

    def __add__(self, other):
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.level != other.level:
            raise LevelMismatch("adding elements at different levels")
        return LElement(self.manifold, self.level, self.form + other.form)

    def __neg__(self):
        return LElement(self.manifold, self.level, -self.form,
                        None if self._vf is None else -self._vf)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return LElement(self.manifold, self.level, self.form * scalar)

    __rmul__ = __mul__

    def __str__(self):
        return f"[{self.level}] {self.form}"

    def __repr__(self):
        return f"LElement({self})"


def level_zero(P: PlecticManifold, form: DifferentialForm) -> LElement:
    return LElement(P, 0, form)


def pi_map(P: PlecticManifold, e: LElement) -> MultivectorField:
    """Projection onto Hamiltonian vector fields (level zero only)."""
    return e.vector_field


def bracket2(P: PlecticManifold, alpha: DifferentialForm,
             beta: DifferentialForm) -> DifferentialForm:
    """{alpha, beta} = iota_{u_beta} iota_{u_alpha} omega."""
    ua = hamiltonian_vf(P, alpha)
    ub = hamiltonian_vf(P, beta)
    return interior_product(ub, interior_product(ua, P.omega))


def lk_bracket(P: PlecticManifold, k: int, elements: Sequence[LElement]) -> LElement:
    """k-ary bracket of the complex attached to (chart, omega)."""
    if not 1 <= k <= P.n + 1:
        raise ArityOutOfRange(f"arity {k} outside 1..{P.n + 1}")
    if len(elements) != k:
        raise ArityOutOfRange("wrong number of arguments")
    for e in elements:
        if e.manifold != P:
            raise ChartMismatch("element from a different manifold")
    if k == 1:
        e = elements[0]
        if e.level == 0:
            return LElement(P, 0, DifferentialForm.zero(P.chart, P.form_degree(0)))
        return LElement(P, e.level + 1, exterior_derivative(e.form))
    total = sum(e.level for e in elements)
    out_level = 2 - k + total
    if total < 0:
        if out_level in P.level_range():
            return LElement(P, out_level,
                            DifferentialForm.zero(P.chart, P.form_degree(out_level)))
        return LElement(P, 1 - P.n, DifferentialForm.zero(P.chart,
                                                          P.form_degree(1 - P.n)))
    contracted = P.omega
    for e in elements:
        contracted = interior_product(e.vector_field, contracted)
    return LElement(P, 2 - k, contracted * xi(k))


def jacobiator_check(P: PlecticManifold, alpha1: DifferentialForm,
                     alpha2: DifferentialForm, alpha3: DifferentialForm):
    """Both sides of the Jacobi defect identity

        {a1,{a2,a3}} - {{a1,a2},a3} - {a2,{a1,a3}}
            = -d iota(u_1 ^ u_2 ^ u_3) omega

    returned as (lhs, rhs); raises AssertionError when they differ."""
    lhs = bracket2(P, alpha1, bracket2(P, alpha2, alpha3)) \
        - bracket2(P, bracket2(P, alpha1, alpha2), alpha3) \
        - bracket2(P, alpha2, bracket2(P, alpha1, alpha3))
    us = [hamiltonian_vf(P, a) for a in (alpha1, alpha2, alpha3)]
    contracted = P.omega
    for u in us:
        contracted = interior_product(u, contracted)
    rhs = -exterior_derivative(contracted)
    if lhs != rhs:
        raise AssertionError(f"jacobiator mismatch: {lhs} vs {rhs}")
    return lhs, rhs


def generalized_jacobi_residual(P: PlecticManifold, elements: Sequence[LElement]) -> LElement:
    """Residual of the m-ary coherence identity

        sum_{i+j=m+1} sum_{sigma in Sh(i, m-i)}
            (-1)^sigma eps(sigma) (-1)^(i(j-1))
            l_j(l_i(x_{sigma(1)}..x_{sigma(i)}), x_{sigma(i+1)}, .., x_{sigma(m)})

    evaluated with the brackets of (chart, omega); degrees are the levels."""
    m = len(elements)
    degs = [e.level for e in elements]
    acc: LElement | None = None
    for i in range(1, m + 1):
        j = m + 1 - i
        if i > P.n + 1 or j > P.n + 1:
            continue
        for sigma in unshuffles(i, m - i):
            sign = sigma.sign() * koszul_sign(sigma, degs) * ((-1) ** (i * (j - 1)))
            ordered = sigma.permute(list(elements))
            inner = lk_bracket(P, i, ordered[:i])
            outer = lk_bracket(P, j, [inner] + ordered[i:])
            term = outer * sign
            acc = term if acc is None else acc + term
    assert acc is not None
    return acc


def random_level_element(P: PlecticManifold, level: int, rng,
                         max_degree: int = 2, bound: int = 3) -> LElement:
    """Seeded random element; level-zero draws are Hamiltonian by solving."""
    form = random_form(P.chart, P.form_degree(level), rng, max_degree, bound)
    return LElement(P, level, form)


def verify_lie_n_algebra(P: PlecticManifold, m_max: int,
                         tuples: Sequence[Sequence[LElement]]):
    """Exact residual report of the coherence identities on given tuples."""
    report = []
    for tup in tuples:
        if len(tup) > m_max:
            continue
        res = generalized_jacobi_residual(P, tup)
        report.append((len(tup), tup, res))
    return report


def commutator_compat(P: PlecticManifold, alpha: DifferentialForm,
                      beta: DifferentialForm) -> bool:
    """d iota_{u1^u2} omega = -iota_{[u1,u2]} omega  and the projection onto
    Hamiltonian fields sends {alpha,beta} to [u_alpha, u_beta]."""
    ua = hamiltonian_vf(P, alpha)
    ub = hamiltonian_vf(P, beta)
    lhs = exterior_derivative(interior_product(ub, interior_product(ua, P.omega)))
    comm = vf_bracket(ua, ub)
    rhs = -interior_product(comm, P.omega)
    if lhs != rhs:
        return False
    return hamiltonian_vf(P, bracket2(P, alpha, beta)) == comm


def wedge_bracket_identity(P: PlecticManifold,
                           alphas: Sequence[DifferentialForm]) -> bool:
    """d iota(v_1^..^v_k) omega
       = (-1)^k sum_{i<j} (-1)^(i+j)
             iota([v_i,v_j] ^ v_1 ^ .. no v_i .. no v_j .. ^ v_k) omega
    for Hamiltonian fields v_i."""
    vs = [hamiltonian_vf(P, a) for a in alphas]
    k = len(vs)
    contracted = P.omega
    for v in vs:
        contracted = interior_product(v, contracted)
    lhs = exterior_derivative(contracted)
    rhs = DifferentialForm.zero(P.chart, lhs.degree if not lhs.is_zero() else 0)
    for i in range(k):
        for j in range(i + 1, k):
            wedge_field = vf_bracket(vs[i], vs[j])
            rest = [vs[t] for t in range(k) if t not in (i, j)]
            term = P.omega
            term = interior_product(wedge_field, term)
            # iota(b ^ v_1 ^ ...) = iota_{v_last} ... iota_{v_1} iota_b
            for v in rest:
                term = interior_product(v, term)
            sign = ((-1) ** k) * ((-1) ** (i + j + 2))
            rhs = rhs + term * sign
    return lhs == rhs
