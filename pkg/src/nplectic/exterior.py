"""Exterior calculus on a single coordinate chart.

Differential forms and multivector fields are stored as maps from strictly
increasing index tuples to rational-function components.  The interior
product of a decomposable multivector follows
iota(v_1 ^ ... ^ v_n) = iota_{v_n} ... iota_{v_1}, and the Lie derivative
along a multivector v is  L_v b = d iota_v b - (-1)^|v| iota_v db.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .arith import (Polynomial, RationalFunction, Scalar, UnknownVariable,
                    VariableMismatch, as_rational)


class ChartMismatch(Exception):
    pass


class DegreeError(Exception):
    pass


@dataclass(frozen=True)
class Chart:
    """A single coordinate chart: an ordered tuple of variable names."""

    name: str
    variables: tuple[str, ...]

    def __post_init__(self):
        if len(self.variables) < 1:
            raise ValueError("chart needs at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("chart variables must be unique")

    @property
    def dim(self) -> int:
        return len(self.variables)

    def scalar(self, value) -> RationalFunction:
        return RationalFunction.constant(self.variables, value)

    def coordinate(self, name: str) -> RationalFunction:
        return RationalFunction.coordinate(self.variables, name)

    def index_of(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise UnknownVariable(name) from None


def sort_indices(indices: Sequence[int]) -> tuple[int, tuple[int, ...]] | None:
    """Sort an index tuple, returning (sign, sorted) or None when an index
    repeats (so the corresponding blade is zero)."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return None
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


class _Alternating:
    """Shared implementation of forms and multivector fields."""

    __slots__ = ("chart", "degree", "comps")
    _basis_prefix = "?"

    def __init__(self, chart: Chart, degree: int,
                 comps: Mapping[tuple[int, ...], RationalFunction]):
        if degree < 0 or degree > chart.dim:
            raise DegreeError(f"degree {degree} out of range for chart {chart.name}")
        cleaned: dict[tuple[int, ...], RationalFunction] = {}
        for idx, c in comps.items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise DegreeError("index tuple length does not match degree")
            if any(not 0 <= i < chart.dim for i in idx):
                raise DegreeError("basis index out of range")
            if list(idx) != sorted(set(idx)):
                raise DegreeError("basis index tuples must be strictly increasing")
            if not isinstance(c, RationalFunction):
                c = RationalFunction.constant(chart.variables, c)
            if c.variables != chart.variables:
                raise VariableMismatch("component on a different chart")
            if not c.is_zero():
                cleaned[idx] = c
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "comps", cleaned)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError(f"{type(self).__name__} is immutable")

    # -- basics ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.comps

    def component(self, idx: Sequence[int]) -> RationalFunction:
        return self.comps.get(tuple(idx), self.chart.scalar(0))

    def _check_chart(self, other: "_Alternating"):
        if self.chart != other.chart:
            raise ChartMismatch(f"{self.chart.name} vs {other.chart.name}")
        if type(self) is not type(other):
            raise TypeError("cannot combine forms with multivector fields")

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if self.chart != other.chart:
            return False
        if self.is_zero() and other.is_zero():
            return True  # zero is degree-ambiguous
        return self.degree == other.degree and self.comps == other.comps

    def __hash__(self):
        if self.is_zero():
            return hash((type(self).__name__, self.chart, "zero"))
        return hash((type(self).__name__, self.chart,
                     self.degree, tuple(sorted(self.comps.items()))))

    # -- linear structure ---------------------------------------------------

    def __add__(self, other):
        self._check_chart(other)
        if self.degree != other.degree:
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            raise DegreeError("adding forms of different degrees")
        comps = dict(self.comps)
        for idx, c in other.comps.items():
            comps[idx] = comps.get(idx, self.chart.scalar(0)) + c
        return type(self)(self.chart, self.degree, comps)

    def __neg__(self):
        return type(self)(self.chart, self.degree,
                          {i: -c for i, c in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            scalar = self.chart.scalar(scalar)
        if not isinstance(scalar, RationalFunction):
            return NotImplemented
        return type(self)(self.chart, self.degree,
                          {i: c * scalar for i, c in self.comps.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            scalar = self.chart.scalar(scalar)
        return self * (self.chart.scalar(1) / scalar)

    # -- wedge -----------------------------------------------------------------

    def wedge(self, other):
        self._check_chart(other)
        p, q = self.degree, other.degree
        if p + q > self.chart.dim:
            return type(self).zero(self.chart, self.chart.dim)
        comps: dict[tuple[int, ...], RationalFunction] = {}
        for i1, c1 in self.comps.items():
            for i2, c2 in other.comps.items():
                s = sort_indices(i1 + i2)
                if s is None:
                    continue
                sign, idx = s
                prev = comps.get(idx, self.chart.scalar(0))
                comps[idx] = prev + c1 * c2 * sign
        return type(self)(self.chart, p + q, comps)

    __xor__ = wedge

    @classmethod
    def zero(cls, chart: Chart, degree: int = 0):
        degree = min(degree, chart.dim)
        return cls(chart, degree, {})

    @classmethod
    def from_scalar(cls, chart: Chart, value):
        if isinstance(value, (int, Fraction)):
            value = chart.scalar(value)
        return cls(chart, 0, {(): value})

    def evaluate_at(self, point: Mapping[str, Scalar]):
        pt = {v: as_rational(point.get(v, 0)) for v in self.chart.variables}
        comps = {i: self.chart.scalar(c.evaluate(pt)) for i, c in self.comps.items()}
        return type(self)(self.chart, self.degree, comps)

    # -- printing -----------------------------------------------------------------

    def _blade_str(self, idx: tuple[int, ...]) -> str:
        return "^".join(self._basis_prefix.replace("%", self.chart.variables[i])
                        for i in idx)

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for idx in sorted(self.comps):
            c = self.comps[idx]
            cs = c.to_str()
            blade = self._blade_str(idx)
            if not blade:
                parts.append(cs)
                continue
            if cs == "1":
                parts.append(blade)
            elif cs == "-1":
                parts.append(f"-{blade}")
            elif any(ch in cs for ch in "+-/") and not cs.lstrip("-").isdigit():
                parts.append(f"({cs})*{blade}")
            elif cs.startswith("("):
                parts.append(f"{cs}*{blade}")
            else:
                parts.append(f"{cs}*{blade}")
        out = parts[0]
        for p in parts[1:]:
            out += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
        return out

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class DifferentialForm(_Alternating):
    _basis_prefix = "d%"


class MultivectorField(_Alternating):
    _basis_prefix = "@%"


# -- constructors ------------------------------------------------------------


def basis_form(chart: Chart, *names: str) -> DifferentialForm:
    """dx_{i1} ^ ... ^ dx_{ip} for the named coordinates."""
    s = sort_indices([chart.index_of(n) for n in names])
    if s is None:
        return DifferentialForm.zero(chart, len(names))
    sign, idx = s
    return DifferentialForm(chart, len(idx), {idx: chart.scalar(sign)})


def basis_field(chart: Chart, *names: str) -> MultivectorField:
    s = sort_indices([chart.index_of(n) for n in names])
    if s is None:
        return MultivectorField.zero(chart, len(names))
    sign, idx = s
    return MultivectorField(chart, len(idx), {idx: chart.scalar(sign)})


def scalar_form(chart: Chart, value) -> DifferentialForm:
    return DifferentialForm.from_scalar(chart, value)


# -- operations ----------------------------------------------------------------


def wedge(a: _Alternating, b: _Alternating) -> _Alternating:
    return a.wedge(b)


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    chart = a.chart
    if a.degree >= chart.dim:
        return DifferentialForm.zero(chart, chart.dim)
    comps: dict[tuple[int, ...], RationalFunction] = {}
    for idx, c in a.comps.items():
        for j, var in enumerate(chart.variables):
            dc = c.partial_derivative(var)
            if dc.is_zero():
                continue
            s = sort_indices((j,) + idx)
            if s is None:
                continue
            sign, nidx = s
            comps[nidx] = comps.get(nidx, chart.scalar(0)) + dc * sign
    return DifferentialForm(chart, a.degree + 1, comps)


def _contract_basis(j: int, idx: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """iota_{@j} dx_idx as (sign, remaining indices), or None if j not in idx."""
    if j not in idx:
        return None
    pos = idx.index(j)
    return (-1) ** pos, idx[:pos] + idx[pos + 1:]


def interior_product(v: MultivectorField, a: DifferentialForm) -> DifferentialForm:
    """iota(v) a; returns zero when |v| > deg a."""
    if v.chart != a.chart:
        raise ChartMismatch(f"{v.chart.name} vs {a.chart.name}")
    chart = a.chart
    if v.degree > a.degree:
        return DifferentialForm.zero(chart, 0)
    out: dict[tuple[int, ...], RationalFunction] = {}
    for J, g in v.comps.items():
        for I, f in a.comps.items():
            # iota(@j1 ^ ... ^ @jk) = iota_{@jk} ... iota_{@j1}
            work: list[tuple[int, tuple[int, ...]]] = [(1, I)]
            for j in J:
                nxt = []
                for sign, idx in work:
                    c = _contract_basis(j, idx)
                    if c is not None:
                        nxt.append((sign * c[0], c[1]))
                work = nxt
                if not work:
                    break
            for sign, idx in work:
                out[idx] = out.get(idx, chart.scalar(0)) + f * g * sign
    return DifferentialForm(chart, a.degree - v.degree, out)


def lie_derivative(v: MultivectorField, a: DifferentialForm) -> DifferentialForm:
    """L_v a = d iota_v a - (-1)^|v| iota_v da."""
    term1 = exterior_derivative(interior_product(v, a))
    term2 = interior_product(v, exterior_derivative(a))
    return term1 - term2 if v.degree % 2 == 0 else term1 + term2


def vf_bracket(u: MultivectorField, v: MultivectorField) -> MultivectorField:
    """Commutator of two vector fields."""
    if u.chart != v.chart:
        raise ChartMismatch(f"{u.chart.name} vs {v.chart.name}")
    if u.degree != 1 or v.degree != 1:
        raise DegreeError("vf_bracket expects vector fields; use schouten")
    chart = u.chart
    comps: dict[tuple[int, ...], RationalFunction] = {}
    for j in range(chart.dim):
        total = chart.scalar(0)
        for i in range(chart.dim):
            ui = u.comps.get((i,))
            vi = v.comps.get((i,))
            var = chart.variables[i]
            if ui is not None:
                vj = v.comps.get((j,))
                if vj is not None:
                    total = total + ui * vj.partial_derivative(var)
            if vi is not None:
                uj = u.comps.get((j,))
                if uj is not None:
                    total = total - vi * uj.partial_derivative(var)
        if not total.is_zero():
            comps[(j,)] = total
    return MultivectorField(chart, 1, comps)


def _term_bracket(chart, a: RationalFunction, i: int, b: RationalFunction,
                  j: int) -> MultivectorField:
    """[a @i, b @j] for coefficient-carrying basis vector fields."""
    comps: dict[tuple[int, ...], RationalFunction] = {}
    db = b.partial_derivative(chart.variables[i])
    if not db.is_zero():
        comps[(j,)] = a * db
    da = a.partial_derivative(chart.variables[j])
    if not da.is_zero():
        comps[(i,)] = comps.get((i,), chart.scalar(0)) - b * da
    return MultivectorField(chart, 1, comps)


def schouten(u: MultivectorField, v: MultivectorField) -> MultivectorField:
    """Schouten bracket on multivector fields (degrees >= 1):
    [u_1^...^u_m, v_1^...^v_n] =
      sum_{i,j} (-1)^(i+j) [u_i,v_j] ^ u_1^..^{no u_i}..^u_m ^ v_1^..^{no v_j}..^v_n
    """
    if u.chart != v.chart:
        raise ChartMismatch(f"{u.chart.name} vs {v.chart.name}")
    if u.degree < 1 or v.degree < 1:
        raise DegreeError("schouten bracket needs degrees >= 1")
    chart = u.chart
    m, n = u.degree, v.degree
    result = MultivectorField.zero(chart, m + n - 1 if m + n - 1 <= chart.dim else chart.dim)
    for I, f in u.comps.items():
        for J, g in v.comps.items():
            # factor lists with the coefficient on the first slot
            us = [(f if r == 0 else chart.scalar(1), I[r]) for r in range(m)]
            vs = [(g if s == 0 else chart.scalar(1), J[s]) for s in range(n)]
            for r in range(m):
                for s in range(n):
                    br = _term_bracket(chart, us[r][0], us[r][1], vs[s][0], vs[s][1])
                    if br.is_zero():
                        continue
                    sign = (-1) ** ((r + 1) + (s + 1))
                    rest = [us[t] for t in range(m) if t != r] + \
                           [vs[t] for t in range(n) if t != s]
                    coeff = chart.scalar(sign)
                    for c, _ in rest:
                        coeff = coeff * c
                    blade = sort_indices([i for _, i in rest])
                    if blade is None:
                        continue
                    bsign, bidx = blade
                    piece = MultivectorField(chart, len(bidx),
                                             {bidx: coeff * bsign})
                    result = result + br.wedge(piece)
    return result


# -- chart maps, pullbacks, promotions ---------------------------------------


@dataclass(frozen=True)
class ChartMap:
    """A smooth map described by its coordinate pullbacks: every variable of
    ``source`` is sent to a rational function on ``target``.  ``pullback``
    carries forms on the source chart to forms on the target chart."""

    source: Chart
    target: Chart
    assign: Mapping[str, RationalFunction]

    def __post_init__(self):
        for var in self.source.variables:
            if var not in self.assign:
                raise UnknownVariable(f"chart map does not assign {var!r}")
            if self.assign[var].variables != self.target.variables:
                raise VariableMismatch("assignment image on wrong chart")

    def pull_scalar(self, f: RationalFunction) -> RationalFunction:
        return f.substitute(self.assign, self.target.variables)

    def pullback(self, a: DifferentialForm) -> DifferentialForm:
        if a.chart != self.source:
            raise ChartMismatch("form does not live on the source chart")
        result = DifferentialForm.zero(self.target, min(a.degree, self.target.dim))
        for idx, c in a.comps.items():
            piece = DifferentialForm.from_scalar(self.target, self.pull_scalar(c))
            dead = False
            for i in idx:
                img = self.assign[self.source.variables[i]]
                dimg = _differential(self.target, img)
                if dimg.is_zero():
                    dead = True
                    break
                piece = piece.wedge(dimg)
            if not dead and piece.degree == a.degree:
                result = result + piece
        return result


def _differential(chart: Chart, f: RationalFunction) -> DifferentialForm:
    comps = {}
    for j, var in enumerate(chart.variables):
        df = f.partial_derivative(var)
        if not df.is_zero():
            comps[(j,)] = df
    return DifferentialForm(chart, 1, comps)


def pullback(phi: ChartMap, a: DifferentialForm) -> DifferentialForm:
    return phi.pullback(a)


@dataclass(frozen=True)
class ChartEmbedding:
    """A variable-renaming injection of one chart into a larger one; pushes
    multivector fields forward and pulls forms back."""

    source: Chart
    target: Chart
    var_map: Mapping[str, str]

    def __post_init__(self):
        for var in self.source.variables:
            if var not in self.var_map:
                raise UnknownVariable(f"embedding does not map {var!r}")
            self.target.index_of(self.var_map[var])

    def as_chart_map(self) -> ChartMap:
        assign = {v: self.target.coordinate(self.var_map[v])
                  for v in self.source.variables}
        return ChartMap(self.source, self.target, assign)

    def promote_scalar(self, f: RationalFunction) -> RationalFunction:
        return self.as_chart_map().pull_scalar(f)

    def push(self, v: MultivectorField) -> MultivectorField:
        if v.chart != self.source:
            raise ChartMismatch("field does not live on the source chart")
        comps = {}
        for idx, c in v.comps.items():
            nidx = tuple(self.target.index_of(self.var_map[self.source.variables[i]])
                         for i in idx)
            s = sort_indices(nidx)
            if s is None:
                continue
            sign, sidx = s
            comps[sidx] = self.promote_scalar(c) * sign
        return MultivectorField(self.target, v.degree, comps)

    def pull_form(self, a: DifferentialForm) -> DifferentialForm:
        return self.as_chart_map().pullback(a)


def push_vector(emb: ChartEmbedding, v: MultivectorField) -> MultivectorField:
    return emb.push(v)


def evaluate_at(a: _Alternating, point: Mapping[str, Scalar]) -> _Alternating:
    return a.evaluate_at(point)


def poincare_primitive(a: DifferentialForm) -> DifferentialForm:
    """Radial homotopy operator K with dK + Kd = id on forms of degree >= 1
    with polynomial coefficients; for closed a, d(K a) = a exactly.

    K(f dx_I) = sum_r (-1)^(r-1) x_{i_r} * [monomial c x^E -> c/(|E|+p) x^E](f)
                 dx_{I minus i_r}
    """
    chart = a.chart
    p = a.degree
    if p < 1:
        raise DegreeError("homotopy primitive needs degree >= 1")
    comps: dict[tuple[int, ...], RationalFunction] = {}
    for idx, c in a.comps.items():
        if not c.is_polynomial():
            raise DegreeError("homotopy primitive needs polynomial coefficients")
        poly = c.num * (1 / c.den.constant_value())
        for r, i in enumerate(idx):
            ridx = idx[:r] + idx[r + 1:]
            terms = {}
            for e, coef in poly.terms.items():
                e2 = tuple(k + 1 if j == i else k for j, k in enumerate(e))
                terms[e2] = coef / (sum(e) + p)
            piece = RationalFunction.from_polynomial(
                Polynomial(chart.variables, terms)) * ((-1) ** r)
            if not piece.is_zero():
                comps[ridx] = comps.get(ridx, chart.scalar(0)) + piece
    return DifferentialForm(chart, p - 1, comps)


# -- seeded random generation -------------------------------------------------


def random_polynomial(chart: Chart, rng, max_degree: int = 2,
                      bound: int = 3, max_terms: int | None = None) -> RationalFunction:
    """Random polynomial scalar: total degree <= max_degree, integer
    coefficients in [-bound, bound]; optionally at most max_terms monomials."""
    terms: dict[tuple[int, ...], Fraction] = {}
    exps = _exponents_up_to(chart.dim, max_degree)
    if max_terms is not None and max_terms < len(exps):
        exps = rng.sample(exps, max_terms)
    for e in exps:
        c = rng.randint(-bound, bound)
        if c:
            terms[e] = Fraction(c)
    return RationalFunction.from_polynomial(Polynomial(chart.variables, terms))


def _exponents_up_to(dim: int, max_degree: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int):
        if len(prefix) == dim:
            out.append(prefix)
            return
        for e in range(remaining + 1):
            rec(prefix + (e,), remaining - e)

    rec((), max_degree)
    return out


def _random_alternating(cls, chart: Chart, degree: int, rng,
                        max_degree: int = 2, bound: int = 3,
                        max_terms: int | None = None):
    from itertools import combinations
    comps = {}
    for idx in combinations(range(chart.dim), degree):
        c = random_polynomial(chart, rng, max_degree, bound, max_terms)
        if not c.is_zero():
            comps[idx] = c
    return cls(chart, degree, comps)


def random_form(chart: Chart, degree: int, rng, max_degree: int = 2,
                bound: int = 3, max_terms: int | None = None) -> DifferentialForm:
    return _random_alternating(DifferentialForm, chart, degree, rng,
                               max_degree, bound, max_terms)


def random_multivector(chart: Chart, degree: int, rng, max_degree: int = 2,
                       bound: int = 3, max_terms: int | None = None) -> MultivectorField:
    return _random_alternating(MultivectorField, chart, degree, rng,
                               max_degree, bound, max_terms)
