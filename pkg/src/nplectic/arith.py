"""Exact arithmetic: rationals, multivariate polynomials, rational functions.

Coefficients are arbitrary-precision rationals (``fractions.Fraction``).
Polynomials live over a fixed, ordered tuple of variable names; mixing
variable lists is an error, never an implicit union.  Rational functions
are kept in canonical form: gcd(num, den) = 1 and the denominator is a
primitive integer polynomial with positive leading coefficient under
graded-lexicographic order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rational = Fraction

Scalar = Union[int, Fraction]


class DivisionByZero(ZeroDivisionError):
    pass


class UnknownVariable(Exception):
    pass


class PoleAtPoint(Exception):
    pass


class VariableMismatch(Exception):
    pass


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def _grlex_key(exp: tuple[int, ...]) -> tuple:
    # graded lexicographic: total degree first, then lex with earlier
    # variables more significant
    return (sum(exp), exp)


class Polynomial:
    """Multivariate polynomial with Fraction coefficients.

    ``terms`` maps exponent tuples (one entry per variable) to nonzero
    coefficients.  Instances are immutable by convention.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Iterable[str], terms: Mapping[tuple[int, ...], Scalar]):
        vs = tuple(variables)
        cleaned: dict[tuple[int, ...], Fraction] = {}
        for exp, c in terms.items():
            c = as_rational(c)
            if c == 0:
                continue
            exp = tuple(int(e) for e in exp)
            if len(exp) != len(vs):
                raise ValueError("exponent vector length does not match variable list")
            if any(e < 0 for e in exp):
                raise ValueError("negative exponent in polynomial term")
            cleaned[exp] = cleaned.get(exp, Fraction(0)) + c
        object.__setattr__(self, "variables", vs)
        object.__setattr__(self, "terms", {e: c for e, c in cleaned.items() if c != 0})
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def _raw(cls, variables: tuple[str, ...],
             terms: dict[tuple[int, ...], Fraction]) -> "Polynomial":
        """Internal constructor: inputs already clean except possible zeros."""
        p = cls.__new__(cls)
        object.__setattr__(p, "variables", variables)
        object.__setattr__(p, "terms", {e: c for e, c in terms.items() if c})
        object.__setattr__(p, "_hash", None)
        return p

    @classmethod
    def constant(cls, variables: Iterable[str], value) -> "Polynomial":
        vs = tuple(variables)
        value = as_rational(value)
        if value == 0:
            return cls(vs, {})
        return cls(vs, {(0,) * len(vs): value})

    @classmethod
    def coordinate(cls, variables: Iterable[str], name: str) -> "Polynomial":
        vs = tuple(variables)
        if name not in vs:
            raise UnknownVariable(name)
        exp = tuple(1 if v == name else 0 for v in vs)
        return cls(vs, {exp: Fraction(1)})

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        if self.is_zero():
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, var: str) -> int:
        i = self._var_index(var)
        if self.is_zero():
            return -1
        return max(e[i] for e in self.terms)

    def leading_term(self) -> tuple[tuple[int, ...], Fraction]:
        exp = max(self.terms, key=_grlex_key)
        return exp, self.terms[exp]

    def _var_index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise UnknownVariable(var) from None

    def _check_compatible(self, other: "Polynomial"):
        if self.variables != other.variables:
            raise VariableMismatch(
                f"variable lists differ: {self.variables} vs {other.variables}"
            )

    # -- ring operations -----------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.variables, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_compatible(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return Polynomial._raw(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.variables, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_rational(other)
            return Polynomial._raw(self.variables,
                                   {e: k * c for e, k in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_compatible(other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return Polynomial._raw(self.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial; use RationalFunction")
        result = Polynomial.constant(self.variables, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.variables, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            h = hash((self.variables, tuple(sorted(self.terms.items()))))
            object.__setattr__(self, "_hash", h)
        return self._hash

    # -- calculus -------------------------------------------------------

    def derivative(self, var: str) -> "Polynomial":
        i = self._var_index(var)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
            terms[e2] = terms.get(e2, Fraction(0)) + c * e[i]
        return Polynomial._raw(self.variables, terms)

    def evaluate(self, point: Mapping[str, Scalar]) -> Fraction:
        vals = []
        for v in self.variables:
            if v not in point:
                raise UnknownVariable(f"point does not assign {v!r}")
            vals.append(as_rational(point[v]))
        total = Fraction(0)
        for e, c in self.terms.items():
            m = c
            for val, k in zip(vals, e):
                if k:
                    m *= val ** k
            total += m
        return total

    def substitute(self, assign: Mapping[str, "RationalFunction"],
                   target: "tuple[str, ...]") -> "RationalFunction":
        """Evaluate at rational-function values of the variables (explicit
        promotion between charts)."""
        images = []
        for v in self.variables:
            if v not in assign:
                raise UnknownVariable(f"substitution does not assign {v!r}")
            img = assign[v]
            if img.variables != tuple(target):
                raise VariableMismatch("substitution images live on a different chart")
            images.append(img)
        total = RationalFunction.constant(target, 0)
        for e, c in self.terms.items():
            m = RationalFunction.constant(target, c)
            for img, k in zip(images, e):
                if k:
                    m = m * img ** k
            total = total + m
        return total

    # -- printing ---------------------------------------------------------

    def to_str(self, power: str = "^") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for exp in sorted(self.terms, key=_grlex_key, reverse=True):
            c = self.terms[exp]
            mono = "*".join(
                v if k == 1 else f"{v}{power}{k}"
                for v, k in zip(self.variables, exp) if k
            )
            parts.append((c, mono))
        out = []
        for idx, (c, mono) in enumerate(parts):
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            elif a.denominator == 1:
                body = f"{a}*{mono}"
            else:
                body = f"({a})*{mono}"
            if idx == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Polynomial({self})"


# ---------------------------------------------------------------------------
# gcd machinery (content / primitive-part recursion with pseudo-remainders)
# ---------------------------------------------------------------------------


def _int_normalize(p: Polynomial) -> tuple[Fraction, Polynomial]:
    """Write p = content * primitive with primitive having coprime integer
    coefficients and positive grlex-leading coefficient."""
    if p.is_zero():
        return Fraction(0), p
    denoms = [c.denominator for c in p.terms.values()]
    lcm = 1
    for d in denoms:
        lcm = lcm * d // math.gcd(lcm, d)
    numers = [abs(c.numerator) * (lcm // c.denominator) for c in p.terms.values()]
    g = 0
    for n in numers:
        g = math.gcd(g, n)
    content = Fraction(g, lcm)
    _, lead = p.leading_term()
    if lead < 0:
        content = -content
    prim = p * (1 / content)
    return content, prim


def _positive_primitive(p: Polynomial) -> Polynomial:
    if p.is_zero():
        return p
    return _int_normalize(p)[1]


def exact_divide(f: Polynomial, g: Polynomial) -> Polynomial:
    """Divide f by g assuming exact divisibility (grlex leading-term loop)."""
    f._check_compatible(g)
    if g.is_zero():
        raise DivisionByZero("polynomial division by zero")
    q: dict[tuple[int, ...], Fraction] = {}
    r = f
    gexp, gc = g.leading_term()
    while not r.is_zero():
        rexp, rc = r.leading_term()
        diff = tuple(a - b for a, b in zip(rexp, gexp))
        if any(d < 0 for d in diff):
            raise ArithmeticError("exact_divide: divisor does not divide dividend")
        coeff = rc / gc
        q[diff] = q.get(diff, Fraction(0)) + coeff
        r = r - Polynomial(f.variables, {diff: coeff}) * g
    return Polynomial(f.variables, q)


def _coeffs_in(p: Polynomial, i: int) -> dict[int, Polynomial]:
    """View p as a univariate polynomial in variable index i with
    polynomial coefficients (i-exponent zeroed in the coefficients)."""
    out: dict[int, dict[tuple[int, ...], Fraction]] = {}
    for e, c in p.terms.items():
        d = e[i]
        e2 = e[:i] + (0,) + e[i + 1:]
        out.setdefault(d, {})[e2] = c
    return {d: Polynomial(p.variables, t) for d, t in out.items()}


def _from_coeffs(variables, i: int, coeffs: dict[int, Polynomial]) -> Polynomial:
    terms: dict[tuple[int, ...], Fraction] = {}
    for d, poly in coeffs.items():
        for e, c in poly.terms.items():
            e2 = e[:i] + (d,) + e[i + 1:]
            terms[e2] = terms.get(e2, Fraction(0)) + c
    return Polynomial(variables, terms)


def _mono(variables, i: int, d: int) -> Polynomial:
    exp = tuple(d if j == i else 0 for j in range(len(variables)))
    return Polynomial(variables, {exp: Fraction(1)})


def _pseudo_rem(f: Polynomial, g: Polynomial, i: int) -> Polynomial:
    fc = _coeffs_in(f, i)
    gc = _coeffs_in(g, i)
    dg = max(gc)
    lc_g = gc[dg]
    r = f
    while not r.is_zero():
        rc = _coeffs_in(r, i)
        dr = max(rc)
        if dr < dg:
            break
        r = lc_g * r - rc[dr] * _mono(f.variables, i, dr - dg) * g
    return r


def _content_in(p: Polynomial, i: int) -> Polynomial:
    coeffs = list(_coeffs_in(p, i).values())
    c = coeffs[0]
    for q in coeffs[1:]:
        c = polynomial_gcd(c, q)
    return c


def _monomial_gcd(f: Polynomial, g: Polynomial) -> Polynomial:
    """Primitive gcd when at least one operand is a single term."""
    mono, other = (f, g) if len(f.terms) == 1 else (g, f)
    mexp = next(iter(mono.terms))
    exp = list(mexp)
    for e in other.terms:
        exp = [min(a, b) for a, b in zip(exp, e)]
    return Polynomial._raw(f.variables, {tuple(exp): Fraction(1)})


def _active_vars(f: Polynomial, g: Polynomial) -> list[int]:
    active = set()
    for p in (f, g):
        for e in p.terms:
            for i, k in enumerate(e):
                if k:
                    active.add(i)
    return sorted(active)


def _univariate_gcd(f: Polynomial, g: Polynomial, i: int) -> Polynomial:
    """Dense Euclid in the single active variable index i."""
    def dense(p):
        d = p.degree_in(p.variables[i])
        out = [Fraction(0)] * (d + 1)
        for e, c in p.terms.items():
            out[e[i]] = c
        return out

    def rem(a, b):
        a = a[:]
        while len(a) >= len(b) and any(a):
            while a and a[-1] == 0:
                a.pop()
            if len(a) < len(b):
                break
            q = a[-1] / b[-1]
            off = len(a) - len(b)
            for j, bc in enumerate(b):
                a[off + j] -= q * bc
            a.pop()
        while a and a[-1] == 0:
            a.pop()
        return a

    A, B = dense(f), dense(g)
    while B:
        A, B = B, rem(A, B)
    terms = {}
    zero_exp = [0] * len(f.variables)
    for d, c in enumerate(A):
        if c:
            e = zero_exp[:]
            e[i] = d
            terms[tuple(e)] = c
    return _positive_primitive(Polynomial._raw(f.variables, terms))


def polynomial_gcd(f: Polynomial, g: Polynomial) -> Polynomial:
    """Primitive gcd with positive grlex-leading coefficient."""
    f._check_compatible(g)
    if f.is_zero():
        return _positive_primitive(g)
    if g.is_zero():
        return _positive_primitive(f)
    if f.is_constant() or g.is_constant():
        return Polynomial.constant(f.variables, 1)
    if len(f.terms) == 1 or len(g.terms) == 1:
        return _positive_primitive(_monomial_gcd(f, g))
    active = _active_vars(f, g)
    if len(active) == 1:
        return _univariate_gcd(f, g, active[0])
    # main variable: last one occurring in either polynomial
    main = None
    for i in range(len(f.variables) - 1, -1, -1):
        df = f.degree_in(f.variables[i])
        dg = g.degree_in(f.variables[i])
        if max(df, dg) > 0:
            main = i
            df_main, dg_main = df, dg
            break
    if main is None:  # pragma: no cover - both constant, caught above
        return Polynomial.constant(f.variables, 1)
    if df_main <= 0:
        return polynomial_gcd(_content_in(g, main), f)
    if dg_main <= 0:
        return polynomial_gcd(_content_in(f, main), g)
    cf = _content_in(f, main)
    cg = _content_in(g, main)
    c = polynomial_gcd(cf, cg)
    a = exact_divide(f, cf)
    b = exact_divide(g, cg)
    if b.degree_in(f.variables[main]) > a.degree_in(f.variables[main]):
        a, b = b, a
    while not b.is_zero():
        r = _pseudo_rem(a, b, main)
        if r.is_zero():
            a, b = b, r
        else:
            a, b = b, exact_divide(r, _content_in(r, main))
    return _positive_primitive(c * a)


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------


class RationalFunction:
    """Exact quotient of multivariate polynomials, always canonical."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Polynomial, den: Polynomial):
        num._check_compatible(den)
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        if num.is_zero():
            num = Polynomial(num.variables, {})
            den = Polynomial.constant(num.variables, 1)
        elif den.is_constant():
            num = num * (1 / den.constant_value())
            den = Polynomial.constant(num.variables, 1)
        else:
            g = polynomial_gcd(num, den)
            if not (g.is_constant() and g.constant_value() == 1):
                num = exact_divide(num, g)
                den = exact_divide(den, g)
            if den.is_constant():
                num = num * (1 / den.constant_value())
                den = Polynomial.constant(num.variables, 1)
            else:
                # joint integer normalization: all coefficients of num and den
                # become coprime integers, den grlex-leading coefficient > 0
                coeffs = list(num.terms.values()) + list(den.terms.values())
                lcm = 1
                for c in coeffs:
                    lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
                g_int = 0
                for c in coeffs:
                    g_int = math.gcd(g_int, abs(c.numerator) * (lcm // c.denominator))
                content = Fraction(g_int, lcm)
                _, lead = den.leading_term()
                if lead < 0:
                    content = -content
                num = num * (1 / content)
                den = den * (1 / content)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("RationalFunction is immutable")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.num.variables

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        return cls(p, Polynomial.constant(p.variables, 1))

    @classmethod
    def constant(cls, variables: Iterable[str], value) -> "RationalFunction":
        vs = tuple(variables)
        return cls.from_polynomial(Polynomial.constant(vs, value))

    @classmethod
    def coordinate(cls, variables: Iterable[str], name: str) -> "RationalFunction":
        vs = tuple(variables)
        return cls.from_polynomial(Polynomial.coordinate(vs, name))

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            if other.variables != self.variables:
                raise VariableMismatch(
                    f"variable lists differ: {self.variables} vs {other.variables}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return RationalFunction.constant(self.variables, other)
        if isinstance(other, Polynomial):
            return RationalFunction.from_polynomial(other)
        raise TypeError(f"cannot combine RationalFunction with {type(other)!r}")

    # -- field operations ---------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_zero():
            raise DivisionByZero("division by zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n == 0:
            return RationalFunction.constant(self.variables, 1)
        if n < 0:
            if self.is_zero():
                raise DivisionByZero("negative power of zero")
            return RationalFunction(self.den ** (-n), self.num ** (-n))
        return RationalFunction(self.num ** n, self.den ** n)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, VariableMismatch):
            return NotImplemented
        # canonical form makes structural equality agree with cross-multiplication
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.num, self.den)))
        return self._hash

    # -- calculus -----------------------------------------------------------

    def partial_derivative(self, var: str) -> "RationalFunction":
        dn = self.num.derivative(var)
        dd = self.den.derivative(var)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def evaluate(self, point: Mapping[str, Scalar]) -> Fraction:
        d = self.den.evaluate(point)
        if d == 0:
            raise PoleAtPoint(f"denominator vanishes at {dict(point)!r}")
        return self.num.evaluate(point) / d

    def substitute(self, assign: Mapping[str, "RationalFunction"],
                   target: tuple[str, ...]) -> "RationalFunction":
        n = self.num.substitute(assign, target)
        d = self.den.substitute(assign, target)
        if d.is_zero():
            raise DivisionByZero("substitution sends denominator to zero")
        return n / d

    # -- printing -------------------------------------------------------------

    def to_str(self, power: str = "^") -> str:
        if self.den.is_constant() and self.den.constant_value() == 1:
            return self.num.to_str(power)
        return f"({self.num.to_str(power)})/({self.den.to_str(power)})"

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"RationalFunction({self})"


# -- module-level operation names ------------------------------------------


def partial_derivative(f: RationalFunction, var: str) -> RationalFunction:
    return f.partial_derivative(var)


def evaluate(f: RationalFunction, point: Mapping[str, Scalar]) -> Fraction:
    return f.evaluate(point)
