"""Declarative input language and check runner.

Statements end with ';', comments run from '#' to end of line:

    chart M (x, y, z);
    scalar f on M = x**2 * y - 1/2;
    form a on M = x * d(y) ^ d(z) + d(x);
    vector v on M = x * @y - @z;
    plectic P = (M, a, n=2) samples {x:1, y:0, z:2};
    liealg g = basis(e1, e2, e3) brackets { [e1,e2] = e3; [e2,e3] = e1; [e3,e1] = e2; };
    action A = g on P via { e1 -> v1; e2 -> v2; e3 -> v3; };
    moment F = for A with { f1(e1) = a1; f2(e1,e2) = b12; };
    linfty K = space { u:0, w:-1 } brackets { l1(w) = u; };
    product Q = P1 * P2;
    check jacobiator P (a1, a2, a3);
    check moment F sign-audit;

'^' is the wedge, '**' is scalar power, 'd(...)' the exterior derivative,
'@x' a basis vector field.  Reports are deterministic given (document, seed).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import arith, exterior, graded, linfty, moment, plectic
from .arith import RationalFunction
from .exterior import Chart, DifferentialForm, MultivectorField
from .linfty import FiniteLInfty, GradedElement, GradedSpace
from .moment import LieAlgebra, MomentCandidate


class DslError(Exception):
    def __init__(self, message: str, line: int, col: int, code: str = "syntax"):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.code = code


class DslSyntaxError(DslError):
    pass


class UnknownName(DslError):
    def __init__(self, name, line, col):
        super().__init__(f"unknown name {name!r}", line, col, "unknown-name")


class TypeMismatch(DslError):
    def __init__(self, message, line, col):
        super().__init__(message, line, col, "type-mismatch")


# ---------------------------------------------------------------------------
# tokens
# ---------------------------------------------------------------------------

_PUNCT = ("->", "**", "(", ")", "{", "}", "[", "]", ",", ";", ":", "=",
          "+", "-", "*", "/", "^", "@")


@dataclass(frozen=True)
class Token:
    kind: str  # name | int | punct | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_."):
                j += 1
            tokens.append(Token("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        matched = None
        for p in _PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched is None:
            raise DslSyntaxError(f"unexpected character {c!r}", line, col)
        tokens.append(Token("punct", matched, line, col))
        i += len(matched)
        col += len(matched)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------


@dataclass
class CheckDirective:
    kind: str
    args: list
    options: dict
    line: int
    col: int


@dataclass
class Document:
    """Symbol table of typed values plus the ordered check directives."""

    symbols: dict = field(default_factory=dict)
    kinds: dict = field(default_factory=dict)
    directives: list = field(default_factory=list)
    moments: dict = field(default_factory=dict)  # name -> (action name, raw tables)

    def lookup(self, name: str, tok: Token):
        if name not in self.symbols:
            raise UnknownName(name, tok.line, tok.col)
        return self.symbols[name]

    def bind(self, name: str, kind: str, value, tok: Token):
        if name in self.symbols:
            raise DslError(f"{name!r} is already defined", tok.line, tok.col,
                           "redefinition")
        self.symbols[name] = value
        self.kinds[name] = kind


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.doc = Document()

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise DslSyntaxError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def expect_name(self, what="name") -> Token:
        t = self.next()
        if t.kind != "name":
            raise DslSyntaxError(f"expected {what}, found {t.text!r}", t.line, t.col)
        return t

    def expect_int(self) -> int:
        neg = False
        if self.peek().text == "-":
            self.next()
            neg = True
        t = self.next()
        if t.kind != "int":
            raise DslSyntaxError(f"expected integer, found {t.text!r}", t.line, t.col)
        return -int(t.text) if neg else int(t.text)

    def dashed_name(self) -> Token:
        """A name that may contain '-' (check kinds and option keys)."""
        t = self.expect_name()
        text = t.text
        while self.peek().text == "-" and \
                self.tokens[self.pos + 1].kind == "name":
            self.next()
            text += "-" + self.next().text
        return Token("name", text, t.line, t.col)

    # -- document -------------------------------------------------------------

    def parse(self) -> Document:
        while self.peek().kind != "eof":
            self.statement()
        return self.doc

    def statement(self):
        t = self.peek()
        handler = {
            "chart": self.chart_decl,
            "scalar": self.value_decl,
            "form": self.value_decl,
            "vector": self.value_decl,
            "plectic": self.plectic_decl,
            "liealg": self.liealg_decl,
            "action": self.action_decl,
            "moment": self.moment_decl,
            "linfty": self.linfty_decl,
            "product": self.product_decl,
            "check": self.check_stmt,
        }.get(t.text)
        if handler is None:
            raise DslSyntaxError(f"expected a declaration or check, found {t.text!r}",
                                 t.line, t.col)
        handler()

    def chart_decl(self):
        self.expect("chart")
        name = self.expect_name("chart name")
        self.expect("(")
        variables = [self.expect_name("variable").text]
        while self.peek().text == ",":
            self.next()
            variables.append(self.expect_name("variable").text)
        self.expect(")")
        self.expect(";")
        try:
            chart = Chart(name.text, tuple(variables))
        except ValueError as exc:
            raise DslError(str(exc), name.line, name.col, "chart") from None
        self.doc.bind(name.text, "chart", chart, name)

    def value_decl(self):
        kind = self.next().text  # scalar | form | vector
        name = self.expect_name()
        self.expect("on")
        chart_tok = self.expect_name("chart name")
        chart = self.doc.lookup(chart_tok.text, chart_tok)
        if not isinstance(chart, Chart):
            raise TypeMismatch(f"{chart_tok.text!r} is not a chart",
                               chart_tok.line, chart_tok.col)
        self.expect("=")
        value = self.expression(chart)
        self.expect(";")
        value = self._coerce(kind, value, chart, name)
        self.doc.bind(name.text, kind, value, name)

    def _coerce(self, kind, value, chart, tok):
        if kind == "scalar":
            if isinstance(value, RationalFunction):
                return value
            if isinstance(value, DifferentialForm) and value.degree == 0:
                return value.component(())
            raise TypeMismatch("expression is not a scalar", tok.line, tok.col)
        if kind == "form":
            if isinstance(value, RationalFunction):
                return DifferentialForm(chart, 0, {(): value})
            if isinstance(value, DifferentialForm):
                return value
            raise TypeMismatch("expression is not a differential form",
                               tok.line, tok.col)
        if kind == "vector":
            if isinstance(value, MultivectorField):
                return value
            raise TypeMismatch("expression is not a vector field", tok.line, tok.col)
        raise AssertionError(kind)

    def plectic_decl(self):
        self.expect("plectic")
        name = self.expect_name()
        self.expect("=")
        self.expect("(")
        chart_tok = self.expect_name("chart name")
        chart = self.doc.lookup(chart_tok.text, chart_tok)
        self.expect(",")
        form_tok = self.expect_name("form name")
        omega = self.doc.lookup(form_tok.text, form_tok)
        self.expect(",")
        key = self.expect_name()
        if key.text != "n":
            raise DslSyntaxError("expected n=<int>", key.line, key.col)
        self.expect("=")
        n = self.expect_int()
        self.expect(")")
        samples = []
        while self.peek().text == "samples":
            self.next()
            samples.append(self.point(chart))
        self.expect(";")
        try:
            P = plectic.check_plectic(chart, n, omega, samples)
        except Exception as exc:
            raise DslError(f"invalid plectic structure: {exc}",
                           name.line, name.col, "plectic") from None
        self.doc.bind(name.text, "plectic", P, name)

    def point(self, chart) -> dict:
        self.expect("{")
        pt = {}
        while self.peek().text != "}":
            var = self.expect_name("variable").text
            self.expect(":")
            pt[var] = self.rational()
            if self.peek().text == ",":
                self.next()
        self.expect("}")
        return pt

    def rational(self) -> Fraction:
        num = self.expect_int()
        if self.peek().text == "/":
            self.next()
            den = self.expect_int()
            return Fraction(num, den)
        return Fraction(num)

    def liealg_decl(self):
        self.expect("liealg")
        name = self.expect_name()
        self.expect("=")
        self.expect("basis")
        self.expect("(")
        labels = [self.expect_name("basis label").text]
        while self.peek().text == ",":
            self.next()
            labels.append(self.expect_name("basis label").text)
        self.expect(")")
        self.expect("brackets")
        self.expect("{")
        table = {}
        while self.peek().text != "}":
            self.expect("[")
            a = self.expect_name().text
            self.expect(",")
            b = self.expect_name().text
            self.expect("]")
            eq = self.expect("=")
            combo = self.label_combo(labels)
            self.expect(";")
            if a not in labels or b not in labels:
                raise UnknownName(a if a not in labels else b, eq.line, eq.col)
            if labels.index(a) < labels.index(b):
                table[(a, b)] = combo
            elif labels.index(a) > labels.index(b):
                table[(b, a)] = {k: -c for k, c in combo.items()}
            elif combo:
                raise DslError(f"[{a},{a}] must be 0", eq.line, eq.col, "bracket")
        self.expect("}")
        self.expect(";")
        try:
            algebra = LieAlgebra(labels, table)
        except ValueError as exc:
            raise DslError(str(exc), name.line, name.col, "liealg") from None
        self.doc.bind(name.text, "liealg", algebra, name)

    def label_combo(self, labels) -> dict[str, Fraction]:
        """Linear combination of labels: e.g. '0', 'e3', '2*e1 - 1/2*e2'."""
        combo: dict[str, Fraction] = {}
        sign = Fraction(1)
        first = True
        while True:
            t = self.peek()
            if t.text in (";", "}"):
                break
            if t.text == "+":
                self.next()
                sign = Fraction(1)
            elif t.text == "-":
                self.next()
                sign = Fraction(-1)
            elif not first:
                break
            coeff = Fraction(1)
            if self.peek().kind == "int":
                coeff = self.rational()
                if self.peek().text == "*":
                    self.next()
                else:
                    if coeff != 0:
                        raise DslSyntaxError("a bare constant in a bracket value "
                                             "must be 0", t.line, t.col)
                    first = False
                    continue
            lab = self.expect_name("basis label")
            if lab.text not in labels:
                raise UnknownName(lab.text, lab.line, lab.col)
            combo[lab.text] = combo.get(lab.text, Fraction(0)) + sign * coeff
            first = False
        return {k: c for k, c in combo.items() if c != 0}

    def action_decl(self):
        self.expect("action")
        name = self.expect_name()
        self.expect("=")
        g_tok = self.expect_name("Lie algebra name")
        algebra = self.doc.lookup(g_tok.text, g_tok)
        self.expect("on")
        p_tok = self.expect_name("plectic name")
        P = self.doc.lookup(p_tok.text, p_tok)
        self.expect("via")
        self.expect("{")
        fields = {}
        while self.peek().text != "}":
            lab = self.expect_name("basis label")
            self.expect("->")
            v_tok = self.expect_name("vector name")
            v = self.doc.lookup(v_tok.text, v_tok)
            if not isinstance(v, MultivectorField) or v.degree != 1:
                raise TypeMismatch(f"{v_tok.text!r} is not a vector field",
                                   v_tok.line, v_tok.col)
            fields[lab.text] = v
            self.expect(";")
        self.expect("}")
        self.expect(";")
        # stored unvalidated; `check action` and moment checks validate
        self.doc.bind(name.text, "action", {"algebra": algebra, "plectic": P,
                                            "fields": fields}, name)

    def moment_decl(self):
        self.expect("moment")
        name = self.expect_name()
        self.expect("=")
        self.expect("for")
        a_tok = self.expect_name("action name")
        action_raw = self.doc.lookup(a_tok.text, a_tok)
        chart = action_raw["plectic"].chart
        self.expect("with")
        self.expect("{")
        tables: dict[int, dict[tuple[str, ...], DifferentialForm]] = {}
        while self.peek().text != "}":
            f_tok = self.expect_name("component f<k>")
            if not (f_tok.text.startswith("f") and f_tok.text[1:].isdigit()):
                raise DslSyntaxError("component names look like f1, f2, ...",
                                     f_tok.line, f_tok.col)
            k = int(f_tok.text[1:])
            self.expect("(")
            labs = [self.expect_name("basis label").text]
            while self.peek().text == ",":
                self.next()
                labs.append(self.expect_name("basis label").text)
            self.expect(")")
            self.expect("=")
            value = self.expression(chart)
            self.expect(";")
            if isinstance(value, RationalFunction):
                value = DifferentialForm(chart, 0, {(): value})
            if not isinstance(value, DifferentialForm):
                raise TypeMismatch("component value must be a form",
                                   f_tok.line, f_tok.col)
            tables.setdefault(k, {})[tuple(labs)] = value
        self.expect("}")
        self.expect(";")
        self.doc.bind(name.text, "moment",
                      {"action": action_raw, "components": tables}, name)

    def linfty_decl(self):
        self.expect("linfty")
        name = self.expect_name()
        self.expect("=")
        self.expect("space")
        self.expect("{")
        basis = []
        while self.peek().text != "}":
            lab = self.expect_name("basis label").text
            self.expect(":")
            deg = self.expect_int()
            basis.append((lab, deg))
            if self.peek().text == ",":
                self.next()
        self.expect("}")
        space = GradedSpace(tuple(basis))
        labels = list(space.labels)
        self.expect("brackets")
        self.expect("{")
        tables: dict[int, dict[tuple[str, ...], GradedElement]] = {}
        while self.peek().text != "}":
            l_tok = self.expect_name("bracket l<k>")
            if not (l_tok.text.startswith("l") and l_tok.text[1:].isdigit()):
                raise DslSyntaxError("bracket names look like l1, l2, ...",
                                     l_tok.line, l_tok.col)
            k = int(l_tok.text[1:])
            self.expect("(")
            labs = [self.expect_name("basis label").text]
            while self.peek().text == ",":
                self.next()
                labs.append(self.expect_name("basis label").text)
            self.expect(")")
            self.expect("=")
            combo = self.label_combo(labels)
            self.expect(";")
            order = [labels.index(b) for b in labs]
            if order != sorted(set(order)):
                if combo:
                    raise DslError(
                        "bracket keys with repeated or unordered labels may "
                        "only be declared 0", l_tok.line, l_tok.col, "bracket")
                continue
            if combo:
                tables.setdefault(k, {})[tuple(labs)] = GradedElement(space, combo)
        self.expect("}")
        self.expect(";")
        try:
            structure = FiniteLInfty(space, tables)
        except Exception as exc:
            raise DslError(f"invalid bracket table: {exc}",
                           name.line, name.col, "linfty") from None
        self.doc.bind(name.text, "linfty", structure, name)

    def product_decl(self):
        self.expect("product")
        name = self.expect_name()
        self.expect("=")
        a_tok = self.expect_name("plectic name")
        Pa = self.doc.lookup(a_tok.text, a_tok)
        self.expect("*")
        b_tok = self.expect_name("plectic name")
        Pb = self.doc.lookup(b_tok.text, b_tok)
        self.expect(";")
        try:
            Q = moment.product_plectic(Pa, Pb)
        except Exception as exc:
            raise DslError(f"invalid product: {exc}", name.line, name.col,
                           "product") from None
        self.doc.bind(name.text, "product", Q, name)

    # -- checks -----------------------------------------------------------------

    def check_stmt(self):
        self.expect("check")
        kind_tok = self.dashed_name()
        kind = kind_tok.text
        args: list = []
        if kind in ("closed", "gen-jacobi", "linfty", "coderivation",
                    "action", "moment"):
            args.append(self.expect_name().text)
        elif kind == "nondegenerate":
            self.expect("(")
            args.append(self.expect_name().text)
            self.expect(",")
            args.append(self.expect_name().text)
            self.expect(",")
            k = self.expect_name()
            if k.text != "n":
                raise DslSyntaxError("expected n=<int>", k.line, k.col)
            self.expect("=")
            args.append(self.expect_int())
            self.expect(")")
        elif kind in ("hamiltonian", "bracket", "jacobiator"):
            args.append(self.expect_name().text)
            self.expect("(")
            args.append(self.expect_name().text)
            while self.peek().text == ",":
                self.next()
                args.append(self.expect_name().text)
            self.expect(")")
        elif kind in ("strict-morphism",):
            args.append(self.expect_name().text)
            args.append(self.expect_name().text)
            args.append(self.morphism_map_block())
        elif kind in ("liealg-morphism",):
            args.append(self.expect_name().text)
            args.append(self.expect_name().text)
            args.append(self.component_map_block())
        elif kind in ("product",):
            args.append(self.expect_name().text)
        elif kind in ("product-moment", "diagonal"):
            args.append(self.expect_name().text)
            args.append(self.expect_name().text)
        else:
            raise DslSyntaxError(f"unknown check kind {kind!r}",
                                 kind_tok.line, kind_tok.col)
        options = self.options(kind_tok)
        self.expect(";")
        self.doc.directives.append(CheckDirective(kind, args, options,
                                                  kind_tok.line, kind_tok.col))

    def morphism_map_block(self):
        self.expect("{")
        table = {}
        while self.peek().text != "}":
            lab = self.expect_name("basis label").text
            self.expect("->")
            combo = self.label_combo_free()
            self.expect(";")
            table[lab] = combo
        self.expect("}")
        return table

    def component_map_block(self):
        self.expect("{")
        table: dict[int, dict[tuple[str, ...], dict]] = {}
        while self.peek().text != "}":
            f_tok = self.expect_name("component f<k>")
            if not (f_tok.text.startswith("f") and f_tok.text[1:].isdigit()):
                raise DslSyntaxError("component names look like f1, f2, ...",
                                     f_tok.line, f_tok.col)
            m = int(f_tok.text[1:])
            self.expect("(")
            labs = [self.expect_name().text]
            while self.peek().text == ",":
                self.next()
                labs.append(self.expect_name().text)
            self.expect(")")
            self.expect("=")
            combo = self.label_combo_free()
            self.expect(";")
            table.setdefault(m, {})[tuple(labs)] = combo
        self.expect("}")
        return table

    def label_combo_free(self) -> dict[str, Fraction]:
        """Like label_combo but defers label validation to the runner."""
        combo: dict[str, Fraction] = {}
        sign = Fraction(1)
        first = True
        while True:
            t = self.peek()
            if t.text in (";", "}"):
                break
            if t.text == "+":
                self.next()
                sign = Fraction(1)
            elif t.text == "-":
                self.next()
                sign = Fraction(-1)
            elif not first:
                break
            coeff = Fraction(1)
            if self.peek().kind == "int":
                coeff = self.rational()
                if self.peek().text == "*":
                    self.next()
                else:
                    if coeff != 0:
                        raise DslSyntaxError("a bare constant here must be 0",
                                             t.line, t.col)
                    first = False
                    continue
            lab = self.expect_name("basis label")
            combo[lab.text] = combo.get(lab.text, Fraction(0)) + sign * coeff
            first = False
        return {k: c for k, c in combo.items() if c != 0}

    def options(self, tok) -> dict:
        opts = {}
        while True:
            t = self.peek()
            if t.text == ";":
                return opts
            if t.kind != "name":
                raise DslSyntaxError(f"expected option or ';', found {t.text!r}",
                                     t.line, t.col)
            key = self.dashed_name().text
            if key == "sign-audit":
                opts["sign_audit"] = True
            elif key in ("seed", "max-arity", "word-max"):
                opts[key.replace("-", "_")] = self.expect_int()
            elif key == "samples":
                if self.peek().text == "{":
                    opts.setdefault("points", []).append(self.point(None))
                else:
                    opts["samples"] = self.expect_int()
            else:
                raise DslSyntaxError(f"unknown option {key!r}", t.line, t.col)

    # -- expressions ---------------------------------------------------------

    def expression(self, chart: Chart):
        value = self.term(chart)
        while self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.term(chart)
            value = _combine_add(value, rhs, op, self.peek(), chart)
        return value

    def term(self, chart: Chart):
        value = self.power(chart)
        while self.peek().text in ("*", "/", "^"):
            op = self.next().text
            rhs = self.power(chart)
            value = _combine_mul(value, rhs, op, self.peek(), chart)
        return value

    def power(self, chart: Chart):
        value = self.atom(chart)
        while self.peek().text == "**":
            t = self.next()
            exp = self.expect_int()
            if not isinstance(value, RationalFunction):
                raise TypeMismatch("'**' applies to scalars", t.line, t.col)
            value = value ** exp
        return value

    def atom(self, chart: Chart):
        t = self.next()
        if t.text == "-":
            return -self.power(chart)
        if t.text == "(":
            value = self.expression(chart)
            self.expect(")")
            return value
        if t.text == "@":
            var = self.expect_name("coordinate")
            if var.text not in chart.variables:
                raise UnknownName(var.text, var.line, var.col)
            return exterior.basis_field(chart, var.text)
        if t.kind == "int":
            return chart.scalar(int(t.text))
        if t.kind == "name":
            if t.text == "d" and self.peek().text == "(":
                self.next()
                inner = self.expression(chart)
                self.expect(")")
                if isinstance(inner, RationalFunction):
                    inner = DifferentialForm(chart, 0, {(): inner})
                if not isinstance(inner, DifferentialForm):
                    raise TypeMismatch("d(...) applies to scalars and forms",
                                       t.line, t.col)
                return exterior.exterior_derivative(inner)
            if t.text in chart.variables:
                return chart.coordinate(t.text)
            value = self.doc.lookup(t.text, t)
            if isinstance(value, (RationalFunction, DifferentialForm,
                                  MultivectorField)):
                vchart = value.chart if not isinstance(value, RationalFunction) \
                    else None
                if vchart is not None and vchart != chart:
                    raise TypeMismatch(f"{t.text!r} lives on chart "
                                       f"{vchart.name!r}", t.line, t.col)
                if isinstance(value, RationalFunction) and \
                        value.variables != chart.variables:
                    raise TypeMismatch(f"{t.text!r} lives on another chart",
                                       t.line, t.col)
                return value
            raise TypeMismatch(f"{t.text!r} is not usable in an expression",
                               t.line, t.col)
        raise DslSyntaxError(f"unexpected token {t.text!r}", t.line, t.col)


def _combine_add(a, b, op, tok, chart):
    if isinstance(a, RationalFunction) and isinstance(b, RationalFunction):
        return a + b if op == "+" else a - b
    a = _as_form_if_scalar(a, chart)
    b = _as_form_if_scalar(b, chart)
    if type(a) is not type(b):
        raise TypeMismatch("cannot add values of different kinds",
                           tok.line, tok.col)
    try:
        return a + b if op == "+" else a - b
    except exterior.DegreeError as exc:
        raise TypeMismatch(str(exc), tok.line, tok.col) from None


def _as_form_if_scalar(v, chart):
    if isinstance(v, RationalFunction):
        return DifferentialForm(chart, 0, {(): v})
    return v


def _combine_mul(a, b, op, tok, chart):
    if op == "/":
        if not isinstance(b, RationalFunction):
            if isinstance(b, DifferentialForm) and b.degree == 0:
                b = b.component(())
            else:
                raise TypeMismatch("division only by scalars", tok.line, tok.col)
        try:
            if isinstance(a, RationalFunction):
                return a / b
            return a * (chart.scalar(1) / b)
        except arith.DivisionByZero:
            raise TypeMismatch("division by zero", tok.line, tok.col) from None
    scalars = [isinstance(v, RationalFunction) for v in (a, b)]
    if all(scalars):
        return a * b
    if scalars[0]:
        return b * a
    if scalars[1]:
        return a * b
    # two graded objects
    if op == "*":
        if isinstance(a, DifferentialForm) and a.degree == 0:
            return b * a.component(())
        if isinstance(b, DifferentialForm) and b.degree == 0:
            return a * b.component(())
        raise TypeMismatch("use '^' to multiply forms", tok.line, tok.col)
    if type(a) is not type(b):
        raise TypeMismatch("wedge needs two forms or two vector fields",
                           tok.line, tok.col)
    return a.wedge(b)


def parse(text: str) -> Document:
    return Parser(text).parse()


# ---------------------------------------------------------------------------
# canonical printing (round-trips through parse)
# ---------------------------------------------------------------------------


def print_rational(x: Fraction) -> str:
    return str(x)


def print_scalar(f: RationalFunction) -> str:
    if f.den.is_constant() and f.den.constant_value() == 1:
        return f.num.to_str("**")
    return f"({f.num.to_str('**')})/({f.den.to_str('**')})"


def _print_graded(v, basis_fmt: Callable[[str], str]) -> str:
    if v.is_zero():
        return "0"
    chart = v.chart
    parts = []
    for idx in sorted(v.comps):
        c = v.comps[idx]
        blade = " ^ ".join(basis_fmt(chart.variables[i]) for i in idx)
        cs = print_scalar(c)
        if not blade:
            parts.append(cs if not _needs_parens(cs) else f"({cs})")
            continue
        if cs == "1":
            parts.append(blade)
        elif cs == "-1":
            parts.append(f"-{blade}")
        elif _needs_parens(cs):
            parts.append(f"({cs})*{blade}")
        else:
            parts.append(f"{cs}*{blade}")
    out = parts[0]
    for p in parts[1:]:
        out += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
    return out


def _needs_parens(cs: str) -> bool:
    depth = 0
    for ch in cs[1:] if cs.startswith("-") else cs:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0:
            return True
    return cs.startswith("-")


def print_form(a: DifferentialForm) -> str:
    return _print_graded(a, lambda v: f"d({v})")


def print_vector(v: MultivectorField) -> str:
    return _print_graded(v, lambda v_: f"@{v_}")


def print_value(value) -> str:
    if isinstance(value, Fraction):
        return print_rational(value)
    if isinstance(value, RationalFunction):
        return print_scalar(value)
    if isinstance(value, DifferentialForm):
        return print_form(value)
    if isinstance(value, MultivectorField):
        return print_vector(value)
    return str(value)


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


@dataclass
class ReportRow:
    id: int
    check: str
    status: str  # pass | fail | error
    witness: str
    details: list = field(default_factory=list)
    timing_ms: float = 0.0

    def as_json(self, timings: bool = False) -> dict:
        out = {"id": self.id, "check": self.check, "status": self.status,
               "witness": self.witness}
        if self.details:
            out["details"] = self.details
        if timings:
            out["timing_ms"] = round(self.timing_ms, 3)
        return out


@dataclass
class Report:
    seed: int
    rows: list

    @property
    def all_pass(self) -> bool:
        return all(r.status == "pass" for r in self.rows)

    def as_json(self, timings: bool = False) -> dict:
        return {"schema": 1, "seed": self.seed,
                "rows": [r.as_json(timings) for r in self.rows]}


_FAIL_EXCEPTIONS = (plectic.NotClosed, plectic.GenericallyDegenerate,
                    plectic.DegenerateAtPoint, plectic.NotHamiltonian,
                    moment.NotPreserving, moment.NotHamiltonianAction,
                    moment.BracketIncompatible, moment.NondegenerateFailure)


class Runner:
    def __init__(self, doc: Document, seed: int = 0, max_arity: int = 4,
                 word_max: int = 4, sign_audit: bool = False,
                 anti_action: bool = False):
        self.doc = doc
        self.seed = seed
        self.max_arity = max_arity
        self.word_max = word_max
        self.sign_audit = sign_audit
        self.anti_action = anti_action

    def run(self, emit: Optional[Callable[[ReportRow], None]] = None) -> Report:
        rows = []
        for idx, directive in enumerate(self.doc.directives, start=1):
            t0 = time.perf_counter()
            try:
                status, witness, details = self.dispatch(directive, idx)
            except _FAIL_EXCEPTIONS as exc:
                status, witness, details = "fail", str(exc), []
            except Exception as exc:  # directive errors never abort the report
                status, witness, details = "error", f"{type(exc).__name__}: {exc}", []
            row = ReportRow(idx, directive.kind, status, witness, details,
                            (time.perf_counter() - t0) * 1000.0)
            rows.append(row)
            if emit:
                emit(row)
        return Report(self.seed, rows)

    # -- helpers ---------------------------------------------------------------

    def rng_for(self, idx: int):
        import random
        return random.Random(self.seed * 1000003 + idx)

    def lookup(self, name, want_kind=None):
        if name not in self.doc.symbols:
            raise KeyError(f"unknown name {name!r}")
        if want_kind and self.doc.kinds.get(name) != want_kind:
            raise TypeError(f"{name!r} is not a {want_kind}")
        return self.doc.symbols[name]

    def build_action(self, raw) -> moment.PlecticAction:
        convention = "anti" if self.anti_action else "morphism"
        return moment.check_action(raw["plectic"], raw["algebra"], raw["fields"],
                                   convention)

    def build_moment(self, raw) -> MomentCandidate:
        action = self.build_action(raw["action"])
        return MomentCandidate(action, raw["components"])

    # -- dispatch ---------------------------------------------------------------

    def dispatch(self, d: CheckDirective, idx: int):
        method = getattr(self, "check_" + d.kind.replace("-", "_"))
        return method(d, idx)

    def check_closed(self, d, idx):
        value = self.lookup(d.args[0])
        if isinstance(value, plectic.PlecticManifold):
            value = value.omega
        if not isinstance(value, DifferentialForm):
            raise TypeError(f"{d.args[0]!r} is not a form")
        dv = exterior.exterior_derivative(value)
        if dv.is_zero():
            return "pass", "d = 0", []
        return "fail", f"d(omega) = {print_form(dv)}", []

    def check_nondegenerate(self, d, idx):
        chart = self.lookup(d.args[0], "chart")
        omega = self.lookup(d.args[1])
        n = d.args[2]
        points = d.options.get("points", [])
        plectic.check_plectic(chart, n, omega, points)
        return "pass", f"generic rank {chart.dim}", []

    def check_hamiltonian(self, d, idx):
        P = self.lookup(d.args[0], "plectic")
        alpha = self.lookup(d.args[1])
        u = plectic.hamiltonian_vf(P, alpha)
        return "pass", print_vector(u), []

    def check_bracket(self, d, idx):
        P = self.lookup(d.args[0], "plectic")
        a = self.lookup(d.args[1])
        b = self.lookup(d.args[2])
        br = plectic.bracket2(P, a, b)
        if not plectic.commutator_compat(P, a, b):
            return "fail", "bracket field differs from the commutator", []
        return "pass", print_form(br), []

    def check_jacobiator(self, d, idx):
        P = self.lookup(d.args[0], "plectic")
        forms = [self.lookup(a) for a in d.args[1:4]]
        try:
            lhs, rhs = plectic.jacobiator_check(P, *forms)
        except AssertionError as exc:
            return "fail", str(exc), []
        return "pass", print_form(lhs), []

    def check_gen_jacobi(self, d, idx):
        A = self.lookup(d.args[0], "linfty")
        m_max = d.options.get("max_arity", self.max_arity)
        rows = linfty.check_generalized_jacobi(A, m_max)
        bad = [r for r in rows if r.residual_nonzero]
        details = [r.as_json() for r in rows]
        if bad:
            return "fail", f"residual at {bad[0].tuple}: {bad[0].residual}", details
        return "pass", f"all residuals zero up to arity {m_max}", details

    def check_linfty(self, d, idx):
        """Equivalence of the three formulations: the tower identities, the
        shifted identities, and square-zero of the lifted coderivation; their
        pass/fail verdicts and witness supports must agree."""
        A = self.lookup(d.args[0], "linfty")
        m_max = d.options.get("max_arity", self.max_arity)
        word_max = d.options.get("word_max", self.word_max)
        B = linfty.decalage_shift(A)
        back = linfty.decalage_unshift(B)
        if back.tables != A.tables or back.space != A.space:
            return "fail", "decalage round trip is not the identity", []
        gj = linfty.check_generalized_jacobi(A, m_max)
        l1 = linfty.check_L1condition(B, m_max)
        qq = linfty.check_square_zero(B, word_max)
        gj_bad = {tuple(sorted(r.tuple)) for r in gj if r.residual_nonzero}
        l1_bad = {tuple(sorted(r.tuple)) for r in l1 if r.residual_nonzero}
        qq_bad = {tuple(sorted(w)) for w, _ in qq if len(set(w)) == len(w)}
        colz = [w for w in linfty.all_words(B.space, min(word_max, 4))
                if not linfty.coleibniz_residual(B, w, word_max).is_zero()]
        details = [{"gen_jacobi_witnesses": sorted(map(list, gj_bad)),
                    "shifted_witnesses": sorted(map(list, l1_bad)),
                    "square_zero_witnesses": sorted(map(list, qq_bad)),
                    "coleibniz_failures": sorted(map(list, colz))}]
        if colz:
            return "fail", f"coLeibniz fails on {colz[0]}", details
        if gj_bad == l1_bad == qq_bad:
            verdict = "holds" if not gj_bad else f"fails coherently at {sorted(gj_bad)[0]}"
            return "pass", f"three formulations agree ({verdict})", details
        return "fail", "formulations disagree", details

    def check_coderivation(self, d, idx):
        A = self.lookup(d.args[0], "linfty")
        word_max = d.options.get("word_max", self.word_max)
        B = linfty.decalage_shift(A)
        qq = linfty.check_square_zero(B, word_max)
        colz = [w for w in linfty.all_words(B.space, min(word_max, 4))
                if not linfty.coleibniz_residual(B, w, word_max).is_zero()]
        if qq:
            w, r = qq[0]
            return "fail", f"Q(Q({'&'.join(w)})) = {r}", []
        if colz:
            return "fail", f"coLeibniz fails on {colz[0]}", []
        return "pass", f"Q^2 = 0 and coLeibniz hold on words <= {word_max}", []

    def check_strict_morphism(self, d, idx):
        A1 = self.lookup(d.args[0], "linfty")
        A2 = self.lookup(d.args[1], "linfty")
        table = {}
        for lab, combo in d.args[2].items():
            table[lab] = GradedElement(A2.space, combo)
        for lab in A1.space.labels:
            table.setdefault(lab, GradedElement.zero(A2.space))
        k_max = d.options.get("max_arity", self.max_arity)
        rows = linfty.check_strict_morphism(table, A1, A2, k_max)
        bad = [r for r in rows if r.residual_nonzero]
        details = [r.as_json() for r in rows]
        if bad:
            return "fail", f"residual at {bad[0].tuple}: {bad[0].residual}", details
        return "pass", "strict morphism conditions hold", details

    def check_liealg_morphism(self, d, idx):
        algebra = self.lookup(d.args[0], "liealg")
        A = self.lookup(d.args[1], "linfty")
        degrees = {d_ for _, d_ in A.space.basis}
        n = 1 - min(degrees)
        f_maps = {}
        for m, table in d.args[2].items():
            f_maps[m] = {tup: GradedElement(A.space, combo)
                         for tup, combo in table.items()}
        rows = linfty.check_liealg_morphism(f_maps, algebra, A, n)
        bad = [r for r in rows if r.residual_nonzero]
        details = [r.as_json() for r in rows]
        if bad:
            return "fail", f"residual at {bad[0].tuple}: {bad[0].residual}", details
        return "pass", f"morphism conditions hold up to arity {n + 1}", details

    def check_action(self, d, idx):
        raw = self.lookup(d.args[0], "action")
        act = self.build_action(raw)
        return "pass", f"{act.convention} action with Hamiltonian generators", []

    def check_moment(self, d, idx):
        raw = self.lookup(d.args[0], "moment")
        F = self.build_moment(raw)
        audit = d.options.get("sign_audit", self.sign_audit)
        rows, signs = moment.check_moment(F, sign_audit=audit)
        details = [r.as_json() for r in rows]
        if signs:
            details.append({"component_signs": {str(k): v for k, v in signs.items()}})
        bad = [r for r in rows if r.residual_nonzero]
        if bad:
            r = bad[0]
            return "fail", (f"condition {r.condition!r} at k={r.k}, "
                            f"tuple {r.tuple}: {print_form(r.residual)}"), details
        note = f" (component signs {signs})" if signs else ""
        return "pass", f"moment conditions hold{note}", details

    def check_product(self, d, idx):
        Q = self.lookup(d.args[0], "product")
        count = d.options.get("samples", 20)
        rng = self.rng_for(idx)
        defect_signs = set()
        for _ in range(count):
            fa = exterior.random_form(Q.factor_a.chart, Q.factor_a.n - 1, rng)
            fb = exterior.random_form(Q.factor_b.chart, Q.factor_b.n - 1, rng)
            moment.lift_hamiltonian(Q, fa, fb)
            ga = exterior.random_form(Q.factor_a.chart, Q.factor_a.n - 1, rng)
            gb = exterior.random_form(Q.factor_b.chart, Q.factor_b.n - 1, rng)
            _, s = moment.h_omega_defect(Q, fa, fb, ga, gb)
            defect_signs.add(s)
            Xa = plectic.hamiltonian_vf(Q.factor_a, fa)
            Xb = plectic.hamiltonian_vf(Q.factor_b, fb)
            Ya = plectic.hamiltonian_vf(Q.factor_a, ga)
            Yb = plectic.hamiltonian_vf(Q.factor_b, gb)
            lhs = moment.h_x(Q, exterior.vf_bracket(Xa, Ya),
                             exterior.vf_bracket(Xb, Yb))
            rhs = exterior.vf_bracket(moment.h_x(Q, Xa, Xb), moment.h_x(Q, Ya, Yb))
            if lhs != rhs:
                return "fail", "h_X does not preserve the bracket", []
        if len(defect_signs) > 1:
            return "fail", "defect formula sign is not globally consistent", []
        sign = defect_signs.pop() if defect_signs else 1
        details = [{"samples": count, "defect_sign": sign}]
        return "pass", (f"lift identity, defect formula (sign {sign:+d}) and "
                        f"bracket preservation on {count} samples"), details

    def check_product_moment(self, d, idx):
        raw_a = self.lookup(d.args[0], "moment")
        raw_b = self.lookup(d.args[1], "moment")
        F_a = self.build_moment(raw_a)
        F_b = self.build_moment(raw_b)
        for nm, F in ((d.args[0], F_a), (d.args[1], F_b)):
            rows, _ = moment.check_moment(F)
            if any(r.residual_nonzero for r in rows):
                raise ValueError(f"factor moment {nm!r} fails its own conditions")
        Q = moment.product_plectic(F_a.action.manifold, F_b.action.manifold)
        FP = moment.product_moment(Q, F_a, F_b)
        audit = d.options.get("sign_audit", self.sign_audit)
        rows, signs = moment.check_moment(FP, sign_audit=audit)
        details = [r.as_json() for r in rows]
        details.append({"cs_check": {
            "c_a_1_0": str(moment.cs_a(1, 1, F_a.action.manifold.n)),
            "c_b_0_1": str(moment.cs_b(1, 0, F_a.action.manifold.n)),
            "c_a_1_1": str(moment.cs_a(2, 1, F_a.action.manifold.n)),
            "c_b_1_1": str(moment.cs_b(2, 1, F_a.action.manifold.n))}})
        if signs:
            details.append({"component_signs": {str(k): v for k, v in signs.items()}})
        bad = [r for r in rows if r.residual_nonzero]
        if bad:
            r = bad[0]
            return "fail", (f"condition {r.condition!r} at k={r.k}, "
                            f"tuple {r.tuple}"), details
        note = f" (component signs {signs})" if signs else ""
        return "pass", f"product moment map verified{note}", details

    def check_diagonal(self, d, idx):
        raw_a = self.lookup(d.args[0], "moment")
        raw_b = self.lookup(d.args[1], "moment")
        F_a = self.build_moment(raw_a)
        F_b = self.build_moment(raw_b)
        Q = moment.product_plectic(F_a.action.manifold, F_b.action.manifold)
        FP = moment.product_moment(Q, F_a, F_b)
        FD, P2 = moment.restrict_to_diagonal(FP, Q)
        audit = d.options.get("sign_audit", self.sign_audit)
        rows, signs = moment.check_moment(FD, sign_audit=audit)
        details = [r.as_json() for r in rows]
        if signs:
            details.append({"component_signs": {str(k): v for k, v in signs.items()}})
        bad = [r for r in rows if r.residual_nonzero]
        if bad:
            r = bad[0]
            return "fail", (f"condition {r.condition!r} at k={r.k}, "
                            f"tuple {r.tuple}"), details
        return "pass", (f"diagonal moment map on the squared structure "
                        f"(n = {P2.n}) verified"), details


def run(doc: Document, seed: int = 0, max_arity: int = 4, word_max: int = 4,
        sign_audit: bool = False, anti_action: bool = False,
        emit: Optional[Callable[[ReportRow], None]] = None) -> Report:
    return Runner(doc, seed, max_arity, word_max, sign_audit,
                  anti_action).run(emit)


def report_json(report: Report, timings: bool = False) -> str:
    return json.dumps(report.as_json(timings), indent=2) + "\n"
