"""Text grammar for scalars and forms, used by golden files and the CLI.

A small recursive-descent parser.  Everything is an expression; scalars are
:class:`~hetnil.jets.ScalarExpr` and forms are :class:`~hetnil.forms.Form`.
``*`` between two forms is the wedge product.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' ['-'] INT)?
    atom    := NUMBER | NAME | 'exp(' [+-][INT] 'f)' | FUNC '(' expr ')' | '(' expr ')'

Names: parameters (``t``, ``s``, ``a_inst`` ...), jets ``f1``, ``f23``, ``f123``,
coframe monomials ``e12`` (invariant) and ``eb135`` (orthonormal), and the
macros ``kappa2``, ``tau2``, ``lam2`` (``|lambda|^2``).  Functions: ``d1``..``d4``
(coordinate derivatives of a scalar) and ``lap`` (flat Laplacian).
Division is allowed only by invertible scalars (monomials).
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

from .forms import INVARIANT, ORTHONORMAL, Form, sort_sign
from .jets import PARAMETERS, ScalarExpr, jet, kappa2, lambda_norm2, param, tau2

Value = Union[ScalarExpr, Form]

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<exp>exp\(\s*(?P<k>[+-]?\d*)\s*f\s*\))"
    r"|(?P<num>\d+(?:/\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)
_MACROS = {"kappa2": lambda: kappa2(), "tau2": lambda: tau2(), "lam2": lambda: lambda_norm2()}
_FUNCS = ("d1", "d2", "d3", "d4", "lap")


class GrammarError(ValueError):
    def __init__(self, message: str, pos: int, text: str):
        super().__init__(f"{message} at column {pos + 1}: {text[max(0, pos - 15):pos + 15]!r}")
        self.pos = pos


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GrammarError("unexpected character", pos, text)
        kind = m.lastgroup if m.lastgroup != "k" else "exp"
        if m.group("exp"):
            kind = "exp"
        out.append((kind, m.group(kind) if kind != "exp" else m.group("k"), m.start()))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


def _name_value(name: str) -> Value | None:
    if name in _MACROS:
        return _MACROS[name]()
    if name in PARAMETERS:
        return param(name)
    m = re.fullmatch(r"f([1-4]{1,3})", name)
    if m:
        return jet(*(int(c) for c in m.group(1)))
    m = re.fullmatch(r"(eb|e)([1-6]+)", name)
    if m:
        idx = tuple(int(c) for c in m.group(2))
        sign, srt = sort_sign(idx)
        basis = ORTHONORMAL if m.group(1) == "eb" else INVARIANT
        if sign == 0:
            return Form.zero(len(idx), basis)
        return Form.basis_form(*srt, basis=basis, coeff=sign)
    return None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value or kind
            raise GrammarError(f"expected {want!r}", tok[2], self.text)
        self.i += 1
        return tok

    def fail(self, msg):
        raise GrammarError(msg, self.peek()[2], self.text)

    def parse(self) -> Value:
        v = self.expr()
        if self.peek()[0] != "end":
            self.fail("trailing input")
        return v

    def expr(self) -> Value:
        v = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            w = self.term()
            v = self._add(v, w if op == "+" else -w)
        return v

    def _add(self, a: Value, b: Value) -> Value:
        if isinstance(a, Form) != isinstance(b, Form):
            if isinstance(a, ScalarExpr) and not a:
                return b
            if isinstance(b, ScalarExpr) and not b:
                return a
            self.fail("cannot add a scalar and a form")
        try:
            return a + b
        except ValueError as exc:
            self.fail(str(exc))

    def term(self) -> Value:
        v = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            w = self.unary()
            if op == "*":
                v = self._mul(v, w)
            else:
                if not isinstance(w, ScalarExpr) or not w.is_unit():
                    self.fail("division only by a non-zero monomial")
                v = self._mul(v, w.inverse())
        return v

    @staticmethod
    def _mul(a: Value, b: Value) -> Value:
        if isinstance(a, ScalarExpr) and isinstance(b, Form):
            return b * a
        return a * b

    def unary(self) -> Value:
        if self.peek() [0] == "op" and self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[0] == "op" and self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Value:
        v = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            neg = False
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                neg = True
            tok = self.take("num")
            if "/" in tok[1]:
                self.fail("integer exponent expected")
            n = int(tok[1]) * (-1 if neg else 1)
            if not isinstance(v, ScalarExpr):
                self.fail("powers apply to scalars only")
            if n < 0 and not v.is_unit():
                self.fail("negative power of a non-monomial")
            v = v ** n if n >= 0 else v.inverse() ** (-n)
        return v

    def atom(self) -> Value:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return ScalarExpr.const(Fraction(val))
        if kind == "exp":
            self.take()
            k = 1 if val in ("", "+") else -1 if val == "-" else int(val)
            return ScalarExpr.exp(k)
        if kind == "op" and val == "(":
            self.take()
            v = self.expr()
            self.take("op", ")")
            return v
        if kind == "name":
            self.take()
            if val in _FUNCS:
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                if not isinstance(arg, ScalarExpr):
                    raise GrammarError(f"{val} applies to scalars", pos, self.text)
                return arg.laplacian() if val == "lap" else arg.partial(int(val[1]))
            v = _name_value(val)
            if v is None:
                raise GrammarError(f"unknown symbol {val!r}", pos, self.text)
            return v
        self.fail("unexpected token")


def parse(text: str) -> Value:
    """Parse one expression."""
    return _Parser(text).parse()


def parse_sections(text: str) -> dict[str, Value]:
    """Parse a golden file: ``[key]`` headers each followed by one expression.

    Expressions may span several lines; ``#`` starts a comment.
    """
    sections: dict[str, list[str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if current in sections:
                raise ValueError(f"duplicate section [{current}] on line {lineno}")
            sections[current] = []
        elif current is None:
            raise ValueError(f"expression before any [section] on line {lineno}")
        else:
            sections[current].append(line)
    out = {}
    for key, lines in sections.items():
        try:
            out[key] = parse(" ".join(lines))
        except GrammarError as exc:
            raise GrammarError(f"[{key}] {exc}", exc.pos, " ".join(lines)) from None
    return out


__all__ = ["parse", "parse_sections", "GrammarError", "Value"]
