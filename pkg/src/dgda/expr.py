"""A small expression language for elements of a Dga.

    expr   := ['-'|'+'] term (('+'|'-') term)*
    term   := power ('*' power)*
    power  := atom ['^' INT]
    atom   := NUMBER ['/' NUMBER] | NAME ['[' INT (',' INT)* ']'] | '{' LABEL '}' [deco] | '(' expr ')'

NAME is a base variable or a generator label. Labels with spaces or '*'
(antifields such as phi*) are written in braces: {phi*}, {s^-1 I_2}.
A decoration [a_1,..,a_p] applies d^a to a generator (a jet coordinate for a
field).
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .coeff_rings import Poly
from .dga_core import AlgElem, Dga
from .graded_modules import GenId


class ExprError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_']*)|\{([^{}]*)\}|(.))")


def _tokenize(text: str) -> List[Tuple[str, str]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        pos = m.end()
        num, name, braced, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        elif braced is not None:
            out.append(("label", braced.strip()))
        elif op is not None and not op.isspace():
            if op not in "+-*/^()[],":
                raise ExprError(f"unexpected character {op!r} in {text!r}")
            out.append(("op", op))
    out.append(("end", ""))
    return out


class _Parser:
    def __init__(self, text: str, X: Dga, labels: Dict[str, GenId]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.X = X
        self.p = X.nvars
        self.labels = labels
        self.vars = {v: k for k, v in enumerate(X.var_names)} if X.nvars else {}

    def peek(self) -> Tuple[str, str]:
        return self.toks[self.i]

    def take(self) -> Tuple[str, str]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op: str) -> None:
        t = self.take()
        if t != ("op", op):
            raise ExprError(f"expected {op!r} in {self.text!r}, got {t[1] or 'end of input'!r}")

    def parse(self) -> AlgElem:
        e = self.expr()
        if self.peek()[0] != "end":
            raise ExprError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return e

    def expr(self) -> AlgElem:
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        out = self.term().scale(sign)
        while self.peek() in (("op", "+"), ("op", "-")):
            s = self.take()[1]
            t = self.term()
            out = out + t if s == "+" else out - t
        return out

    def term(self) -> AlgElem:
        out = self.power()
        while self.peek() == ("op", "*"):
            self.take()
            out = self.X.mul(out, self.power())
        return out

    def power(self) -> AlgElem:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ExprError(f"exponent must be a non-negative integer in {self.text!r}")
            out = AlgElem.one(self.p)
            for _ in range(int(val)):
                out = self.X.mul(out, base)
            return out
        return base

    def deco(self) -> Optional[tuple]:
        if self.peek() != ("op", "["):
            return None
        self.take()
        vals = []
        while True:
            kind, val = self.take()
            if kind != "num":
                raise ExprError(f"decorations are non-negative integers in {self.text!r}")
            vals.append(int(val))
            if self.peek() == ("op", ","):
                self.take()
                continue
            self.expect("]")
            break
        if len(vals) != self.p:
            raise ExprError(f"decoration {vals} needs {self.p} entries")
        return tuple(vals)

    def generator(self, label: str) -> AlgElem:
        g = self.labels.get(label)
        if g is None:
            raise ExprError(f"unknown name {label!r} in {self.text!r}")
        return self.X.gen(g, self.deco())

    def atom(self) -> AlgElem:
        kind, val = self.take()
        if kind == "num":
            c = Fraction(int(val))
            if self.peek() == ("op", "/"):
                self.take()
                k2, v2 = self.take()
                if k2 != "num" or int(v2) == 0:
                    raise ExprError(f"bad fraction in {self.text!r}")
                c = c / int(v2)
            return AlgElem.const(c, self.p)
        if kind == "name":
            if val in self.labels:
                return self.generator(val)
            if val in self.vars:
                return AlgElem.poly(Poly.var(self.vars[val], self.p))
            raise ExprError(f"unknown name {val!r} in {self.text!r}")
        if kind == "label":
            return self.generator(val)
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        raise ExprError(f"unexpected {val or 'end of input'!r} in {self.text!r}")


def label_map(X: Dga) -> Dict[str, GenId]:
    out: Dict[str, GenId] = {}
    for g in X.gens:
        lab = g.label()
        if lab in out:
            raise ExprError(f"generator label {lab!r} is not unique")
        out[lab] = g
    return out


def parse_elem(text, X: Dga, labels: Dict[str, GenId] | None = None) -> AlgElem:
    if isinstance(text, (int, Fraction)):
        return AlgElem.const(text, X.nvars)
    if not isinstance(text, str):
        raise ExprError(f"expected an expression string, got {text!r}")
    return X.reduce(_Parser(text, X, labels if labels is not None else label_map(X)).parse())
