"""Tokenizer and recursive-descent parser for the model language.

    model NAME {
        x ~ Normal(0, 1)          # draw
        y = x^2 + 3*recip(x)      # deterministic binding
        observe y
        query y
    }

Expressions support ``+ - * /``, ``^`` with a constant exponent, unary minus,
``exp log abs recip sqrt``, ``dens_prod(a, b)``, ``lipschitz(L[, alpha]){e1, ...}``
and ``iid(n, expr)``.  Distribution calls may appear inline as anonymous draws.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from ..catalog import family
from ..errors import (ArityError, DSLSyntaxError, LogNormalTail, UnknownDistribution,
                      UnknownFunction, UnsupportedFamily)

__all__ = ["parse", "Model", "Draw", "Assign", "Observe", "Query", "Num", "Var",
           "BinOp", "Neg", "Pow", "Call", "DistCall", "Lipschitz", "Iid", "FUNCTIONS"]

FUNCTIONS = {"exp": 1, "log": 1, "abs": 1, "recip": 1, "sqrt": 1, "dens_prod": 2}
KEYWORDS = {"model", "observe", "query", "lipschitz", "iid"}


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True)
class Num:
    value: float
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = field(compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]
    span: Span = field(compare=False)


@dataclass(frozen=True)
class DistCall:
    dist: str
    args: Tuple["Expr", ...]
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Lipschitz:
    L: "Expr"
    alpha: Optional["Expr"]
    args: Tuple["Expr", ...]
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Iid:
    count: "Expr"
    body: "Expr"
    span: Span = field(compare=False)


Expr = Union[Num, Var, BinOp, Neg, Pow, Call, DistCall, Lipschitz, Iid]


@dataclass(frozen=True)
class Draw:
    name: str
    dist: DistCall
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Observe:
    name: str
    span: Span = field(compare=False)


@dataclass(frozen=True)
class Query:
    name: str
    span: Span = field(compare=False)


Stmt = Union[Draw, Assign, Observe, Query]


@dataclass(frozen=True)
class Model:
    name: str
    body: Tuple[Stmt, ...]
    span: Span = field(compare=False)


# ---------------------------------------------------------------------------
# tokens

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[~=+\-*/^(){},;])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str   # num, ident, op, eof
    text: str
    span: Span


def tokenize(src: str) -> List[Token]:
    toks: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        span = Span(line, pos - line_start + 1)
        if m is None:
            raise DSLSyntaxError(f"unexpected character {src[pos]!r}", span.line, span.col)
        kind, text = m.lastgroup, m.group()
        if kind != "ws":
            toks.append(Token(kind, text, span))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return toks


# ---------------------------------------------------------------------------
# parser

def _is_dist(name: str) -> bool:
    try:
        family(name)
        return True
    except LogNormalTail:
        return True     # rejected with its position during lowering
    except UnsupportedFamily:
        return False


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None, cls=DSLSyntaxError):
        tok = tok or self.tok
        return cls(msg, tok.span.line, tok.span.col)

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at(self, text) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def expect(self, text) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        return self.next()

    def ident(self, what="identifier") -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        return self.next()

    # model := "model" ident "{" stmt* "}"
    def model(self) -> Model:
        if not self.at("model"):
            # bare statement list: an anonymous model
            start, body = self.tok, []
            while self.tok.kind != "eof":
                body.append(self.stmt())
                while self.at(";"):
                    self.next()
            return Model("main", tuple(body), start.span)
        start = self.expect("model")
        name = self.ident("model name").text
        self.expect("{")
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated model block: missing '}'")
            body.append(self.stmt())
            while self.at(";"):
                self.next()
        self.expect("}")
        if self.tok.kind != "eof":
            raise self.error("only one model block is allowed")
        return Model(name, tuple(body), start.span)

    def stmt(self) -> Stmt:
        t = self.tok
        if t.kind == "ident" and t.text in ("observe", "query"):
            self.next()
            name = self.ident("variable name").text
            return (Observe if t.text == "observe" else Query)(name, t.span)
        name = self.ident("statement")
        if self.at("~"):
            self.next()
            dt = self.ident("distribution name")
            if not self.at("("):
                raise self.error("expected '(' after distribution name")
            return Draw(name.text, self.dist_call(dt), name.span)
        if self.at("="):
            self.next()
            return Assign(name.text, self.expr(), name.span)
        raise self.error(f"expected '~' or '=' after {name.text!r}")

    def dist_call(self, name_tok: Token) -> DistCall:
        try:
            fam = family(name_tok.text)
        except LogNormalTail:
            fam = None
        except UnsupportedFamily:
            raise self.error(f"unknown distribution {name_tok.text!r}", name_tok,
                             UnknownDistribution) from None
        args = self.arglist()
        if fam is not None and len(args) != len(fam.params):
            raise self.error(f"{name_tok.text} takes {len(fam.params)} argument(s), "
                             f"got {len(args)}", name_tok, ArityError)
        return DistCall(name_tok.text, tuple(args), name_tok.span)

    def arglist(self) -> List[Expr]:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expr())
            while self.at(","):
                self.next()
                args.append(self.expr())
        self.expect(")")
        return args

    def expr(self) -> Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.next()
            left = BinOp(op.text, left, self.term(), op.span)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.at("*") or self.at("/"):
            op = self.next()
            left = BinOp(op.text, left, self.unary(), op.span)
        return left

    def unary(self) -> Expr:
        if self.at("-"):
            t = self.next()
            return Neg(self.unary(), t.span)
        if self.at("+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.at("^"):
            t = self.next()
            expo = self.unary()   # right-associative; binds tighter than unary minus on the left
            bad = _stochastic_leaf(expo)
            if bad is not None:
                raise DSLSyntaxError("exponents must be constant expressions; "
                                     f"{bad} is not", t.span.line, t.span.col)
            return Pow(base, expo, t.span)
        return base

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.next()
            return Num(float(t.text), t.span)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "ident":
            raise self.error(f"unexpected {t.text or 'end of input'!r}")
        if t.text == "lipschitz":
            return self.lipschitz()
        if t.text == "iid":
            self.next()
            self.expect("(")
            n = self.expr()
            self.expect(",")
            body = self.expr()
            self.expect(")")
            return Iid(n, body, t.span)
        if t.text in KEYWORDS:
            raise self.error(f"unexpected keyword {t.text!r}")
        self.next()
        if not self.at("("):
            return Var(t.text, t.span)
        if t.text in FUNCTIONS:
            args = self.arglist()
            if len(args) != FUNCTIONS[t.text]:
                raise self.error(f"{t.text} takes {FUNCTIONS[t.text]} argument(s), got {len(args)}",
                                 t, ArityError)
            return Call(t.text, tuple(args), t.span)
        if _is_dist(t.text):
            return self.dist_call(t)
        raise self.error(f"unknown function {t.text!r}", t, UnknownFunction)

    def lipschitz(self) -> Lipschitz:
        t = self.next()
        self.expect("(")
        L = self.expr()
        alpha = None
        if self.at(","):
            self.next()
            alpha = self.expr()
        self.expect(")")
        self.expect("{")
        args = [self.expr()]
        while self.at(","):
            self.next()
            args.append(self.expr())
        self.expect("}")
        return Lipschitz(L, alpha, tuple(args), t.span)


def _stochastic_leaf(e: Expr) -> Optional[str]:
    """Name of the first variable or draw inside ``e``, if any."""
    if isinstance(e, Var):
        return repr(e.name)
    if isinstance(e, (DistCall, Iid, Lipschitz)):
        return "a random quantity"
    for child in _children(e):
        r = _stochastic_leaf(child)
        if r is not None:
            return r
    return None


def _children(e: Expr):
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, Neg):
        return (e.operand,)
    if isinstance(e, Pow):
        return (e.base, e.exponent)
    if isinstance(e, Call):
        return e.args
    return ()


def parse(src: str) -> Model:
    """Parse model source text into an AST; errors carry line and column."""
    return _Parser(src).model()
