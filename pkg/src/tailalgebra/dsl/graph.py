"""Lowering of the AST to an SSA program graph.

Lowering folds constants (so no operation ever has only constant inputs),
shares structurally identical operations, and drops everything that no
observed or queried variable depends on.  ``iid(n, body)`` becomes a single
node whose body is kept once and re-evaluated per copy when sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple, Union

from ..catalog import AtomicDistribution
from ..errors import (CycleError, DSLError, InvalidClass, LogNormalTail,
                      UndefinedVariable)
from . import parser as P

__all__ = ["Node", "ProgramGraph", "lower", "to_source", "compile_model", "OPS"]

# opcode -> arity (None: variadic)
OPS = {"add": 2, "mul": 2, "div": 2, "dens_prod": 2, "pow": 1, "recip": 1, "exp": 1,
       "log": 1, "abs": 1, "neg": 1, "shift": 1, "scale": 1, "iid": 1, "lipschitz": None}


@dataclass(frozen=True)
class Node:
    id: int
    kind: str                                   # "draw" | "op" | "const"
    op: Optional[str] = None
    parents: Tuple[int, ...] = ()
    params: Tuple[float, ...] = ()
    dist: Optional[AtomicDistribution] = None
    value: Optional[float] = None
    name: Optional[str] = None
    scope: Optional[int] = None                 # enclosing iid node, if any
    observed: bool = False


@dataclass(frozen=True, eq=False)
class ProgramGraph:
    model: str
    nodes: Tuple[Node, ...]
    names: Dict[str, int]
    queries: Tuple[int, ...]
    observed: Tuple[int, ...]
    ancestors: Tuple[int, ...] = field(repr=False)   # bitmask of draw ids per node
    _children: Tuple[Tuple[int, ...], ...] = field(repr=False, default=())

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, i: int) -> Node:
        return self.nodes[i]

    def children(self, i: int) -> Tuple[int, ...]:
        return self._children[i]

    def node_of(self, name: str) -> int:
        try:
            return self.names[name]
        except KeyError:
            raise UndefinedVariable(f"no live variable named {name!r}") from None

    def draws_in(self, mask: int) -> List[int]:
        out, i = [], 0
        while mask:
            if mask & 1:
                out.append(i)
            mask >>= 1
            i += 1
        return out

    def label(self, i: int) -> str:
        """Printable expression for node ``i`` (named parents shown by name)."""
        return _Printer(self, use_temps=False).define(i)

    def display_name(self, i: int) -> str:
        n = self.nodes[i]
        if n.name is not None and self.names.get(n.name) == i:
            return n.name
        return self.label(i)

    def structure(self):
        """Name-free structural signature, for isomorphism checks."""
        return tuple((n.kind, n.op, n.parents, n.params, n.dist, n.value, n.scope, n.observed)
                     for n in self.nodes), self.queries, self.observed


# ---------------------------------------------------------------------------
# lowering

@dataclass(frozen=True)
class _K:
    value: float


_Val = Union[int, _K]


def _num(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


class _Lowerer:
    def __init__(self):
        self.nodes: List[dict] = []
        self.cse: Dict[tuple, int] = {}
        self.env: Dict[str, _Val] = {}
        self.scope: Optional[int] = None
        self._scope_tokens = 0

    def err(self, msg, span, cls=DSLError):
        return cls(msg, span.line, span.col)

    def new(self, **kw) -> int:
        kw.setdefault("scope", self.scope)
        kw["id"] = len(self.nodes)
        self.nodes.append(kw)
        return kw["id"]

    def op(self, op: str, parents, params=()) -> int:
        key = (op, tuple(parents), tuple(params), self.scope)
        if key not in self.cse:
            self.cse[key] = self.new(kind="op", op=op, parents=tuple(parents), params=tuple(params))
        return self.cse[key]

    # -- folding helpers ---------------------------------------------------------
    def add(self, a: _Val, b: _Val) -> _Val:
        if isinstance(a, _K) and isinstance(b, _K):
            return _K(a.value + b.value)
        if isinstance(a, _K):
            a, b = b, a
        if isinstance(b, _K):
            return a if b.value == 0 else self.op("shift", (a,), (b.value,))
        return self.op("add", sorted((a, b)))

    def neg(self, a: _Val) -> _Val:
        if isinstance(a, _K):
            return _K(-a.value)
        n = self.nodes[a]
        if n.get("op") == "neg":
            return n["parents"][0]
        return self.op("neg", (a,))

    def scale(self, c: float, a: int) -> _Val:
        if c == 0:
            return _K(0.0)
        if c == 1:
            return a
        return self.op("scale", (a,), (c,))

    def mul(self, a: _Val, b: _Val) -> _Val:
        if isinstance(a, _K) and isinstance(b, _K):
            return _K(a.value * b.value)
        if isinstance(a, _K):
            a, b = b, a
        if isinstance(b, _K):
            return self.scale(b.value, a)
        return self.op("mul", sorted((a, b)))

    def div(self, a: _Val, b: _Val, span) -> _Val:
        if isinstance(b, _K):
            if b.value == 0:
                raise self.err("division by the constant zero", span)
            if isinstance(a, _K):
                return _K(a.value / b.value)
            return self.scale(1 / b.value, a)
        if isinstance(a, _K):
            if a.value == 0:
                return _K(0.0)
            return self.scale(a.value, self.op("recip", (b,)))
        return self.op("div", (a, b))

    def pow(self, a: _Val, beta: float, span) -> _Val:
        if isinstance(a, _K):
            try:
                v = a.value ** beta
            except ZeroDivisionError:
                raise self.err("zero raised to a negative power", span) from None
            if isinstance(v, complex) or not math.isfinite(v):
                raise self.err(f"constant power {a.value}^{beta} is not a finite real", span)
            return _K(v)
        if beta == 1:
            return a
        if beta == 0:
            return _K(1.0)
        return self.op("pow", (a,), (beta,))

    def unary(self, f: str, a: _Val, span) -> _Val:
        if isinstance(a, _K):
            x = a.value
            try:
                return _K({"exp": math.exp, "log": lambda v: math.log(abs(v)), "abs": abs,
                           "recip": lambda v: 1 / v, "sqrt": lambda v: abs(v) ** 0.5}[f](x))
            except (ValueError, ZeroDivisionError, OverflowError):
                raise self.err(f"cannot evaluate {f}({x}) on a constant", span) from None
        if f == "sqrt":
            return self.pow(a, 0.5, span)
        return self.op(f, (a,))

    # -- expressions --------------------------------------------------------------
    def const(self, e, what, span) -> float:
        v = self.expr(e)
        if not isinstance(v, _K):
            raise self.err(f"{what} must be a constant expression", span)
        return v.value

    def expr(self, e) -> _Val:
        if isinstance(e, P.Num):
            return _K(e.value)
        if isinstance(e, P.Var):
            if e.name not in self.env:
                if e.name == getattr(self, "_defining", None):
                    raise self.err(f"{e.name!r} refers to itself", e.span, CycleError)
                raise self.err(f"undefined variable {e.name!r}", e.span, UndefinedVariable)
            return self.env[e.name]
        if isinstance(e, P.BinOp):
            a, b = self.expr(e.left), self.expr(e.right)
            if e.op == "+":
                return self.add(a, b)
            if e.op == "-":
                return self.add(a, self.neg(b))
            if e.op == "*":
                return self.mul(a, b)
            return self.div(a, b, e.span)
        if isinstance(e, P.Neg):
            return self.neg(self.expr(e.operand))
        if isinstance(e, P.Pow):
            beta = self.const(e.exponent, "exponent", e.span)
            return self.pow(self.expr(e.base), beta, e.span)
        if isinstance(e, P.Call):
            args = [self.expr(a) for a in e.args]
            if e.func == "dens_prod":
                a, b = args
                if isinstance(a, _K) and isinstance(b, _K):
                    raise self.err("dens_prod needs at least one random operand", e.span)
                if isinstance(a, _K):
                    return b
                if isinstance(b, _K):
                    return a
                return self.op("dens_prod", sorted((a, b)))
            return self.unary(e.func, args[0], e.span)
        if isinstance(e, P.DistCall):
            return self.new(kind="draw", dist=self.dist(e))
        if isinstance(e, P.Lipschitz):
            L = self.const(e.L, "Lipschitz constant", e.span)
            alpha = 1.0 if e.alpha is None else self.const(e.alpha, "Hoelder exponent", e.span)
            if not L > 0 or not 0 < alpha <= 1:
                raise self.err("lipschitz needs L > 0 and 0 < alpha <= 1", e.span)
            vals = [self.expr(a) for a in e.args]
            nodes = [v for v in vals if not isinstance(v, _K)]
            consts = [v.value for v in vals if isinstance(v, _K)]
            if not nodes:
                return _K(L * max(abs(c) ** alpha for c in consts))
            return self.op("lipschitz", nodes, (L, alpha, *consts))
        if isinstance(e, P.Iid):
            n = self.const(e.count, "iid copy count", e.span)
            if n < 1 or not float(n).is_integer():
                raise self.err(f"iid copy count must be a positive integer, got {_num(n)}", e.span)
            outer = self.scope
            self._scope_tokens += 1
            token = -self._scope_tokens
            self.scope = token
            try:
                body = self.expr(e.body)
            finally:
                self.scope = outer
            if isinstance(body, _K):
                return _K(n * body.value)
            if n == 1:
                self._rescope(token, outer)
                return body
            iid = self.op("iid", (body,), (float(n),))
            self._rescope(token, iid)
            return iid
        raise TypeError(f"unexpected AST node {e!r}")

    def _rescope(self, token, target):
        for nd in self.nodes:
            if nd["scope"] == token:
                nd["scope"] = target
        for key in [k for k in self.cse if k[3] == token]:
            self.cse[key[:3] + (target,)] = self.cse.pop(key)

    def dist(self, d: P.DistCall) -> AtomicDistribution:
        params = tuple(self.const(a, "distribution parameter", d.span) for a in d.args)
        try:
            return AtomicDistribution(d.dist, params)
        except InvalidClass as ex:
            raise self.err(str(ex), d.span) from None
        except LogNormalTail as ex:
            # keep the distinct type, but point at the offending call
            ex.line, ex.col = d.span.line, d.span.col
            raise

    # -- statements ---------------------------------------------------------------
    def model(self, m: P.Model) -> ProgramGraph:
        queries, observed = [], []
        for st in m.body:
            if isinstance(st, P.Draw):
                self.env[st.name] = self.new(kind="draw", dist=self.dist(st.dist))
                self._name(st.name)
            elif isinstance(st, P.Assign):
                self._defining = st.name
                try:
                    self.env[st.name] = self.expr(st.expr)
                finally:
                    self._defining = None
                self._name(st.name)
            else:
                if st.name not in self.env:
                    raise self.err(f"undefined variable {st.name!r}", st.span, UndefinedVariable)
                v = self.env[st.name]
                if isinstance(v, _K):
                    if isinstance(st, P.Observe):
                        raise self.err(f"cannot observe the constant {st.name!r}", st.span)
                    v = self.env[st.name] = self.new(kind="const", value=v.value, scope=None)
                    self._name(st.name)
                (observed if isinstance(st, P.Observe) else queries).append(v)
        for i in observed:
            self.nodes[i]["observed"] = True
        return self.finish(m.name, queries, observed)

    def _name(self, name):
        v = self.env[name]
        if not isinstance(v, _K) and self.nodes[v].get("name") is None:
            self.nodes[v]["name"] = name

    def finish(self, model, queries, observed) -> ProgramGraph:
        roots = list(dict.fromkeys(observed + queries))
        if not roots:
            roots = [v for v in self.env.values() if not isinstance(v, _K)]
        live = set()
        stack = list(roots)
        while stack:
            i = stack.pop()
            if i in live:
                continue
            live.add(i)
            stack.extend(self.nodes[i].get("parents", ()))
        order = sorted(live)
        remap = {old: new for new, old in enumerate(order)}
        nodes = []
        for old in order:
            nd = dict(self.nodes[old])
            nd["id"] = remap[old]
            nd["parents"] = tuple(remap[p] for p in nd.get("parents", ()))
            if nd["scope"] is not None:
                nd["scope"] = remap[nd["scope"]]
            nodes.append(Node(**nd))
        names = {k: remap[v] for k, v in self.env.items()
                 if not isinstance(v, _K) and v in remap}
        return build_graph(model, nodes, names,
                           tuple(dict.fromkeys(remap[q] for q in queries)),
                           tuple(dict.fromkeys(remap[o] for o in observed)))


def build_graph(model, nodes, names, queries, observed) -> ProgramGraph:
    anc, children = [], [[] for _ in nodes]
    for n in nodes:
        m = (1 << n.id) if n.kind == "draw" else 0
        for p in n.parents:
            if p >= n.id:
                raise CycleError(f"node {n.id} depends on later node {p}")
            m |= anc[p]
            if not children[p] or children[p][-1] != n.id:
                children[p].append(n.id)
        anc.append(m)
    for n in nodes:
        if n.kind == "op":
            arity = OPS[n.op]
            if arity is not None and len(n.parents) != arity:
                raise DSLError(f"opcode {n.op} expects {arity} operand(s)")
    return ProgramGraph(model, tuple(nodes), dict(names), tuple(queries), tuple(observed),
                        tuple(anc), tuple(tuple(c) for c in children))


def lower(ast: P.Model) -> ProgramGraph:
    return _Lowerer().model(ast)


def compile_model(src: str) -> ProgramGraph:
    """parse + lower."""
    return lower(P.parse(src))


# ---------------------------------------------------------------------------
# printing

_INFIX = {"add": " + ", "mul": " * ", "div": " / "}


class _Printer:
    MAX_INLINE = 6

    def __init__(self, g: ProgramGraph, use_temps: bool):
        self.g = g
        self.use_temps = use_temps
        self.depth = 0
        self.temp = {}
        if not use_temps:
            return                      # labels never need temporaries; keep them O(1)
        taken = set(g.names)
        for n in g.nodes:
            if n.scope is None and n.kind != "const" and not self._named(n.id):
                t = f"_t{n.id}"
                while t in taken:
                    t = "_" + t
                taken.add(t)
                self.temp[n.id] = t

    def _named(self, i) -> bool:
        n = self.g.nodes[i]
        return n.name is not None and self.g.names.get(n.name) == i

    def ref(self, i: int) -> str:
        """How node ``i`` appears inside another expression."""
        n = self.g.nodes[i]
        if self._named(i):
            return n.name
        if n.kind == "const":
            return _num(n.value)
        if self.use_temps and n.scope is None:
            return self.temp[i]
        if not self.use_temps and self.depth >= self.MAX_INLINE:
            return f"%{i}"
        self.depth += 1
        try:
            return self.wrap(i)
        finally:
            self.depth -= 1

    def wrap(self, i: int) -> str:
        n = self.g.nodes[i]
        s = self.define(i)
        if n.kind == "draw" or (n.kind == "op" and n.op in ("exp", "log", "abs", "recip",
                                                           "dens_prod", "lipschitz", "iid")):
            return s
        return f"({s})"

    def define(self, i: int) -> str:
        n = self.g.nodes[i]
        if n.kind == "const":
            return _num(n.value)
        if n.kind == "draw":
            d = n.dist
            return f"{d.name}({', '.join(_num(p) for p in d.params)})"
        r = [self.ref(p) for p in n.parents]
        op = n.op
        if op in _INFIX:
            return _INFIX[op].join(r)
        if op == "neg":
            return f"-{r[0]}"
        if op == "shift":
            return f"{r[0]} + {_num(n.params[0])}"
        if op == "scale":
            return f"{_num(n.params[0])} * {r[0]}"
        if op == "pow":
            return f"{r[0]} ^ ({_num(n.params[0])})"
        if op in ("recip", "exp", "log", "abs"):
            return f"{op}({r[0]})"
        if op == "dens_prod":
            return f"dens_prod({r[0]}, {r[1]})"
        if op == "iid":
            return f"iid({_num(n.params[0])}, {self.define(n.parents[0])})"
        if op == "lipschitz":
            L, a, *consts = n.params
            args = r + [_num(c) for c in consts]
            return f"lipschitz({_num(L)}, {_num(a)}){{{', '.join(args)}}}"
        raise ValueError(f"unknown opcode {op!r}")


def to_source(g: ProgramGraph) -> str:
    """Model text that lowers back to an isomorphic graph."""
    pr = _Printer(g, use_temps=True)
    lines = [f"model {g.model} {{"]
    for n in g.nodes:
        if n.scope is not None or n.kind == "const":
            continue
        name = n.name if pr._named(n.id) else pr.temp[n.id]
        sep = "~" if n.kind == "draw" else "="
        lines.append(f"  {name} {sep} {pr.define(n.id)}")
    for n in g.nodes:
        if n.kind == "const" and pr._named(n.id):
            lines.insert(1, f"  {n.name} = {_num(n.value)}")
    for o in g.observed:
        lines.append(f"  observe {pr.ref(o)}")
    for q in g.queries:
        lines.append(f"  query {pr.ref(q)}")
    lines.append("}")
    return "\n".join(lines) + "\n"
