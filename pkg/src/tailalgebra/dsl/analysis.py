"""Breadth-first tail inference over a program graph.

Nodes are released once all their parents are done (Kahn's algorithm), so
every node is visited exactly once and the pass is linear in the graph size.
An error at one node is recorded and marks its descendants as unknown instead
of aborting the whole report.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from .. import tails as T
from ..catalog import class_of
from ..errors import TailAlgebraError
from ..tails import Flag, TailClass
from .graph import ProgramGraph

__all__ = ["Entry", "TailReport", "DependenceWarning", "analyze", "check_independence",
           "op_class"]


@dataclass(frozen=True)
class DependenceWarning:
    node: int
    shared: Tuple[int, ...]          # draw node ids
    names: Tuple[str, ...]

    def __str__(self):
        return f"node {self.node}: operands share {{{', '.join(self.names)}}}"


@dataclass(frozen=True)
class Entry:
    id: int
    expr: str
    name: Optional[str]
    cls: Optional[TailClass]          # None: unknown
    warnings: Tuple[str, ...] = ()
    error: Optional[str] = None

    def to_json(self) -> dict:
        d = {"id": self.id, "expr": self.expr,
             "class": "unknown" if self.cls is None else T.to_json(self.cls),
             "warnings": list(self.warnings)}
        if self.name is not None:
            d["name"] = self.name
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass
class TailReport:
    model: str
    entries: Dict[int, Entry]
    visits: int = 0
    dependence: List[DependenceWarning] = field(default_factory=list)

    def __getitem__(self, node: int) -> Entry:
        return self.entries[node]

    def cls(self, node: int) -> Optional[TailClass]:
        return self.entries[node].cls

    @property
    def status(self) -> int:
        """0 clean, 2 warnings present, 1 errors."""
        if any(e.error for e in self.entries.values()):
            return 1
        if any(e.warnings for e in self.entries.values()):
            return 2
        return 0

    def to_json(self) -> dict:
        return {"model": self.model,
                "nodes": [self.entries[k].to_json() for k in sorted(self.entries)]}

    def same_classes(self, other: "TailReport") -> bool:
        return ({k: (e.cls, e.warnings, e.error) for k, e in self.entries.items()}
                == {k: (e.cls, e.warnings, e.error) for k, e in other.entries.items()})


def check_independence(g: ProgramGraph) -> List[DependenceWarning]:
    """Binary sums, products and quotients whose operands share random inputs.

    For ``iid`` nodes, a body that reads outer random variables makes the
    copies dependent and is reported the same way.
    """
    out = []
    for n in g.nodes:
        if n.kind != "op":
            continue
        if n.op in ("add", "mul", "div"):
            a, b = n.parents
            shared = g.ancestors[a] & g.ancestors[b]
        elif n.op == "iid":
            body_mask = g.ancestors[n.parents[0]]
            inner = 0
            for d in g.draws_in(body_mask):
                if _within(g, d, n.id):
                    inner |= 1 << d
            shared = body_mask & ~inner
        else:
            continue
        if shared:
            ids = tuple(g.draws_in(shared))
            out.append(DependenceWarning(n.id, ids, tuple(g.display_name(i) for i in ids)))
    return out


def _within(g: ProgramGraph, i: int, scope: int) -> bool:
    s = g.nodes[i].scope
    while s is not None:
        if s == scope:
            return True
        s = g.nodes[s].scope
    return False


def op_class(op: str, params, parents: List[TailClass], flags: set) -> TailClass:
    """Apply the algebra rule for one opcode."""
    if op == "add":
        return T.add(*parents)
    if op in ("neg", "abs", "shift"):
        return T.translate(parents[0])
    if op == "scale":
        return T.scalar_mul(params[0], parents[0])
    if op == "mul":
        return T.multiply(*parents, flags=flags)
    if op == "div":
        return T.divide(*parents, flags=flags)
    if op == "pow":
        return T.power(parents[0], params[0])
    if op == "recip":
        return T.reciprocal(parents[0], flags)
    if op == "exp":
        return T.exp_class(parents[0], flags)
    if op == "log":
        return T.log_class(parents[0], flags)
    if op == "lipschitz":
        return T.lipschitz(params[0], params[1], parents, flags)
    if op == "iid":
        return T.add_n(parents[0], int(params[0]))
    if op == "dens_prod":
        return T.density_product(*parents, flags=flags)
    raise ValueError(f"unknown opcode {op!r}")


def analyze(g: ProgramGraph, *, overrides: Optional[Mapping[int, TailClass]] = None,
            rng: Optional[random.Random] = None) -> TailReport:
    """Assign a tail class to every non-constant node.

    ``overrides`` pins the class of given nodes (e.g. parameters held fixed).
    ``rng`` randomizes the order in which ready nodes are processed; the
    result never depends on it.
    """
    overrides = dict(overrides or {})
    dep = check_independence(g)
    dep_nodes = {w.node: w for w in dep}
    indeg = [len(set(n.parents)) for n in g.nodes]
    ready = [n.id for n in g.nodes if indeg[n.id] == 0]
    queue = deque(ready)
    classes: Dict[int, Optional[TailClass]] = {}
    flags_of: Dict[int, frozenset] = {}
    entries: Dict[int, Entry] = {}
    visits = 0
    while queue:
        if rng is not None:
            k = rng.randrange(len(queue))
            queue.rotate(-k)
        i = queue.popleft()
        visits += 1
        n = g.nodes[i]
        flags: set = set()
        for p in set(n.parents):
            if Flag.DEPENDENCE in flags_of[p]:
                flags.add(Flag.DEPENDENCE)
        if i in dep_nodes:
            flags.add(Flag.DEPENDENCE)
        cls, error = None, None
        if i in overrides:
            cls = T.canonicalize(overrides[i])
        elif n.kind == "const":
            cls = T.SUPER_LIGHT
        elif n.kind == "draw":
            try:
                cls = class_of(n.dist)
            except TailAlgebraError as ex:
                error = f"{type(ex).__name__}: {ex}"
        else:
            bad = [p for p in n.parents if classes[p] is None]
            if bad:
                error = f"depends on unknown node {bad[0]}"
            else:
                try:
                    cls = op_class(n.op, n.params, [classes[p] for p in n.parents], flags)
                except (TailAlgebraError, ValueError) as ex:
                    error = f"{type(ex).__name__}: {ex}"
        classes[i] = cls
        flags_of[i] = frozenset(flags)
        if n.kind != "const":
            entries[i] = Entry(i, g.label(i), n.name if g.names.get(n.name) == i else None,
                               cls, tuple(sorted(str(f) for f in flags)), error)
        for c in g.children(i):
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if visits != len(g.nodes):
        raise AssertionError(f"visited {visits} of {len(g.nodes)} nodes")
    return TailReport(g.model, entries, visits, dep)
