"""Tail class of a parameter's posterior by one backward pass per observation.

For an observation ``X = f(theta, Z)`` built from elementary operations, the
class of ``theta | X = x`` is obtained by running the inverse operations from
``X`` back to ``theta`` (the observed value itself is a constant), combining the
per-observation results with the prior through the product-of-densities rule,
and multiplying by the Jacobian factors of powers, reciprocals and products.

Each Jacobian factor is a power of the operation's *input*.  It is expressed
in terms of ``theta`` by tracking the exponent with which ``theta`` enters that
input along the chain (``theta**2`` after squaring, ``theta**-1`` after a
reciprocal, ...).  Since it is a polynomial factor it shifts the polynomial
exponent of the posterior class and leaves the decay scale and shape alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from . import tails as T
from .catalog import class_of
from .dsl.analysis import analyze
from .dsl.graph import ProgramGraph
from .errors import MultiplePaths, NonInvertiblePath, TailAlgebraError
from .tails import Flag, GenGamma, TailClass

__all__ = ["Correction", "PosteriorQuery", "PosteriorResult", "invert_chain",
           "correction_product", "posterior", "posterior_class", "times_power"]

_INVERTIBLE = {"add", "neg", "shift", "scale", "mul", "div", "pow", "recip", "exp", "log"}


@dataclass(frozen=True)
class Correction:
    node: int
    op: str
    exponent: float          # power of the operation's input
    pulled: float            # the same factor as a power of the parameter

    @property
    def cls(self) -> GenGamma:
        """The factor as a raw (uncanonicalized) class with rho = 0."""
        return GenGamma(self.exponent, 1.0, 0.0)

    def to_json(self) -> dict:
        return {"node": self.node, "op": self.op, "exponent": self.exponent,
                "parameter_exponent": self.pulled}


@dataclass(frozen=True)
class PosteriorQuery:
    graph: ProgramGraph
    param: Union[int, str]
    observed: Optional[Tuple[int, ...]] = None
    # random inputs integrated over; default: every unnamed draw
    latent: Optional[FrozenSet[Union[int, str]]] = None


@dataclass(frozen=True)
class PosteriorResult:
    param: int
    cls: TailClass
    prior: TailClass
    inverted: Tuple[TailClass, ...]
    corrections: Tuple[Correction, ...]
    correction_class: GenGamma
    flags: FrozenSet[str]
    visits: int
    skipped: Tuple[int, ...] = field(default=())

    def to_json(self, g: ProgramGraph) -> dict:
        return {"param": g.display_name(self.param), "node": self.param,
                "class": T.to_json(self.cls), "prior": T.to_json(self.prior),
                "likelihood": [T.to_json(c) for c in self.inverted],
                "corrections": [c.to_json() for c in self.corrections],
                "correction_exponent": self.correction_class.nu,
                "warnings": sorted(self.flags)}


def _resolve(g: ProgramGraph, ref) -> int:
    return g.node_of(ref) if isinstance(ref, str) else int(ref)


def _path(g: ProgramGraph, param: int, obs: int) -> List[Tuple[int, int]]:
    """(node, index of the parameter-dependent operand), from ``obs`` downward."""
    bit = 1 << param
    path, cur = [], obs
    while cur != param:
        n = g.nodes[cur]
        if n.kind != "op":
            raise NonInvertiblePath(f"node {cur} is not an operation")
        dep = [k for k, p in enumerate(n.parents) if g.ancestors[p] & bit]
        if len(dep) != 1:
            raise MultiplePaths(f"{g.display_name(param)} reaches node {cur} "
                                f"({g.label(cur)}) through {len(dep)} operands")
        if n.op not in _INVERTIBLE:
            raise NonInvertiblePath(f"cannot invert {n.op} at node {cur} ({g.label(cur)})")
        path.append((cur, dep[0]))
        cur = n.parents[dep[0]]
    return path


def _latent_overrides(g: ProgramGraph, param: int, latent) -> Dict[int, TailClass]:
    if latent is None:
        keep = {n.id for n in g.nodes if n.kind == "draw"
                and not (n.name is not None and g.names.get(n.name) == n.id)}
    else:
        keep = {_resolve(g, r) for r in latent}
    return {n.id: T.SUPER_LIGHT for n in g.nodes
            if n.kind == "draw" and n.id not in keep and n.id != param}


def _invert(g, path, sib_cls, flags, visits) -> TailClass:
    cls: TailClass = T.SUPER_LIGHT        # the observed value
    for node, k in path:
        visits.append(node)
        n = g.nodes[node]
        w = sib_cls(n.parents[1 - k]) if len(n.parents) == 2 else None
        op = n.op
        if op == "add":
            cls = T.add(cls, w)
        elif op in ("neg", "shift"):
            cls = T.translate(cls)
        elif op == "scale":
            cls = T.scalar_mul(1 / n.params[0], cls)
        elif op == "mul":
            cls = T.divide(cls, w, flags)
        elif op == "div":
            cls = T.multiply(cls, w, flags) if k == 0 else T.divide(w, cls, flags)
        elif op == "pow":
            cls = T.power(cls, 1 / n.params[0])
        elif op == "recip":
            cls = T.reciprocal(cls, flags)
        elif op == "exp":
            cls = T.log_class(cls, flags)
        elif op == "log":
            cls = T.exp_class(cls, flags)
        else:  # pragma: no cover - filtered by _path
            raise NonInvertiblePath(op)
    return cls


def _corrections(g, path, flags) -> List[Correction]:
    out: List[Correction] = []
    e = 1.0                                # theta enters the current input as theta**e
    for node, k in reversed(path):
        n = g.nodes[node]
        op = n.op
        if op == "pow":
            beta = n.params[0]
            out.append(Correction(node, op, 1 - beta, (1 - beta) * e))
            e *= beta
        elif op == "recip":
            out.append(Correction(node, op, 2.0, 2.0 * e))
            e = -e
        elif op == "mul":
            out.append(Correction(node, op, 1.0, e))
        elif op == "div":
            # numerator: product with 1/w; denominator: reciprocal then product
            out.append(Correction(node, op, 1.0, e))
            if k == 1:
                e = -e
        elif op in ("exp", "log"):
            flags.add(Flag.CONSERVATIVE)
    return out


def times_power(a: TailClass, k: float) -> TailClass:
    """Class of ``p(x) * x**k``: shifts the polynomial exponent only."""
    a = T.canonicalize(a)
    if k == 0 or isinstance(a, (T.SuperLight, T.SuperHeavy)):
        return a
    if isinstance(a, T.RegularlyVarying):
        return T.power_law(a.alpha - k)
    return T.canonicalize(GenGamma(a.nu + k, a.sigma, a.rho))


def _setup(g, param, latent):
    param = _resolve(g, param)
    if g.nodes[param].kind != "draw":
        raise TailAlgebraError(f"parameter {g.display_name(param)} is not a random draw")
    report = analyze(g, overrides=_latent_overrides(g, param, latent))

    def sib_cls(i):
        c = report.cls(i) if i in report.entries else T.SUPER_LIGHT
        if c is None:
            raise TailAlgebraError(f"node {i} has no tail class: {report[i].error}")
        return c

    return param, report, sib_cls


def invert_chain(g: ProgramGraph, param, observed, *, latent=None,
                 flags: Optional[set] = None) -> TailClass:
    """Class of ``f^{-1}(x, Z)`` for one observation."""
    param, _, sib_cls = _setup(g, param, latent)
    path = _path(g, param, _resolve(g, observed))
    return _invert(g, path, sib_cls, flags if flags is not None else set(), [])


def correction_product(g: ProgramGraph, param, observed_set: Iterable, *,
                       flags: Optional[set] = None) -> GenGamma:
    """Product of all Jacobian factors, as a raw polynomial class in the parameter."""
    param = _resolve(g, param)
    flags = flags if flags is not None else set()
    total = 0.0
    for o in observed_set:
        o = _resolve(g, o)
        if g.ancestors[o] & (1 << param):
            total += sum(c.pulled for c in _corrections(g, _path(g, param, o), flags))
    return GenGamma(total, 1.0, 0.0)


def posterior(q: PosteriorQuery) -> PosteriorResult:
    g = q.graph
    param, report, sib_cls = _setup(g, q.param, q.latent)
    observed = tuple(_resolve(g, o) for o in (q.observed if q.observed is not None
                                               else g.observed))
    if not observed:
        raise TailAlgebraError("posterior query needs at least one observed variable")
    flags: set = set()
    inverted, corrections, skipped, visits = [], [], [], []
    for o in observed:
        if not g.ancestors[o] & (1 << param):
            skipped.append(o)           # carries no information about the parameter
            continue
        path = _path(g, param, o)
        inverted.append(_invert(g, path, sib_cls, flags, visits))
        corrections.extend(_corrections(g, path, flags))
    prior = class_of(g.nodes[param].dist)
    cls: TailClass = T.SUPER_LIGHT
    for c in inverted:
        cls = T.density_product(cls, c, flags)
    cls = T.density_product(cls, prior, flags)
    total = sum(c.pulled for c in corrections)
    cls = times_power(cls, total)
    return PosteriorResult(param, cls, prior, tuple(inverted), tuple(corrections),
                           GenGamma(total, 1.0, 0.0),
                           frozenset(str(f) for f in flags), len(visits), tuple(skipped))


def posterior_class(q: PosteriorQuery) -> TailClass:
    return posterior(q).cls
