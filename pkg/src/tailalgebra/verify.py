"""Monte-Carlo checks of predicted tail classes.

Forward sampling of program graphs, tail-index estimators (Hill, generalized
Pareto fit, Pareto k-hat, log-log density slopes), verdicts comparing them with
predicted classes, and the stochastic-gradient-descent fixed-point oracle.

All tail exponents reported here use the *density* convention: a density
decaying like ``x**-alpha`` has index ``alpha`` (so Cauchy has 2).  Hill's
estimator natively targets the survival exponent, which is one less.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize, special

from . import tails as T
from .catalog import sample
from .dsl.analysis import TailReport
from .dsl.graph import ProgramGraph
from .errors import InsufficientTail, NoRoot, TailAlgebraError, UnsupportedSampler
from .streams import Stream
from .tails import GenGamma, TailClass

__all__ = [
    "TailEstimate", "VerifyEntry", "VerifyReport", "PowerLawVerdict", "LogLogFit",
    "THRESHOLDS", "forward_sample", "hill_alpha", "gpd_fit", "pareto_khat", "khat_verdict",
    "loglog_fit", "loglog_slope", "density_table", "power_law_verdict", "mc_verify",
    "sgd_alpha_oracle", "sgd_stationary_sample", "sgd_forward_sample", "sgd_program",
    "sgd_class",
]

MIN_TAIL = 20
THRESHOLDS = {
    "alpha_abs": 0.3,             # |alpha_hat - alpha| allowed for power laws
    "alpha_se": 3.0,              # ... or this many standard errors, if larger
    "slope_rel": 0.1,             # relative error allowed on the log-density slope
    "band": (0.95, 0.9995),       # quantile band for light-tail slope checks
    "khat_pass": 0.2,
    "khat_fail": 0.7,
    "drift_z": 3.0,               # Hill drift z-score separating power laws from lighter tails
}


# ---------------------------------------------------------------------------
# forward sampling

def _scope_chain(g: ProgramGraph, i: int) -> Tuple[int, ...]:
    out, s = [], g.nodes[i].scope
    while s is not None:
        out.append(s)
        s = g.nodes[s].scope
    return tuple(reversed(out))


def _apply(op: str, params, args: List[np.ndarray]) -> np.ndarray:
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if op == "add":
            return args[0] + args[1]
        if op == "mul":
            return args[0] * args[1]
        if op == "div":
            return args[0] / args[1]
        if op == "neg":
            return -args[0]
        if op == "abs":
            return np.abs(args[0])
        if op == "shift":
            return args[0] + params[0]
        if op == "scale":
            return args[0] * params[0]
        if op == "recip":
            return 1.0 / args[0]
        if op == "exp":
            return np.exp(args[0])
        if op == "log":
            return np.log(np.abs(args[0]))
        if op == "pow":
            beta = params[0]
            if float(beta).is_integer():
                return args[0] ** beta
            return np.abs(args[0]) ** beta
        if op == "lipschitz":
            L, alpha, *consts = params
            m = np.abs(args[0]) ** alpha
            for a in args[1:]:
                m = np.maximum(m, np.abs(a) ** alpha)
            for c in consts:
                m = np.maximum(m, abs(c) ** alpha)
            return L * m
    raise UnsupportedSampler(f"no sampler for operation {op!r}")


def _evaluate(g: ProgramGraph, target: int, stream: Stream, n: int, scope, copy: Tuple[int, ...],
              env: Dict[int, np.ndarray]) -> np.ndarray:
    # every node the target needs
    need, stack = set(), [target]
    while stack:
        i = stack.pop()
        if i in need or i in env:
            continue
        need.add(i)
        stack.extend(g.nodes[i].parents)
    depth = len(_scope_chain(g, target)) if scope is None else len(_scope_chain(g, scope)) + 1
    here = sorted(i for i in need if g.nodes[i].scope == scope)

    def owner(i):
        # the node at this level responsible for evaluating i
        chain = _scope_chain(g, i)
        return i if len(chain) <= depth else chain[depth]

    pos = {i: t for t, i in enumerate(here)}
    last: Dict[int, int] = {}
    for c in need:
        u = pos.get(owner(c))
        if u is None:
            continue
        for p in g.nodes[c].parents:
            if p in pos:
                last[p] = max(last.get(p, -1), u)
    vals: Dict[int, np.ndarray] = {}
    local = dict(env)
    for t, i in enumerate(here):
        nd = g.nodes[i]
        if nd.kind == "const":
            v = np.full(n, nd.value)
        elif nd.kind == "draw":
            v = sample(nd.dist, stream.child(i, *copy), n)
        elif nd.op == "iid":
            v = np.zeros(n)
            for j in range(int(nd.params[0])):
                v = v + _evaluate(g, nd.parents[0], stream, n, i, copy + (j,), local)
        elif nd.op == "dens_prod":
            raise UnsupportedSampler("dens_prod has no generative sampler")
        else:
            v = _apply(nd.op, nd.params, [local[p] for p in nd.parents])
        local[i] = vals[i] = v
        for p in [p for p, u in last.items() if u == t and p != target]:
            local.pop(p, None)
            del last[p]
    return local[target]


def forward_sample(g: ProgramGraph, node, stream: Stream, n: int) -> np.ndarray:
    """``n`` independent draws of ``node`` by evaluating its ancestors in order.

    Draw node ``i`` inside copy ``(j, k, ...)`` of enclosing ``iid`` bodies uses
    the stream ``stream.child(i, j, k, ...)``, so results are reproducible and
    unaffected by which other nodes are sampled.
    """
    i = g.node_of(node) if isinstance(node, str) else int(node)
    if g.nodes[i].scope is not None:
        raise ValueError(f"node {i} lies inside an iid body")
    return np.asarray(_evaluate(g, i, stream, int(n), None, (), {}), dtype=float)


# ---------------------------------------------------------------------------
# estimators

@dataclass(frozen=True)
class TailEstimate:
    alpha_hat: float          # density exponent
    k_hat: float              # generalized Pareto shape of the exceedances
    n_tail: int
    stderr: float
    threshold: float = float("nan")

    def to_json(self) -> dict:
        return {"alpha_hat": self.alpha_hat, "k_hat": self.k_hat, "n_tail": self.n_tail,
                "stderr": self.stderr, "threshold": self.threshold,
                "convention": "density exponent (survival exponent + 1)"}


def gpd_fit(x: np.ndarray) -> Tuple[float, float]:
    """(shape k, scale) of a generalized Pareto fitted to exceedances ``x > 0``.

    Zhang and Stephens' empirical-Bayes profile likelihood, with the weak prior
    on ``k`` used in Pareto smoothed importance sampling.
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    prior_bs, prior_k = 3.0, 10.0
    m = 30 + int(math.sqrt(n))
    bs = 1 - np.sqrt(m / (np.arange(1, m + 1) - 0.5))
    bs /= prior_bs * x[int(n / 4 + 0.5) - 1]
    bs += 1 / x[-1]
    ks = np.log1p(-bs[:, None] * x).mean(axis=1)
    L = n * (np.log(-bs / ks) - ks - 1)
    w = special.softmax(L)
    keep = w >= 10 * np.finfo(float).eps
    w, bs = w[keep] / w[keep].sum(), bs[keep]
    b = float((bs * w).sum())
    k = float(np.log1p(-b * x).mean())
    sigma = -k / b
    k = (n * k + prior_k * 0.5) / (n + prior_k)
    return k, sigma


def hill_alpha(samples, tail_fraction: float = 0.01) -> TailEstimate:
    """Hill estimate of the density tail exponent of ``|samples|``."""
    if not 0 < tail_fraction <= 0.5:
        raise ValueError(f"tail_fraction must lie in (0, 0.5], got {tail_fraction}")
    x = np.abs(np.asarray(samples, dtype=float))
    x = x[np.isfinite(x)]
    k = int(tail_fraction * len(x))
    if k < MIN_TAIL:
        raise InsufficientTail(f"{k} exceedances, need at least {MIN_TAIL}")
    top = np.partition(x, len(x) - k - 1)[len(x) - k - 1:]
    u = top.min()
    if not u > 0:
        raise InsufficientTail("threshold order statistic is zero")
    top = np.sort(top)[1:]
    xi = float(np.mean(np.log(top / u)))
    if not xi > 0:
        raise InsufficientTail("tail order statistics are all equal")
    exc = top - u
    exc = exc[exc > 0]
    k_hat = gpd_fit(exc)[0] if len(exc) >= MIN_TAIL else float("nan")
    return TailEstimate(1 + 1 / xi, k_hat, k, 1 / (xi * math.sqrt(k)), float(u))


def pareto_khat(log_ratios) -> float:
    """Generalized Pareto shape of the largest importance ratios.

    Uses the ``M = ceil(min(0.2 n, 3 sqrt(n)))`` largest ratios.  Ratios that
    are all equal return ``-inf``.
    """
    lw = np.asarray(log_ratios, dtype=float)
    if not np.all(np.isfinite(lw)):
        raise ValueError("log importance ratios must be finite")
    n = len(lw)
    if n < 5 or np.ptp(lw) < 1e-12:
        return float("-inf")
    m = int(math.ceil(min(0.2 * n, 3 * math.sqrt(n))))
    lw = np.sort(lw - lw.max())
    cutoff = lw[n - m - 1]
    exc = np.exp(lw[n - m:]) - math.exp(cutoff)
    exc = exc[exc > 0]
    if len(exc) < 5 or np.ptp(exc) == 0:
        return float("-inf")
    return gpd_fit(exc)[0]


def khat_verdict(k: float) -> str:
    if k <= THRESHOLDS["khat_pass"]:
        return "pass"
    return "fail" if k > THRESHOLDS["khat_fail"] else "warn"


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    curvature: float            # quadratic coefficient in log x; ~0 for power laws
    x: np.ndarray = field(repr=False)
    log_density: np.ndarray = field(repr=False)

    @property
    def is_power(self) -> bool:
        return abs(self.curvature) < 0.5


def _band_hist(samples, q_lo, q_hi, bins):
    x = np.abs(np.asarray(samples, dtype=float))
    x = x[np.isfinite(x)]
    lo, hi = np.quantile(x, [q_lo, q_hi])
    if not 0 < lo < hi:
        raise InsufficientTail("empty or non-positive quantile band")
    edges = np.geomspace(lo, hi, bins + 1)
    counts, _ = np.histogram(x, edges)
    if len(counts) < 30 or counts.min() < 5:
        raise InsufficientTail(f"band needs >= 30 bins with >= 5 counts, min count {counts.min()}")
    mid = np.sqrt(edges[:-1] * edges[1:])
    return mid, np.log(counts / (len(x) * np.diff(edges)))


def loglog_fit(samples, quantile_lo: float = 0.9, quantile_hi: float = 0.9999,
               bins: int = 30) -> LogLogFit:
    """Least-squares fit of the log histogram density of ``|samples|`` against log x."""
    mid, ld = _band_hist(samples, quantile_lo, quantile_hi, bins)
    lx = np.log(mid)
    slope = np.polyfit(lx, ld, 1)[0]
    c = lx - lx.mean()
    curv = np.polyfit(c / max(np.ptp(c), 1e-300), ld, 2)[0]
    return LogLogFit(float(slope), float(curv), mid, ld)


def loglog_slope(samples, quantile_lo: float = 0.9, quantile_hi: float = 0.9999) -> float:
    return loglog_fit(samples, quantile_lo, quantile_hi).slope


def density_table(samples, quantile_lo: float = 0.5, quantile_hi: float = 0.9999,
                  bins: int = 60) -> List[Tuple[float, float]]:
    """(x, log density) pairs over a log-spaced band, for external plotting."""
    mid, ld = _band_hist(samples, quantile_lo, quantile_hi, bins)
    return list(zip(mid.tolist(), ld.tolist()))


@dataclass(frozen=True)
class PowerLawVerdict:
    verdict: str              # "power-law" | "non-power"
    coarse: TailEstimate
    fine: TailEstimate
    z: float


def power_law_verdict(samples, tail_fraction: float = 0.01) -> PowerLawVerdict:
    """Decide whether the Hill estimate is stable deeper into the tail.

    For a power law the estimate at ``tail_fraction`` and at a tenth of it
    agree; for lighter tails it keeps growing as the threshold rises.
    """
    coarse = hill_alpha(samples, tail_fraction)
    fine = hill_alpha(samples, tail_fraction / 10)
    z = (fine.alpha_hat - coarse.alpha_hat) / math.hypot(coarse.stderr, fine.stderr)
    return PowerLawVerdict("non-power" if z > THRESHOLDS["drift_z"] else "power-law",
                           coarse, fine, z)


# ---------------------------------------------------------------------------
# verdicts against predicted classes

@dataclass(frozen=True)
class VerifyEntry:
    node: int
    name: str
    predicted: Optional[TailClass]
    verdict: str              # Consistent | Inconsistent | Inconclusive
    estimate: Optional[TailEstimate] = None
    detail: Tuple[Tuple[str, object], ...] = ()

    def to_json(self) -> dict:
        return {"node": self.node, "name": self.name,
                "predicted": None if self.predicted is None else T.to_json(self.predicted),
                "verdict": self.verdict,
                "estimate": None if self.estimate is None else self.estimate.to_json(),
                **dict(self.detail)}


@dataclass(frozen=True)
class VerifyReport:
    model: str
    seed: int
    samples: int
    entries: Tuple[VerifyEntry, ...]
    thresholds: Dict[str, object] = field(default_factory=lambda: dict(THRESHOLDS))

    def __getitem__(self, node: int) -> VerifyEntry:
        for e in self.entries:
            if e.node == node:
                return e
        raise KeyError(node)

    def to_json(self) -> dict:
        th = {k: list(v) if isinstance(v, tuple) else v for k, v in self.thresholds.items()}
        return {"model": self.model, "seed": self.seed, "samples": self.samples,
                "thresholds": th, "nodes": [e.to_json() for e in self.entries]}


def _check_power(x, alpha, tail_fraction):
    est = hill_alpha(x, tail_fraction)
    tol = max(THRESHOLDS["alpha_abs"], THRESHOLDS["alpha_se"] * est.stderr)
    ok = abs(est.alpha_hat - alpha) <= tol
    return ("Consistent" if ok else "Inconsistent"), est, (("tolerance", tol),)


def _check_light(x, cls: GenGamma):
    """Regress the binned log-density on ``nu log x - sigma x**rho``; slope should be 1."""
    q_lo, q_hi = THRESHOLDS["band"]
    mid, ld = _band_hist(x, q_lo, q_hi, 30)
    f = cls.nu * np.log(mid) - cls.sigma * mid ** cls.rho
    slope = float(np.polyfit(f, ld, 1)[0])
    ok = abs(slope - 1) <= THRESHOLDS["slope_rel"]
    return ("Consistent" if ok else "Inconsistent"), None, (("slope_ratio", slope),)


def mc_verify(g: ProgramGraph, report: TailReport, budget: int, *, seed: int = 0,
              tail_fraction: float = 0.01, nodes: Optional[Iterable[int]] = None,
              return_samples: bool = False):
    """Compare predicted classes of queried nodes with forward-sampled data.

    Power laws are checked with Hill's estimator; generalized Gamma classes
    with rho > 0 by the slope of the binned log-density against the predicted
    exponent over a high-quantile band.  Anything else is Inconclusive.
    """
    targets = list(nodes) if nodes is not None else list(g.queries or g.observed)
    if not targets:
        targets = sorted(set(g.names.values()))
    root = Stream(seed)
    out, kept = [], {}
    for i in targets:
        cls = report.cls(i) if i in report.entries else None
        name = g.display_name(i)
        if cls is None:
            out.append(VerifyEntry(i, name, None, "Inconclusive", None, (("reason", "no class"),)))
            continue
        try:
            x = forward_sample(g, i, root, budget)
        except (UnsupportedSampler, TailAlgebraError, ValueError) as ex:
            out.append(VerifyEntry(i, name, cls, "Inconclusive", None,
                                   (("reason", f"{type(ex).__name__}: {ex}"),)))
            continue
        kept[i] = x
        alpha = T.tail_exponent(cls)
        try:
            if alpha is not None:
                verdict, est, detail = _check_power(x, alpha, tail_fraction)
            elif isinstance(cls, GenGamma) and cls.rho > 0:
                verdict, est, detail = _check_light(x, cls)
            else:
                verdict, est, detail = "Inconclusive", None, (("reason", "class has no test"),)
        except InsufficientTail as ex:
            verdict, est, detail = "Inconclusive", None, (("reason", str(ex)),)
        out.append(VerifyEntry(i, name, cls, verdict, est, detail))
    rep = VerifyReport(g.model, seed, int(budget), tuple(out))
    return (rep, kept) if return_samples else rep


# ---------------------------------------------------------------------------
# stochastic gradient descent on one-dimensional least squares
#   beta_{k+1} = (1 - delta X_k^2) beta_k + delta Y_k X_k,  X ~ N(0, s^2), Y ~ N(0, 1)

def _kesten_moment(alpha: float, c: float) -> float:
    """E|1 - c Z^2|^alpha for standard normal Z, split at the zero of the integrand."""
    z0 = 1 / math.sqrt(c)
    f = lambda z: abs(1 - c * z * z) ** alpha * math.exp(-0.5 * z * z)
    a = integrate.quad(f, 0, z0, limit=200)[0]
    b = integrate.quad(f, z0, np.inf, limit=200)[0]
    return 2 * (a + b) / math.sqrt(2 * math.pi)


def sgd_alpha_oracle(delta: float, sigma_x: float, alpha_max: float = 200.0) -> float:
    """Root alpha > 0 of ``E|1 - delta X^2|**alpha = 1`` (a survival exponent)."""
    c = delta * sigma_x ** 2
    if not c > 0:
        raise ValueError("delta and sigma_x must be positive")
    z0 = 1 / math.sqrt(c)
    g = lambda z: math.log(abs(1 - c * z * z)) * math.exp(-0.5 * z * z)
    e_log = 2 * (integrate.quad(g, 0, z0, limit=200)[0]
                 + integrate.quad(g, z0, np.inf, limit=200)[0]) / math.sqrt(2 * math.pi)
    if e_log >= 0:
        raise NoRoot(f"E log|1 - delta X^2| = {e_log:.3g} >= 0: no stationary law")
    lo, hi = 0.0, 1.0
    while _kesten_moment(hi, c) < 1:
        lo, hi = hi, 2 * hi
        if hi > alpha_max:
            raise NoRoot(f"E|1 - delta X^2|^alpha < 1 for every alpha <= {alpha_max:g}")
    return optimize.brentq(lambda a: _kesten_moment(a, c) - 1, max(lo, 1e-9), hi,
                           xtol=1e-13, rtol=1e-14)


def sgd_stationary_sample(delta: float, sigma_x: float, n: int, stream: Stream,
                          steps: int = 10_000) -> np.ndarray:
    """Draws of the iterate after ``steps`` steps from zero.

    Reversing the order of the i.i.d. steps leaves the law unchanged and turns
    the recursion into ``sum_m (A_1...A_m) B_{m+1}``, a series whose terms shrink
    geometrically, so each chain stops once its running product is negligible.
    """
    rng = stream.generator()
    s = np.zeros(n)
    p = np.ones(n)
    active = np.arange(n)
    for _ in range(int(steps)):
        if active.size == 0:
            break
        k = active.size
        x = rng.normal(0.0, sigma_x, k)
        y = rng.standard_normal(k)
        pa = p[active]
        s[active] += pa * delta * y * x
        pa *= 1 - delta * x * x
        p[active] = pa
        keep = np.abs(pa) > 2.0 ** -60 * np.abs(s[active])
        active = active[keep]
    return s


def sgd_forward_sample(delta: float, sigma_x: float, n: int, stream: Stream,
                       steps: int) -> np.ndarray:
    """Direct simulation of ``n`` independent chains (for validation)."""
    rng = stream.generator()
    b = np.zeros(n)
    for _ in range(int(steps)):
        x = rng.normal(0.0, sigma_x, n)
        y = rng.standard_normal(n)
        b = (1 - delta * x * x) * b + delta * y * x
    return b


def sgd_program(delta: float, sigma_x: float, steps: int) -> str:
    """Model source text for ``steps`` iterations of the recursion."""
    lines = ["model sgd {", "  b0 = 0"]
    for k in range(1, steps + 1):
        lines.append(f"  x{k} ~ Normal(0, {sigma_x!r})")
        lines.append(f"  y{k} ~ Normal(0, 1)")
        lines.append(f"  b{k} = (1 - {delta!r} * x{k}^2) * b{k - 1} + {delta!r} * y{k} * x{k}")
    lines += [f"  query b{steps}", "}"]
    return "\n".join(lines) + "\n"


def sgd_class(delta: float, sigma_x: float, steps: int, flags: Optional[set] = None) -> TailClass:
    """Class of the iterate after ``steps`` steps, by running the algebra on the recursion.

    Mirrors the operations that ``sgd_program`` lowers to, without building
    the graph.
    """
    x = T.canonicalize(GenGamma(0.0, 1 / (2 * sigma_x ** 2), 2.0))
    y = GenGamma(0.0, 0.5, 2.0)
    a = T.translate(T.scalar_mul(-delta, T.power(x, 2.0)), 1.0)
    noise = T.scalar_mul(delta, T.multiply(y, x, flags))
    b: TailClass = noise                     # first step from b0 = 0
    for _ in range(steps - 1):
        b = T.add(T.multiply(a, b, flags), noise)
    return b
