"""Atomic distributions: tail classes, exact log-densities and samplers.

Parameter conventions (positional order is part of the model language):

=====================  ==========================  ==============================
family                 parameters                  tail class
=====================  ==========================  ==============================
normal                 mu, sigma                   (0, 1/(2 sigma^2), 2)
half_normal            sigma                       (0, 1/(2 sigma^2), 2)
exponential            rate                        (0, rate, 1)
gamma                  shape, rate                 (shape-1, rate, 1)
inverse_gamma          shape, scale                (-shape-1, scale, -1)
chi_squared            k                           (k/2-1, 1/2, 1)
chi                    k                           (k-1, 1/2, 2)
weibull                scale, shape                (shape-1, scale^-shape, shape)
frechet                shape, scale                (-1-shape, scale^shape, -shape)
pareto                 x0, alpha                   R_{alpha+1}
student_t              df                          R_{df+1}
cauchy                 loc, scale                  R_2
laplace                loc, scale                  (0, 1/scale, 1)
logistic               loc, scale                  (0, 1/scale, 1)
gumbel                 loc, scale                  (0, 1/scale, 1)
rayleigh               sigma                       (1, 1/(2 sigma^2), 2)
levy                   loc, c                      (-3/2, c/2, -1)
lomax                  shape, scale                R_{shape+1}
beta_prime             a, b                        R_{b+1}
log_laplace            loc, scale                  R_{1/scale+1}
log_logistic           scale, shape                R_{shape+1}
burr                   c, k                        R_{ck+1}
maxwell_boltzmann      sigma                       (2, 1/(2 sigma^2), 2)
generalized_normal     loc, scale, shape           (0, scale^-shape, shape)
uniform                low, high                   L
=====================  ==========================  ==============================

Families without closed-form densities (stable, Holtsmark, ...) and a few
others only carry a tail class; sampling them raises ``UnsupportedSampler``.
Log-normal-type families raise ``LogNormalTail``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .errors import InvalidClass, LogNormalTail, UnsupportedFamily, UnsupportedSampler
from .representative import RepresentativeSpec, SplicedTail, StudentT, SymGenGamma
from .streams import Stream
from .tails import (SUPER_HEAVY, SUPER_LIGHT, GenGamma, RegularlyVarying, TailClass,
                    canonicalize)

__all__ = ["AtomicDistribution", "FAMILIES", "family", "class_of", "logpdf", "sample",
           "sample_gen_gamma", "log_gamma_variates", "sample_representative",
           "representative_logpdf", "gen_gamma_logpdf", "write_csv", "MAX_RETRIES"]

log = logging.getLogger(__name__)

MAX_RETRIES = 100
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class _Family:
    name: str
    params: Tuple[str, ...]
    check: Callable[..., Optional[str]]
    tail: Callable[..., TailClass]
    logpdf: Optional[Callable] = None
    draw: Optional[Callable] = None  # (rng, n, *params) -> ndarray


FAMILIES: Dict[str, _Family] = {}
_LOGNORMAL_TYPE = {"lognormal", "log_normal", "benini", "benktander1",
                   "benktander_type_i", "johnson_su"}


def _norm_name(name: str) -> str:
    return name.replace("_", "").replace("-", "").lower()


_ALIASES: Dict[str, str] = {}


def _register(name, params, check, tail, logpdf=None, draw=None, aliases=()):
    FAMILIES[name] = _Family(name, tuple(params), check, tail, logpdf, draw)
    for n in (name, *aliases):
        _ALIASES[_norm_name(n)] = name


def family(name: str) -> _Family:
    """Look up a family by any spelling (``StudentT``, ``student_t`` ...)."""
    key = _norm_name(name)
    if key in {_norm_name(n) for n in _LOGNORMAL_TYPE}:
        raise LogNormalTail(f"{name}: log-normal-type tails are outside the algebra")
    try:
        return FAMILIES[_ALIASES[key]]
    except KeyError:
        raise UnsupportedFamily(f"unknown distribution family {name!r}") from None


@dataclass(frozen=True)
class AtomicDistribution:
    name: str
    params: Tuple[float, ...] = ()

    def __post_init__(self):
        fam = family(self.name)
        params = tuple(float(p) for p in self.params)
        if len(params) != len(fam.params):
            raise InvalidClass(f"{fam.name} takes {len(fam.params)} parameter(s) "
                               f"({', '.join(fam.params)}), got {len(params)}")
        if not all(math.isfinite(p) for p in params):
            raise InvalidClass(f"{fam.name}: parameters must be finite")
        msg = fam.check(*params)
        if msg:
            raise InvalidClass(f"{fam.name}: {msg}")
        object.__setattr__(self, "name", fam.name)
        object.__setattr__(self, "params", params)

    @property
    def family(self) -> _Family:
        return FAMILIES[self.name]

    def __str__(self):
        return f"{self.name}({', '.join(repr(p) for p in self.params)})"


# ---------------------------------------------------------------------------
# validity checks

def _pos(*names):
    def check(*vals):
        for n, v in zip(names, vals):
            if n is not None and not v > 0:
                return f"{n} must be positive, got {v!r}"
        return None
    return check


def _check_uniform(low, high):
    return None if high > low else "need low < high"


def _check_stable(alpha):
    return None if 0 < alpha < 2 else "stability index must lie in (0, 2)"


# ---------------------------------------------------------------------------
# samplers and densities (all vectorized over x)

def _uniform_open(rng, n):
    """Uniform draws on (0, 1]."""
    return 1.0 - rng.random(n)


def log_gamma_variates(shape: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``log G`` for ``G ~ Gamma(shape, 1)``, accurate for tiny shapes.

    Small shapes use ``G = G' * U**(1/shape)`` with ``G' ~ Gamma(shape+1)``,
    computed entirely in log space so nothing underflows.
    """
    if not shape > 0:
        raise InvalidClass(f"gamma shape must be positive, got {shape!r}")
    if shape >= 1:
        with np.errstate(divide="ignore"):
            return np.log(rng.standard_gamma(shape, n))
    g = rng.standard_gamma(shape + 1.0, n)
    return np.log(g) + np.log(_uniform_open(rng, n)) / shape


def _gamma_draw(rng, n, shape, rate):
    with np.errstate(over="ignore"):
        return np.exp(log_gamma_variates(shape, n, rng) - math.log(rate))


def _sign(rng, n):
    return np.where(rng.random(n) < 0.5, -1.0, 1.0)


def _student_draw(rng, n, df):
    z = rng.standard_normal(n)
    lg = log_gamma_variates(df / 2, n, rng) + math.log(2.0)  # log chi-squared(df)
    with np.errstate(over="ignore"):
        return z * np.exp(0.5 * (math.log(df) - lg))


def _where(mask, value, x):
    out = np.full(np.shape(x), -np.inf)
    return np.where(mask, value, out)


def _lp_normal(x, mu, s):
    z = (x - mu) / s
    return -0.5 * z * z - math.log(s) - _HALF_LOG_2PI


def _lp_half_normal(x, s):
    with np.errstate(invalid="ignore"):
        return _where(x >= 0, math.log(2) - _HALF_LOG_2PI - math.log(s) - x * x / (2 * s * s), x)


def _lp_exponential(x, lam):
    return _where(x >= 0, math.log(lam) - lam * x, x)


def _lp_gamma(x, a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = a * math.log(b) - special.gammaln(a) + special.xlogy(a - 1, x) - b * x
    return _where(x > 0, v, x)


def _lp_inverse_gamma(x, a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = a * math.log(b) - special.gammaln(a) - (a + 1) * np.log(x) - b / x
    return _where(x > 0, v, x)


def _lp_chi(x, k):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (1 - k / 2) * math.log(2) - special.gammaln(k / 2) + special.xlogy(k - 1, x) - x * x / 2
    return _where(x > 0, v, x)


def _lp_weibull(x, lam, rho):
    with np.errstate(divide="ignore", invalid="ignore"):
        z = x / lam
        v = math.log(rho / lam) + special.xlogy(rho - 1, z) - z ** rho
    return _where(x >= 0, v, x)


def _lp_frechet(x, alpha, lam):
    with np.errstate(divide="ignore", invalid="ignore"):
        z = x / lam
        v = math.log(alpha / lam) - (1 + alpha) * np.log(z) - z ** (-alpha)
    return _where(x > 0, v, x)


def _lp_pareto(x, x0, alpha):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = math.log(alpha) + alpha * math.log(x0) - (alpha + 1) * np.log(x)
    return _where(x >= x0, v, x)


def _lp_student(x, df):
    c = special.gammaln((df + 1) / 2) - special.gammaln(df / 2) - 0.5 * math.log(df * math.pi)
    return c - (df + 1) / 2 * np.log1p(x * x / df)


def _lp_cauchy(x, x0, g):
    z = (x - x0) / g
    return -math.log(math.pi * g) - np.log1p(z * z)


def _lp_laplace(x, mu, b):
    return -math.log(2 * b) - np.abs(x - mu) / b


def _lp_logistic(x, mu, s):
    z = np.abs((x - mu) / s)
    return -z - math.log(s) - 2 * np.log1p(np.exp(-z))


def _lp_gumbel(x, mu, beta):
    z = (x - mu) / beta
    with np.errstate(over="ignore"):
        return -math.log(beta) - z - np.exp(-z)


def _lp_rayleigh(x, s):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.log(x) - 2 * math.log(s) - x * x / (2 * s * s)
    return _where(x >= 0, v, x)


def _lp_levy(x, mu, c):
    with np.errstate(divide="ignore", invalid="ignore"):
        d = x - mu
        v = 0.5 * math.log(c / (2 * math.pi)) - 1.5 * np.log(d) - c / (2 * d)
    return _where(x > mu, v, x)


def _lp_lomax(x, alpha, lam):
    with np.errstate(invalid="ignore"):
        v = math.log(alpha / lam) - (alpha + 1) * np.log1p(x / lam)
    return _where(x >= 0, v, x)


def _lp_beta_prime(x, a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = special.xlogy(a - 1, x) - (a + b) * np.log1p(x) - special.betaln(a, b)
    return _where(x > 0, v, x)


def _lp_log_laplace(x, mu, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        v = -math.log(2 * b) - lx - np.abs(lx - mu) / b
    return _where(x > 0, v, x)


def _lp_log_logistic(x, alpha, beta):
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(x / alpha)
        v = math.log(beta / alpha) + (beta - 1) * lz - 2 * np.logaddexp(0.0, beta * lz)
    return _where(x > 0, v, x)


def _lp_burr(x, c, k):
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        v = math.log(c * k) + (c - 1) * lx - (k + 1) * np.logaddexp(0.0, c * lx)
    return _where(x > 0, v, x)


def _lp_maxwell(x, s):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = 0.5 * math.log(2 / math.pi) + special.xlogy(2, x) - x * x / (2 * s * s) - 3 * math.log(s)
    return _where(x >= 0, v, x)


def _lp_gen_normal(x, mu, alpha, beta):
    return (math.log(beta / (2 * alpha)) - special.gammaln(1 / beta)
            - (np.abs(x - mu) / alpha) ** beta)


def _lp_uniform(x, lo, hi):
    return _where((x >= lo) & (x <= hi), -math.log(hi - lo), x)


def _gg(nu, sigma, rho):
    return canonicalize(GenGamma(nu, sigma, rho))


def _rv(alpha):
    return RegularlyVarying(alpha)


_register("normal", ("mu", "sigma"), _pos(None, "sigma"),
          lambda mu, s: _gg(0, 1 / (2 * s * s), 2), _lp_normal,
          lambda rng, n, mu, s: mu + s * rng.standard_normal(n), aliases=("gaussian",))
_register("half_normal", ("sigma",), _pos("sigma"),
          lambda s: _gg(0, 1 / (2 * s * s), 2), _lp_half_normal,
          lambda rng, n, s: s * np.abs(rng.standard_normal(n)))
_register("exponential", ("rate",), _pos("rate"),
          lambda lam: _gg(0, lam, 1), _lp_exponential,
          lambda rng, n, lam: -np.log(_uniform_open(rng, n)) / lam)
_register("gamma", ("shape", "rate"), _pos("shape", "rate"),
          lambda a, b: _gg(a - 1, b, 1), _lp_gamma, _gamma_draw)
_register("inverse_gamma", ("shape", "scale"), _pos("shape", "scale"),
          lambda a, b: _gg(-a - 1, b, -1), _lp_inverse_gamma,
          lambda rng, n, a, b: np.exp(math.log(b) - log_gamma_variates(a, n, rng)),
          aliases=("inv_gamma",))
_register("chi_squared", ("k",), _pos("k"),
          lambda k: _gg(k / 2 - 1, 0.5, 1), lambda x, k: _lp_gamma(x, k / 2, 0.5),
          lambda rng, n, k: _gamma_draw(rng, n, k / 2, 0.5), aliases=("chi2", "chisquared"))
_register("chi", ("k",), _pos("k"),
          lambda k: _gg(k - 1, 0.5, 2), _lp_chi,
          lambda rng, n, k: np.sqrt(_gamma_draw(rng, n, k / 2, 0.5)))
_register("weibull", ("scale", "shape"), _pos("scale", "shape"),
          lambda lam, rho: _gg(rho - 1, lam ** (-rho), rho), _lp_weibull,
          lambda rng, n, lam, rho: lam * (-np.log(_uniform_open(rng, n))) ** (1 / rho))
_register("frechet", ("shape", "scale"), _pos("shape", "scale"),
          lambda a, lam: _gg(-1 - a, lam ** a, -a), _lp_frechet,
          lambda rng, n, a, lam: lam * (-np.log(_uniform_open(rng, n))) ** (-1 / a))
_register("pareto", ("x0", "alpha"), _pos("x0", "alpha"),
          lambda x0, a: _rv(a + 1), _lp_pareto,
          lambda rng, n, x0, a: x0 * _uniform_open(rng, n) ** (-1 / a))
_register("student_t", ("df",), _pos("df"),
          lambda df: _rv(df + 1), _lp_student, _student_draw, aliases=("t", "studentst"))
_register("cauchy", ("loc", "scale"), _pos(None, "scale"),
          lambda x0, g: _rv(2), _lp_cauchy,
          lambda rng, n, x0, g: x0 + g * np.tan(math.pi * (rng.random(n) - 0.5)))
_register("laplace", ("loc", "scale"), _pos(None, "scale"),
          lambda mu, b: _gg(0, 1 / b, 1), _lp_laplace,
          lambda rng, n, mu, b: mu + b * _sign(rng, n) * -np.log(_uniform_open(rng, n)))
_register("logistic", ("loc", "scale"), _pos(None, "scale"),
          lambda mu, s: _gg(0, 1 / s, 1), _lp_logistic,
          lambda rng, n, mu, s: mu + s * special.logit(rng.random(n)))
_register("gumbel", ("loc", "scale"), _pos(None, "scale"),
          lambda mu, b: _gg(0, 1 / b, 1), _lp_gumbel,
          lambda rng, n, mu, b: mu - b * np.log(-np.log(rng.random(n))))
_register("rayleigh", ("sigma",), _pos("sigma"),
          lambda s: _gg(1, 1 / (2 * s * s), 2), _lp_rayleigh,
          lambda rng, n, s: s * np.sqrt(-2 * np.log(_uniform_open(rng, n))))
_register("levy", ("loc", "c"), _pos(None, "c"),
          lambda mu, c: _gg(-1.5, c / 2, -1), _lp_levy,
          lambda rng, n, mu, c: mu + c / rng.standard_normal(n) ** 2)
_register("lomax", ("shape", "scale"), _pos("shape", "scale"),
          lambda a, lam: _rv(a + 1), _lp_lomax,
          lambda rng, n, a, lam: lam * np.expm1(-np.log(_uniform_open(rng, n)) / a))
_register("beta_prime", ("a", "b"), _pos("a", "b"),
          lambda a, b: _rv(b + 1), _lp_beta_prime,
          lambda rng, n, a, b: np.exp(log_gamma_variates(a, n, rng) - log_gamma_variates(b, n, rng)))
_register("log_laplace", ("loc", "scale"), _pos(None, "scale"),
          lambda mu, b: _rv(1 / b + 1), _lp_log_laplace,
          lambda rng, n, mu, b: np.exp(mu + b * _sign(rng, n) * -np.log(_uniform_open(rng, n))))
_register("log_logistic", ("scale", "shape"), _pos("scale", "shape"),
          lambda a, b: _rv(b + 1), _lp_log_logistic,
          lambda rng, n, a, b: a * np.exp(special.logit(rng.random(n)) / b),
          aliases=("fisk",))
_register("burr", ("c", "k"), _pos("c", "k"),
          lambda c, k: _rv(c * k + 1), _lp_burr,
          lambda rng, n, c, k: np.expm1(-np.log(_uniform_open(rng, n)) / k) ** (1 / c))
_register("maxwell_boltzmann", ("sigma",), _pos("sigma"),
          lambda s: _gg(2, 1 / (2 * s * s), 2), _lp_maxwell,
          lambda rng, n, s: s * np.sqrt(_gamma_draw(rng, n, 1.5, 0.5)), aliases=("maxwell",))
_register("generalized_normal", ("loc", "scale", "shape"), _pos(None, "scale", "shape"),
          lambda mu, a, b: _gg(0, a ** (-b), b), _lp_gen_normal,
          lambda rng, n, mu, a, b: mu + a * _sign(rng, n) * _gamma_draw(rng, n, 1 / b, 1.0) ** (1 / b))
_register("uniform", ("low", "high"), _check_uniform,
          lambda lo, hi: SUPER_LIGHT, _lp_uniform,
          lambda rng, n, lo, hi: lo + (hi - lo) * rng.random(n))

# class-only families
_register("stable", ("alpha",), _check_stable, lambda a: _rv(a + 1))
_register("geometric_stable", ("alpha",), _check_stable, lambda a: _rv(a + 1))
_register("holtsmark", (), lambda: None, lambda: _rv(2.5))
_register("voigt", ("sigma", "gamma"), _pos("sigma", "gamma"), lambda s, g: _rv(2))
_register("tracy_widom", ("beta",), _pos("beta"),
          lambda b: _gg(-3 * b / 4 - 1, 2 * b / 3, 1.5))
_register("skew_normal", ("loc", "scale", "shape"), _pos(None, "scale", None),
          lambda mu, s, a: _gg(0, 1 / (2 * s * s), 2))
_register("davis", ("b", "n"), _pos("b", "n"), lambda b, n: _gg(-1 - n, b, -1))
_register("dagum", ("a", "b", "p"), _pos("a", "b", "p"), lambda a, b, p: _rv(a + 1))
_register("f", ("d1", "d2"), _pos("d1", "d2"), lambda d1, d2: _rv(d2 / 2 + 1),
          aliases=("fisher_f", "f_dist"))
_register("fisher_z", ("d1", "d2"), _pos("d1", "d2"), lambda d1, d2: _gg(0, d2, 1))
_register("gamma_gompertz", ("b", "s", "beta"), _pos("b", "s", "beta"),
          lambda b, s, beta: _gg(0, b * s, 1))
_register("generalized_hyperbolic", ("lam", "alpha", "beta", "delta", "mu"),
          lambda lam, a, b, d, mu: None if a > abs(b) and d > 0 else "need alpha > |beta|, delta > 0",
          lambda lam, a, b, d, mu: _gg(lam - 1, a - b, 1))
_register("gompertz", ("sigma", "eta"), _pos("sigma", "eta"), lambda s, e: SUPER_LIGHT)
_register("gumbel2", ("alpha", "beta"), _pos("alpha", "beta"),
          lambda a, b: _gg(-a - 1, b, -a), aliases=("gumbel_type_ii",))
_register("hyperbolic_secant", (), lambda: None, lambda: _gg(0, math.pi / 2, 1),
          aliases=("hypsecant",))
_register("inverse_chi_squared", ("k",), _pos("k"), lambda k: _gg(-k / 2 - 1, 0.5, -1))
_register("rice", ("nu", "sigma"), _pos(None, "sigma"),
          lambda nu, s: _gg(0.5, 1 / (2 * s * s), 2))
_register("slash", (), lambda: None, lambda: _rv(2))
_register("benktander2", ("a", "b"),
          lambda a, b: None if a > 0 and 0 < b <= 1 else "need a > 0 and 0 < b <= 1",
          lambda a, b: _gg(2 * b - 2, a / b, b), aliases=("benktander_type_ii",))
_register("log_cauchy", ("mu", "sigma"), _pos(None, "sigma"), lambda mu, s: SUPER_HEAVY)
_register("log_t", ("df", "mu"), _pos("df", None), lambda df, mu: SUPER_HEAVY)


# ---------------------------------------------------------------------------
# public operations

def class_of(d: AtomicDistribution) -> TailClass:
    return canonicalize(d.family.tail(*d.params))


def logpdf(d: AtomicDistribution, x):
    """Exact log-density; ``-inf`` outside the support."""
    fam = d.family
    if fam.logpdf is None:
        raise UnsupportedSampler(f"{fam.name} has no closed-form density")
    xa = np.asarray(x, dtype=float)
    out = fam.logpdf(xa, *d.params)
    return float(out) if np.ndim(out) == 0 else out


def _resample(draw: Callable[[int], np.ndarray], n: int, what: str) -> np.ndarray:
    """Draw ``n`` finite values, redrawing non-finite ones at most MAX_RETRIES times."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        x = np.asarray(draw(n), dtype=float)
        bad = ~np.isfinite(x)
        retries, redrawn = 0, 0
        while bad.any():
            if retries >= MAX_RETRIES:
                raise FloatingPointError(f"{what}: non-finite draws persisted after "
                                         f"{MAX_RETRIES} retries")
            k = int(bad.sum())
            redrawn += k
            x[bad] = draw(k)
            bad = ~np.isfinite(x)
            retries += 1
    if redrawn:
        log.warning("%s: redrew %d non-finite value(s)", what, redrawn)
    return x


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"sample size must be a positive integer, got {n!r}")
    return int(n)


def sample(d: AtomicDistribution, stream: Stream, n: int) -> np.ndarray:
    """``n`` i.i.d. draws of ``d``, reproducible from ``stream``."""
    n = _check_n(n)
    fam = d.family
    if fam.draw is None:
        raise UnsupportedSampler(f"{fam.name} has no sampler (tail class only)")
    rng = stream.generator()
    return _resample(lambda k: fam.draw(rng, k, *d.params), n, str(d))


def sample_gen_gamma(nu: float, sigma: float, rho: float, stream: Stream, n: int) -> np.ndarray:
    """Draws with density proportional to ``x**nu * exp(-sigma * x**rho)`` on x > 0.

    ``X = G**(1/rho)`` with ``G ~ Gamma((nu+1)/rho, rate=sigma)``; negative rho
    gives inverse-type laws.
    """
    n = _check_n(n)
    if rho == 0 or not sigma > 0 or not (nu + 1) / rho > 0:
        raise InvalidClass(f"not a normalizable generalized Gamma law: ({nu}, {sigma}, {rho})")
    shape, rng, ls = (nu + 1) / rho, stream.generator(), math.log(sigma)
    return _resample(lambda k: np.exp((log_gamma_variates(shape, k, rng) - ls) / rho), n,
                     f"gen_gamma({nu}, {sigma}, {rho})")


def gen_gamma_logpdf(nu: float, sigma: float, rho: float, x):
    """Normalized log-density of the generalized Gamma law on x > 0."""
    s = (nu + 1) / rho
    logc = math.log(abs(rho)) + s * math.log(sigma) - math.lgamma(s)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        v = logc + special.xlogy(nu, x) - sigma * x ** rho
    # the density at the origin is finite exactly when nu >= 0 and rho > 0
    support = (x > 0) | ((x == 0) & (rho > 0))
    return _where(support, np.where(np.isnan(v), -np.inf, v), x)


def sample_representative(spec: RepresentativeSpec, stream: Stream, n: int) -> np.ndarray:
    n = _check_n(n)
    if isinstance(spec, StudentT):
        rng = stream.generator()
        return _resample(lambda k: _student_draw(rng, k, spec.df), n, str(spec))
    if isinstance(spec, SymGenGamma):
        mag = sample_gen_gamma(spec.nu, spec.sigma, spec.rho, stream.child(0), n)
        return mag * _sign(stream.child(1).generator(), n)
    if isinstance(spec, SplicedTail):
        from .spliced import spliced_sampler
        u = stream.child(0).generator().random(n)
        return spliced_sampler(spec).ppf(u) * _sign(stream.child(1).generator(), n)
    raise TypeError(f"not a representative spec: {spec!r}")


def representative_logpdf(spec: RepresentativeSpec, x):
    """Log-density of a representative law (symmetric about zero)."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, StudentT):
        return _lp_student(x, spec.df)
    ax = np.abs(x)
    if isinstance(spec, SymGenGamma):
        return gen_gamma_logpdf(spec.nu, spec.sigma, spec.rho, ax) - math.log(2)
    if isinstance(spec, SplicedTail):
        from .spliced import spliced_sampler
        return spliced_sampler(spec).logpdf(ax) - math.log(2)
    raise TypeError(f"not a representative spec: {spec!r}")


def write_csv(path_or_file, values: Sequence[float], *, seed: int, spec: str, column="x"):
    """Single-column CSV with a comment header recording provenance."""
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", encoding="utf-8") if own else path_or_file
    try:
        fh.write(f"# seed={seed}\n# spec={spec}\n{column}\n")
        for v in np.asarray(values, dtype=float):
            fh.write(f"{float(v)!r}\n")
    finally:
        if own:
            fh.close()
