"""Tail classes and the closed operations of the generalized Gamma algebra.

A tail class describes the asymptotic decay of a density,

    p(x) ~ c * x**nu * exp(-sigma * x**rho)     as x -> infinity,

with the constant ``c`` quotiented out.  Four variants exist:

``GenGamma(nu, sigma, rho)``
    the generic triple (``rho != 0`` once canonical),
``RegularlyVarying(alpha)``
    power-law density ``x**-alpha`` with ``alpha > 1``,
``SuperHeavy``
    heavier than every integrable power law,
``SuperLight``
    lighter than everything (bounded or constant quantities).

Every operation is a pure function of immutable values.  Operations that only
give an upper bound on heaviness record a flag in the optional ``flags`` set.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import reduce
from typing import Iterable, Optional, Union

from .errors import DegenerateConstant, InvalidClass

__all__ = [
    "GenGamma", "RegularlyVarying", "SuperHeavy", "SuperLight", "TailClass",
    "SUPER_HEAVY", "SUPER_LIGHT", "Ordering", "Flag", "RHO_EQ_TOL",
    "canonicalize", "power_law", "compare", "max_class", "add", "add_n",
    "scalar_mul", "translate", "power", "reciprocal", "multiply", "divide",
    "density_product", "exp_class", "log_class", "lipschitz",
    "to_json", "from_json", "is_canonical", "tail_exponent",
]

#: relative tolerance used when deciding whether two shape parameters are equal
RHO_EQ_TOL = 1e-12


@dataclass(frozen=True)
class GenGamma:
    nu: float
    sigma: float
    rho: float

    def __post_init__(self):
        for name in ("nu", "sigma", "rho"):
            v = getattr(self, name)
            if not isinstance(v, numbers.Real) or not math.isfinite(v):
                raise InvalidClass(f"GenGamma.{name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.sigma <= 0:
            raise InvalidClass(f"GenGamma.sigma must be positive, got {self.sigma!r}")

    def __str__(self):
        return f"({_fmt(self.nu)}, {_fmt(self.sigma)}, {_fmt(self.rho)})"


@dataclass(frozen=True)
class RegularlyVarying:
    alpha: float

    def __post_init__(self):
        a = self.alpha
        if not isinstance(a, numbers.Real) or not math.isfinite(a) or a <= 1:
            raise InvalidClass(f"RegularlyVarying.alpha must be a finite real > 1, got {a!r}")
        object.__setattr__(self, "alpha", float(a))

    def __str__(self):
        return f"R_{_fmt(self.alpha)}"


@dataclass(frozen=True)
class SuperHeavy:
    def __str__(self):
        return "R_1"


@dataclass(frozen=True)
class SuperLight:
    def __str__(self):
        return "L"


TailClass = Union[GenGamma, RegularlyVarying, SuperHeavy, SuperLight]
SUPER_HEAVY = SuperHeavy()
SUPER_LIGHT = SuperLight()


class Ordering(IntEnum):
    """Result of :func:`compare`, ordered by heaviness."""

    LIGHTER = -1
    EQUIVALENT = 0
    HEAVIER = 1


class Flag(str, Enum):
    CONSERVATIVE = "conservative"
    PROJECTION = "projection"
    DEPENDENCE = "dependence_assumed"

    def __str__(self):
        return self.value


def _fmt(x: float) -> str:
    return repr(float(x)).rstrip("0").rstrip(".") if float(x).is_integer() else repr(float(x))


def _tol(tol):
    return RHO_EQ_TOL if tol is None else tol


def _close(a: float, b: float, tol: Optional[float] = None) -> bool:
    return math.isclose(a, b, rel_tol=_tol(tol), abs_tol=_tol(tol))


def _flag(flags, *items):
    if flags is not None:
        flags.update(items)


def _pow(base: float, expo: float) -> float:
    """``base**expo`` for positive base, falling back to log space on overflow."""
    if expo == 0.5:
        r = math.sqrt(base)
    else:
        try:
            r = base ** expo
        except OverflowError:
            r = math.inf
    if r == 0.0 or not math.isfinite(r):
        r = math.exp(expo * math.log(base))
    return r


def _checked_sigma(s: float) -> float:
    if not (s > 0 and math.isfinite(s)):
        raise InvalidClass(f"scale parameter left the representable range: {s!r}")
    return s


# ---------------------------------------------------------------------------
# canonical form and ordering

def power_law(alpha: float) -> TailClass:
    """The class of a density decaying like ``x**-alpha``."""
    return RegularlyVarying(alpha) if alpha > 1 else SUPER_HEAVY


def canonicalize(a: TailClass) -> TailClass:
    if isinstance(a, GenGamma) and a.rho == 0:
        return power_law(-a.nu) if a.nu < -1 else SUPER_HEAVY
    return a


def is_canonical(a: TailClass) -> bool:
    return canonicalize(a) is a


def _triple(a: TailClass):
    """(nu, sigma, rho) view; power laws sit at rho = 0."""
    if isinstance(a, GenGamma):
        return a.nu, a.sigma, a.rho
    if isinstance(a, RegularlyVarying):
        return -a.alpha, 1.0, 0.0
    if isinstance(a, SuperHeavy):
        return -1.0, 1.0, 0.0
    raise TypeError(f"no finite triple for {a!r}")


def tail_exponent(a: TailClass) -> Optional[float]:
    """Density power-law exponent of a polynomially decaying class, else None."""
    if isinstance(a, RegularlyVarying):
        return a.alpha
    if isinstance(a, GenGamma) and a.rho < 0 and a.nu < -1:
        return -a.nu
    return None


def compare(a: TailClass, b: TailClass, tol: Optional[float] = None) -> Ordering:
    """Order two classes by tail heaviness (``a`` relative to ``b``)."""
    a, b = canonicalize(a), canonicalize(b)
    for special, rank in ((SuperLight, Ordering.LIGHTER), (SuperHeavy, Ordering.HEAVIER)):
        ia, ib = isinstance(a, special), isinstance(b, special)
        if ia and ib:
            return Ordering.EQUIVALENT
        if ia:
            return rank
        if ib:
            return Ordering(-rank)
    n1, s1, r1 = _triple(a)
    n2, s2, r2 = _triple(b)
    e1, e2 = max(r1, 0.0), max(r2, 0.0)
    if not _close(e1, e2, tol):
        return Ordering.LIGHTER if e1 > e2 else Ordering.HEAVIER
    if e1 > 0 and not _close(s1, s2, tol):
        return Ordering.LIGHTER if s1 > s2 else Ordering.HEAVIER
    if not _close(n1, n2, tol):
        return Ordering.LIGHTER if n1 < n2 else Ordering.HEAVIER
    return Ordering.EQUIVALENT


_KIND_RANK = {SuperHeavy: 0, RegularlyVarying: 1, GenGamma: 2, SuperLight: 3}


def _key(a: TailClass):
    if isinstance(a, GenGamma):
        return (2, a.nu, a.sigma, a.rho)
    if isinstance(a, RegularlyVarying):
        return (1, a.alpha)
    return (_KIND_RANK[type(a)],)


def max_class(a: TailClass, b: TailClass, tol: Optional[float] = None) -> TailClass:
    """The heavier of two classes.

    Ties between structurally different but equivalent classes are broken by a
    fixed structural key, so the result is commutative and associative.
    """
    a, b = canonicalize(a), canonicalize(b)
    c = compare(a, b, tol)
    if c == Ordering.HEAVIER:
        return a
    if c == Ordering.LIGHTER:
        return b
    return min(a, b, key=_key)


# ---------------------------------------------------------------------------
# operations

def add(a: TailClass, b: TailClass, tol: Optional[float] = None) -> TailClass:
    """Class of ``X + Y`` for independent ``X``, ``Y``."""
    a, b = canonicalize(a), canonicalize(b)
    if isinstance(a, SuperLight):
        return b
    if isinstance(b, SuperLight):
        return a
    if isinstance(a, SuperHeavy) or isinstance(b, SuperHeavy):
        return SUPER_HEAVY
    n1, s1, r1 = _triple(a)
    n2, s2, r2 = _triple(b)
    if not _close(r1, r2, tol) or (r1 < 1 and r2 < 1):
        return max_class(a, b, tol)
    rho = r1
    if _close(rho, 1.0, tol):
        return GenGamma(n1 + n2 + 1, min(s1, s2), 1.0)
    q = -1.0 / (rho - 1)
    sigma = _pow(_pow(s1, q) + _pow(s2, q), 1 - rho)
    if sigma == 0.0 or not math.isfinite(sigma):
        ls = (1 - rho) * _logaddexp(q * math.log(s1), q * math.log(s2))
        sigma = math.exp(ls)
    return GenGamma(n1 + n2 + 1 - rho / 2, _checked_sigma(sigma), rho)


def _logaddexp(x: float, y: float) -> float:
    m = max(x, y)
    return m + math.log1p(math.exp(-abs(x - y)))


def add_n(a: TailClass, n: int, tol: Optional[float] = None) -> TailClass:
    """Class of a sum of ``n`` independent copies, folded as a balanced tree."""
    if n < 1 or int(n) != n:
        raise ValueError(f"copy count must be a positive integer, got {n!r}")
    memo = {1: canonicalize(a)}

    def go(k):
        if k not in memo:
            memo[k] = add(go((k + 1) // 2), go(k // 2), tol)
        return memo[k]

    return go(int(n))


def scalar_mul(c: float, a: TailClass) -> TailClass:
    """Class of ``c * X``."""
    if c == 0:
        raise DegenerateConstant("scalar multiple by zero; fold the constant instead")
    a = canonicalize(a)
    if not isinstance(a, GenGamma):
        return a
    return GenGamma(a.nu, _checked_sigma(a.sigma * _pow(abs(c), -a.rho)), a.rho)


def translate(a: TailClass, c: float = 0.0) -> TailClass:
    """Class of ``X + c``; constant shifts leave the tail unchanged."""
    return canonicalize(a)


def power(a: TailClass, beta: float) -> TailClass:
    """Class of ``|X|**beta``; negative ``beta`` goes through the reciprocal."""
    if beta == 0:
        raise InvalidClass("power with exponent 0 is the constant 1; fold it instead")
    if beta < 0:
        return reciprocal(power(a, -beta))
    a = canonicalize(a)
    if isinstance(a, RegularlyVarying):
        return RegularlyVarying((a.alpha - 1) / beta + 1)
    if not isinstance(a, GenGamma):
        return a
    return canonicalize(GenGamma((a.nu + 1) / beta - 1, a.sigma, a.rho / beta))


def reciprocal(a: TailClass, flags: Optional[set] = None) -> TailClass:
    """Class of ``1/X``.

    Off the invertible branch the density near zero is generic and continuous,
    which makes the reciprocal Cauchy-like.  ``1/SuperLight`` stays SuperLight
    with a flag, since it cannot be decided whether the constant is zero.
    """
    a = canonicalize(a)
    if isinstance(a, SuperLight):
        _flag(flags, Flag.CONSERVATIVE)
        return a
    if isinstance(a, GenGamma) and a.rho != 0 and (a.nu + 1) / a.rho > 0:
        return GenGamma(-a.nu - 2, a.sigma, -a.rho)
    return RegularlyVarying(2.0)


def _power_part(a: TailClass) -> TailClass:
    """The power law dominating a class with rho <= 0."""
    if isinstance(a, GenGamma):
        return canonicalize(GenGamma(a.nu, 1.0, 0.0))
    return a


def multiply(a: TailClass, b: TailClass, flags: Optional[set] = None,
             tol: Optional[float] = None) -> TailClass:
    """Class of ``X * Y`` for independent ``X``, ``Y``."""
    a, b = canonicalize(a), canonicalize(b)
    if isinstance(a, SuperLight):
        return b
    if isinstance(b, SuperLight):
        return a
    if isinstance(a, SuperHeavy) or isinstance(b, SuperHeavy):
        return SUPER_HEAVY
    n1, s1, r1 = _triple(a)
    n2, s2, r2 = _triple(b)
    if (r1 > 0 and r2 > 0) or (r1 < 0 and r2 < 0):
        a1, a2 = abs(r1), abs(r2)
        mu = 1 / a1 + 1 / a2
        e1, e2 = 1 / (mu * a1), 1 / (mu * a2)
        sigma = _gg_product_sigma(mu, s1 * a1, e1, s2 * a2, e2, tol)
        if r1 > 0:
            return GenGamma((n1 / r1 + n2 / r2 - 0.5) / mu, sigma, 1 / mu)
        return GenGamma((n1 / a1 + n2 / a2 + 0.5) / mu, sigma, -1 / mu)
    if r1 > 0:
        a, b, r1, r2 = b, a, r2, r1
    # now r1 <= 0
    if r2 > 0:
        return _power_part(a)
    if r1 < 0 or r2 < 0:
        _flag(flags, Flag.CONSERVATIVE)
    return max_class(_power_part(a), _power_part(b), tol)


def _gg_product_sigma(mu, u1, e1, u2, e2, tol):
    if _close(e1, e2, tol):
        try:
            s = mu * _pow(u1 * u2, e1)
        except OverflowError:
            s = math.inf
    else:
        s = mu * _pow(u1, e1) * _pow(u2, e2)
    if s == 0.0 or not math.isfinite(s):
        s = math.exp(math.log(mu) + e1 * math.log(u1) + e2 * math.log(u2))
    return _checked_sigma(s)


def divide(a: TailClass, b: TailClass, flags: Optional[set] = None,
           tol: Optional[float] = None) -> TailClass:
    """Class of ``X / Y``, i.e. ``X * (1/Y)``."""
    return multiply(a, reciprocal(b, flags), flags, tol)


def density_product(a: TailClass, b: TailClass, flags: Optional[set] = None,
                    tol: Optional[float] = None) -> TailClass:
    """Class of the (unnormalized) pointwise product of two densities.

    With unequal shapes the factor of the larger shape is dropped, which can
    only make the result heavier; that case is flagged as conservative.
    """
    a, b = canonicalize(a), canonicalize(b)
    if isinstance(a, SuperLight):
        return b
    if isinstance(b, SuperLight):
        return a
    n1, s1, r1 = _triple(a)
    n2, s2, r2 = _triple(b)
    if _close(r1, r2, tol):
        return canonicalize(GenGamma(n1 + n2, s1 + s2, r1))
    _flag(flags, Flag.CONSERVATIVE)
    if r1 < r2:
        return canonicalize(GenGamma(n1 + n2, s1, r1))
    return canonicalize(GenGamma(n1 + n2, s2, r2))


def exp_class(a: TailClass, flags: Optional[set] = None) -> TailClass:
    """Class of ``exp(X)``, projected onto the nearest power law."""
    a = canonicalize(a)
    if isinstance(a, SuperLight):
        return a
    _flag(flags, Flag.CONSERVATIVE, Flag.PROJECTION)
    if isinstance(a, GenGamma) and a.rho >= 1:
        return power_law(a.sigma + 1)
    return SUPER_HEAVY


def log_class(a: TailClass, flags: Optional[set] = None) -> TailClass:
    """Class of ``log|X|`` (upper tail)."""
    a = canonicalize(a)
    if isinstance(a, SuperLight):
        return a
    alpha = tail_exponent(a)
    if alpha is not None:
        return GenGamma(0.0, alpha - 1, 1.0)
    if isinstance(a, SuperHeavy) or (isinstance(a, GenGamma) and a.rho < 0):
        # log of a non-integrable power tail: nothing finite can be said
        _flag(flags, Flag.CONSERVATIVE)
        return SUPER_HEAVY
    return SUPER_LIGHT


def lipschitz(L: float, holder_alpha: float, args: Iterable[TailClass],
              flags: Optional[set] = None) -> TailClass:
    """Upper bound for ``f(X_1..X_d)`` with ``|f(x)| <= L * max |x_i|**holder_alpha``."""
    args = list(args)
    if not args:
        raise ValueError("lipschitz needs at least one argument")
    if not L > 0:
        raise ValueError(f"Lipschitz constant must be positive, got {L!r}")
    if not 0 < holder_alpha <= 1:
        raise ValueError(f"Hoelder exponent must lie in (0, 1], got {holder_alpha!r}")
    _flag(flags, Flag.CONSERVATIVE)
    m = reduce(max_class, (power(x, holder_alpha) for x in args))
    return scalar_mul(L, m)


# ---------------------------------------------------------------------------
# serialization

def to_json(a: TailClass) -> dict:
    if isinstance(a, GenGamma):
        return {"kind": "gengamma", "nu": a.nu, "sigma": a.sigma, "rho": a.rho}
    if isinstance(a, RegularlyVarying):
        return {"kind": "rv", "alpha": a.alpha}
    if isinstance(a, SuperHeavy):
        return {"kind": "super_heavy"}
    if isinstance(a, SuperLight):
        return {"kind": "super_light"}
    raise TypeError(f"not a tail class: {a!r}")


def from_json(d: dict) -> TailClass:
    kind = d.get("kind")
    if kind == "gengamma":
        return GenGamma(d["nu"], d["sigma"], d["rho"])
    if kind == "rv":
        return RegularlyVarying(d["alpha"])
    if kind == "super_heavy":
        return SUPER_HEAVY
    if kind == "super_light":
        return SUPER_LIGHT
    raise InvalidClass(f"unknown tail class kind {kind!r}")
