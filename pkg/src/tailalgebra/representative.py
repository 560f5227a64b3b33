"""Sampleable stand-ins whose tails lie in a prescribed class.

``representative`` picks, for a tail class, one of

* ``StudentT(df)`` for power laws (density exponent ``df + 1``),
* ``SymGenGamma(nu, sigma, rho)``, the symmetrized generalized Gamma law,
* ``SplicedTail(nu, sigma, rho, x0)`` when the generalized Gamma kernel is not
  integrable at the origin: a flat bulk on ``[0, x0)`` glued to the exact tail.

Very slowly decaying classes (``0 < rho <= epsilon``) are approximated by a
Student t whose degrees of freedom solve ``E X**alpha = 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from .errors import InvalidClass, NoRepresentative, NoRoot
from .tails import (Flag, GenGamma, RegularlyVarying, SuperHeavy, SuperLight,
                    TailClass, canonicalize)

__all__ = ["RepresentativeConfig", "StudentT", "SymGenGamma", "SplicedTail",
           "RepresentativeSpec", "log_moment", "powerlaw_alpha", "representative",
           "spec_to_json", "spec_from_json"]

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class RepresentativeConfig:
    epsilon: float = 0.1
    alpha_bracket_max: float = 1e6
    root_tol: float = 1e-9
    min_df: float = 0.1
    super_heavy_df: float = 0.5
    # "moment" solves E X^alpha = 2; "exponent" uses |nu - sigma*rho| - 1
    powerlaw_method: str = "moment"

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not self.alpha_bracket_max > 1:
            raise ValueError("alpha_bracket_max must exceed 1")
        if not self.root_tol > 0:
            raise ValueError("root_tol must be positive")
        if not self.min_df > 0 or not self.super_heavy_df > 0:
            raise ValueError("degrees-of-freedom floors must be positive")
        if self.powerlaw_method not in ("moment", "exponent"):
            raise ValueError(f"unknown powerlaw_method {self.powerlaw_method!r}")


@dataclass(frozen=True)
class StudentT:
    df: float

    def __post_init__(self):
        if not (self.df > 0 and math.isfinite(self.df)):
            raise InvalidClass(f"StudentT.df must be positive, got {self.df!r}")
        object.__setattr__(self, "df", float(self.df))


@dataclass(frozen=True)
class SymGenGamma:
    nu: float
    sigma: float
    rho: float

    def __post_init__(self):
        for f in ("nu", "sigma", "rho"):
            object.__setattr__(self, f, float(getattr(self, f)))
        if self.rho == 0 or not self.sigma > 0 or not (self.nu + 1) / self.rho > 0:
            raise InvalidClass(f"not a normalizable generalized Gamma law: {self}")

    @property
    def shape(self) -> float:
        return (self.nu + 1) / self.rho


@dataclass(frozen=True)
class SplicedTail:
    nu: float
    sigma: float
    rho: float
    x0: float

    def __post_init__(self):
        for f in ("nu", "sigma", "rho", "x0"):
            object.__setattr__(self, f, float(getattr(self, f)))
        if not (self.rho > 0 and self.sigma > 0 and self.x0 > 0):
            raise InvalidClass(f"invalid spliced tail: {self}")
        # the kernel must be non-increasing past x0
        if self.nu > 0 and self.x0 ** self.rho < self.nu / (self.sigma * self.rho) * (1 - 1e-12):
            raise InvalidClass(f"spliced tail density increases beyond x0: {self}")


RepresentativeSpec = Union[StudentT, SymGenGamma, SplicedTail]


def log_moment(a: GenGamma, r: float) -> float:
    """``log E X**r`` for the generalized Gamma law of ``a`` (requires rho > 0)."""
    s = (a.nu + 1) / a.rho
    return -(r / a.rho) * math.log(a.sigma) + math.lgamma(s + r / a.rho) - math.lgamma(s)


def powerlaw_alpha(a: GenGamma, cfg: RepresentativeConfig = RepresentativeConfig()) -> float:
    """Root ``alpha`` of ``E X**alpha = 2`` for the generalized Gamma law of ``a``."""
    if not isinstance(a, GenGamma) or not a.rho > 0 or not (a.nu + 1) / a.rho > 0:
        raise InvalidClass(f"moment rule needs rho > 0 and (nu+1)/rho > 0, got {a}")
    lo, hi = 0.0, 1.0
    while log_moment(a, hi) < LOG2:
        lo, hi = hi, 2 * hi
        if hi > cfg.alpha_bracket_max:
            raise NoRoot(f"E X^r < 2 for every r <= {cfg.alpha_bracket_max:g} for class {a}")
    while hi - lo > cfg.root_tol:
        mid = 0.5 * (lo + hi)
        if log_moment(a, mid) < LOG2:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _mode(nu: float, sigma: float, rho: float) -> float:
    if nu > 0 and rho > 0:
        return (nu / (sigma * rho)) ** (1 / rho)
    return 0.0


def representative(a: TailClass, cfg: RepresentativeConfig = RepresentativeConfig(),
                   flags: Optional[set] = None) -> RepresentativeSpec:
    """Pick a sampleable law whose tail lies in class ``a``."""
    a = canonicalize(a)

    def student(df, projected=False):
        if projected and flags is not None:
            flags.add(Flag.PROJECTION)
        return StudentT(max(df, cfg.min_df))

    if isinstance(a, SuperLight):
        raise NoRepresentative("super-light classes have no tail to represent")
    if isinstance(a, SuperHeavy):
        return student(cfg.super_heavy_df, projected=True)
    if isinstance(a, RegularlyVarying):
        return student(a.alpha - 1)
    nu, sigma, rho = a.nu, a.sigma, a.rho
    if rho < 0:
        if nu < -1:
            return student(-nu - 1)
        return student(cfg.super_heavy_df, projected=True)
    integrable = (nu + 1) / rho > 0
    if rho > cfg.epsilon:
        if integrable:
            return SymGenGamma(nu, sigma, rho)
        return SplicedTail(nu, sigma, rho, max(1.0, _mode(nu, sigma, rho)))
    # very heavy: 0 < rho <= epsilon
    if flags is not None:
        flags.add(Flag.PROJECTION)
    if cfg.powerlaw_method == "exponent" or not integrable:
        return student(abs(nu - sigma * rho) - 1)
    try:
        return student(powerlaw_alpha(a, cfg))
    except NoRoot:
        return SymGenGamma(nu, sigma, rho)


def spec_to_json(spec: RepresentativeSpec) -> dict:
    if isinstance(spec, StudentT):
        return {"student_t": {"df": spec.df}}
    if isinstance(spec, SymGenGamma):
        return {"sym_gen_gamma": {"nu": spec.nu, "sigma": spec.sigma, "rho": spec.rho}}
    if isinstance(spec, SplicedTail):
        return {"spliced_tail": {"nu": spec.nu, "sigma": spec.sigma, "rho": spec.rho,
                                 "x0": spec.x0}}
    raise TypeError(f"not a representative spec: {spec!r}")


def spec_from_json(d: dict) -> RepresentativeSpec:
    ((kind, p),) = d.items()
    cls = {"student_t": StudentT, "sym_gen_gamma": SymGenGamma,
           "spliced_tail": SplicedTail}.get(kind)
    if cls is None:
        raise InvalidClass(f"unknown representative kind {kind!r}")
    return cls(**p)
