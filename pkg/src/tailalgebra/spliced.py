"""Inverse-CDF machinery for spliced-tail representatives.

The law has a flat density on ``[0, x0)`` equal to the kernel value at ``x0``
and the kernel ``x**nu * exp(-sigma * x**rho)`` beyond.  The tail CDF is
tabulated on log-spaced knots with per-interval Gauss-Legendre integrals;
inversion starts from a monotone cubic interpolant and is refined by Newton
steps, each integrating exactly from the nearest knot.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .representative import SplicedTail

__all__ = ["SplicedSampler", "spliced_sampler", "N_KNOTS", "TAIL_MASS"]

N_KNOTS = 4096
TAIL_MASS = 1e-12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class SplicedSampler:
    def __init__(self, spec: SplicedTail):
        self.spec = spec
        nu, sigma, rho, x0 = spec.nu, spec.sigma, spec.rho, spec.x0
        self._lf0 = nu * math.log(x0) - sigma * x0 ** rho   # log kernel at x0
        self.bulk = x0                                      # bulk mass / f(x0)
        self.xq = self._upper_knot()
        self.knots = np.geomspace(x0, self.xq, N_KNOTS)
        seg = self._integral(self.knots[:-1], self.knots[1:])
        self.cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.total = self.bulk + self.cum[-1]
        # segments far out can round to zero width in cumulative terms
        keep = np.concatenate([[True], np.diff(self.cum) > 0])
        self._guess = PchipInterpolator(self.cum[keep], np.log(self.knots[keep]))

    def _kernel(self, x):
        """Kernel relative to its value at x0."""
        s = self.spec
        return np.exp(s.nu * np.log(x) - s.sigma * x ** s.rho - self._lf0)

    def _integral(self, a, b):
        a, b = np.asarray(a, float), np.asarray(b, float)
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        pts = mid[..., None] + half[..., None] * _GL_X
        return half * (self._kernel(pts) @ _GL_W)

    def _upper_knot(self) -> float:
        """A point beyond which the tail mass is below TAIL_MASS of the total.

        With t = sigma x**rho and s = (nu+1)/rho <= 1, the mass beyond x is
        sigma**-s / rho * Gamma(s, t) <= sigma**-s / rho * t**(s-1) e**-t.
        """
        s = self.spec
        shape = (s.nu + 1) / s.rho
        target = math.log(TAIL_MASS * self.bulk) + self._lf0

        def log_bound(t):
            return -math.log(s.rho) - shape * math.log(s.sigma) + (shape - 1) * math.log(t) - t

        t = max(s.sigma * s.x0 ** s.rho, 1e-300)
        if shape > 1:  # bound only valid for shape <= 1; fall back to a loose one
            t = max(t, 2 * shape)
        while log_bound(t) > target:
            t *= 2
        return max((t / s.sigma) ** (1 / s.rho), s.x0 * (1 + 1e-9))

    # -- public -----------------------------------------------------------------
    def cdf(self, x):
        x = np.asarray(x, float)
        out = np.where(x < self.spec.x0, np.clip(x, 0, None) / self.total, 0.0)
        t = (x >= self.spec.x0)
        if t.any():
            xt = np.minimum(x[t], self.xq)
            j = np.clip(np.searchsorted(self.knots, xt, side="right") - 1, 0, N_KNOTS - 2)
            c = self.cum[j] + self._integral(self.knots[j], xt)
            out[t] = (self.bulk + c) / self.total
        return out

    def ppf(self, u):
        u = np.asarray(u, float)
        c = u * self.total
        out = c.copy()                      # bulk: x = c since density is 1 there
        t = c >= self.bulk
        if t.any():
            ct = np.minimum(c[t] - self.bulk, self.cum[-1])
            j = np.clip(np.searchsorted(self.cum, ct, side="right") - 1, 0, N_KNOTS - 2)
            lo, hi = self.knots[j], self.knots[j + 1]
            x = np.clip(np.exp(self._guess(ct)), lo, hi)
            for _ in range(4):
                g = self.cum[j] + self._integral(lo, x) - ct
                x = np.clip(x - g / self._kernel(x), lo, hi)
            out[t] = x
        return out

    def logpdf(self, x):
        x = np.asarray(x, float)
        lt = math.log(self.total)
        s = self.spec
        with np.errstate(divide="ignore", invalid="ignore"):
            xt = np.maximum(x, s.x0)
            tail = s.nu * np.log(xt) - s.sigma * xt ** s.rho - self._lf0 - lt
        return np.where(x < 0, -np.inf, np.where(x < self.spec.x0, -lt, tail))


@lru_cache(maxsize=64)
def spliced_sampler(spec: SplicedTail) -> SplicedSampler:
    return SplicedSampler(spec)
