"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (printed in the terminal summary and to
stdout) and then asserts.  Running this file as a script prints the same lines.
"""

import math
import random
import time

import numpy as np
from hypothesis import given, settings
from scipy import integrate, special, stats

from conftest import ACCEPTANCE
from test_catalog import SCIPY
from strategies import classes, invertible
from tailalgebra import bundled_models, model_source
from tailalgebra import tails as T
from tailalgebra.catalog import (FAMILIES, AtomicDistribution, class_of, logpdf,
                                 representative_logpdf, sample, sample_representative)
from tailalgebra.dsl import analyze, compile_model
from tailalgebra.posterior import PosteriorQuery, posterior
from tailalgebra.representative import powerlaw_alpha, representative
from tailalgebra.streams import Stream
from tailalgebra.tails import Flag, GenGamma, RegularlyVarying
from tailalgebra.verify import (hill_alpha, mc_verify, pareto_khat, power_law_verdict,
                                sgd_alpha_oracle, sgd_class, sgd_stationary_sample)


def record(n, title, checks):
    """``checks``: list of (description, ok).  Prints and stores one line."""
    ok = all(c for _, c in checks)
    failed = [d for d, c in checks if not c]
    detail = "; ".join(failed) if failed else "; ".join(d for d, _ in checks)
    ACCEPTANCE[n] = (ok, title, detail)
    print(f"{'PASS' if ok else 'FAIL'} {n}. {title}: {detail}")
    return ok


def cls_of(src, var):
    g = compile_model(src)
    return analyze(g).cls(g.node_of(var))


def model(body):
    return "model m {\n" + body + "\n}\n"


def same(a, b):
    """Exact equality after canonicalization."""
    return T.canonicalize(a) == T.canonicalize(b)


# ---------------------------------------------------------------------------

def test_1_symbolic_identities():
    t0 = time.perf_counter()
    checks = []
    chi = [same(cls_of(model(f"v = iid({k}, Normal(0,1)^2)\nquery v"), "v"),
                GenGamma(k / 2 - 1, 0.5, 1)) for k in range(1, 11)]
    checks.append(("chi-squared k=1..10", all(chi)))
    g = compile_model(model_source("products"))
    rep = analyze(g)
    checks.append(("products of two exponentials, normals, reciprocal normals", [
        rep.cls(g.node_of(v)) for v in ("exp_product", "normal_product", "recip_product")]
        == [GenGamma(-0.25, 2, 0.5), GenGamma(-0.5, 1, 1), GenGamma(-1.5, 1, -1)]))
    g = compile_model(model_source("reciprocals"))
    rep = analyze(g)
    checks.append(("reciprocal table (4 rows)", [
        rep.cls(g.node_of(v)) for v in ("recip_normal", "inverse_exponential", "inverse_t",
                                        "inverse_cauchy")]
        == [GenGamma(-2, 0.5, -2), GenGamma(-2, 2, -1), RegularlyVarying(2),
            RegularlyVarying(2)]))
    st = [same(cls_of(model(f"x ~ Normal(0,1)\nv = iid({nu}, Normal(0,1)^2)\n"
                            f"t = x / sqrt(v / {nu})\nquery t"), "t"), RegularlyVarying(nu + 1))
          for nu in range(1, 31)]
    checks.append(("Student t pipeline nu=1..30", all(st)))
    checks.append(("Cauchy ratio", same(cls_of(model_source("cauchy"), "t"),
                                        RegularlyVarying(2))))
    b = cls_of(model("s = iid(16, Normal(-1,1)*Normal(-1,1)*Normal(-1,1))\nquery s"), "s")
    checks.append(("bilinear sigma=3/2 rho=2/3", isinstance(b, GenGamma)
                   and b.sigma == 1.5 and b.rho == 2 / 3))
    dt = time.perf_counter() - t0
    checks.append((f"{dt:.2f}s < 1s", dt < 1))
    assert record(1, "symbolic identity suite", checks)


def lognormal_errors(ks=(1, 5, 10)):
    """Sup |log p_rep - log p_lognormal| on [1, 100] for V_k = (Z_k / tau^n)^(1/sqrt n)."""
    tau = math.exp(0.5 * (special.digamma(0.5) + math.log(2)))   # exp E log|X|
    x = np.linspace(1, 100, 2000)
    exact = stats.lognorm(1).logpdf(x)
    z = GenGamma(0, 0.5, 2)
    out = {}
    for k in range(1, max(ks) + 1):
        z = T.multiply(z, z)
        if k in ks:
            n = 2 ** k
            v = T.power(T.scalar_mul(tau ** -n, z), n ** -0.5)
            lp = representative_logpdf(representative(v), x) + math.log(2)   # law of |X|
            out[k] = float(np.max(np.abs(lp - exact)))
    return out


def test_2_lognormal_recursion():
    t0 = time.perf_counter()
    z, ok = GenGamma(0, 0.5, 2), True
    for k in range(1, 21):
        z = T.multiply(z, z)
        want = (-1 + 2.0 ** -k, 2.0 ** (k - 1), 2.0 ** (1 - k))
        ok &= all(abs(a - b) <= 1e-12 * abs(b) for a, b in zip((z.nu, z.sigma, z.rho), want))
    errs = lognormal_errors()
    dec = errs[1] > errs[5] > errs[10]
    dt = time.perf_counter() - t0
    assert record(2, "log-normal recursion", [
        ("recursion k<=20 within 1e-12", ok),
        ("sup-error over [1,100] strictly decreasing across k=1,5,10 "
         f"(got {errs[1]:.3g}, {errs[5]:.3g}, {errs[10]:.3g})", dec),
        (f"{dt:.2f}s < 5s", dt < 5)])


TABLE2 = {
    "Cauchy": (model("t = Normal(0,1) / Normal(0,1)\nquery t"), "t", 2.0),
    "IG": (model("e ~ Exponential(1)\nx = recip(e)\nquery x"), "x", 2.0),
    "StudentT": (model("x ~ Normal(0,1)\nv = iid(2, Normal(0,1)^2)\nt = x / sqrt(v / 2)\n"
                       "query t"), "t", 3.0),
    "Chi2": (model("x = iid(4, Normal(0,1)^2)\nquery x"), "x", math.inf),
    "Normal": (model("x = iid(4, Normal(0,1))\nquery x"), "x", math.inf),
}


def test_3_tail_index_recovery():
    n, checks = 1_000_000, []
    for i, (name, (src, var, alpha)) in enumerate(TABLE2.items()):
        t0 = time.perf_counter()
        spec = representative(cls_of(src, var))
        x = sample_representative(spec, Stream(2024, (i,)), n)
        if math.isfinite(alpha):
            a = hill_alpha(x).alpha_hat
            ok = abs(a - alpha) <= 0.3
            desc = f"{name} alpha_hat={a:.3f} (target {alpha:g})"
        else:
            v = power_law_verdict(x)
            ok = v.verdict == "non-power"
            desc = f"{name} {v.verdict} (drift z={v.z:.1f})"
        dt = time.perf_counter() - t0
        checks.append((desc, ok))
        checks.append((f"{name} {dt:.1f}s < 60s", dt < 60))
    assert record(3, "tail-index recovery", checks)


def _calibrated(spec, target_draws, stream, n):
    """Representative draws and log-density, scaled to the target's median |x|."""
    y = sample_representative(spec, stream, n)
    s = np.median(np.abs(target_draws)) / np.median(np.abs(y))
    return s * y, lambda x: representative_logpdf(spec, np.asarray(x) / s) - math.log(s)


def test_4_khat_thresholds():
    t0 = time.perf_counter()
    n = 100_000
    g = compile_model(TABLE2["Cauchy"][0])
    target = sample(AtomicDistribution("cauchy", (0, 1)), Stream(7, (0,)), n)
    spec = representative(analyze(g).cls(g.node_of("t")))
    y, lq = _calibrated(spec, target, Stream(7, (1,)), n)
    k_good = pareto_khat(stats.cauchy.logpdf(y) - lq(y))
    z = sample(AtomicDistribution("normal", (0, 1)), Stream(7, (2,)), n)
    k_bad = pareto_khat(stats.cauchy.logpdf(z) - stats.norm.logpdf(z))
    # chi-squared is supported on x > 0: fold the symmetric representative
    g = compile_model(TABLE2["Chi2"][0])
    spec = representative(analyze(g).cls(g.node_of("x")))
    chi = sample(AtomicDistribution("chi_squared", (4,)), Stream(7, (3,)), n)
    y, lq = _calibrated(spec, chi, Stream(7, (4,)), n)
    y = np.abs(y)
    k_chi = pareto_khat(stats.chi2(4).logpdf(y) - (lq(y) + math.log(2)))
    dt = time.perf_counter() - t0
    assert record(4, "k-hat thresholds", [
        (f"Cauchy/representative k={k_good:.3g} <= 0.2", k_good <= 0.2),
        (f"Cauchy/Normal k={k_bad:.3g} > 0.7", k_bad > 0.7),
        (f"Chi2/representative k={k_chi:.3g} <= 0.2", k_chi <= 0.2),
        (f"{dt:.1f}s < 30s", dt < 30)])


def _k0_log_slope(z, lam=1.0):
    """d/dz log(2 lam^2 K0(2 lam sqrt z)) with K0, K1 from their integral forms."""
    x = 2 * lam * math.sqrt(z)
    # K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, scaled by e^x for range;
    # the integrand is below e^-745 past t_max
    t_max = math.acosh(1 + 745 / x)
    k0 = integrate.quad(lambda t: math.exp(-x * (math.cosh(t) - 1)), 0, t_max,
                        epsabs=0, epsrel=1e-12, limit=200)[0]
    k1 = integrate.quad(lambda t: math.cosh(t) * math.exp(-x * (math.cosh(t) - 1)), 0, t_max,
                        epsabs=0, epsrel=1e-12, limit=200)[0]
    return -(k1 / k0) * lam / math.sqrt(z)


def test_5_product_density_oracle():
    c = cls_of(model_source("products"), "exp_product")
    zs = np.geomspace(1e2, 1e4, 25)
    worst = 0.0
    for z in zs:
        oracle = _k0_log_slope(z)
        predicted = c.nu / z - c.sigma * c.rho * z ** (c.rho - 1)
        worst = max(worst, abs(predicted / oracle - 1))
    # the quadrature oracle itself agrees with scipy's Bessel functions
    ref = max(abs(_k0_log_slope(z) / (-special.k1e(2 * math.sqrt(z)) / special.k0e(2 * math.sqrt(z))
                                    / math.sqrt(z)) - 1) for z in zs)
    assert record(5, "product-density oracle", [
        (f"class (nu, sigma, rho)=({c.nu:g}, {c.sigma:g}, {c.rho:g}); max relative slope "
         f"error {worst:.2e} <= 2%", worst <= 0.02),
        (f"quadrature oracle vs scipy {ref:.1e}", ref < 1e-8)])


def test_6_blr_posterior():
    g = compile_model(model_source("blr"))
    res = posterior(PosteriorQuery(g, "s2"))
    a0, n = 2, len(g.observed)
    post = res.cls
    ig_ok = isinstance(post, GenGamma) and post.rho == -1 and post.nu == -(a0 + n / 2) - 1
    # the PPL works with log s2; pushing an exponential-tailed unconstrained law
    # back through exp recovers the inverse-gamma power law
    flags = set()
    back = T.exp_class(T.log_class(post), flags)
    back_ok = isinstance(back, RegularlyVarying) and back.alpha == -post.nu
    gflags = set()
    gauss = T.exp_class(GenGamma(0, 0.5, 2), gflags)
    gauss_ok = gauss == RegularlyVarying(1.5) and Flag.PROJECTION in gflags
    assert record(6, "BLR posterior", [
        (f"s2 | y ~ ({post.nu:g}, {post.sigma:g}, {post.rho:g}), conjugate exponent "
         f"{-(a0 + n / 2) - 1:g}", ig_ok),
        (f"exp(log-class) = R_{getattr(back, 'alpha', float('nan')):g}", back_ok),
        ("exp(Normal) is only a projected R_1.5 (log-normal tail)", gauss_ok)])


def test_7_sgd_invariant_law():
    t0 = time.perf_counter()
    checks = []
    for i, s in enumerate((0.4, 0.5, 0.6)):
        oracle = sgd_alpha_oracle(2.0, s)
        cls = sgd_class(2.0, s, 10_000)
        pa = powerlaw_alpha(cls)
        checks.append((f"sigma_x={s}: powerlaw_alpha={pa:.3f} vs oracle {oracle:.3f}",
                       abs(pa / oracle - 1) <= 0.25))
        x = sgd_stationary_sample(2.0, s, 1_000_000, Stream(77, (i,)), steps=10_000)
        # Hill gives the density exponent; the oracle is the survival exponent
        a = hill_alpha(x, 0.001).alpha_hat - 1
        checks.append((f"sigma_x={s}: Hill {a:.3f}", abs(a - oracle) <= 0.5))
    dt = time.perf_counter() - t0
    checks.append((f"{dt:.0f}s < 300s", dt < 300))
    assert record(7, "SGD invariant law", checks)


def _slope_ok(name):
    params, law = SCIPY[name]
    d = AtomicDistribution(name, params)
    cls = class_of(d)
    x = float(law.isf(1e-8))
    h = x * 1e-5
    slope = (logpdf(d, x + h) - logpdf(d, x - h)) / (2 * h)
    if isinstance(cls, RegularlyVarying):
        pred = -cls.alpha / x
    else:
        pred = cls.nu / x - cls.sigma * cls.rho * x ** (cls.rho - 1)
    return abs(slope / pred - 1) <= 0.01


def test_8_property_suites():
    fails = []

    @settings(max_examples=10_000, deadline=None, database=None)
    @given(classes, classes, classes)
    def algebra(a, b, c):
        for op in (T.add, T.max_class, T.multiply, T.density_product):
            assert T.is_canonical(op(a, b))
            assert T.compare(op(a, b), op(b, a), 1e-9) == 0
        assert T.compare(a, b) == -T.compare(b, a)
        if T.compare(a, b) >= 0 and T.compare(b, c) >= 0:
            assert T.compare(a, c) >= 0
        assert T.compare(T.add(T.add(a, b), c), T.add(a, T.add(b, c)), 1e-9) == 0

    @settings(max_examples=10_000, deadline=None, database=None)
    @given(invertible)
    def involution(a):
        assert T.reciprocal(T.reciprocal(a)) == a

    for name, prop in (("algebra closure/ordering/commutativity", algebra),
                       ("reciprocal involution", involution)):
        try:
            prop()
        except AssertionError as ex:      # hypothesis re-raises the minimal failure
            fails.append(f"{name}: {ex}")

    order_ok = True
    for name in bundled_models():
        g = compile_model(model_source(name))
        base = analyze(g)
        order_ok &= all(base.same_classes(analyze(g, rng=random.Random(s))) for s in range(20))

    g = compile_model(model_source("products"))
    rep = analyze(g)
    det = (mc_verify(g, rep, 50_000, seed=3).to_json() == mc_verify(g, rep, 50_000, seed=3).to_json()
           and all(np.array_equal(sample(AtomicDistribution(n, p), Stream(1), 100),
                                  sample(AtomicDistribution(n, p), Stream(1), 100))
                   for n, (p, _) in SCIPY.items()))

    sampleable = sorted(n for n, f in FAMILIES.items() if f.draw is not None and n != "uniform")
    slope_bad = [n for n in sampleable if not _slope_ok(n)]
    assert record(8, "property suites", [
        ("10^4-example algebra fuzz" if not fails else "; ".join(fails), not fails),
        ("analyze order independence", order_ok),
        ("seeded determinism", det),
        (f"slope test for {len(sampleable)} sampleable families"
         + (f" (failed: {slope_bad})" if slope_bad else ""), not slope_bad)])


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
