import json
import math

import numpy as np
import pytest
import mpmath
from scipy import special, stats

from tailalgebra import model_source
from tailalgebra import tails as T
from tailalgebra.catalog import AtomicDistribution, sample
from tailalgebra.dsl import analyze, compile_model
from tailalgebra.dsl.analysis import Entry, TailReport
from tailalgebra.errors import InsufficientTail, NoRoot, UnsupportedSampler
from tailalgebra.streams import Stream
from tailalgebra.verify import (THRESHOLDS, density_table, forward_sample, hill_alpha,
                                khat_verdict, loglog_fit, loglog_slope, mc_verify,
                                pareto_khat, power_law_verdict, sgd_alpha_oracle,
                                sgd_class, sgd_forward_sample, sgd_program,
                                sgd_stationary_sample)
from tailalgebra.tails import GenGamma, RegularlyVarying

# Kesten roots of E|1 - 2 X^2|^alpha = 1, X ~ N(0, s^2), frozen from the quadrature oracle
KESTEN = {0.4: 4.931020186006173, 0.5: 2.903966228916332, 0.6: 1.798583689906114}


def draws(name, params, n, seed=0):
    return sample(AtomicDistribution(name, params), Stream(seed), n)


def g_of(body):
    return compile_model("model m {\n" + body + "\n}\n")


# -- forward sampling ---------------------------------------------------------------

def test_chi_squared_mean():
    g = compile_model(model_source("chi2"))
    x = forward_sample(g, g.node_of("x"), Stream(0), 1_000_000)
    assert x.mean() == pytest.approx(4, rel=0.01)


def test_cauchy_ratio_median():
    g = compile_model(model_source("cauchy"))
    x = forward_sample(g, g.node_of("t"), Stream(1), 1_000_000)
    assert abs(np.median(x)) < 0.01


def test_forward_sample_deterministic():
    g = compile_model(model_source("student_t"))
    a = forward_sample(g, g.node_of("t"), Stream(3), 1000)
    b = forward_sample(g, g.node_of("t"), Stream(3), 1000)
    assert np.array_equal(a, b)


def test_forward_sample_ops():
    g = g_of("x ~ Exponential(1)\ny = 2 * x + 1\nz = recip(y)\nquery z")
    x = forward_sample(g, g.node_of("z"), Stream(0), 200_000)
    assert np.all((x > 0) & (x <= 1))
    # E[1/(2X+1)] = e^(1/2) E1(1/2) / 2 for X ~ Exp(1)
    exact = 0.5 * math.exp(0.5) * special.exp1(0.5)
    assert x.mean() == pytest.approx(exact, rel=0.01)


def test_shared_draws_are_shared():
    g = g_of("x ~ Normal(0,1)\ny = x - x\nquery y")
    assert np.all(forward_sample(g, g.node_of("y"), Stream(0), 100) == 0)


def test_iid_copies_are_independent():
    g = g_of("v = iid(3, Normal(0,1)^2)\nquery v")
    x = forward_sample(g, g.node_of("v"), Stream(2), 200_000)
    assert x.var() == pytest.approx(6, rel=0.03)


def test_dens_prod_has_no_sampler():
    g = g_of("x ~ Normal(0,1)\nz ~ Normal(0,1)\ny = dens_prod(x, z)\nquery y")
    with pytest.raises(UnsupportedSampler):
        forward_sample(g, g.node_of("y"), Stream(0), 10)


# -- Hill -------------------------------------------------------------------------------

def test_hill_cauchy():
    est = hill_alpha(draws("student_t", (1.0,), 1_000_000))
    assert 1.9 <= est.alpha_hat <= 2.1
    assert est.n_tail == 10_000


def test_hill_pareto():
    est = hill_alpha(draws("pareto", (1.0, 2.0), 1_000_000))
    assert est.alpha_hat == pytest.approx(3, abs=0.1)


def test_hill_stderr_shrinks_like_sqrt_k():
    errs = [hill_alpha(draws("pareto", (1.0, 2.0), n, 5)).stderr for n in (10**4, 10**5, 10**6)]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    assert ratios == pytest.approx([math.sqrt(10)] * 2, rel=0.1)


def test_hill_needs_exceedances():
    with pytest.raises(InsufficientTail):
        hill_alpha(np.arange(1, 100.0), 0.1)
    with pytest.raises(ValueError):
        hill_alpha(np.arange(1, 100.0), 0.9)


def test_exponential_is_not_a_power_law():
    x = draws("exponential", (1.0,), 1_000_000)
    assert hill_alpha(x).alpha_hat > 5
    assert power_law_verdict(x).verdict == "non-power"


@pytest.mark.parametrize("name, params, verdict", [
    ("normal", (0.0, 1.0), "non-power"),
    ("chi_squared", (4.0,), "non-power"),
    ("pareto", (1.0, 2.0), "power-law"),
    ("student_t", (3.0,), "power-law"),
    ("cauchy", (0.0, 1.0), "power-law"),
])
def test_power_law_verdict(name, params, verdict):
    assert power_law_verdict(draws(name, params, 1_000_000, 7)).verdict == verdict


# -- k-hat --------------------------------------------------------------------------------

def test_khat_self_ratio_sentinel():
    k = pareto_khat(np.zeros(1000))
    assert k == -math.inf and khat_verdict(k) == "pass"


def test_khat_cauchy_targets():
    n = 100_000
    x = draws("student_t", (1.0,), n, 1)
    good = stats.cauchy.logpdf(x) - stats.t(1).logpdf(x)
    assert pareto_khat(good) == -math.inf
    z = draws("normal", (0.0, 1.0), n, 2)
    bad = stats.cauchy.logpdf(z) - stats.norm.logpdf(z)
    assert khat_verdict(pareto_khat(bad)) == "fail"


def test_khat_recovers_pareto_shape():
    # ratios that are Pareto with survival exponent 2 have shape 1/2
    lw = np.log(draws("pareto", (1.0, 2.0), 100_000, 3))
    assert pareto_khat(lw) == pytest.approx(0.5, abs=0.1)


def test_khat_rejects_nonfinite():
    with pytest.raises(ValueError):
        pareto_khat([0.0, np.inf])


# -- log-log slopes ---------------------------------------------------------------------

def test_loglog_pareto():
    assert loglog_slope(draws("pareto", (1.0, 2.0), 1_000_000)) == pytest.approx(-3, abs=0.15)


def test_loglog_student():
    assert loglog_slope(draws("student_t", (3.0,), 1_000_000)) == pytest.approx(-4, abs=0.3)


def test_loglog_normal_is_curved():
    fit = loglog_fit(draws("normal", (0.0, 1.0), 1_000_000))
    assert not fit.is_power and fit.slope < -5
    assert loglog_fit(draws("pareto", (1.0, 2.0), 1_000_000)).is_power


def test_loglog_insufficient():
    with pytest.raises(InsufficientTail):
        loglog_slope(draws("pareto", (1.0, 2.0), 1000))


def test_density_table():
    rows = density_table(draws("exponential", (1.0,), 1_000_000))
    assert len(rows) == 60
    x, ld = np.array(rows).T
    assert np.allclose(ld, -x, atol=0.3)


# -- mc_verify --------------------------------------------------------------------------

def test_verify_cauchy_consistent():
    g = compile_model(model_source("cauchy"))
    vr = mc_verify(g, analyze(g), 1_000_000, seed=0)
    (e,) = vr.entries
    assert e.verdict == "Consistent"
    assert e.estimate.alpha_hat == pytest.approx(2, abs=0.1)


def test_verify_chi_squared_consistent():
    g = compile_model(model_source("chi2"))
    (e,) = mc_verify(g, analyze(g), 1_000_000, seed=0).entries
    assert e.verdict == "Consistent"


def _with_class(g, rep, node, cls):
    entries = dict(rep.entries)
    old = entries[node]
    entries[node] = Entry(old.id, old.expr, old.name, cls, old.warnings, old.error)
    return TailReport(rep.model, entries)


def test_wrong_power_law_is_inconsistent():
    g = compile_model(model_source("cauchy"))
    i = g.node_of("t")
    wrong = _with_class(g, analyze(g), i, RegularlyVarying(5))
    assert mc_verify(g, wrong, 1_000_000, seed=0)[i].verdict == "Inconsistent"


def test_wrong_light_class_is_inconsistent():
    g = compile_model(model_source("chi2"))
    i = g.node_of("x")
    wrong = _with_class(g, analyze(g), i, GenGamma(1, 1.0, 1))
    assert mc_verify(g, wrong, 1_000_000, seed=0)[i].verdict == "Inconsistent"
    wrong = _with_class(g, analyze(g), i, GenGamma(0, 0.5, 2))
    assert mc_verify(g, wrong, 1_000_000, seed=0)[i].verdict == "Inconsistent"


def test_verify_inconclusive_cases():
    g = g_of("x ~ Normal(0,1)\nz ~ Normal(0,1)\ny = dens_prod(x, z)\nu = Uniform(0,1)\n"
             "query y\nquery u")
    vr = mc_verify(g, analyze(g), 10_000, seed=0)
    assert [e.verdict for e in vr.entries] == ["Inconclusive", "Inconclusive"]
    g = compile_model(model_source("cauchy"))
    assert mc_verify(g, analyze(g), 500, seed=0).entries[0].verdict == "Inconclusive"


def test_verify_report_deterministic():
    g = compile_model(model_source("products"))
    a = json.dumps(mc_verify(g, analyze(g), 100_000, seed=4).to_json(), sort_keys=True)
    b = json.dumps(mc_verify(g, analyze(g), 100_000, seed=4).to_json(), sort_keys=True)
    assert a == b
    assert json.loads(a)["thresholds"]["alpha_abs"] == THRESHOLDS["alpha_abs"]


# -- SGD -------------------------------------------------------------------------------

@pytest.mark.parametrize("s, alpha", sorted(KESTEN.items()))
def test_kesten_oracle_frozen(s, alpha):
    assert sgd_alpha_oracle(2.0, s) == pytest.approx(alpha, rel=1e-8)


def test_kesten_root_solves_moment_condition():
    # independent check with mpmath, splitting at the kink of |1 - c z^2|
    mpmath.mp.dps = 25
    for s, a in KESTEN.items():
        c = 2.0 * s * s
        f = lambda z: abs(1 - c * z * z) ** a * mpmath.npdf(z)
        m = 2 * mpmath.quad(f, [0, 1 / mpmath.sqrt(c), mpmath.inf])
        assert float(m) == pytest.approx(1, abs=1e-9)


def test_kesten_oracle_monotone():
    assert sgd_alpha_oracle(2, 0.4) > sgd_alpha_oracle(2, 0.5) > sgd_alpha_oracle(2, 0.6)


def test_kesten_no_root_for_small_steps():
    with pytest.raises(NoRoot):
        sgd_alpha_oracle(1e-3, 0.5)


def test_sgd_program_matches_direct_iteration():
    g = compile_model(sgd_program(2.0, 0.5, 10))
    via_graph = analyze(g).cls(g.node_of("b10"))
    assert T.compare(via_graph, sgd_class(2.0, 0.5, 10), 1e-12) == 0
    assert isinstance(via_graph, GenGamma)
    assert via_graph.nu == pytest.approx(sgd_class(2.0, 0.5, 10).nu, abs=1e-12)


def test_sgd_class_tends_to_power_law_shape():
    c = sgd_class(2.0, 0.5, 1000)
    assert c.rho == pytest.approx(1e-3, rel=0.01)
    assert c.nu == pytest.approx(-1, abs=1e-2)


def test_stationary_sampler_matches_forward_simulation():
    a = sgd_stationary_sample(2.0, 0.5, 20_000, Stream(1), steps=300)
    b = sgd_forward_sample(2.0, 0.5, 20_000, Stream(2), steps=300)
    assert stats.ks_2samp(a, b).pvalue > 1e-3
    c = sgd_stationary_sample(2.0, 0.5, 20_000, Stream(1), steps=300)
    assert np.array_equal(a, c)
