"""
Posterior tails by a backward pass
==================================

For a Bayesian linear regression with an inverse-gamma prior on the residual
variance, the posterior of the variance is again inverse-gamma.  Its tail is
recovered without integrating anything.
"""

from tailalgebra import compile_model, model_source
from tailalgebra import tails as T
from tailalgebra.posterior import PosteriorQuery, posterior

g = compile_model(model_source("blr"))
res = posterior(PosteriorQuery(g, "s2"))
print("prior      ", res.prior)
print("likelihood ", res.inverted[0], "per observation")
print("corrections", [(c.op, c.pulled) for c in res.corrections])
print("posterior  ", res.cls)

# with a = 2 and n = 5 the conjugate posterior has density exponent -(a + n/2) - 1
print("conjugate exponent", -(2 + 5 / 2) - 1)

# samplers usually work with log(s2); mapping back through exp keeps the power law
print("exp(log-class)", T.exp_class(T.log_class(res.cls)))
# a normal on the log scale would impose a log-normal tail instead
flags = set()
print("exp(normal)   ", T.exp_class(T.GenGamma(0, 0.5, 2), flags), sorted(map(str, flags)))
