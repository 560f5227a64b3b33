"""
Heavy tails from stochastic gradient descent
============================================

Constant step-size SGD on one-dimensional least squares,
``b <- (1 - delta x**2) b + delta y x``, has a power-law stationary law.
Compare the algebra's prediction with the exact tail index and with data.
"""

from tailalgebra.representative import powerlaw_alpha
from tailalgebra.streams import Stream
from tailalgebra.verify import hill_alpha, sgd_alpha_oracle, sgd_class, sgd_stationary_sample

delta = 2.0
for i, sx in enumerate((0.4, 0.5, 0.6)):
    # exact survival exponent: E|1 - delta X^2|^alpha = 1
    oracle = sgd_alpha_oracle(delta, sx)
    # iterate the algebra, then read off a power law
    cls = sgd_class(delta, sx, 10_000)
    predicted = powerlaw_alpha(cls)
    # Hill estimate from a million stationary draws (density exponent minus one)
    x = sgd_stationary_sample(delta, sx, 1_000_000, Stream(0, (i,)))
    observed = hill_alpha(x, 0.001).alpha_hat - 1
    print(f"sigma_x={sx}: exact {oracle:.3f}  algebra {predicted:.3f}  Hill {observed:.3f}")
