"""
Tail classes and their algebra
==============================

A density with tail ``c x**nu exp(-sigma x**rho)`` is summarized by the
triple ``(nu, sigma, rho)``.  Operations on random variables act on triples.
"""

from tailalgebra import tails as T

# a standard normal, and its square
normal = T.GenGamma(0, 0.5, 2)
square = T.power(normal, 2)
print("N(0,1)   ", normal)
print("N(0,1)^2 ", square)

# adding k squares gives the chi-squared tail (k/2 - 1, 1/2, 1)
for k in (1, 2, 4, 10):
    print(f"chi2({k:2d}) ", T.add_n(square, k))

# a normal over the root of a scaled chi-squared is a power law
nu = 3
root = T.power(T.scalar_mul(1 / nu, T.add_n(square, nu)), 0.5)
print("t(3)     ", T.divide(normal, root))

# products move the shape parameter rho towards zero
z = normal
for k in range(1, 6):
    z = T.multiply(z, z)
    print(f"product of 2^{k} normals", z)

# classes are ordered by heaviness
print(T.compare(normal, T.RegularlyVarying(2)))
