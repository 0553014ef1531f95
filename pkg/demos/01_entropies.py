"""Entropies on a finite tracial algebra.

A tracial algebra here is a direct sum of matrix blocks, each with a
positive weight; the trace is the weighted sum of block traces. A state is
represented by a density D with tau(D) = 1, and its entropy is
tau(D log D) (no minus sign, so values are <= 0 when tau(1) >= 1).
"""

import math

from tracevar import (DensityOperator, TracialAlgebra, relative_entropy, renyi_entropy,
                      segal_entropy)
from tracevar.sampling import random_density

m2 = TracialAlgebra.full_matrix(2)

# The normalised trace on M2 is the most mixed state: H = -log 2.
half = DensityOperator.from_diagonal(m2, [0.5, 0.5])
print("H(I/2)            =", segal_entropy(half), " (-log 2 =", -math.log(2), ")")

# A pure state has zero entropy.
pure = DensityOperator.from_diagonal(m2, [1.0, 0.0])
print("H(pure)           =", segal_entropy(pure))

skewed = DensityOperator.from_diagonal(m2, [0.75, 0.25])
print("H(diag(.75,.25))  =", segal_entropy(skewed))

# Renyi entropies log tau(D^a) / (a - 1); with this sign convention the
# family increases towards H as a -> 1 from below and beyond it above.
for a in (0.5, 0.9, 0.99, 1.01, 2.0, 3.0):
    print(f"R_{a:<4}            = {renyi_entropy(skewed, a):.10f}")

# Relative entropy is nonnegative and vanishes on the diagonal.
print("S(skewed, half)   =", relative_entropy(skewed, half))
print("S(skewed, skewed) =", relative_entropy(skewed, skewed))

# Weighted blocks: with tau(1) = 1 the trace itself is a state, and the
# entropy equals the relative entropy to it.
A = TracialAlgebra([(2, 0.25), (1, 0.5)])
tau = DensityOperator(A.identity())
D = DensityOperator(random_density(A, seed=3))
print("weighted algebra: H(D) =", segal_entropy(D), " S(D, tau) =", relative_entropy(D, tau))
