"""The entropy as a supremum over Hermitian operators.

For every Hermitian h, g(h) = tau(D h) - log tau(exp h) is a lower bound
on H(D), and the bound is tight. With full support the maximiser is
h = log D; with a kernel the supremum is only approached.
"""

import math

from tracevar import (DensityOperator, TracialAlgebra, constructive_gibbs_witness,
                      gibbs_ascent, gibbs_objective, segal_entropy)
from tracevar.sampling import random_density, random_hermitian
from tracevar.variational import constructive_gap

A = TracialAlgebra([(2, 0.5), (2, 2.0)])
D = DensityOperator(random_density(A, seed=1))
H = segal_entropy(D)
print("H(D) =", H)

print("\nrandom candidates all sit below H:")
for s in range(5):
    h = random_hermitian(A, seed=s)
    print(f"  g(h_{s}) = {gibbs_objective(D, h):+.6f}")

cand = gibbs_ascent(D)
print("\ngradient ascent:", cand.derivation, "converged" if cand.converged else "not converged")
print("  g(h*) - H =", cand.value - H)

# A density with a two-dimensional kernel. The explicit witness puts
# log D on the support and pushes each kernel cell down far enough that the
# shortfall is log(1 + eps (1 - 2^-k)).
m3 = TracialAlgebra.full_matrix(4)
K = DensityOperator.from_diagonal(m3, [0.6, 0.4, 0.0, 0.0])
print("\nkernel example, H =", segal_entropy(K))
for eps in (1.0, 0.1, 0.01, 0.001):
    w = constructive_gibbs_witness(K, eps)
    k = w.derivation["kernel_cells"]
    print(f"  eps={eps:<6} gap={segal_entropy(K) - w.value:.3e} "
          f"predicted={constructive_gap(eps, k):.3e} (<= eps)")

# Ascent on the same density creeps towards H but never gets there.
for n in (10, 100, 1000):
    c = gibbs_ascent(K, max_iter=n)
    print(f"  ascent after {n:>4} steps: gap {segal_entropy(K) - c.value:.3e}")
print("log(1 + 1) =", math.log(2), "is the worst case of the eps bound at eps = 1")
