"""Jensen's trace inequality and data processing under pinchings.

A pinching E replaces h by its cell averages over a resolution of
identity. For convex f, tau(f(E h)) <= tau(f(h)); for operator convex f
even f(E h) <= E f(h) as operators. With the sign convention used here
the entropy can only drop under such maps: H(E D) <= H(D).
"""

import math

import numpy as np

from tracevar import (DensityOperator, PinchingMap, ScalarFunction, TracialAlgebra,
                      UnitaryMixtureMap, apply_function, entropy_over_subalgebras,
                      segal_entropy, trace_functional)
from tracevar.sampling import random_density, random_psd, random_resolution, random_unitary

A = TracialAlgebra.full_matrix(3)
h = random_psd(A, seed=2)
E = PinchingMap(random_resolution(A, seed=4, cells=2))

for f in (ScalarFunction.power(2), ScalarFunction.t_log_t(), ScalarFunction.power(0.5)):
    print(f"{f.name:<12} tau(f(Eh)) = {trace_functional(f, E(h)):+.6f}   "
          f"tau(f(h)) = {trace_functional(f, h):+.6f}   ({f.convexity})")

gap = (E(apply_function(ScalarFunction.power(2), h))
       - apply_function(ScalarFunction.power(2), E(h))).symmetrized()
print("\nspectrum of E(h^2) - (Eh)^2:", np.concatenate([v for v, _ in gap.eigh]).round(6))

# Power 3 is not operator convex, yet the operator inequality survives here:
# both sides are scalar on each cell, so it reduces to scalar Jensen per cell.
cube = ScalarFunction.power(3)
worst = math.inf
for s in range(200):
    x = random_psd(A, seed=s)
    P = PinchingMap(random_resolution(A, seed=1000 + s, cells=2))
    d = (P(apply_function(cube, x)) - apply_function(cube, P(x))).symmetrized()
    worst = min(worst, min(float(v.min()) for v, _ in d.eigh))
print("power 3, lowest eigenvalue of E(h^3) - (Eh)^3 over 200 draws:", worst)

D = DensityOperator(random_density(A, seed=7))
mix = UnitaryMixtureMap([(random_unitary(A, seed=s), 0.25) for s in range(4)])
print("\nH(D)      =", segal_entropy(D))
print("H(E D)    =", segal_entropy(E(D.operator).symmetrized()))
print("H(Phi D)  =", segal_entropy(mix(D.operator).symmetrized()))

cert = entropy_over_subalgebras(D, samples=200)
print("sup over abelian subalgebras:", cert.achieved, "gap", cert.gap)
