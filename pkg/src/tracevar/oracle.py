"""Brute-force oracles for small commuting instances.

Nothing here touches the matrix code: inputs are plain lists of
eigenvalues and trace weights, and every quantity is a scalar sum. The
point is to have a second route to the numbers the main modules compute.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

MAX_EXHAUSTIVE = 4


@dataclass(frozen=True)
class OracleResult:
    quantity: str
    value: float
    method: str
    digest: str
    witness: object = None
    values: list = field(default_factory=list, repr=False)


def _digest(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


def oracle_entropy_commuting(eigs: Sequence[tuple[float, float]]) -> OracleResult:
    """``sum lambda log lambda * weight`` with ``0 log 0 = 0``."""
    terms = []
    for lam, weight in eigs:
        if lam < 0:
            raise ValueError(f"negative eigenvalue {lam}")
        if weight <= 0:
            raise ValueError(f"nonpositive weight {weight}")
        terms.append(0.0 if lam == 0 else lam * math.log(lam) * weight)
    return OracleResult("segal_entropy", math.fsum(terms), "scalar summation",
                        _digest("entropy", tuple(eigs)))


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All set partitions of ``items`` (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1:]
        yield [[first]] + smaller


def _scalar(f) -> Callable[[float], float]:
    if hasattr(f, "scalar"):
        return f.scalar
    return f


def oracle_partition_exhaustive(f, diagonal: Sequence[float],
                                weights: Sequence[float] | None = None,
                                direction: str | None = None) -> OracleResult:
    """Extremise ``sum f(alpha_cell) tau(p_cell)`` over coordinate partitions.

    ``diagonal`` holds the entries of a diagonal ``h`` and ``weights`` the
    trace weight of each coordinate (all ones for ``tau = tr``). Each cell
    ``C`` contributes ``f(alpha) * t`` with ``t = sum_{i in C} w_i`` and
    ``alpha = sum_{i in C} w_i h_i / t``. ``direction`` defaults to ``sup``
    for convex and ``inf`` for concave ``f`` (read from its convexity flag).
    """
    n = len(diagonal)
    if n > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive enumeration is limited to n <= {MAX_EXHAUSTIVE}, got {n}")
    weights = [1.0] * n if weights is None else list(weights)
    if direction is None:
        direction = {"convex": "sup", "concave": "inf"}[f.convexity]
    g = _scalar(f)
    values = []
    for part in set_partitions(range(n)):
        total = []
        for cell in part:
            t = math.fsum(weights[i] for i in cell)
            alpha = math.fsum(weights[i] * diagonal[i] for i in cell) / t
            total.append(g(alpha) * t)
        values.append((sorted(sorted(c) for c in part), math.fsum(total)))
    pick = max if direction == "sup" else min
    best = pick(values, key=lambda pv: pv[1])
    return OracleResult(f"partition_{direction}", best[1], "exhaustive set partitions",
                        _digest("partition", tuple(diagonal), tuple(weights), direction),
                        best[0], values)


def oracle_gibbs_grid(diagonal: Sequence[float], weights: Sequence[float] = (1.0, 1.0),
                      lo: float = -20.0, hi: float = 5.0, step: float = 0.01) -> OracleResult:
    """Grid maximum of ``d1 a + d2 b - log(w1 e^a + w2 e^b)`` over ``a, b``."""
    d1, d2 = (float(x) for x in diagonal)
    w1, w2 = (float(x) for x in weights)
    grid = np.arange(round((hi - lo) / step) + 1) * step + lo
    a = grid[:, None]
    best, arg = -math.inf, None
    for j0 in range(0, len(grid), 512):
        b = grid[None, j0:j0 + 512]
        vals = (w1 * d1 * a + w2 * d2 * b
                - np.logaddexp(np.log(w1) + a, np.log(w2) + b))
        k = np.unravel_index(np.argmax(vals), vals.shape)
        if vals[k] > best:
            best, arg = float(vals[k]), (float(grid[k[0]]), float(grid[j0 + k[1]]))
    return OracleResult("gibbs_sup", best, f"grid [{lo}, {hi}] step {step}",
                        _digest("gibbs", d1, d2, w1, w2, lo, hi, step), arg)
