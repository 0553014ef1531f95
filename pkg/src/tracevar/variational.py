"""Variational formulae as computable certificates.

Two families of identities are certified here.

Gibbs duality. For a normalised density ``D``::

    H(omega) = sup_h  tau(D h) - log tau(exp h)

over Hermitian ``h``. Every ``h`` gives a lower bound. The constructive
witness takes ``h = log D`` on the support of ``D`` and pushes the kernel
cells ``q_i`` down to ``log(eps / (2^i tau(q_i)))``; with ``k`` cells this
falls short of ``H`` by exactly ``log(1 + eps (1 - 2^-k))``.

Partition formulae. For convex ``f`` and positive ``h``::

    tau(f(h)) = sup_{p}  sum_i f(tau(p_i h) / tau(p_i)) tau(p_i)

over finite resolutions of identity, and ``inf`` for concave ``f``. The
spectral resolution of ``h`` attains the extremum.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import BlockOperator, ResolutionOfIdentity, trace, validate_resolution
from .channels import cell_averages, conditional_expectation, restrict_state
from .entropy import DensityOperator, renyi_entropy, segal_entropy, trace_functional
from .errors import ContractError, DomainError, ParameterError, PropertyViolation
from .io import operator_to_dict, resolution_to_dict, dumps
from .sampling import as_rng, haar_unitary_matrices
from .spectral import (CONCAVE, CONVEX, ScalarFunction, eigendecompose,
                       kernel_projection, psd_tolerance, spectral_interval_partition)

BOUND_TOL = 1e-9
SUP = "sup"
INF = "inf"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TRACEVAR_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _density(D) -> DensityOperator:
    return D if isinstance(D, DensityOperator) else DensityOperator(D)


# ---------------------------------------------------------------- Gibbs dual


@dataclass(frozen=True, eq=False)
class GibbsCandidate:
    """A Hermitian ``h`` together with ``tau(D h) - log tau(exp h)``."""

    h: BlockOperator
    value: float
    derivation: dict = field(default_factory=dict)
    converged: bool = True

    def to_dict(self) -> dict:
        out = operator_to_dict(self.h)
        out["derivation"] = dict(self.derivation)
        return out


def log_trace_exp(h: BlockOperator) -> float:
    """``log tau(exp h)``, evaluated with a max shift."""
    spectra = [vals for vals, _ in h.eigh]
    top = max(float(v.max()) for v in spectra)
    total = math.fsum(w * math.fsum(np.exp(v - top)) for v, w in zip(spectra, h.algebra.weights))
    return top + math.log(total)


def _gibbs_state(h: BlockOperator) -> BlockOperator:
    """``exp(h) / tau(exp h)``."""
    top = max(float(vals.max()) for vals, _ in h.eigh)
    blocks = [(vecs * np.exp(vals - top)) @ vecs.conj().T for vals, vecs in h.eigh]
    e = BlockOperator(h.algebra, blocks)
    return e / e.tr().real


def _require_hermitian(h: BlockOperator) -> None:
    if not h.is_hermitian():
        raise ContractError(f"candidate is not Hermitian (residual {h.hermitian_residual():.3g})")


def gibbs_objective(D, h: BlockOperator) -> float:
    """``tau(D h) - log tau(exp h)``, a lower bound on ``H(omega)``."""
    D = _density(D)
    D.require_normalised()
    _require_hermitian(h)
    return trace(D.operator @ h) - log_trace_exp(h)


def gibbs_gradient(D, h: BlockOperator) -> BlockOperator:
    """``D - exp(h) / tau(exp h)``.

    This represents the derivative of :func:`gibbs_objective` for the trace
    pairing: the derivative along ``k`` is ``tau(gradient k)``.
    """
    D = _density(D)
    _require_hermitian(h)
    return (D.operator - _gibbs_state(h)).symmetrized()


def default_kernel_split(D) -> ResolutionOfIdentity:
    """Rank-one eigenprojections spanning the kernel of ``D``.

    Returns an empty family when ``D`` has trivial kernel.
    """
    D = _density(D)
    op = D.operator
    tol = psd_tolerance(op)
    cells = []
    for b, (vals, vecs) in enumerate(op.eigh):
        for i in np.flatnonzero(vals <= tol):
            cells.append([(b, vecs[:, i])])
    return ResolutionOfIdentity.from_vectors(D.algebra, cells)


def _check_kernel_split(D: DensityOperator, split: ResolutionOfIdentity) -> None:
    q = kernel_projection(D.operator)
    if split.algebra != D.algebra:
        raise ContractError("kernel split belongs to a different algebra")
    if not split.projections:
        if q.norm() > 0:
            raise ContractError("kernel split is empty but the density has a kernel")
        return
    if trace(q) <= 0:
        raise ContractError("kernel split given for a density with trivial kernel")
    # validate the split as a resolution of the kernel projection
    padded = ResolutionOfIdentity(split.algebra, list(split.projections)
                                  + [split.algebra.identity() - q])
    bad = [v for v in validate_resolution(padded)
           if not (v.invariant == "positive_trace" and v.index == (len(split),))]
    if bad:
        raise ContractError("kernel split is not a resolution of the kernel projection: "
                            + ", ".join(sorted({v.invariant for v in bad})))


def constructive_gibbs_witness(D, eps: float,
                               kernel_split: ResolutionOfIdentity | None = None) -> GibbsCandidate:
    """Explicit ``h`` with ``g(h) = H(omega) - log(1 + eps (1 - 2^-k))``.

    ``h = h1 + h2`` where ``h1`` is ``log D`` on the support of ``D`` (zero on
    the kernel) and ``h2 = sum_i alpha_i q_i`` with
    ``alpha_i = log(eps / (2^i tau(q_i)))`` over the ``k`` kernel cells ``q_i``.
    Then ``exp h = D + sum_i eps 2^-i q_i``, so ``tau(exp h) = 1 + eps (1 - 2^-k)``.
    """
    eps = float(eps)
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    D = _density(D)
    D.require_normalised()
    split = default_kernel_split(D) if kernel_split is None else kernel_split
    _check_kernel_split(D, split)

    op = D.operator
    tol = psd_tolerance(op)
    h1_blocks = []
    for vals, vecs in op.eigh:
        logs = np.zeros_like(vals)
        pos = vals > tol
        logs[pos] = np.log(vals[pos])
        h1_blocks.append((vecs * logs) @ vecs.conj().T)
    h = BlockOperator(D.algebra, h1_blocks)
    for i, (q, tq) in enumerate(zip(split.projections, split.traces), start=1):
        h = h + math.log(eps / (2.0 ** i * tq)) * q
    h = h.symmetrized()
    derivation = {"method": "constructive", "eps": eps, "kernel_cells": len(split)}
    return GibbsCandidate(h, gibbs_objective(D, h), derivation)


def constructive_gap(eps: float, k: int) -> float:
    """``log(1 + eps (1 - 2^-k))``, the shortfall of the constructive witness."""
    return math.log1p(eps * (1.0 - 2.0 ** -k))


STEP_POLICIES = ("bb", "unit")


def gibbs_ascent(D, init: BlockOperator | None = None, step_policy: str = "bb",
                 max_iter: int = 20000, tol: float = 1e-10, shrink: float = 0.5,
                 armijo: float = 1e-4) -> GibbsCandidate:
    """Maximise the Gibbs objective by gradient ascent with backtracking.

    Each iteration moves along ``G = D - exp(h)/tau(exp h)``. The trial step
    is multiplied by ``shrink`` until the Armijo condition
    ``g(h + sG) >= g(h) + armijo * s * tau(G^2)`` holds (up to a few ulps of
    ``g``). With ``step_policy="unit"`` every line search starts at ``s = 1``;
    with ``"bb"`` it starts at the Barzilai-Borwein step
    ``tau(dh^2) / -tau(dh dG)`` from the previous iterate, which copes with
    densities whose small eigenvalues make the problem ill-conditioned.

    Stops once ``||G|| <= tol``; otherwise returns the best iterate flagged
    ``converged=False``. When ``D`` has a kernel the supremum is not attained
    and the iteration runs out of budget by design.
    """
    if step_policy not in STEP_POLICIES:
        raise ParameterError(f"step_policy must be one of {STEP_POLICIES}, got {step_policy!r}")
    D = _density(D)
    D.require_normalised()
    h = D.algebra.zero() if init is None else init.symmetrized()
    _require_hermitian(h)
    rho = D.operator

    def objective(x):
        return trace(rho @ x) - log_trace_exp(x)

    value = objective(h)
    best_h, best_value = h, value
    prev = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = (rho - _gibbs_state(h)).symmetrized()
        if max(float(np.abs(vals).max()) for vals, _ in grad.eigh) <= tol:
            converged = True
            break
        step = 1.0
        if step_policy == "bb" and prev is not None:
            dh, dg = h - prev[0], grad - prev[1]
            curv = -trace(dh @ dg)
            if curv > 0:
                step = min(max(trace(dh @ dh) / curv, 1e-3), 1e6)
        prev = (h, grad)
        slope = trace(grad @ grad)
        slack = 8 * np.finfo(float).eps * (1.0 + abs(value))
        while True:
            trial = h + step * grad
            trial_value = objective(trial)
            if trial_value >= value + armijo * step * slope - slack:
                break
            step *= shrink
            if step < 1e-16:
                trial = None
                break
        if trial is None:
            break
        h, value = trial, trial_value
        if value > best_value:
            best_h, best_value = h, value
    if converged:
        best_h = h
    derivation = {"method": "ascent", "iterations": it, "step_policy": step_policy}
    return GibbsCandidate(best_h, gibbs_objective(D, best_h), derivation, converged)


# ------------------------------------------------------- partition formulae


@dataclass(frozen=True, eq=False)
class VariationalCertificate:
    """Witness for one side of a variational identity.

    ``gap = target - achieved``; a ``sup`` certificate is sound when
    ``gap >= -1e-9`` and an ``inf`` certificate when ``gap <= 1e-9``.
    """

    kind: str
    target: float
    achieved: float
    direction: str
    witness: object
    params: dict
    candidates: int = 1
    details: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.target - self.achieved

    def holds(self, tol: float = BOUND_TOL) -> bool:
        if self.direction == SUP:
            return self.gap >= -tol
        return self.gap <= tol

    def to_dict(self) -> dict:
        if isinstance(self.witness, ResolutionOfIdentity):
            witness = resolution_to_dict(self.witness)
        else:
            witness = self.witness.to_dict()
        out = {"kind": self.kind, "target": self.target, "achieved": self.achieved,
               "gap": self.gap, "direction": self.direction, "witness": witness,
               "params": dict(self.params), "candidates": self.candidates}
        if self.details:
            out["details"] = dict(self.details)
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"


def _params(eps=None, depth=None, samples=None, seed=None) -> dict:
    return {"eps": eps, "depth": depth, "samples": samples, "seed": seed}


def _direction(f: ScalarFunction) -> str:
    if f.convexity == CONVEX:
        return SUP
    if f.convexity == CONCAVE:
        return INF
    raise ParameterError(f"{f.name} is flagged neither convex nor concave")


def _clamped(f: ScalarFunction, alphas: np.ndarray, scale: float) -> np.ndarray:
    if f.nonnegative_domain:
        alphas = np.where((alphas < 0) & (alphas >= -1e-10 * scale), 0.0, alphas)
    return alphas


def partition_value(f: ScalarFunction, h: BlockOperator, R: ResolutionOfIdentity) -> float:
    """``sum_i f(alpha_i) tau(p_i)`` with ``alpha_i = tau(p_i h) / tau(p_i)``."""
    h = getattr(h, "operator", h)
    alphas = _clamped(f, cell_averages(R, h), 1.0 + h.norm())
    return math.fsum(f(alphas) * R.traces)


def dyadic_partitions(h: BlockOperator, depth: int) -> list[ResolutionOfIdentity]:
    """Nested spectral-interval partitions of a positive ``h`` at depths ``0..depth``.

    Depth 0 is the trivial resolution. Each further level splits every run
    of consecutive distinct eigenvalues in half, cutting at the midpoint
    between the two neighbouring eigenvalues; once every run is a single
    eigenvalue the spectral resolution is reached and further levels
    repeat it.
    """
    if depth < 0:
        raise ParameterError(f"depth must be nonnegative, got {depth}")
    decomp = eigendecompose(h)
    lam = decomp.eigenvalues
    runs = [(0, len(lam))]
    boundaries: list[float] = []
    out = []
    for level in range(depth + 1):
        out.append(spectral_interval_partition(decomp, sorted(boundaries)))
        next_runs = []
        for lo, hi in runs:
            if hi - lo <= 1:
                next_runs.append((lo, hi))
                continue
            mid = (lo + hi) // 2
            boundaries.append((lam[mid - 1] + lam[mid]) / 2)
            next_runs += [(lo, mid), (mid, hi)]
        runs = next_runs
    return out


def spectral_resolution(h: BlockOperator) -> ResolutionOfIdentity:
    return eigendecompose(h).resolution()


@dataclass
class _Frames:
    """A batch of rank-one resolutions given by per-block unitary frames."""

    algebra: object
    frames: list  # per block: array (samples, d, d)

    @classmethod
    def draw(cls, algebra, samples: int, rng) -> "_Frames":
        return cls(algebra, [haar_unitary_matrices(d, rng, size=samples) for d in algebra.dims])

    def averages(self, h: BlockOperator) -> list[np.ndarray]:
        """Per block, ``u_i* h u_i`` for every sample and column: shape (samples, d)."""
        return [np.einsum("sji,jk,ski->si", u.conj(), hb, u).real
                for u, hb in zip(self.frames, h.blocks)]

    def values(self, f: ScalarFunction, h: BlockOperator) -> np.ndarray:
        scale = 1.0 + h.norm()
        total = 0.0
        for avg, w in zip(self.averages(h), self.algebra.weights):
            total = total + w * f(_clamped(f, avg, scale)).sum(axis=1)
        return np.asarray(total)

    def resolution(self, s: int) -> ResolutionOfIdentity:
        cells = [[(b, u[s][:, i])] for b, u in enumerate(self.frames)
                 for i in range(u.shape[1])]
        return ResolutionOfIdentity.from_vectors(self.algebra, cells)


def _better(direction, a, b) -> bool:
    return a > b if direction == SUP else a < b


def _violates(direction, value, bound, tol=BOUND_TOL) -> bool:
    return value > bound + tol if direction == SUP else value < bound - tol


def _search(h: BlockOperator, value_of: Callable[[ResolutionOfIdentity], float],
            batch_values: Callable[[_Frames], np.ndarray], direction: str, target: float,
            depth: int, samples: int, seed, label: str):
    """Evaluate spectral, dyadic and random candidates; return best and stats.

    Candidates carry stable indices (spectral, dyadic levels, random draws)
    and ties go to the lowest index.
    """
    if samples < 0:
        raise ParameterError(f"samples must be nonnegative, got {samples}")
    tol = psd_tolerance(h)
    lowest = min(float(vals.min()) for vals, _ in h.eigh)
    if lowest < -tol:
        raise DomainError(f"operator has negative eigenvalue {lowest:.6g}",
                          code="negative_eigenvalue")
    rng = as_rng(seed)
    materialized = [spectral_resolution(h)] + dyadic_partitions(h, depth)
    values = _map(value_of, materialized)
    frames = _Frames.draw(h.algebra, samples, rng) if samples else None
    random_values = batch_values(frames) if frames is not None else np.empty(0)

    all_values = list(values) + [float(v) for v in random_values]
    violations = [i for i, v in enumerate(all_values) if _violates(direction, v, target)]
    if violations:
        i = violations[0]
        raise PropertyViolation(
            f"{label}: candidate {i} gives {all_values[i]!r}, beyond the bound {target!r}")
    best = 0
    for i, v in enumerate(all_values):
        if _better(direction, v, all_values[best]):
            best = i
    if best < len(materialized):
        witness = materialized[best]
    else:
        witness = frames.resolution(best - len(materialized))
    worst = min(all_values) if direction == SUP else max(all_values)
    return witness, all_values[best], len(all_values), worst


def partition_search(f: ScalarFunction, h: BlockOperator, depth: int = 4, samples: int = 1000,
                     seed=0) -> VariationalCertificate:
    """Certify ``tau(f(h))`` as the sup (convex ``f``) or inf (concave ``f``)
    of :func:`partition_value` over resolutions of identity.

    Candidates are the spectral resolution of ``h``, the dyadic
    coarsenings from :func:`dyadic_partitions` and ``samples`` Haar-random
    rank-one resolutions. Raises :class:`PropertyViolation` if any candidate
    beats ``tau(f(h))`` by more than ``1e-9``.
    """
    h = getattr(h, "operator", h)
    direction = _direction(f)
    target = trace_functional(f, h)
    witness, achieved, n, worst = _search(
        h, lambda R: partition_value(f, h, R), lambda fr: fr.values(f, h),
        direction, target, depth, samples, seed, f"partition_search[{f.name}]")
    return VariationalCertificate("partition", target, achieved, direction, witness,
                                  _params(None, depth, samples, seed), n,
                                  {"f": f.name, "worst": worst})


def segal_partition_value(D, R: ResolutionOfIdentity) -> float:
    """``sum_i omega(p_i) (log omega(p_i) - log tau(p_i))`` with ``0 log 0 = 0``."""
    terms = []
    for w, t in restrict_state(D, R):
        if w > 0:
            terms.append(w * (math.log(w) - math.log(t)))
    return math.fsum(terms)


def segal_partition_certificate(D, depth: int = 4, samples: int = 1000,
                                seed=0) -> VariationalCertificate:
    """Certify ``H(omega)`` as the sup of :func:`segal_partition_value`."""
    D = _density(D)
    f = ScalarFunction.t_log_t()
    target = segal_entropy(D)
    witness, achieved, n, worst = _search(
        D.operator, lambda R: segal_partition_value(D, R), lambda fr: fr.values(f, D.operator),
        SUP, target, depth, samples, seed, "segal_partition_certificate")
    return VariationalCertificate("segal", target, achieved, SUP, witness,
                                  _params(None, depth, samples, seed), n, {"worst": worst})


def renyi_partition_sum(D, R: ResolutionOfIdentity, alpha: float) -> float:
    """``sum_i omega(p_i)^alpha tau(p_i)^(1 - alpha)``."""
    return math.fsum(max(w, 0.0) ** alpha * t ** (1.0 - alpha) for w, t in restrict_state(D, R))


def renyi_certificate(D, alpha: float, depth: int = 4, samples: int = 1000,
                      seed=0) -> VariationalCertificate:
    """Certify the Renyi entropy through its partition formula.

    The inner sum ``sum_i omega(p_i)^alpha tau(p_i)^(1-alpha)`` is minimised
    for ``alpha < 1`` and maximised for ``alpha > 1``. Dividing its log by
    ``alpha - 1`` flips the order when ``alpha < 1``, so in both cases the
    entropy itself is the sup of ``log(inner) / (alpha - 1)``; the
    certificate is reported in that outer, ``sup`` orientation.
    """
    D = _density(D)
    target = renyi_entropy(D, alpha)  # validates alpha and normalisation
    f = ScalarFunction.power(alpha)
    inner_direction = _direction(f)
    inner_target = trace_functional(f, D.operator)
    witness, inner, n, inner_worst = _search(
        D.operator, lambda R: renyi_partition_sum(D, R, alpha),
        lambda fr: fr.values(f, D.operator), inner_direction, inner_target,
        depth, samples, seed, f"renyi_certificate[alpha={alpha}]")
    achieved = math.log(inner) / (alpha - 1)
    details = {"alpha": float(alpha), "inner_direction": inner_direction,
               "inner_target": inner_target, "inner_achieved": inner,
               "worst": math.log(inner_worst) / (alpha - 1)}
    return VariationalCertificate("renyi", target, achieved, SUP, witness,
                                  _params(None, depth, samples, seed), n, details)


def entropy_over_subalgebras(D, depth: int = 4, samples: int = 200,
                             seed=0) -> VariationalCertificate:
    """Certify ``H(omega)`` as the sup of the entropies of its restrictions
    to abelian subalgebras, and of ``H(Phi(D))`` over pinchings ``Phi``.

    Every candidate resolution is materialized and both quantities are
    computed independently: the classical entropy of the restricted
    weights and the Segal entropy of the pinched density. Each must stay
    below ``H(omega)`` (data processing).
    """
    D = _density(D)
    D.require_normalised()
    target = segal_entropy(D)
    rng = as_rng(seed)
    candidates = [spectral_resolution(D.operator)] + dyadic_partitions(D.operator, depth)
    if samples:
        frames = _Frames.draw(D.algebra, samples, rng)
        candidates += [frames.resolution(s) for s in range(samples)]

    def evaluate(R):
        return segal_partition_value(D, R), segal_entropy(conditional_expectation(R, D.operator).symmetrized())

    results = _map(evaluate, candidates)
    worst_excess = -math.inf
    best = 0
    for i, (restricted, pinched) in enumerate(results):
        for v in (restricted, pinched):
            worst_excess = max(worst_excess, v - target)
            if _violates(SUP, v, target):
                raise PropertyViolation(
                    f"entropy_over_subalgebras: candidate {i} gives {v!r} > H = {target!r}")
        if restricted > results[best][0]:
            best = i
    details = {"pinched_achieved": max(p for _, p in results),
               "max_excess": worst_excess}
    return VariationalCertificate("subalgebras", target, results[best][0], SUP, candidates[best],
                                  _params(None, depth, samples, seed), len(candidates), details)


def gibbs_certificate(D, eps: float | None = 0.1, method: str = "constructive",
                      max_iter: int = 20000) -> VariationalCertificate:
    """Certify ``H(omega)`` from below with a Gibbs candidate."""
    D = _density(D)
    D.require_normalised()
    target = segal_entropy(D)
    if method == "constructive":
        cand = constructive_gibbs_witness(D, eps)
    elif method == "ascent":
        cand = gibbs_ascent(D, max_iter=max_iter)
    else:
        raise ParameterError(f"unknown method {method!r}")
    details = {"method": method, "converged": cand.converged}
    if method == "constructive":
        details["predicted_gap"] = constructive_gap(eps, cand.derivation["kernel_cells"])
    return VariationalCertificate("gibbs", target, cand.value, SUP, cand,
                                  _params(eps, None, None, None), 1, details)
