"""Trace-preserving unital maps: pinchings and mixtures of unitary conjugations.

A pinching by a resolution of identity ``{p_i}`` is the trace-preserving
conditional expectation onto the abelian subalgebra the ``p_i`` generate::

    E(x) = sum_i tau(p_i x) / tau(p_i) * p_i

The density of the state ``omega o Phi`` is ``Phi*(D_omega)`` where ``Phi*``
is the dual map for the pairing ``(x, y) -> tau(x y)``. A pinching is its
own dual; the dual of a unitary mixture conjugates by the adjoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .algebra import BlockOperator, ResolutionOfIdentity, trace
from .errors import ContractError, StructuralError

TOL_UNITARY = 1e-9
TOL_PROB = 1e-12


def conditional_expectation(R: ResolutionOfIdentity, h: BlockOperator) -> BlockOperator:
    """Average ``h`` over each cell of ``R``.

    ``R`` is assumed valid (see :func:`~tracevar.algebra.validate_resolution`).
    """
    if h.algebra != R.algebra:
        raise StructuralError("operator and resolution belong to different algebras")
    out = R.algebra.zero()
    for p, tp in zip(R.projections, R.traces):
        out = out + ((p @ h).tr() / tp) * p
    return out


def cell_averages(R: ResolutionOfIdentity, h: BlockOperator) -> np.ndarray:
    """``alpha_i = tau(p_i h) / tau(p_i)`` (real parts)."""
    return np.array([trace(p @ h) for p in R.projections]) / R.traces


@dataclass(frozen=True, eq=False)
class PinchingMap:
    resolution: ResolutionOfIdentity

    @property
    def algebra(self):
        return self.resolution.algebra

    def __call__(self, x: BlockOperator) -> BlockOperator:
        return conditional_expectation(self.resolution, x)

    def dual(self) -> "PinchingMap":
        return self


@dataclass(frozen=True, eq=False)
class UnitaryMixtureMap:
    """``Phi(x) = sum_k c_k u_k x u_k*`` for unitaries ``u_k`` and a probability vector ``c``."""

    unitaries: tuple[BlockOperator, ...]
    weights: tuple[float, ...]

    def __init__(self, terms: Iterable[tuple[BlockOperator, float]]):
        terms = list(terms)
        if not terms:
            raise ContractError("a unitary mixture needs at least one term")
        unitaries = tuple(u for u, _ in terms)
        weights = tuple(float(c) for _, c in terms)
        algebra = unitaries[0].algebra
        for u in unitaries:
            if u.algebra != algebra:
                raise StructuralError("unitaries belong to different algebras")
            r = (u @ u.H - algebra.identity()).norm()
            if r > TOL_UNITARY:
                raise ContractError(f"operator is not unitary (residual {r:.3g})")
        if min(weights) < 0 or abs(sum(weights) - 1.0) > TOL_PROB:
            raise ContractError("mixture weights must form a probability vector")
        object.__setattr__(self, "unitaries", unitaries)
        object.__setattr__(self, "weights", weights)

    @property
    def algebra(self):
        return self.unitaries[0].algebra

    def __call__(self, x: BlockOperator) -> BlockOperator:
        if x.algebra != self.algebra:
            raise StructuralError("operator and map belong to different algebras")
        out = self.algebra.zero()
        for u, c in zip(self.unitaries, self.weights):
            out = out + c * x.conjugate_by(u)
        return out

    def dual(self) -> "UnitaryMixtureMap":
        """``x -> sum_k c_k u_k* x u_k``."""
        return UnitaryMixtureMap([(u.H, c) for u, c in zip(self.unitaries, self.weights)])


def apply_channel(phi, x: BlockOperator) -> BlockOperator:
    if x.algebra != phi.algebra:
        raise StructuralError("operator and map belong to different algebras")
    return phi(x)


def pulled_back_density(phi, D) -> BlockOperator:
    """Density of ``omega o Phi``: ``tau(Phi(x) D) = tau(x Phi*(D))`` for all ``x``."""
    op = getattr(D, "operator", D)
    return apply_channel(phi.dual(), op).symmetrized()


def restrict_state(D, R: ResolutionOfIdentity) -> list[tuple[float, float]]:
    """Pairs ``(omega(p_i), tau(p_i)) = (tau(p_i D), tau(p_i))``.

    These determine the restriction of the state to the abelian subalgebra
    generated by ``R``.
    """
    op = getattr(D, "operator", D)
    if op.algebra != R.algebra:
        raise StructuralError("density and resolution belong to different algebras")
    return [(trace(p @ op), float(tp)) for p, tp in zip(R.projections, R.traces)]
