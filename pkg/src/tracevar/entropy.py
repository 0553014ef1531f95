"""Segal, relative and Renyi entropies, and generic trace functionals.

Signs follow the trace convention ``H(omega) = tau(D log D)`` with no
leading minus, so for ``tau = tr`` the Segal entropy is nonpositive.
Logarithms are natural.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import BlockOperator, trace
from .errors import ContractError, DomainError, ParameterError, StructuralError
from .spectral import (ScalarFunction, SpectralDecomposition, eigendecompose,
                       psd_tolerance, spectral_sum, support_projection)

TOL_NORM = 1e-9
SUPPORT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive semidefinite operator of positive trace.

    Eigenvalues in ``[-tol_psd, 0)`` are tolerated (and treated as zero by
    every functional); lower ones are rejected.
    """

    operator: BlockOperator

    def __post_init__(self):
        h = self.operator
        if not h.is_hermitian():
            raise ContractError(
                f"density is not Hermitian (residual {h.hermitian_residual():.3g})")
        lowest = min(float(vals.min()) for vals, _ in h.eigh)
        if lowest < -psd_tolerance(h):
            raise DomainError(f"density has negative eigenvalue {lowest:.6g}",
                              code="negative_eigenvalue")
        if not trace(h) > 0:
            raise ContractError("density must have positive trace")

    @classmethod
    def from_diagonal(cls, algebra, values) -> "DensityOperator":
        return cls(algebra.diagonal(values))

    @property
    def algebra(self):
        return self.operator.algebra

    @cached_property
    def trace(self) -> float:
        return trace(self.operator)

    @property
    def normalised(self) -> bool:
        return abs(self.trace - 1.0) <= TOL_NORM

    @cached_property
    def decomposition(self) -> SpectralDecomposition:
        return eigendecompose(self.operator)

    def require_normalised(self) -> None:
        if not self.normalised:
            raise ContractError(f"density must be normalised, tau(D) = {self.trace!r}")

    def digest(self) -> str:
        from .io import operator_to_json
        return hashlib.sha256(operator_to_json(self.operator).encode()).hexdigest()


@dataclass(frozen=True)
class EntropyReport:
    functional: str
    value: float
    input_digest: str
    alpha: float | None = None
    f: str | None = None

    def to_dict(self) -> dict:
        return {"functional": self.functional, "value": self.value, "alpha": self.alpha,
                "f": self.f, "input_digest": self.input_digest}


def _as_density(D) -> DensityOperator:
    return D if isinstance(D, DensityOperator) else DensityOperator(D)


def trace_functional(f: ScalarFunction, h: BlockOperator) -> float:
    """``tau(f(h)) = sum_j f(lambda_j) tau(p_j)``."""
    if isinstance(h, DensityOperator):
        h = h.operator
    return spectral_sum(f, h)


def segal_entropy(D) -> float:
    """``tau(D log D)`` with ``0 log 0 = 0``."""
    D = _as_density(D)
    return trace_functional(ScalarFunction.t_log_t(), D.operator)


def relative_entropy(D_omega, D_phi) -> float:
    """``tau(D_omega log D_omega - D_omega log D_phi)``.

    Raises :class:`DomainError` with code ``support_not_dominated`` when the
    support of ``D_omega`` is not contained in that of ``D_phi`` (where the
    value would be ``+inf``).
    """
    D_omega, D_phi = _as_density(D_omega), _as_density(D_phi)
    if D_omega.algebra != D_phi.algebra:
        raise StructuralError("densities belong to different algebras")
    outside = D_phi.algebra.identity() - support_projection(D_phi.operator)
    tol = psd_tolerance(D_omega.operator)
    for (vals, vecs), q in zip(D_omega.operator.eigh, outside.blocks):
        live = vecs[:, vals > tol]
        if live.shape[1] and np.linalg.norm(q @ live, axis=0).max() > SUPPORT_TOL:
            raise DomainError("support of omega is not contained in the support of phi",
                              code="support_not_dominated")
    log_phi = _log_on_support(D_phi.operator)
    cross = trace(D_omega.operator @ log_phi)
    return segal_entropy(D_omega) - cross


def _log_on_support(h: BlockOperator) -> BlockOperator:
    tol = psd_tolerance(h)
    blocks = []
    for vals, vecs in h.eigh:
        logs = np.zeros_like(vals)
        pos = vals > tol
        logs[pos] = np.log(vals[pos])
        blocks.append((vecs * logs) @ vecs.conj().T)
    return BlockOperator(h.algebra, blocks)


def renyi_entropy(D, alpha: float) -> float:
    """``log(tau(D^alpha)) / (alpha - 1)`` for a normalised density."""
    alpha = float(alpha)
    if not alpha > 0 or alpha == 1 or not math.isfinite(alpha):
        raise ParameterError(f"alpha must lie in (0,1) or (1,inf), got {alpha}")
    D = _as_density(D)
    D.require_normalised()
    return math.log(trace_functional(ScalarFunction.power(alpha), D.operator)) / (alpha - 1)


def entropy_report(functional: str, D, alpha=None, f=None, value=None) -> EntropyReport:
    D = _as_density(D)
    if value is None:
        if functional == "segal":
            value = segal_entropy(D)
        elif functional == "renyi":
            value = renyi_entropy(D, alpha)
        else:
            raise ParameterError(f"cannot evaluate functional {functional!r} here")
    return EntropyReport(functional, float(value), D.digest(), alpha, f)
