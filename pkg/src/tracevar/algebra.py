"""Finite-dimensional tracial algebras.

An algebra is a direct sum of full matrix blocks ``M_{d_1} + ... + M_{d_m}``
with a faithful trace ``tau(x) = sum_b w_b tr(x_b)`` given by strictly
positive block weights. Operators are stored block-diagonally and are
immutable: every arithmetic operation returns a fresh operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ContractError, StructuralError

TOL_HERM = 1e-9
TOL_PROJ = 1e-9


class Block(NamedTuple):
    dim: int
    weight: float


@dataclass(frozen=True)
class TracialAlgebra:
    """Direct sum of matrix blocks with per-block trace weights.

    Parameters
    ----------
    blocks : sequence of (dim, weight)
        Block dimensions (positive integers) and trace weights (positive
        reals, which makes the trace faithful).
    """

    blocks: tuple[Block, ...]

    def __init__(self, blocks: Iterable[Sequence]):
        parsed = []
        for item in blocks:
            dim, weight = item
            if int(dim) != dim or dim < 1:
                raise ContractError(f"block dimension must be a positive integer, got {dim!r}")
            weight = float(weight)
            if not np.isfinite(weight) or weight <= 0:
                raise ContractError(f"block weight must be positive and finite, got {weight!r}")
            parsed.append(Block(int(dim), weight))
        if not parsed:
            raise ContractError("an algebra needs at least one block")
        object.__setattr__(self, "blocks", tuple(parsed))

    @classmethod
    def full_matrix(cls, dim: int, weight: float = 1.0) -> "TracialAlgebra":
        """``M_dim`` with ``tau = weight * tr``."""
        return cls([(dim, weight)])

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(b.weight for b in self.blocks)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @property
    def trace_of_identity(self) -> float:
        return float(sum(b.dim * b.weight for b in self.blocks))

    def identity(self) -> "BlockOperator":
        return BlockOperator(self, [np.eye(d) for d in self.dims])

    def zero(self) -> "BlockOperator":
        return BlockOperator(self, [np.zeros((d, d)) for d in self.dims])

    def diagonal(self, values: Sequence[float]) -> "BlockOperator":
        """Operator whose diagonal, read across blocks in order, is ``values``."""
        values = np.asarray(values)
        if values.shape != (self.total_dim,):
            raise StructuralError(f"expected {self.total_dim} diagonal entries, got {values.shape}")
        out, start = [], 0
        for d in self.dims:
            out.append(np.diag(values[start:start + d]))
            start += d
        return BlockOperator(self, out)

    def operator(self, *blocks) -> "BlockOperator":
        return BlockOperator(self, blocks)


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Block-diagonal operator in a :class:`TracialAlgebra`.

    The block arrays are complex and read-only. Hermiticity is not enforced
    at construction (unitaries and products are operators too); operations
    that need it check :meth:`is_hermitian`.
    """

    algebra: TracialAlgebra
    blocks: tuple[np.ndarray, ...]

    def __init__(self, algebra: TracialAlgebra, blocks: Iterable):
        arrays = []
        for b in blocks:
            a = np.array(b, dtype=complex)
            a.setflags(write=False)
            arrays.append(a)
        if len(arrays) != len(algebra.blocks):
            raise StructuralError(
                f"algebra has {len(algebra.blocks)} blocks, operator has {len(arrays)}")
        for a, d in zip(arrays, algebra.dims):
            if a.shape != (d, d):
                raise StructuralError(f"block of shape {a.shape} does not match dimension {d}")
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "blocks", tuple(arrays))

    def _check_same(self, other: "BlockOperator") -> None:
        if not isinstance(other, BlockOperator):
            raise StructuralError(f"expected a BlockOperator, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise StructuralError("operators belong to different algebras")

    def __add__(self, other):
        self._check_same(other)
        return BlockOperator(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check_same(other)
        return BlockOperator(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return BlockOperator(self.algebra, [-a for a in self.blocks])

    def __matmul__(self, other):
        self._check_same(other)
        return BlockOperator(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar):
        if isinstance(scalar, BlockOperator):
            raise TypeError("use @ for operator products")
        return BlockOperator(self.algebra, [scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return BlockOperator(self.algebra, [a / scalar for a in self.blocks])

    @property
    def H(self) -> "BlockOperator":
        return adjoint(self)

    def tr(self) -> complex:
        """Complex weighted trace; :func:`trace` returns its real part."""
        total = 0j
        for a, w in zip(self.blocks, self.algebra.weights):
            total += w * np.trace(a)
        return complex(total)

    def norm(self) -> float:
        """Operator norm (largest singular value over all blocks)."""
        return max(float(np.linalg.norm(a, 2)) for a in self.blocks)

    def to_dense(self) -> np.ndarray:
        """Block-diagonal dense matrix of size ``total_dim``."""
        n = self.algebra.total_dim
        out = np.zeros((n, n), dtype=complex)
        start = 0
        for a in self.blocks:
            d = a.shape[0]
            out[start:start + d, start:start + d] = a
            start += d
        return out

    def hermitian_residual(self) -> float:
        return max(float(np.linalg.norm(a - a.conj().T, 2)) for a in self.blocks)

    def is_hermitian(self, tol: float = TOL_HERM) -> bool:
        return self.hermitian_residual() <= tol * (1.0 + self.norm())

    def symmetrized(self) -> "BlockOperator":
        return BlockOperator(self.algebra, [(a + a.conj().T) / 2 for a in self.blocks])

    def allclose(self, other: "BlockOperator", atol: float = 1e-10) -> bool:
        self._check_same(other)
        return (self - other).norm() <= atol

    def conjugate_by(self, u: "BlockOperator") -> "BlockOperator":
        """``u x u*``."""
        return u @ self @ adjoint(u)

    @cached_property
    def eigh(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per-block ``(eigenvalues, eigenvectors)`` of the Hermitian part."""
        out = []
        for a in self.blocks:
            vals, vecs = np.linalg.eigh((a + a.conj().T) / 2)
            vals.setflags(write=False)
            vecs.setflags(write=False)
            out.append((vals, vecs))
        return tuple(out)

    def __repr__(self):
        return f"BlockOperator(dims={self.algebra.dims}, norm={self.norm():.3g})"


def trace(x: BlockOperator, algebra: TracialAlgebra | None = None) -> float:
    """Weighted trace ``sum_b w_b tr(x_b)``, real part.

    For self-adjoint ``x`` and for products such as ``x* x`` the imaginary
    part vanishes; use :meth:`BlockOperator.tr` for the complex value.
    """
    if algebra is not None and x.algebra != algebra:
        raise StructuralError("operator does not belong to the given algebra")
    return x.tr().real


def multiply(x: BlockOperator, y: BlockOperator) -> BlockOperator:
    return x @ y


def add(x: BlockOperator, y: BlockOperator) -> BlockOperator:
    return x + y


def scale(x: BlockOperator, c: complex) -> BlockOperator:
    return c * x


def adjoint(x: BlockOperator) -> BlockOperator:
    return BlockOperator(x.algebra, [a.conj().T for a in x.blocks])


class Violation(NamedTuple):
    invariant: str
    residual: float
    index: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class ResolutionOfIdentity:
    """Finite family of mutually orthogonal projections summing to 1.

    Construction does not validate; :func:`validate_resolution` reports the
    violated invariants and :meth:`check` raises on them.
    """

    algebra: TracialAlgebra
    projections: tuple[BlockOperator, ...]

    def __init__(self, algebra: TracialAlgebra, projections: Iterable[BlockOperator]):
        projections = tuple(projections)
        for p in projections:
            if p.algebra != algebra:
                raise StructuralError("projection belongs to a different algebra")
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "projections", projections)

    def __len__(self):
        return len(self.projections)

    def __iter__(self):
        return iter(self.projections)

    def __getitem__(self, i):
        return self.projections[i]

    @cached_property
    def traces(self) -> np.ndarray:
        return np.array([trace(p) for p in self.projections])

    def check(self) -> "ResolutionOfIdentity":
        violations = validate_resolution(self)
        if violations:
            names = ", ".join(sorted({v.invariant for v in violations}))
            raise ContractError(f"invalid resolution of identity: {names}")
        return self

    @classmethod
    def coordinate(cls, algebra: TracialAlgebra) -> "ResolutionOfIdentity":
        """Rank-one projections onto the standard basis vectors of every block."""
        n = algebra.total_dim
        return cls(algebra, [algebra.diagonal(np.eye(n)[i]) for i in range(n)])

    @classmethod
    def trivial(cls, algebra: TracialAlgebra) -> "ResolutionOfIdentity":
        return cls(algebra, [algebra.identity()])

    @classmethod
    def from_vectors(cls, algebra: TracialAlgebra, cells) -> "ResolutionOfIdentity":
        """Build projections from orthonormal vectors.

        ``cells`` is a list of cells; each cell is a list of ``(block, vector)``
        pairs and becomes the projection onto their span.
        """
        projections = []
        for cell in cells:
            blocks = [np.zeros((d, d), dtype=complex) for d in algebra.dims]
            for b, v in cell:
                v = np.asarray(v, dtype=complex)
                blocks[b] = blocks[b] + np.outer(v, v.conj())
            projections.append(BlockOperator(algebra, blocks))
        return cls(algebra, projections)


def validate_resolution(R: ResolutionOfIdentity, tol: float = TOL_PROJ) -> list[Violation]:
    """List every violated invariant of a resolution of identity.

    Residuals are operator norms; a residual ``r`` of an expression built
    from operators of norm ``n`` fails when ``r > tol * (1 + n)``.
    """
    violations = []
    projections = R.projections
    if not projections:
        return [Violation("sum_to_identity", 1.0)]
    for i, p in enumerate(projections):
        scale_ = 1.0 + p.norm()
        r = p.hermitian_residual()
        if r > tol * scale_:
            violations.append(Violation("hermitian", r, (i,)))
        r = (p @ p - p).norm()
        if r > tol * scale_:
            violations.append(Violation("idempotent", r, (i,)))
        if trace(p) <= tol:
            violations.append(Violation("positive_trace", trace(p), (i,)))
    for i in range(len(projections)):
        for j in range(i + 1, len(projections)):
            p, q = projections[i], projections[j]
            r = (p @ q).norm()
            if r > tol * (1.0 + p.norm() * q.norm()):
                violations.append(Violation("mutual_orthogonality", r, (i, j)))
    total = projections[0]
    for p in projections[1:]:
        total = total + p
    r = (total - R.algebra.identity()).norm()
    if r > tol * (1.0 + total.norm()):
        violations.append(Violation("sum_to_identity", r))
    return violations
