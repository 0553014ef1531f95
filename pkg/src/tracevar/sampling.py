"""Seeded random instances: unitaries, densities, Hermitian operators, resolutions."""

from __future__ import annotations

import numpy as np

from .algebra import BlockOperator, ResolutionOfIdentity, TracialAlgebra
from .errors import ParameterError


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary_matrices(d: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-distributed ``d x d`` unitaries via QR of complex Gaussians.

    With ``size`` given, returns a stack of shape ``(size, d, d)``.
    """
    shape = (d, d) if size is None else (size, d, d)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def random_unitary(algebra: TracialAlgebra, seed=None) -> BlockOperator:
    rng = as_rng(seed)
    return BlockOperator(algebra, [haar_unitary_matrices(d, rng) for d in algebra.dims])


def random_density(algebra: TracialAlgebra, seed=None, rank: int | None = None,
                   concentration: float = 1.0) -> BlockOperator:
    """``u diag(p) u*`` normalised to ``tau = 1``.

    ``p`` is a Dirichlet sample over all ``total_dim`` eigenvalue slots; with
    ``rank`` given only that many slots (chosen at random) are nonzero.
    """
    rng = as_rng(seed)
    n = algebra.total_dim
    rank = n if rank is None else rank
    if not 1 <= rank <= n:
        raise ParameterError(f"rank must lie in [1, {n}], got {rank}")
    p = np.zeros(n)
    slots = np.sort(rng.permutation(n)[:rank])
    p[slots] = rng.dirichlet(np.full(rank, concentration))
    diag = algebra.diagonal(p)
    d = diag.conjugate_by(random_unitary(algebra, rng)).symmetrized()
    return d / d.tr().real


def random_hermitian(algebra: TracialAlgebra, seed=None, scale: float = 1.0) -> BlockOperator:
    """GUE-style Hermitian operator ``(g + g*) / 2`` with Gaussian entries."""
    rng = as_rng(seed)
    blocks = []
    for d in algebra.dims:
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        blocks.append(scale * (g + g.conj().T) / 2)
    return BlockOperator(algebra, blocks)


def random_psd(algebra: TracialAlgebra, seed=None, scale: float = 1.0) -> BlockOperator:
    """``u diag(x) u*`` with ``x`` exponential, so the spectrum is nonnegative."""
    rng = as_rng(seed)
    x = scale * rng.exponential(size=algebra.total_dim)
    return algebra.diagonal(x).conjugate_by(random_unitary(algebra, rng)).symmetrized()


def random_resolution(algebra: TracialAlgebra, seed=None,
                      cells: int | None = None) -> ResolutionOfIdentity:
    """Coordinate projections conjugated by a per-block Haar unitary.

    With ``cells`` given, the rotated basis vectors are dealt into that many
    nonempty groups at random, and each group becomes one projection.
    """
    rng = as_rng(seed)
    n = algebra.total_dim
    frames = [haar_unitary_matrices(d, rng) for d in algebra.dims]
    vectors = [(b, frames[b][:, i]) for b, d in enumerate(algebra.dims) for i in range(d)]
    if cells is None:
        return ResolutionOfIdentity.from_vectors(algebra, [[v] for v in vectors])
    if not 1 <= cells <= n:
        raise ParameterError(f"cells must lie in [1, {n}], got {cells}")
    labels = np.concatenate([np.arange(cells), rng.integers(0, cells, size=n - cells)])
    labels = rng.permutation(labels)
    groups = [[vectors[i] for i in range(n) if labels[i] == c] for c in range(cells)]
    return ResolutionOfIdentity.from_vectors(algebra, groups)
