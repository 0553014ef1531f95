"""Hermitian spectral calculus on block operators."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import BlockOperator, ResolutionOfIdentity, TracialAlgebra, trace
from .errors import ContractError, DomainError, ParameterError

CLUSTER_TOL = 1e-8
TOL_PSD = 1e-10

CONVEX = "convex"
CONCAVE = "concave"
NEITHER = "neither"


def psd_tolerance(h: BlockOperator) -> float:
    return TOL_PSD * (1.0 + h.norm())


def _xlogx(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = t[pos] * np.log(t[pos])
    return out


def _log_restricted(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.log(t[pos])
    return out


@dataclass(frozen=True)
class ScalarFunction:
    """A real function applied through the spectral calculus.

    Use the constructors :meth:`t_log_t`, :meth:`power`, :meth:`log_restricted`,
    :meth:`exp`, :meth:`identity` and :meth:`custom`; :func:`parse_function`
    maps the names used on the command line.
    """

    tag: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    convexity: str = NEITHER
    nonnegative_domain: bool = False
    alpha: float | None = None
    operator_convex: bool = False
    snap_zero: bool = False

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    def scalar(self, t: float) -> float:
        return float(self.fn(np.array([t], dtype=float))[0])

    @property
    def name(self) -> str:
        if self.tag == "power":
            return f"power({self.alpha!r})"
        return self.tag

    @classmethod
    def t_log_t(cls):
        # 0 log 0 = 0 by continuity
        return cls("t_log_t", _xlogx, CONVEX, True, operator_convex=True)

    @classmethod
    def power(cls, alpha: float):
        alpha = float(alpha)
        if not alpha > 0 or alpha == 1:
            raise ParameterError(f"power exponent must be positive and != 1, got {alpha}")
        convexity = CONVEX if alpha > 1 else CONCAVE
        # integer powers are defined on the whole line; convexity refers to [0, inf)
        return cls("power", lambda t: np.power(t, alpha), convexity, not alpha.is_integer(),
                   alpha, operator_convex=1 <= alpha <= 2)

    @classmethod
    def log_restricted(cls):
        """``log t`` for ``t > 0`` and ``0`` at ``t = 0``.

        Being discontinuous at zero, it treats eigenvalues within ``tol_psd``
        of zero as exact zeros.
        """
        return cls("log_restricted", _log_restricted, NEITHER, True, snap_zero=True)

    @classmethod
    def exp(cls):
        return cls("exp", np.exp, CONVEX, False)

    @classmethod
    def identity(cls):
        return cls("identity", lambda t: t, CONVEX, False, operator_convex=True)

    @classmethod
    def custom(cls, fn, convexity: str = NEITHER, nonnegative_domain: bool = False,
               name: str = "custom"):
        """Wrap a vectorised callable with a user-asserted convexity flag."""
        if convexity not in (CONVEX, CONCAVE, NEITHER):
            raise ParameterError(f"unknown convexity flag {convexity!r}")
        return cls(f"custom:{name}", fn, convexity, nonnegative_domain)


def parse_function(name: str) -> ScalarFunction:
    """Map ``t_log_t``, ``exp``, ``identity``, ``log_restricted``, ``power2``,
    ``power:0.5`` or ``power(0.5)`` to a catalog function."""
    key = name.strip().lower()
    simple = {
        "t_log_t": ScalarFunction.t_log_t,
        "tlogt": ScalarFunction.t_log_t,
        "exp": ScalarFunction.exp,
        "identity": ScalarFunction.identity,
        "log_restricted": ScalarFunction.log_restricted,
    }
    if key in simple:
        return simple[key]()
    if key.startswith("power"):
        arg = key[len("power"):].strip(":()= ")
        try:
            return ScalarFunction.power(float(arg))
        except ValueError:
            pass
    raise ParameterError(f"unknown function {name!r}")


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Distinct eigenvalues (increasing) with their spectral projections."""

    algebra: TracialAlgebra
    eigenvalues: tuple[float, ...]
    projections: tuple[BlockOperator, ...]
    cluster_tol: float

    def resolution(self) -> ResolutionOfIdentity:
        return ResolutionOfIdentity(self.algebra, self.projections)

    def spectral_measure(self) -> list[tuple[float, float]]:
        """Pairs ``(eigenvalue, tau(projection))``."""
        return [(lam, trace(p)) for lam, p in zip(self.eigenvalues, self.projections)]

    def reconstruct(self) -> BlockOperator:
        out = self.algebra.zero()
        for lam, p in zip(self.eigenvalues, self.projections):
            out = out + lam * p
        return out


def _require_hermitian(h: BlockOperator) -> None:
    if not h.is_hermitian():
        raise ContractError(
            f"operator is not Hermitian (residual {h.hermitian_residual():.3g})")


def eigendecompose(h: BlockOperator, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    """Spectral decomposition with near-degenerate eigenvalues merged.

    Eigenvalues from all blocks are sorted; consecutive ones closer than
    ``cluster_tol * (1 + ||h||)`` join a cluster whose eigenvalue is the
    trace-weighted mean of its members and whose projection is the sum of
    the members' eigenprojections.
    """
    _require_hermitian(h)
    algebra = h.algebra
    entries = []
    for b, ((vals, vecs), w) in enumerate(zip(h.eigh, algebra.weights)):
        for i, lam in enumerate(vals):
            entries.append((float(lam), b, i, w))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))

    gap = cluster_tol * (1.0 + h.norm())
    clusters = [[entries[0]]]
    for e in entries[1:]:
        if e[0] - clusters[-1][-1][0] <= gap:
            clusters[-1].append(e)
        else:
            clusters.append([e])

    eigenvalues, projections = [], []
    for cluster in clusters:
        total_w = sum(e[3] for e in cluster)
        eigenvalues.append(sum(e[0] * e[3] for e in cluster) / total_w)
        blocks = [np.zeros((d, d), dtype=complex) for d in algebra.dims]
        for _, b, i, _ in cluster:
            v = h.eigh[b][1][:, i]
            blocks[b] += np.outer(v, v.conj())
        projections.append(BlockOperator(algebra, blocks))
    return SpectralDecomposition(algebra, tuple(eigenvalues), tuple(projections), cluster_tol)


def _checked_spectrum(f: ScalarFunction, h: BlockOperator) -> list[np.ndarray]:
    """Per-block eigenvalues of ``h`` made admissible for ``f``."""
    _require_hermitian(h)
    spectra = [vals for vals, _ in h.eigh]
    if f.nonnegative_domain:
        tol = psd_tolerance(h)
        lowest = min(float(v.min()) for v in spectra)
        if lowest < -tol:
            raise DomainError(
                f"eigenvalue {lowest:.6g} is negative; {f.name} needs a nonnegative spectrum",
                code="negative_eigenvalue")
        floor = tol if f.snap_zero else 0.0
        spectra = [np.where(v <= floor, 0.0, v) for v in spectra]
    if f.tag.startswith("custom") and f.convexity != NEITHER:
        _spot_check_convexity(f, np.concatenate(spectra))
    return spectra


def _spot_check_convexity(f: ScalarFunction, spectrum: np.ndarray, n: int = 9) -> None:
    lo, hi = float(spectrum.min()), float(spectrum.max())
    if hi - lo <= 0:
        return
    xs = np.linspace(lo, hi, n)
    a, b = np.meshgrid(xs, xs)
    gap = (f(a) + f(b)) / 2 - f((a + b) / 2)
    if f.convexity == CONCAVE:
        gap = -gap
    slack = 1e-12 * (1.0 + np.abs(f(xs)).max())
    if gap.min() < -slack:
        warnings.warn(f"{f.name} fails midpoint {f.convexity}ity on [{lo:.3g}, {hi:.3g}]",
                      RuntimeWarning, stacklevel=3)


def apply_function(f: ScalarFunction, h: BlockOperator) -> BlockOperator:
    """``f(h) = sum_j f(lambda_j) p_j``.

    For functions defined on ``[0, inf)`` eigenvalues in ``[-tol_psd, 0)`` are
    clamped to zero; anything lower raises :class:`DomainError`. Non-integer
    powers, ``t_log_t`` and ``log_restricted`` have that domain.
    """
    spectra = _checked_spectrum(f, h)
    blocks = []
    for vals, (_, vecs) in zip(spectra, h.eigh):
        blocks.append((vecs * f(vals)) @ vecs.conj().T)
    return BlockOperator(h.algebra, blocks)


def spectral_sum(f: ScalarFunction, h: BlockOperator) -> float:
    """``tau(f(h))`` straight from the per-block spectra."""
    spectra = _checked_spectrum(f, h)
    total = 0.0
    for vals, w in zip(spectra, h.algebra.weights):
        total += w * math.fsum(f(vals))
    return float(total)


def kernel_projection(h: BlockOperator, tol: float | None = None) -> BlockOperator:
    """Projection onto eigenvectors with eigenvalue at most ``tol``."""
    return _threshold_projection(h, tol, kernel=True)


def support_projection(h: BlockOperator, tol: float | None = None) -> BlockOperator:
    """Projection onto eigenvectors with eigenvalue above ``tol``."""
    return _threshold_projection(h, tol, kernel=False)


def _threshold_projection(h, tol, kernel):
    _require_hermitian(h)
    tol = psd_tolerance(h) if tol is None else tol
    blocks = []
    for vals, vecs in h.eigh:
        keep = vals <= tol if kernel else vals > tol
        v = vecs[:, keep]
        blocks.append(v @ v.conj().T)
    return BlockOperator(h.algebra, blocks)


def spectral_interval_partition(d: SpectralDecomposition,
                                boundaries: Sequence[float]) -> ResolutionOfIdentity:
    """Group spectral projections by the intervals cut out by ``boundaries``.

    The intervals are ``[0, b_1), [b_1, b_2), ..., [b_k, inf)``. Intervals that
    capture no eigenvalue are dropped so every cell has positive trace.
    """
    edges = [float(b) for b in boundaries]
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ContractError("boundaries must be strictly increasing")
    if edges and edges[0] <= 0:
        raise ContractError("boundaries must be positive")
    recon_scale = 1.0 + max(abs(lam) for lam in d.eigenvalues)
    cells: dict[int, BlockOperator] = {}
    for lam, p in zip(d.eigenvalues, d.projections):
        if lam < -TOL_PSD * recon_scale:
            raise ContractError(f"eigenvalue {lam:.6g} lies outside [0, inf)")
        idx = int(np.searchsorted(edges, max(lam, 0.0), side="right"))
        cells[idx] = cells[idx] + p if idx in cells else p
    return ResolutionOfIdentity(d.algebra, [cells[i] for i in sorted(cells)])
