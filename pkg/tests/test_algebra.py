import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracevar import (BlockOperator, ResolutionOfIdentity, StructuralError, TracialAlgebra,
                      adjoint, add, multiply, scale, trace, validate_resolution)
from tracevar.errors import ContractError
from tracevar.sampling import random_hermitian, random_resolution, random_unitary

patterns = st.sampled_from([[(2, 1.0)], [(3, 1.0)], [(2, 0.5), (2, 2.0)], [(1, 2.0), (3, 0.25)]])
seeds = st.integers(0, 2**32 - 1)


def test_trace_examples(m2):
    assert trace(m2.diagonal([1, 3])) == 4
    A = TracialAlgebra([(1, 2.0), (2, 0.5)])
    assert trace(A.identity()) == pytest.approx(3.0, abs=0)
    assert A.trace_of_identity == 3.0
    assert trace(m2.operator([[0, 1], [1, 0]])) == 0


def test_arithmetic_examples(m2):
    assert multiply(m2.diagonal([1, 2]), m2.diagonal([3, 4])).allclose(m2.diagonal([3, 8]), 0)
    x = random_hermitian(m2, 0)
    assert add(x, m2.zero()).allclose(x, 0)
    a = adjoint(m2.operator([[0, 1j], [0, 0]]))
    assert np.array_equal(a.blocks[0], np.array([[0, 0], [-1j, 0]]))
    assert scale(m2.identity(), 2).allclose(2 * m2.identity(), 0)


def test_operators_are_immutable(m2):
    x = m2.diagonal([1, 2])
    with pytest.raises(ValueError):
        x.blocks[0][0, 0] = 5


def test_algebra_validation():
    with pytest.raises(ContractError):
        TracialAlgebra([(2, 0.0)])
    with pytest.raises(ContractError):
        TracialAlgebra([(0, 1.0)])
    with pytest.raises(ContractError):
        TracialAlgebra([])


def test_shape_mismatch(m2):
    with pytest.raises(StructuralError):
        BlockOperator(m2, [np.eye(3)])
    with pytest.raises(StructuralError):
        m2.identity() + TracialAlgebra.full_matrix(3).identity()
    with pytest.raises(StructuralError):
        trace(m2.identity(), TracialAlgebra.full_matrix(3))


def test_validate_resolution_examples(m2):
    assert validate_resolution(ResolutionOfIdentity.coordinate(m2)) == []

    single = validate_resolution(ResolutionOfIdentity(m2, [m2.diagonal([1, 0])]))
    assert [v.invariant for v in single] == ["sum_to_identity"]
    assert single[0].residual == pytest.approx(1.0)

    p = m2.operator(np.full((2, 2), 0.5))
    names = {v.invariant for v in validate_resolution(ResolutionOfIdentity(m2, [p, p]))}
    assert "mutual_orthogonality" in names


def test_validate_resolution_flags_non_projection(m2):
    R = ResolutionOfIdentity(m2, [m2.diagonal([0.5, 0]), m2.diagonal([0.5, 1])])
    names = {v.invariant for v in validate_resolution(R)}
    assert "idempotent" in names
    with pytest.raises(ContractError):
        R.check()


@settings(max_examples=40, deadline=None)
@given(patterns, seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_trace_is_linear(blocks, seed, a, b):
    A = TracialAlgebra(blocks)
    rng = np.random.default_rng(seed)
    x, y = random_hermitian(A, rng), random_hermitian(A, rng)
    lhs = trace(a * x + b * y)
    assert abs(lhs - a * trace(x) - b * trace(y)) <= 1e-12 * (abs(a) * x.norm() + abs(b) * y.norm()) + 1e-15


@settings(max_examples=40, deadline=None)
@given(patterns, seeds)
def test_trace_is_tracial(blocks, seed):
    A = TracialAlgebra(blocks)
    rng = np.random.default_rng(seed)
    x, y = random_hermitian(A, rng), random_hermitian(A, rng)
    assert abs((x @ y).tr() - (y @ x).tr()) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(patterns, seeds)
def test_trace_is_faithful(blocks, seed):
    A = TracialAlgebra(blocks)
    rng = np.random.default_rng(seed)
    x = random_hermitian(A, rng) @ random_unitary(A, rng)
    assert trace(x.H @ x) > 0
    assert trace(A.zero().H @ A.zero()) == 0


@settings(max_examples=25, deadline=None)
@given(patterns, seeds, st.integers(1, 5))
def test_random_resolutions_are_valid(blocks, seed, cells):
    A = TracialAlgebra(blocks)
    cells = min(cells, A.total_dim)
    assert validate_resolution(random_resolution(A, seed)) == []
    R = random_resolution(A, seed, cells=cells)
    assert len(R) == cells
    assert validate_resolution(R) == []
