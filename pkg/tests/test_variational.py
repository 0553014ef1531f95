import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracevar import (DensityOperator, ResolutionOfIdentity, ScalarFunction, TracialAlgebra,
                      constructive_gibbs_witness, entropy_over_subalgebras, gibbs_ascent,
                      gibbs_gradient, gibbs_objective, partition_search, partition_value,
                      renyi_certificate, renyi_entropy, segal_entropy,
                      segal_partition_certificate, trace, trace_functional)
from tracevar.errors import ContractError, DomainError, ParameterError, PropertyViolation
from tracevar.sampling import random_density, random_hermitian, random_psd
from tracevar.variational import (_Frames, constructive_gap, default_kernel_split,
                                  dyadic_partitions, gibbs_certificate, renyi_partition_sum,
                                  segal_partition_value, spectral_resolution)

patterns = st.sampled_from([[(2, 1.0)], [(3, 1.0)], [(2, 0.5), (2, 2.0)]])
seeds = st.integers(0, 2**32 - 1)

HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def diag_density(values, blocks=None):
    A = TracialAlgebra(blocks or [(len(values), 1.0)])
    return DensityOperator.from_diagonal(A, values)


# ---------------------------------------------------------------- Gibbs dual


def test_gibbs_objective_examples(m2):
    half = diag_density([0.5, 0.5])
    assert gibbs_objective(half, m2.zero()) == pytest.approx(-math.log(2), abs=1e-15)
    assert gibbs_objective(half, m2.diagonal([math.log(0.5)] * 2)) == pytest.approx(
        -math.log(2), abs=1e-15)
    D = diag_density([0.75, 0.25])
    assert gibbs_objective(D, m2.diagonal([1, -1])) == pytest.approx(-0.6269280110429725,
                                                                     abs=1e-12)
    log_d = m2.diagonal([math.log(0.75), math.log(0.25)])
    assert gibbs_objective(D, log_d) == pytest.approx(segal_entropy(D), abs=1e-14)


def test_gibbs_objective_contracts(m2):
    with pytest.raises(ContractError):
        gibbs_objective(diag_density([1.0, 1.0]), m2.zero())
    with pytest.raises(ContractError):
        gibbs_objective(diag_density([0.5, 0.5]), m2.operator([[0, 1], [0, 0]]))


def test_gibbs_gradient_examples(m2):
    D = diag_density([0.75, 0.25])
    assert gibbs_gradient(D, m2.zero()).allclose(m2.diagonal([0.25, -0.25]), 1e-15)
    log_d = m2.diagonal([math.log(0.75), math.log(0.25)])
    assert gibbs_gradient(D, log_d).norm() < 1e-15


@pytest.mark.parametrize("seed", range(4))
def test_gibbs_gradient_matches_finite_differences(algebra, seed):
    rng = np.random.default_rng(seed)
    D = DensityOperator(random_density(algebra, rng))
    h = random_hermitian(algebra, rng)
    grad = gibbs_gradient(D, h)
    step = 1e-4
    for _ in range(20):
        k = random_hermitian(algebra, rng)
        fd = (gibbs_objective(D, h + step * k) - gibbs_objective(D, h - step * k)) / (2 * step)
        exact = trace(grad @ k)
        assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


@settings(max_examples=40, deadline=None)
@given(patterns, seeds, seeds)
def test_weak_duality(blocks, s1, s2):
    A = TracialAlgebra(blocks)
    D = DensityOperator(random_density(A, s1))
    h = 3 * random_hermitian(A, s2)
    assert gibbs_objective(D, h) <= segal_entropy(D) + 1e-9


def test_constructive_witness_example():
    D = diag_density([0.5, 0.5, 0.0])
    cand = constructive_gibbs_witness(D, 0.1)
    assert cand.value == pytest.approx(-0.7419373447293773, abs=1e-12)
    assert cand.value == pytest.approx(-math.log(2) - math.log(1.05), abs=1e-12)
    assert cand.derivation == {"method": "constructive", "eps": 0.1, "kernel_cells": 1}


def test_constructive_witness_full_support_is_exact():
    D = diag_density([0.75, 0.25])
    cand = constructive_gibbs_witness(D, 0.1)
    assert cand.value == pytest.approx(segal_entropy(D), abs=1e-14)
    assert cand.derivation["kernel_cells"] == 0


@pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
@pytest.mark.parametrize("k", [1, 2, 5, 8])
def test_constructive_gap_is_exact(eps, k):
    A = TracialAlgebra([(k + 2, 1.0)])
    D = DensityOperator(random_density(A, 1000 + k, rank=2))
    cand = constructive_gibbs_witness(D, eps)
    assert cand.derivation["kernel_cells"] == k
    gap = segal_entropy(D) - cand.value
    assert gap == pytest.approx(constructive_gap(eps, k), abs=1e-10)
    assert gap <= math.log1p(eps) <= eps


def test_constructive_witness_on_weighted_blocks():
    A = TracialAlgebra([(2, 0.5), (2, 2.0)])
    D = DensityOperator(random_density(A, 7, rank=1))
    cand = constructive_gibbs_witness(D, 0.1)
    k = cand.derivation["kernel_cells"]
    assert k == 3
    assert segal_entropy(D) - cand.value == pytest.approx(constructive_gap(0.1, k), abs=1e-10)


def test_custom_kernel_split():
    D = diag_density([1.0, 0.0, 0.0])
    A = D.algebra
    single = ResolutionOfIdentity(A, [A.diagonal([0, 1, 1])])
    cand = constructive_gibbs_witness(D, 0.5, kernel_split=single)
    assert segal_entropy(D) - cand.value == pytest.approx(math.log(1.25), abs=1e-12)
    assert len(default_kernel_split(D)) == 2


def test_kernel_split_contracts():
    D = diag_density([1.0, 0.0, 0.0])
    A = D.algebra
    with pytest.raises(ContractError):
        constructive_gibbs_witness(D, 0.1, ResolutionOfIdentity(A, [A.diagonal([0, 1, 0])]))
    with pytest.raises(ContractError):
        constructive_gibbs_witness(D, 0.1, ResolutionOfIdentity(A, [A.diagonal([1, 1, 0])]))
    with pytest.raises(ContractError):
        constructive_gibbs_witness(D, 0.1, ResolutionOfIdentity(A, []))
    full = diag_density([0.5, 0.5])
    with pytest.raises(ContractError):
        constructive_gibbs_witness(full, 0.1,
                                   ResolutionOfIdentity(full.algebra, [full.algebra.identity()]))
    with pytest.raises(ParameterError):
        constructive_gibbs_witness(D, 0.0)


def test_ascent_examples(m2):
    D = diag_density([0.75, 0.25])
    cand = gibbs_ascent(D)
    assert cand.converged
    assert cand.value == pytest.approx(segal_entropy(D), abs=1e-12)
    assert cand.value == pytest.approx(-0.5623351446188083, abs=1e-9)
    half = diag_density([0.5, 0.5])
    cand = gibbs_ascent(half, init=random_hermitian(m2, 3))
    assert cand.value == pytest.approx(-math.log(2), abs=1e-12)
    assert cand.derivation["method"] == "ascent"


@pytest.mark.parametrize("policy", ["bb", "unit"])
def test_ascent_policies_converge(algebra, policy):
    D = DensityOperator(random_density(algebra, 11))
    cand = gibbs_ascent(D, step_policy=policy)
    assert cand.converged
    assert abs(cand.value - segal_entropy(D)) <= 1e-9
    with pytest.raises(ParameterError):
        gibbs_ascent(D, step_policy="newton")


def test_ascent_does_not_attain_on_a_kernel():
    D = diag_density([1.0, 0.0])
    short = gibbs_ascent(D, max_iter=50)
    longer = gibbs_ascent(D, max_iter=500)
    assert not short.converged and not longer.converged
    assert short.value <= longer.value <= segal_entropy(D) + 1e-9


def test_gibbs_certificate_fields():
    cert = gibbs_certificate(diag_density([0.5, 0.5, 0.0]), eps=0.1)
    assert cert.gap == pytest.approx(math.log(1.05), abs=1e-12)
    assert cert.details["predicted_gap"] == pytest.approx(cert.gap, abs=1e-12)
    assert cert.holds() and cert.direction == "sup"
    assert cert.to_dict()["witness"]["derivation"]["method"] == "constructive"
    with pytest.raises(ParameterError):
        gibbs_certificate(diag_density([0.5, 0.5]), method="simplex")


# ------------------------------------------------------- partition formulae


def test_partition_value_examples(m2):
    D = m2.diagonal([0.75, 0.25])
    t_log_t = ScalarFunction.t_log_t()
    coord = ResolutionOfIdentity.coordinate(m2)
    trivial = ResolutionOfIdentity.trivial(m2)
    assert partition_value(t_log_t, D, coord) == pytest.approx(-0.5623351446188083, abs=1e-15)
    assert partition_value(t_log_t, D, trivial) == pytest.approx(-math.log(2), abs=1e-15)
    root = ScalarFunction.power(0.5)
    assert partition_value(root, D, trivial) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert partition_value(root, D, coord) == pytest.approx(1.3660254037844386, abs=1e-15)
    square = ScalarFunction.power(2)
    assert partition_value(square, m2.diagonal([1, 3]), trivial) == pytest.approx(8.0)
    assert partition_value(square, m2.diagonal([1, 3]), coord) == pytest.approx(10.0)


def test_partition_search_example(m2):
    h = m2.diagonal([1, 3])
    cert = partition_search(ScalarFunction.power(2), h, depth=2, samples=200, seed=1)
    assert cert.target == pytest.approx(10.0)
    assert cert.gap <= 1e-12
    assert cert.direction == "sup" and cert.candidates == 1 + 3 + 200
    assert cert.details["worst"] >= 8.0 - 1e-12

    cert = partition_search(ScalarFunction.power(0.5), h, depth=2, samples=200, seed=1)
    assert cert.direction == "inf"
    assert cert.target == pytest.approx(1 + math.sqrt(3))
    assert abs(cert.gap) <= 1e-12
    assert cert.details["worst"] <= 2 * math.sqrt(2) + 1e-12


def test_partition_search_rejects_bad_input(m2):
    with pytest.raises(DomainError):
        partition_search(ScalarFunction.t_log_t(), m2.diagonal([1, -1]), samples=10)
    with pytest.raises(ParameterError):
        partition_search(ScalarFunction.log_restricted(), m2.diagonal([1, 2]), samples=10)
    with pytest.raises(ParameterError):
        partition_search(ScalarFunction.t_log_t(), m2.diagonal([1, 2]), samples=-1)


def test_false_convexity_flag_is_caught(m2):
    concave_as_convex = ScalarFunction.custom(np.sqrt, "convex", True, name="sqrt")
    with pytest.warns(RuntimeWarning):
        with pytest.raises(PropertyViolation):
            partition_search(concave_as_convex, m2.diagonal([1, 4]), samples=50)


@pytest.mark.parametrize("f", [ScalarFunction.t_log_t(), ScalarFunction.power(2),
                               ScalarFunction.power(0.5)], ids=lambda f: f.name)
def test_batched_values_match_materialized(algebra, f):
    rng = np.random.default_rng(5)
    h = random_psd(algebra, rng)
    frames = _Frames.draw(algebra, 20, rng)
    fast = frames.values(f, h)
    slow = [partition_value(f, h, frames.resolution(s)) for s in range(20)]
    np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_dyadic_partitions_refine(algebra):
    h = random_psd(algebra, 3)
    levels = dyadic_partitions(h, 4)
    assert len(levels) == 5
    assert len(levels[0]) == 1
    sizes = [len(R) for R in levels]
    assert sizes == sorted(sizes)
    assert sizes[-1] == len(spectral_resolution(h))
    f = ScalarFunction.t_log_t()
    vals = [partition_value(f, h, R) for R in levels]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(trace_functional(f, h), abs=1e-10)
    for R in levels:
        R.check()
    with pytest.raises(ParameterError):
        dyadic_partitions(h, -1)


def test_dyadic_level_one_cuts_the_spectrum_in_half():
    A = TracialAlgebra.full_matrix(4)
    levels = dyadic_partitions(A.diagonal([1, 2, 3, 4]), 2)
    assert [len(R) for R in levels] == [1, 2, 4]
    assert [trace(p @ A.diagonal([1, 2, 3, 4])) for p in levels[1].projections] == [3, 7]


@settings(max_examples=30, deadline=None)
@given(patterns, seeds)
def test_segal_certificate_property(blocks, seed):
    D = DensityOperator(random_density(TracialAlgebra(blocks), seed))
    cert = segal_partition_certificate(D, depth=3, samples=100, seed=seed)
    assert abs(cert.gap) <= 1e-10
    assert cert.details["worst"] <= cert.target + 1e-9


def test_segal_equality_case():
    for k in (2, 3, 4):
        A = TracialAlgebra.full_matrix(k)
        D = DensityOperator(A.identity() / k)
        cert = segal_partition_certificate(D, samples=300, seed=2)
        assert cert.target == pytest.approx(-math.log(k), abs=1e-14)
        assert cert.achieved - cert.details["worst"] <= 1e-10


def test_segal_partition_value_examples(m2):
    D = diag_density([0.75, 0.25])
    assert segal_partition_value(D, ResolutionOfIdentity.trivial(m2)) == pytest.approx(
        -math.log(2), abs=1e-15)
    assert segal_partition_value(D, ResolutionOfIdentity.coordinate(m2)) == pytest.approx(
        segal_entropy(D), abs=1e-15)


def test_renyi_certificate_examples(m2):
    half = diag_density([0.5, 0.5])
    cert = renyi_certificate(half, 0.5, samples=50)
    assert cert.target == pytest.approx(-math.log(2), abs=1e-15)
    assert cert.achieved == pytest.approx(-math.log(2), abs=1e-12)
    D = diag_density([0.75, 0.25])
    cert = renyi_certificate(D, 0.5, samples=200, seed=4)
    assert cert.details["inner_direction"] == "inf"
    assert cert.details["inner_target"] == pytest.approx(1.3660254037844386, abs=1e-14)
    assert cert.target == pytest.approx(-0.6238107163648713, abs=1e-12)
    assert abs(cert.gap) <= 1e-10 and cert.direction == "sup"
    assert renyi_partition_sum(D, ResolutionOfIdentity.trivial(m2), 0.5) == pytest.approx(
        math.sqrt(2))
    cert = renyi_certificate(D, 2.0, samples=200, seed=4)
    assert cert.details["inner_direction"] == "sup"
    assert abs(cert.gap) <= 1e-10
    assert cert.details["worst"] <= cert.target + 1e-9


@pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0])
def test_renyi_certificate_matches_entropy(algebra, alpha):
    D = DensityOperator(random_density(algebra, 17))
    cert = renyi_certificate(D, alpha, samples=200, seed=0)
    assert cert.target == renyi_entropy(D, alpha)
    assert abs(cert.gap) <= 1e-9


def test_entropy_over_subalgebras_examples(m2):
    D = diag_density([0.75, 0.25])
    cert = entropy_over_subalgebras(D, samples=50)
    assert abs(cert.gap) <= 1e-12
    assert cert.details["pinched_achieved"] == pytest.approx(segal_entropy(D), abs=1e-12)
    assert cert.details["max_excess"] <= 1e-12
    # a Hadamard-basis state restricts to the trace on the coordinate subalgebra
    plus = DensityOperator(m2.operator(HADAMARD @ np.diag([1.0, 0.0]) @ HADAMARD.T))
    coord = ResolutionOfIdentity.coordinate(m2)
    assert segal_partition_value(plus, coord) == pytest.approx(-math.log(2), abs=1e-15)
    cert = entropy_over_subalgebras(plus, samples=50)
    assert cert.target == pytest.approx(0.0, abs=1e-14)
    assert abs(cert.gap) <= 1e-10


def test_certificate_json_is_deterministic(algebra):
    D = DensityOperator(random_density(algebra, 23))
    a = segal_partition_certificate(D, samples=100, seed=9).to_json()
    b = segal_partition_certificate(D, samples=100, seed=9).to_json()
    assert a == b
    parsed = json.loads(a)
    assert list(parsed)[:8] == ["kind", "target", "achieved", "gap", "direction", "witness",
                                "params", "candidates"]
    assert parsed["params"] == {"eps": None, "depth": 4, "samples": 100, "seed": 9}


def test_threads_do_not_change_results(monkeypatch):
    D = DensityOperator(random_density(TracialAlgebra.full_matrix(3), 5))
    one = entropy_over_subalgebras(D, samples=30, seed=1).to_json()
    monkeypatch.setenv("TRACEVAR_THREADS", "3")
    assert entropy_over_subalgebras(D, samples=30, seed=1).to_json() == one
