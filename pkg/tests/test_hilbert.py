import numpy as np
import pytest
from hypothesis import given, strategies as st

from ontolab.hilbert import (
    DimensionError,
    ProjectiveMeasurement,
    RankDeficientError,
    StateVector,
    UnitaryOperator,
    born_probability,
    inner_product,
    orthonormal_extension,
    random_measurement,
    random_state,
    random_unitary,
    tensor_product,
)

S = 1 / np.sqrt(2)
ZERO = StateVector.basis(2, 0)
ONE = StateVector.basis(2, 1)
PLUS = StateVector([S, S])

dims = st.integers(min_value=1, max_value=8)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_inner_product_examples(scenario):
    assert inner_product(ZERO, ZERO) == 1
    assert inner_product(ZERO, PLUS) == pytest.approx(S, abs=1e-15)
    xi2 = scenario.measurement[1]
    assert abs(inner_product(xi2, tensor_product(scenario.psi1, scenario.psi2))) < 1e-12


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner_product(ZERO, StateVector.basis(3, 0))


def test_tensor_product_examples():
    np.testing.assert_array_equal(tensor_product(ZERO, ZERO).amplitudes, [1, 0, 0, 0])
    np.testing.assert_allclose(tensor_product(ZERO, PLUS).amplitudes, [S, S, 0, 0], atol=1e-16)


def test_born_probability_examples():
    assert born_probability(PLUS, PLUS) == pytest.approx(1.0, abs=1e-15)
    assert born_probability(ONE, ZERO) == 0.0
    assert born_probability(ZERO, PLUS) == pytest.approx(0.5, abs=1e-15)


def test_state_rejects_unnormalized_and_nonfinite():
    with pytest.raises(ValueError):
        StateVector([1.0, 1.0])
    with pytest.raises(ValueError):
        StateVector([np.nan, 0.0])


def test_states_are_immutable():
    psi = random_state(3, 0)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0


def test_orthonormal_extension_examples():
    basis = orthonormal_extension([ZERO])
    assert basis[0].same_ray(ZERO) and basis[1].same_ray(ONE)

    empty = orthonormal_extension([], dim=5)
    assert ProjectiveMeasurement(tuple(empty)).completeness_residual() < 1e-10

    basis = orthonormal_extension([PLUS])
    assert abs(inner_product(basis[0], basis[1])) < 1e-12


def test_orthonormal_extension_rank_deficiency():
    with pytest.raises(RankDeficientError):
        orthonormal_extension([PLUS, StateVector([-S, -S])])


@given(dims, st.integers(0, 8), seeds)
def test_orthonormal_extension_contains_inputs(dim, n_in, seed):
    n_in = min(n_in, dim)
    inputs = [random_state(dim, [seed, i]) for i in range(n_in)]
    basis = orthonormal_extension(inputs, dim)
    meas = ProjectiveMeasurement(tuple(basis))
    assert meas.is_complete and meas.completeness_residual() < 1e-10
    rows = meas.matrix
    for v in inputs:
        # v is reproduced by its expansion in the returned basis
        assert np.abs(rows.T @ (rows.conj() @ v.amplitudes) - v.amplitudes).max() < 1e-10


def test_random_generators_are_deterministic():
    np.testing.assert_array_equal(random_state(4, 9).amplitudes, random_state(4, 9).amplitudes)
    np.testing.assert_array_equal(random_unitary(4, 9).matrix, random_unitary(4, 9).matrix)
    assert not np.array_equal(random_state(4, 9).amplitudes, random_state(4, 10).amplitudes)


@given(dims, seeds)
def test_random_unitary_is_unitary(dim, seed):
    U = random_unitary(dim, seed).matrix
    assert np.abs(U.conj().T @ U - np.eye(dim)).max() < 1e-10
    psi = random_state(dim, seed)
    assert abs(np.linalg.norm(psi.amplitudes) - 1) < 1e-12


def test_unitary_rejects_non_unitary():
    with pytest.raises(ValueError):
        UnitaryOperator(np.array([[1, 1], [0, 1]]))


@given(dims, seeds)
def test_inner_product_conjugate_symmetry(dim, seed):
    a, b = random_state(dim, [seed, 0]), random_state(dim, [seed, 1])
    assert abs(inner_product(a, b) - np.conj(inner_product(b, a))) < 1e-15


@given(dims, seeds)
def test_born_sums_to_one_over_complete_measurement(dim, seed):
    psi = random_state(dim, [seed, 0])
    meas = random_measurement(dim, [seed, 1])
    assert abs(sum(born_probability(xi, psi) for xi in meas) - 1) < 1e-10


@given(st.integers(1, 4), st.integers(1, 4), seeds)
def test_tensor_product_factorizes_inner_products(d1, d2, seed):
    a, c = random_state(d1, [seed, 0]), random_state(d1, [seed, 1])
    b, d = random_state(d2, [seed, 2]), random_state(d2, [seed, 3])
    lhs = inner_product(tensor_product(a, b), tensor_product(c, d))
    assert abs(lhs - inner_product(a, c) * inner_product(b, d)) < 1e-12
    assert abs(np.linalg.norm(tensor_product(a, b).amplitudes) - 1) < 1e-12


def test_measurement_rejects_nonorthogonal_outcomes():
    with pytest.raises(ValueError):
        ProjectiveMeasurement((ZERO, PLUS))
