import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sptrunc.errors import DimensionError
from sptrunc.quaternion import (
    E1,
    E2,
    E3,
    Quaternion,
    QuaternionMatrix,
    complex_rep,
    from_complex_rep,
    is_quaternion_real_rep,
    qconj,
    qmatmul,
    qmul,
    quat_mul,
    symplectic_unit,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quat = arrays(np.float64, 4, elements=finite)


def test_unit_relations():
    one = Quaternion(1.0, 0, 0, 0)
    for e in (E1, E2, E3):
        assert quat_mul(e, e) == -one
    assert quat_mul(E1, E2) == E3
    assert quat_mul(E2, E3) == E1
    assert quat_mul(E3, E1) == E2
    assert quat_mul(E2, E1) == -E3


def test_theta_matches_convention():
    q = Quaternion(1.0, 2.0, 3.0, 4.0)
    expected = np.array([[1 + 2j, 3 + 4j], [-3 + 4j, 1 - 2j]])
    np.testing.assert_array_equal(q.to_complex(), expected)


@given(quat, quat)
def test_homomorphism(a, b):
    lhs = Quaternion.from_array(qmul(a, b)).to_complex()
    rhs = Quaternion.from_array(a).to_complex() @ Quaternion.from_array(b).to_complex()
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(a).max() * np.abs(b).max()))


@given(quat)
def test_conjugate_is_dagger_and_norm_is_det(a):
    ca = Quaternion.from_array(a).to_complex()
    np.testing.assert_allclose(Quaternion.from_array(qconj(a)).to_complex(), ca.conj().T, atol=1e-12)
    det = np.linalg.det(ca)
    assert det.real == pytest.approx(np.sum(a**2), rel=1e-10, abs=1e-10)
    assert abs(det.imag) < 1e-9 * (1 + np.sum(a**2))


@given(arrays(np.float64, (3, 3, 4), elements=finite), arrays(np.float64, (3, 2, 4), elements=finite))
def test_matrix_homomorphism(A, B):
    lhs = complex_rep(qmatmul(A, B))
    rhs = complex_rep(A) @ complex_rep(B)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(A).max() * np.abs(B).max()))


@given(arrays(np.float64, (2, 3, 4), elements=finite))
def test_complex_rep_round_trip(A):
    C = complex_rep(A)
    assert C.shape == (4, 6)
    np.testing.assert_allclose(from_complex_rep(C), A, atol=1e-12)
    assert is_quaternion_real_rep(C) if C.shape[0] == C.shape[1] else True


def test_quaternion_real_detection(rng):
    A = complex_rep(rng.normal(size=(3, 3, 4)))
    Z = symplectic_unit(3)
    assert is_quaternion_real_rep(A)
    np.testing.assert_allclose(A.conj().T, -Z @ A.T @ Z, atol=1e-12)
    B = A.copy()
    B[0, 1] += 1e-3
    assert not is_quaternion_real_rep(B)
    generic = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert not is_quaternion_real_rep(generic)


def test_quaternion_real_rejects_bad_shapes():
    with pytest.raises(DimensionError):
        is_quaternion_real_rep(np.zeros((3, 3)))
    with pytest.raises(DimensionError):
        is_quaternion_real_rep(np.zeros((2, 4)))


def test_symplectic_unit():
    Z = symplectic_unit(2)
    np.testing.assert_array_equal(Z @ Z, -np.eye(4))
    np.testing.assert_array_equal(Z.T, -Z)


def test_matrix_type(rng):
    A = QuaternionMatrix(rng.normal(size=(3, 3, 4)))
    B = QuaternionMatrix(rng.normal(size=(3, 3, 4)))
    np.testing.assert_allclose((A @ B).to_complex_rep(), A.to_complex_rep() @ B.to_complex_rep(), atol=1e-12)
    np.testing.assert_allclose(A.dagger().to_complex_rep(), A.to_complex_rep().conj().T, atol=1e-12)
    I = QuaternionMatrix.identity(3)
    np.testing.assert_allclose((A @ I).data, A.data)
    assert A.dims == (3, 3)
    assert isinstance(A[0, 1], Quaternion)
    with pytest.raises(ValueError):
        A.data[0, 0, 0] = 1.0
    C = QuaternionMatrix.from_complex(A.to_complex_rep())
    np.testing.assert_allclose(C.data, A.data, atol=1e-12)
