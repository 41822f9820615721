import numpy as np
import pytest

from sparsescat.realfield import (
    commutes_with_rotation,
    complex_dim,
    derealify,
    derealify_matrix,
    realify,
    realify_matrix,
    rotation_matrix,
    transpose_apply,
)


def test_realify_single_entry():
    assert np.array_equal(realify(np.array([1 + 2j])), [1.0, 2.0])


def test_realify_zero_vector():
    assert np.array_equal(realify(np.array([0.0, 0.0])), [0.0, 0.0, 0.0, 0.0])


def test_roundtrip_exact(rng):
    v = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    assert np.array_equal(derealify(realify(v)), v)


def test_inner_product_matches_complex(rng):
    u = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    lhs = realify(u) @ realify(v)
    rhs = np.real(np.vdot(u, v))
    assert abs(lhs - rhs) < 1e-13


def test_norm_preserved(rng):
    v = rng.standard_normal(25) + 1j * rng.standard_normal(25)
    assert np.isclose(np.linalg.norm(realify(v)), np.linalg.norm(v), rtol=1e-15, atol=0)


def test_matrix_of_i_is_rotation():
    assert np.array_equal(realify_matrix(np.array([[1j]])), [[0.0, -1.0], [1.0, 0.0]])


def test_matrix_identity():
    assert np.array_equal(realify_matrix(np.eye(3)), np.eye(6))


def test_matrix_vector_homomorphism(rng):
    a = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    v = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    lhs = realify_matrix(a) @ realify(v)
    rhs = realify(a @ v)
    assert np.max(np.abs(lhs - rhs)) < 1e-14


def test_ring_homomorphism(rng):
    a = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
    b = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
    lhs = realify_matrix(a @ b)
    rhs = realify_matrix(a) @ realify_matrix(b)
    assert np.max(np.abs(lhs - rhs)) < 1e-13


def test_block_structure_invariant(rng):
    a = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
    ra = realify_matrix(a)
    m, n = 3, 8
    assert np.array_equal(ra[:m, :n], ra[m:, n:])
    assert np.array_equal(ra[:m, n:], -ra[m:, :n])
    assert commutes_with_rotation(ra)
    # explicit J-commutation against the dense rotation matrices
    assert np.allclose(ra @ rotation_matrix(n), rotation_matrix(m) @ ra, atol=0)


def test_derealify_matrix_roundtrip(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert np.array_equal(derealify_matrix(realify_matrix(a)), a)


def test_transpose_apply_identity():
    a = realify_matrix(np.eye(3))
    y = np.arange(6.0)
    assert np.array_equal(transpose_apply(a, y), y)


def test_transpose_apply_rotation():
    a = realify_matrix(np.array([[1j]]))
    assert np.array_equal(transpose_apply(a, np.array([0.0, 1.0])), [1.0, 0.0])


def test_transpose_apply_adjoint_identity(rng):
    a = realify_matrix(rng.standard_normal((4, 7)) + 1j * rng.standard_normal((4, 7)))
    x = rng.standard_normal(14)
    y = rng.standard_normal(8)
    assert abs((a @ x) @ y - x @ transpose_apply(a, y)) < 1e-13


def test_transpose_apply_dimension_mismatch():
    a = realify_matrix(np.eye(3))
    with pytest.raises(ValueError):
        transpose_apply(a, np.zeros(4))


def test_complex_dim_odd_length_rejected():
    with pytest.raises(ValueError):
        complex_dim(np.zeros(5))
