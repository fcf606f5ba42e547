import numpy as np
import pytest

from src.mathematics.numerics import (
    ContractViolation,
    DimensionError,
    NumericalFailure,
    assert_finite,
    hadamard,
    hermitian_eig,
    max_abs,
    max_eigenvalue,
    phase,
    symmetrize,
    unvec,
    vec,
)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


def test_symmetrize_returns_exact_hermitian(rng):
    a = random_hermitian(rng, 5)
    noisy = a + 1e-12 * rng.standard_normal((5, 5))
    sym = symmetrize(noisy)
    assert np.array_equal(sym, sym.conj().T)
    assert np.allclose(sym, a, atol=1e-10)


def test_symmetrize_rejects_non_hermitian(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    with pytest.raises(ContractViolation):
        symmetrize(a)


def test_symmetrize_rejects_non_square():
    with pytest.raises(DimensionError):
        symmetrize(np.zeros((2, 3)))


def test_hermitian_eig_reconstructs(rng):
    a = random_hermitian(rng, 6)
    eig = hermitian_eig(a)
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    assert np.allclose(eig.eigenvectors.conj().T @ eig.eigenvectors, np.eye(6), atol=1e-10)
    assert np.allclose(eig.reconstruct(), a, atol=1e-10)


def test_max_eigenvalue_methods_agree(rng):
    for _ in range(10):
        a = random_hermitian(rng, 8)
        exact = np.linalg.eigvalsh(a)[-1]
        assert max_eigenvalue(a) == pytest.approx(exact, rel=1e-10, abs=1e-10)
        assert max_eigenvalue(a, method="power") == pytest.approx(exact, rel=1e-8, abs=1e-8)


def test_max_eigenvalue_of_scaled_identity():
    assert max_eigenvalue(3.0 * np.eye(4)) == pytest.approx(3.0)
    assert max_eigenvalue(3.0 * np.eye(4), method="power") == pytest.approx(3.0)


def test_max_eigenvalue_negative_definite():
    a = np.diag([-5.0, -2.0, -7.0])
    assert max_eigenvalue(a) == pytest.approx(-2.0)
    assert max_eigenvalue(a, method="power") == pytest.approx(-2.0)


def test_max_eigenvalue_unknown_method():
    with pytest.raises(ValueError):
        max_eigenvalue(np.eye(2), method="lanczos")


def test_vec_is_column_major():
    a = np.array([[1, 2], [3, 4]])
    assert vec(a).tolist() == [1, 3, 2, 4]
    assert np.array_equal(unvec(vec(a), 2, 2), a)


def test_vec_inner_product_is_trace(rng):
    a = random_hermitian(rng, 4)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert np.vdot(vec(a), vec(x)) == pytest.approx(np.trace(a @ x))


def test_unvec_rejects_wrong_length():
    with pytest.raises(DimensionError):
        unvec(np.zeros(5), 2, 3)


def test_hadamard_shape_mismatch():
    assert np.array_equal(hadamard(np.ones((2, 2)), 2 * np.ones((2, 2))), 2 * np.ones((2, 2)))
    with pytest.raises(DimensionError):
        hadamard(np.ones((2, 2)), np.ones((2, 3)))


def test_phase_values():
    result = phase(np.array([0.0, -2j, 3.0, -1.0 + 1.0j]))
    assert result[0] == 1.0
    assert result[1] == pytest.approx(-1j)
    assert result[2] == pytest.approx(1.0)
    assert np.allclose(np.abs(result), 1.0, atol=1e-15)


def test_max_abs():
    assert max_abs(np.array([[1.0, -3.0], [2j, 0.0]])) == 3.0
    assert max_abs(np.zeros((0, 2))) == 0.0


def test_assert_finite():
    a = np.ones(3)
    assert assert_finite(a, "a") is a
    with pytest.raises(NumericalFailure):
        assert_finite(np.array([1.0, np.nan]), "b")


def test_hermitian_eig_on_many_random_matrices(rng):
    for _ in range(100):
        n = int(rng.integers(1, 65))
        a = random_hermitian(rng, n)
        eig = hermitian_eig(a)
        tol = 1e-10 * max(1.0, np.linalg.norm(a))
        assert np.all(np.diff(eig.eigenvalues) >= -tol)
        assert np.allclose(eig.eigenvectors.conj().T @ eig.eigenvectors, np.eye(n), atol=1e-10)
        assert np.allclose(eig.reconstruct(), a, atol=tol)
        assert max_eigenvalue(a) == pytest.approx(eig.eigenvalues[-1], rel=1e-10, abs=tol)


def test_max_eigenvalue_bounds_rayleigh_quotient(rng):
    for _ in range(100):
        n = int(rng.integers(1, 65))
        a = random_hermitian(rng, n)
        top = max_eigenvalue(a)
        slack = 1e-8 * np.linalg.norm(a)
        for _ in range(5):
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            quotient = np.real(np.vdot(x, a @ x)) / np.real(np.vdot(x, x))
            assert top >= quotient - slack


def test_vec_of_outer_product_is_kronecker(rng):
    for _ in range(20):
        m, n = rng.integers(1, 9, size=2)
        x = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert np.allclose(vec(np.outer(x, y.conj())), np.kron(y.conj(), x))


def test_hadamard_bilinear_form_is_trace(rng):
    for _ in range(20):
        n = int(rng.integers(1, 12))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lhs = np.vdot(x, hadamard(a, b) @ y)
        rhs = np.trace(np.diag(x).conj().T @ a @ np.diag(y) @ b.T)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)
