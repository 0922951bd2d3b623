import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canograph.algebra import (
    MatrixOverflowError,
    NotSelfAdjointError,
    RankDeficientError,
    kernel_basis,
    mat_exp,
    symplectic_form,
    validate_boundary,
)

J2 = symplectic_form(1)


class TestSymplecticForm:
    def test_square_is_minus_identity(self):
        for n in (1, 2, 5):
            j = symplectic_form(n)
            assert np.allclose(j @ j, -np.eye(2 * n))
            assert np.allclose(j.conj().T, -j)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            symplectic_form(0)


class TestValidateBoundary:
    def test_already_normalized(self):
        bc = validate_boundary([[0, 1]])
        assert np.allclose(bc.matrix, [[0, 1]])

    def test_row_scaling(self):
        bc = validate_boundary([[0, 2]])
        assert np.allclose(bc.matrix, [[0, 1]])

    def test_one_one(self):
        bc = validate_boundary([[1, 1]])
        assert np.allclose(bc.matrix, np.array([[1, 1]]) / np.sqrt(2))
        # 2x2 check of the J-nullity by direct multiplication
        assert abs(bc.matrix @ J2 @ bc.matrix.conj().T) < 1e-14

    def test_rank_deficient(self):
        with pytest.raises(RankDeficientError):
            validate_boundary([[1, 0, 1, 0], [1e-14, 0, 1e-14, 0]])

    def test_not_self_adjoint(self):
        # (M I) with non-Hermitian M violates raw J raw* = 0
        m = np.array([[0.0, 1.0], [0.0, 0.0]])
        raw = np.hstack([m, np.eye(2)])
        with pytest.raises(NotSelfAdjointError):
            validate_boundary(raw)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=2**31 - 1))
    def test_normalization_invariants(self, n, seed):
        rng = np.random.default_rng(seed)
        herm = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        herm = 0.5 * (herm + herm.conj().T)
        mix = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 2 * np.eye(n)
        bc = validate_boundary(mix @ np.hstack([herm, np.eye(n)]))
        j = symplectic_form(n)
        assert np.linalg.norm(bc.matrix @ bc.matrix.conj().T - np.eye(n)) <= 1e-12
        assert np.linalg.norm(bc.matrix @ j @ bc.matrix.conj().T) <= 1e-10


def _taylor_exp(m, terms=60):
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


class TestMatExp:
    def test_zero(self):
        assert np.allclose(mat_exp(np.zeros((3, 3))), np.eye(3))

    def test_pi_j_rotation(self):
        expected = _taylor_exp(np.pi * J2)
        assert np.allclose(expected, -np.eye(2), atol=1e-14)
        assert np.allclose(mat_exp(np.pi * J2), -np.eye(2), atol=1e-13)

    def test_diagonal(self):
        got = mat_exp(np.diag([1.0, -1.0]))
        assert np.allclose(got, np.diag([np.e, 1 / np.e]), rtol=1e-13)

    def test_inverse_pairing(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            m *= 10.0 / max(np.linalg.norm(m, 2), 1.0)
            prod = mat_exp(m) @ mat_exp(-m)
            assert np.linalg.norm(prod - np.eye(4)) < 1e-10

    def test_overflow(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            with pytest.raises((MatrixOverflowError, ValueError)):
                mat_exp(np.diag([1e6, 1e6]))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            mat_exp(np.array([[np.inf, 0], [0, 0]]))


class TestKernelBasis:
    def test_invertible(self):
        assert kernel_basis(np.eye(3)) == []

    def test_zero_matrix(self):
        vecs = kernel_basis(np.zeros((2, 2)))
        assert len(vecs) == 2
        gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
        assert np.allclose(gram, np.eye(2))

    def test_near_singular(self):
        vecs = kernel_basis(np.array([[1.0, 0.0], [0.0, 1e-14]]), tol=1e-10)
        assert len(vecs) == 1
        assert abs(abs(vecs[0][1]) - 1.0) < 1e-10

    def test_residual_bound(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(4, 4))
        u, s, vh = np.linalg.svd(m)
        s[-2:] = [1e-13, 1e-15]
        m = u @ np.diag(s) @ vh
        tol = 1e-10
        vecs = kernel_basis(m, tol)
        assert len(vecs) == 2
        for v in vecs:
            assert np.linalg.norm(m @ v) <= 10 * tol * s[0]
