"""Complex dense matrix substrate.

Structure constants of the symplectic form, validated self-adjoint
boundary conditions, matrix exponentials, and SVD-based kernel
extraction. Everything here is order-agnostic and immutable.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

STRUCT_TOL = 1e-10
RANK_RTOL = 1e-10
ORTHO_TOL = 1e-12
PSD_TOL = 1e-12


class RankDeficientError(ValueError):
    """Interface matrix does not have full row rank."""


class NotSelfAdjointError(ValueError):
    """Interface matrix violates the vanishing symplectic-form condition."""


class NotPSDError(ValueError):
    """Matrix is not Hermitian positive semidefinite within tolerance."""


class MatrixOverflowError(ArithmeticError):
    """Matrix exponential exceeded the representable range."""


def symplectic_form(n: int) -> np.ndarray:
    """The order-2n structure matrix [[0, -I], [I, 0]]."""
    if n < 1:
        raise ValueError("order must be positive")
    j = np.zeros((2 * n, 2 * n), dtype=complex)
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


@dataclass(frozen=True)
class BoundaryCondition:
    """Row-orthonormal matrix b in C^(n x 2n) with b J b* = 0.

    Rows span a Lagrangian-type subspace; the condition imposed on a
    solution u at an endpoint is b u = 0. Construct via
    :func:`validate_boundary`, which normalizes arbitrary full-rank input.
    """

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[1] != 2 * mat.shape[0]:
            raise ValueError(f"expected shape (n, 2n), got {mat.shape}")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def order(self) -> int:
        return self.matrix.shape[1]

    @property
    def b1(self) -> np.ndarray:
        """Left half: coefficients of the first solution components."""
        return self.matrix[:, : self.n]

    @property
    def b2(self) -> np.ndarray:
        """Right half: coefficients of the second solution components."""
        return self.matrix[:, self.n :]

    def projection(self) -> np.ndarray:
        """The orthogonal projection b* b onto the row space."""
        return self.matrix.conj().T @ self.matrix


def validate_boundary(raw, *, j_tol: float = STRUCT_TOL) -> BoundaryCondition:
    """Row-orthonormalize an interface matrix and check self-adjointness.

    Parameters
    ----------
    raw : array_like, shape (n, 2n)
        Full-row-rank matrix; its row space defines the condition.
    j_tol : float
        Tolerance on ``raw J raw*`` relative to ``raw raw*``.

    Returns
    -------
    BoundaryCondition
        ``(raw raw*)^(-1/2) raw``, which has the same row space,
        satisfies b b* = I to machine rounding, and inherits b J b* = 0.

    Raises
    ------
    RankDeficientError
        If the numerical row rank is below n.
    NotSelfAdjointError
        If ``raw J raw*`` is not negligible.
    """
    raw = np.asarray(raw, dtype=complex)
    if raw.ndim != 2 or raw.shape[1] != 2 * raw.shape[0]:
        raise ValueError(f"expected shape (n, 2n), got {raw.shape}")
    n = raw.shape[0]
    sigma = np.linalg.svd(raw, compute_uv=False)
    if sigma[-1] <= RANK_RTOL * sigma[0]:
        raise RankDeficientError(f"row rank < {n} (sigma_min/sigma_max = {sigma[-1] / sigma[0]:.2e})")
    j = symplectic_form(n)
    gram = raw @ raw.conj().T
    defect = np.linalg.norm(raw @ j @ raw.conj().T, 2) / np.linalg.norm(gram, 2)
    if defect > j_tol:
        raise NotSelfAdjointError(f"raw J raw* != 0 (relative norm {defect:.2e})")
    lam, q = np.linalg.eigh(gram)
    inv_sqrt = (q * (1.0 / np.sqrt(lam))) @ q.conj().T
    return BoundaryCondition(inv_sqrt @ raw)


def mat_exp(m) -> np.ndarray:
    """Matrix exponential (Pade scaling-and-squaring via SciPy)."""
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite entries")
    out = scipy.linalg.expm(m)
    if not np.all(np.isfinite(out)):
        raise MatrixOverflowError("exp(M) overflowed double precision")
    return out


def kernel_basis(m, tol: float = RANK_RTOL) -> list[np.ndarray]:
    """Orthonormal basis of the numerical kernel of a matrix.

    Right-singular vectors whose singular values fall below
    ``tol * sigma_max``; the empty list for numerically injective input.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = np.asarray(m, dtype=complex)
    _, sigma, vh = np.linalg.svd(m)
    if sigma.size == 0 or sigma[0] == 0.0:
        return [vh[i].conj() for i in range(vh.shape[0])]
    cut = tol * sigma[0]
    vecs = [vh[i].conj() for i in range(vh.shape[0]) if i >= sigma.size or sigma[i] < cut]
    return vecs


def ensure_psd(m, tol: float = PSD_TOL) -> np.ndarray:
    """Validate that a matrix is Hermitian with spectrum >= -tol."""
    m = np.asarray(m, dtype=complex)
    scale = max(np.linalg.norm(m, 2), 1.0)
    if np.linalg.norm(m - m.conj().T, 2) > tol * scale:
        raise NotPSDError("matrix is not self-adjoint")
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if lam.size and lam[0] < -tol * scale:
        raise NotPSDError(f"smallest eigenvalue {lam[0]:.3e} < -tol")
    return m


def hermitian_part(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def antihermitian_part(m) -> np.ndarray:
    """The self-adjoint matrix Im(M) = (M - M*) / 2i."""
    m = np.asarray(m, dtype=complex)
    return (m - m.conj().T) / 2j
