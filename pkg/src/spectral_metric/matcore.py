"""
Dense complex linear algebra for small matrix algebras.

Every matrix is a square ``numpy`` array of ``complex128``. Hermitian inputs
are validated once, at the boundary, by :func:`as_hermitian`; after that the
functions here trust their arguments.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Literal, Sequence, Union

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.stats import unitary_group

from spectral_metric.errors import ArgumentError, ConvergenceError
from spectral_metric.settings import TOL

ComplexMatrix = NDArray[np.complex128]
Seed = Union[int, np.random.Generator, None]

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-13

_PAULI = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
PAULI_LABELS = {"I": 0, "X": 1, "Y": 2, "Z": 3}


def as_matrix(a: ArrayLike) -> ComplexMatrix:
    """Coerce to a finite square complex matrix."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ArgumentError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ArgumentError("matrix has non-finite entries")
    return m


def hermitian_defect(a: ComplexMatrix) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def as_hermitian(a: ArrayLike, tol: float = TOL.construction) -> ComplexMatrix:
    """
    Validate a Hermitian matrix and return its exactly-Hermitian symmetrization.

    The check is max |A_ij - conj(A_ji)| <= tol * (1 + ||A||_op).
    """
    m = as_matrix(a)
    defect = hermitian_defect(m)
    if defect > tol * (1.0 + operator_norm(m)):
        raise ArgumentError(f"matrix is not Hermitian (defect {defect:.3e})")
    return (m + m.conj().T) / 2


def hermitian_eigen(
    H: ComplexMatrix, method: Literal["lapack", "jacobi"] = "lapack"
) -> tuple[NDArray[np.float64], ComplexMatrix]:
    """
    Eigendecomposition of a Hermitian matrix.

    Returns:
        eigenvalues in ascending order and the unitary matrix whose columns
        are the corresponding eigenvectors.
    """
    if method == "lapack":
        w, v = np.linalg.eigh(H)
        return w, v
    if method == "jacobi":
        return jacobi_eigen(H)
    raise ArgumentError(f"unknown eigensolver {method!r}")


def _off_norm(a: ComplexMatrix) -> float:
    return float(np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0)))


def jacobi_eigen(
    H: ComplexMatrix, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> tuple[NDArray[np.float64], ComplexMatrix]:
    """Cyclic complex Jacobi rotations, stopping at off(A) <= 1e-13 * ||H||_F."""
    a = np.array(H, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = JACOBI_OFF_TOL * float(np.linalg.norm(a))

    for sweep in range(max_sweeps):
        off = _off_norm(a)
        if off <= threshold:
            logger.debug(f"jacobi converged after {sweep} sweeps, off={off:.3e}")
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                theta = 0.5 * np.arctan2(2 * r, (a[q, q] - a[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
    else:
        off = _off_norm(a)
        if off > threshold:
            logger.error(f"jacobi did not converge in {max_sweeps} sweeps")
            raise ConvergenceError(
                f"Jacobi eigensolver exceeded {max_sweeps} sweeps", residual=off
            )

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def operator_norm(a: ComplexMatrix) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(a, 2))


def trace_norm(a: ComplexMatrix) -> float:
    """Sum of singular values, tr sqrt(A^dag A)."""
    return float(np.linalg.norm(a, "nuc"))


def hs_inner(a: ComplexMatrix, b: ComplexMatrix) -> complex:
    """Hilbert-Schmidt inner product tr(A^dag B)."""
    return complex(np.vdot(a, b))


def hs_norm(a: ComplexMatrix) -> float:
    return float(np.linalg.norm(a))


def kron(*factors: ComplexMatrix) -> ComplexMatrix:
    return reduce(np.kron, factors)


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return a @ b - b @ a


def pauli(i: int) -> ComplexMatrix:
    if i not in (0, 1, 2, 3):
        raise ArgumentError(f"Pauli index must be 0..3, got {i}")
    return _PAULI[i].copy()


def pauli_string(indices: Sequence[Union[int, str]], sign: int = 1) -> ComplexMatrix:
    """sign * sigma_{i1} (x) ... (x) sigma_{ik}; indices are 0..3 or I/X/Y/Z."""
    if sign not in (1, -1):
        raise ArgumentError(f"sign must be +1 or -1, got {sign}")
    if len(indices) == 0:
        raise ArgumentError("empty Pauli string")
    idx = [PAULI_LABELS[i] if isinstance(i, str) else i for i in indices]
    return sign * kron(*(pauli(i) for i in idx))


def pauli_dot(r: ArrayLike) -> ComplexMatrix:
    """r . sigma for a real 3-vector r."""
    x, y, z = np.asarray(r, dtype=float)
    return x * _PAULI[1] + y * _PAULI[2] + z * _PAULI[3]


def pauli_coefficients(e: ComplexMatrix) -> NDArray[np.float64]:
    """Real vector e_bar with traceless part of a 2x2 Hermitian e equal to e_bar . sigma."""
    return np.array([np.real(np.trace(_PAULI[i] @ e)) / 2 for i in (1, 2, 3)])


def traceless_part(e: ComplexMatrix) -> ComplexMatrix:
    n = e.shape[0]
    return e - (np.trace(e) / n) * np.eye(n)


def is_unitary(u: ComplexMatrix, tol: float = TOL.construction) -> bool:
    n = u.shape[0]
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(n))) <= tol * max(1, n))


@dataclass(frozen=True)
class HermitianBasis:
    """
    Generalized Gell-Mann basis of the n x n Hermitian matrices.

    ``elements[0]`` is the identity; the remaining n^2 - 1 are traceless with
    Hilbert-Schmidt norm sqrt(2) and pairwise HS-orthogonal. For n = 2 the
    basis is (I, sigma_1, sigma_2, sigma_3).
    """

    n: int
    elements: NDArray[np.complex128]

    @classmethod
    def gell_mann(cls, n: int) -> "HermitianBasis":
        if n < 1:
            raise ArgumentError(f"algebra dimension must be >= 1, got {n}")
        mats = [np.eye(n, dtype=complex)]
        for j in range(n):
            for k in range(j + 1, n):
                sym = np.zeros((n, n), dtype=complex)
                sym[j, k] = sym[k, j] = 1
                anti = np.zeros((n, n), dtype=complex)
                anti[j, k] = -1j
                anti[k, j] = 1j
                mats.extend([sym, anti])
        for level in range(1, n):
            diag = np.zeros(n)
            diag[:level] = 1
            diag[level] = -level
            mats.append(np.sqrt(2 / (level * (level + 1))) * np.diag(diag).astype(complex))
        return cls(n=n, elements=np.array(mats))

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def norms_squared(self) -> NDArray[np.float64]:
        return np.real(np.einsum("kij,kij->k", self.elements.conj(), self.elements))

    def coefficients(self, e: ComplexMatrix) -> NDArray[np.float64]:
        """Real coordinates of a Hermitian e: c_k = tr(B_k e) / tr(B_k B_k)."""
        overlaps = np.real(np.einsum("kij,ji->k", self.elements, e))
        return overlaps / self.norms_squared

    def reconstruct(self, coeffs: ArrayLike) -> ComplexMatrix:
        return np.tensordot(np.asarray(coeffs, dtype=float), self.elements, axes=1)


def _rng(seed: Seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _check_dim(n: int) -> None:
    if n < 1:
        raise ArgumentError(f"dimension must be >= 1, got {n}")


def random_complex(n: int, seed: Seed = None) -> ComplexMatrix:
    """Ginibre matrix with standard complex normal entries."""
    _check_dim(n)
    rng = _rng(seed)
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def random_hermitian(n: int, seed: Seed = None) -> ComplexMatrix:
    g = random_complex(n, seed)
    return (g + g.conj().T) / 2


def random_traceless_hermitian(n: int, seed: Seed = None) -> ComplexMatrix:
    return traceless_part(random_hermitian(n, seed))


def random_unitary(n: int, seed: Seed = None) -> ComplexMatrix:
    """Haar-distributed unitary."""
    _check_dim(n)
    rng = _rng(seed)
    if n == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return np.asarray(unitary_group.rvs(n, random_state=rng), dtype=complex)


def random_density(n: int, seed: Seed = None):
    """Random state G^dag G / tr(G^dag G) from a Ginibre matrix G."""
    from spectral_metric.states import DensityMatrix

    g = random_complex(n, seed)
    rho = g.conj().T @ g
    return DensityMatrix(rho / np.real(np.trace(rho)))
