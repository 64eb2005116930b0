"""
Quantum states as density matrices.

The trace distance here is ||rho_1 - rho_2||_1 *without* the customary factor
1/2, so that for qubits it equals the Euclidean distance of Bloch vectors.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from spectral_metric.errors import ArgumentError
from spectral_metric.matcore import (
    ComplexMatrix,
    as_hermitian,
    hermitian_eigen,
    pauli_coefficients,
    pauli_dot,
    trace_norm,
)
from spectral_metric.settings import TOL

STATE_TOL = TOL.verification


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: ComplexMatrix

    def __post_init__(self):
        m = as_hermitian(self.matrix)
        trace = float(np.real(np.trace(m)))
        if abs(trace - 1.0) > STATE_TOL:
            raise ArgumentError(f"density matrix must have unit trace, got {trace}")
        lowest = float(np.linalg.eigvalsh(m)[0])
        if lowest < -STATE_TOL:
            raise ArgumentError(f"density matrix is not positive (eigenvalue {lowest:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"

    def conjugated(self, U: ComplexMatrix) -> "DensityMatrix":
        """The state U rho U^dag."""
        return DensityMatrix(U @ self.matrix @ U.conj().T)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm > 1 + STATE_TOL:
            raise ArgumentError(f"Bloch vector must satisfy |r| <= 1, got {self.norm}")

    @classmethod
    def from_array(cls, r: ArrayLike) -> "BlochVector":
        x, y, z = (float(v) for v in np.asarray(r, dtype=float))
        return cls(x, y, z)

    @property
    def r(self) -> NDArray[np.float64]:
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm([self.x, self.y, self.z]))


def density_from_bloch(r) -> DensityMatrix:
    """rho = (I + r . sigma) / 2."""
    if not isinstance(r, BlochVector):
        r = BlochVector.from_array(r)
    return DensityMatrix((np.eye(2) + pauli_dot(r.r)) / 2)


def bloch_from_density(rho: DensityMatrix) -> BlochVector:
    if rho.dim != 2:
        raise ArgumentError(f"Bloch vectors exist only for qubits, got dim {rho.dim}")
    # r_i = tr(rho sigma_i) = 2 * (Pauli coefficient of rho)
    return BlochVector.from_array(2 * pauli_coefficients(rho.matrix))


def pure_state(vector: ArrayLike) -> DensityMatrix:
    """|psi><psi| for a (not necessarily normalized) state vector."""
    psi = np.asarray(vector, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ArgumentError("state vector is zero")
    psi = psi / norm
    return DensityMatrix(np.outer(psi, psi.conj()))


def expectation(rho: DensityMatrix, e: ComplexMatrix) -> complex:
    """The state functional omega(e) = tr(rho e)."""
    return complex(np.trace(rho.matrix @ e))


def state_difference(rho1: DensityMatrix, rho2: DensityMatrix) -> ComplexMatrix:
    if rho1.dim != rho2.dim:
        raise ArgumentError(f"state dimensions differ: {rho1.dim} vs {rho2.dim}")
    return rho1.matrix - rho2.matrix


def trace_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    return trace_norm(state_difference(rho1, rho2))


def optimal_element_tracenorm(delta: ComplexMatrix) -> ComplexMatrix:
    """
    Hermitian e with ||e||_op <= 1 maximizing tr(delta e).

    e = sum_i sign(a_i) |i><i| over the eigenpairs of delta; eigenvalues with
    |a_i| <= 1e-10 contribute nothing, so e vanishes on the kernel of delta.
    Summing over eigenvectors makes e the signed sum of spectral projectors,
    independent of how degenerate eigenspaces are resolved.
    """
    w, v = hermitian_eigen(delta)
    signs = np.where(np.abs(w) > TOL.degenerate_eigenvalue, np.sign(w), 0.0)
    if not np.any(signs):
        return np.zeros_like(delta)
    e = (v * signs) @ v.conj().T
    return (e + e.conj().T) / 2
