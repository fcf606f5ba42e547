"""
Dense complex-matrix kernel for the beamforming optimizer.
Provides the Hermitian eigensolver, vec/unvec and Hadamard primitives used by
the surrogate builders and the solver blocks.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-8
POWER_ITERATION_MAX_STEPS = 500


class DimensionError(ValueError):
    """Raised when matrix or vector shapes are inconsistent."""


class ContractViolation(ValueError):
    """Raised when an input breaks a documented precondition."""


class NumericalFailure(RuntimeError):
    """Raised when an iterative numerical routine cannot produce a result."""


@dataclass(frozen=True)
class HermitianEig:
    """Eigen-decomposition A = U diag(eigenvalues) Uᴴ of a Hermitian matrix."""
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # unitary, columns are eigenvectors

    def reconstruct(self) -> np.ndarray:
        """Rebuild the decomposed matrix."""
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def _as_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"Expected a square matrix, got shape {a.shape}")
    return a


def symmetrize(a: np.ndarray) -> np.ndarray:
    """
    Return (A + Aᴴ)/2 after checking A is Hermitian within tolerance.

    Args:
        a: Square complex matrix

    Returns:
        Exactly Hermitian copy of the input
    """
    a = _as_square(a)
    scale = np.linalg.norm(a)
    residual = np.linalg.norm(a - a.conj().T)
    if residual > HERMITIAN_TOLERANCE * max(scale, np.finfo(float).tiny):
        raise ContractViolation(
            f"Matrix is not Hermitian: ‖A − Aᴴ‖_F = {residual:.3e}, ‖A‖_F = {scale:.3e}"
        )
    return 0.5 * (a + a.conj().T)


def hermitian_eig(a: np.ndarray) -> HermitianEig:
    """
    Full eigen-decomposition of a Hermitian matrix.

    Args:
        a: Hermitian matrix (symmetrized internally)

    Returns:
        HermitianEig with ascending real eigenvalues and unitary eigenvectors
    """
    a_sym = symmetrize(a)
    eigenvalues, eigenvectors = scipy.linalg.eigh(a_sym)
    return HermitianEig(eigenvalues=np.asarray(eigenvalues, dtype=float), eigenvectors=eigenvectors)


def max_eigenvalue(a: np.ndarray, method: str = "eig") -> float:
    """
    Largest algebraic eigenvalue of a Hermitian matrix.

    Args:
        a: Hermitian matrix
        method: 'eig' (full decomposition) or 'power' (shifted power iteration)

    Returns:
        λ_max(A)
    """
    a_sym = symmetrize(a)
    n = a_sym.shape[0]
    if n == 0:
        raise DimensionError("Empty matrix has no eigenvalues")

    if method == "eig":
        top = scipy.linalg.eigh(a_sym, eigvals_only=True, subset_by_index=[n - 1, n - 1])
        return float(top[0])
    if method == "power":
        return _power_max_eigenvalue(a_sym)
    raise ValueError(f"Unknown eigenvalue method: {method}")


def _power_max_eigenvalue(a: np.ndarray, tol: float = 1e-12) -> float:
    """Power iteration on A + sI with s = ‖A‖_F so the top of the spectrum dominates."""
    n = a.shape[0]
    shift = np.linalg.norm(a)
    shifted = a + shift * np.eye(n)
    x = np.ones(n, dtype=complex) / np.sqrt(n)
    x += 1e-3 * np.exp(1j * np.arange(n))
    x /= np.linalg.norm(x)
    rayleigh = float(np.real(np.vdot(x, a @ x)))

    for _ in range(POWER_ITERATION_MAX_STEPS):
        y = shifted @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return rayleigh
        x = y / norm
        updated = float(np.real(np.vdot(x, a @ x)))
        if abs(updated - rayleigh) <= tol * max(1.0, abs(updated)):
            return updated
        rayleigh = updated

    logger.warning("Power iteration hit the step cap; falling back to full eigendecomposition")
    return max_eigenvalue(a, method="eig")


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionError(f"vec expects a matrix, got shape {a.shape}")
    return a.reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of vec for a rows×cols matrix."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != rows * cols:
        raise DimensionError(f"Cannot reshape vector of length {v.size} into {rows}×{cols}")
    return v.reshape((rows, cols), order="F")


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Element-wise product of equally sized matrices."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"Hadamard product needs equal shapes, got {a.shape} and {b.shape}")
    return a * b


def phase(x: np.ndarray) -> np.ndarray:
    """Unit-modulus phase of each entry with arg(0) := 0."""
    x = np.asarray(x, dtype=complex)
    return np.exp(1j * np.angle(x))


def max_abs(a: np.ndarray) -> float:
    """Largest entry modulus, used as the matrix ∞-norm of constraint residuals."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def assert_finite(a: np.ndarray, name: str) -> np.ndarray:
    """Raise NumericalFailure if the array holds NaN or Inf."""
    if not np.all(np.isfinite(a)):
        raise NumericalFailure(f"Non-finite entries in {name}")
    return a


# Export public interface
__all__ = [
    "DimensionError",
    "ContractViolation",
    "NumericalFailure",
    "HermitianEig",
    "symmetrize",
    "hermitian_eig",
    "max_eigenvalue",
    "vec",
    "unvec",
    "hadamard",
    "phase",
    "max_abs",
    "assert_finite",
]
