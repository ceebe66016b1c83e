"""
Fixed-size dense kernels: Pauli matrices, tensor products, partial traces,
small eigenproblems and principal square roots.

Everything here is a pure function over numpy arrays; nothing is cached.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import NDArray

from loopgauge.config import resolve
from loopgauge.errors import KernelError

logger = structlog.get_logger()

ComplexMatrix = NDArray[np.complex128]
RealMatrix4 = NDArray[np.float64]

MAX_DIM = 8

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli(i: int) -> ComplexMatrix:
    if i not in (0, 1, 2, 3):
        raise KernelError("Pauli index out of range", index=i)
    return _PAULI[i].copy()


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a = np.asarray(a)
    b = np.asarray(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise KernelError("Kronecker product exceeds kernel size", shape=[rows, cols])
    return np.kron(a, b)


def n_qubits_of(matrix: np.ndarray) -> int:
    dim = matrix.shape[0]
    if matrix.ndim != 2 or matrix.shape[1] != dim:
        raise KernelError("Matrix is not square", shape=list(matrix.shape))
    n = int(round(np.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise KernelError("Dimension is not a power of two", dim=dim)
    return n


def partial_trace(rho: ComplexMatrix, keep: Sequence[int]) -> ComplexMatrix:
    """Reduce an n-qubit matrix to the ordered pair `keep`.

    Qubit 0 is the leftmost tensor factor. The first entry of `keep` becomes
    the first factor of the result.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits_of(rho)
    keep = tuple(int(k) for k in keep)
    if len(keep) != 2 or keep[0] == keep[1] or any(k < 0 or k >= n for k in keep):
        raise KernelError("Bad qubit indices for partial trace", keep=list(keep), n_qubits=n)

    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for q in range(n):
        if q not in keep:
            cols[q] = rows[q]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    tensor = rho.reshape([2] * (2 * n))
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, tensor)
    return reduced.reshape(4, 4)


def eigh_hermitian(m: ComplexMatrix) -> Tuple[NDArray[np.float64], ComplexMatrix]:
    m = np.asarray(m)
    if m.shape[0] > MAX_DIM or m.shape[0] != m.shape[1]:
        raise KernelError("Hermitian eigensolver expects a small square matrix", shape=list(m.shape))
    try:
        return scipy.linalg.eigh(m)
    except np.linalg.LinAlgError as e:
        raise KernelError("Hermitian eigensolver failed", error=str(e))


@dataclass(frozen=True)
class EigenSystem4:
    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128]  # columns
    defect_flag: bool
    condition: float

    def reconstruct(self) -> NDArray[np.complex128]:
        p = self.eigenvectors
        return p @ np.diag(self.eigenvalues) @ np.linalg.inv(p)


def eig_real4(m: RealMatrix4, defect_condition: Optional[float] = None) -> EigenSystem4:
    """Eigenpairs of a general real 4x4 matrix, sorted by descending real part.

    The defect flag is raised when the eigenvector matrix is too badly
    conditioned to count as an eigenbasis.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise KernelError("eig_real4 expects a 4x4 matrix", shape=list(m.shape))
    if not np.all(np.isfinite(m)):
        raise KernelError("Matrix has non-finite entries")
    try:
        values, vectors = scipy.linalg.eig(m)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise KernelError("Eigen iteration did not converge", error=str(e))

    order = np.lexsort((-values.imag, -values.real))
    values = values[order]
    vectors = vectors[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0)

    condition = float(np.linalg.cond(vectors))
    defect = not np.isfinite(condition) or condition > resolve(defect_condition, "defect_condition")
    if defect:
        logger.debug("Defective eigenproblem", condition=condition)
    return EigenSystem4(values, vectors, defect, condition)


def principal_sqrt4(m: RealMatrix4, tolerance: float = 1e-9) -> RealMatrix4:
    """Principal square root of a real 4x4 matrix, Jordan blocks included."""
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise KernelError("principal_sqrt4 expects a 4x4 matrix", shape=list(m.shape))
    scale = np.linalg.norm(m)
    if scale == 0.0:
        raise KernelError("Matrix is singular")

    values = np.linalg.eigvals(m)
    if np.min(np.abs(values)) <= 1e-14 * scale:
        raise KernelError("Matrix is singular", eigenvalues=_pairs(values))
    on_cut = (np.abs(values.imag) <= 1e-12 * scale) & (values.real < 0)
    if np.any(on_cut):
        raise KernelError("Eigenvalue on the branch cut", eigenvalues=_pairs(values))

    root = scipy.linalg.sqrtm(m)
    if np.iscomplexobj(root):
        if np.max(np.abs(root.imag)) > 1e-8 * max(1.0, np.linalg.norm(root)):
            raise KernelError("Square root is not real", eigenvalues=_pairs(values))
        root = root.real
    root = np.asarray(root, dtype=float)

    residual = np.linalg.norm(root @ root - m) / scale
    if not np.isfinite(residual) or residual > tolerance:
        raise KernelError("Square root failed the squaring check", residual=float(residual))
    return root


def _pairs(values: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in values]
