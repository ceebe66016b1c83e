"""
Hilbert-Schmidt correlation matrices and the SL(2,C) -> SO+(1,3) map.

S(a,b)_ij = 1/2 tr[(s_i (x) s_j) rho_ab]. Local operations A (x) B act as
S -> A_L S B_L^T with A_L = sl2_to_lorentz(A).
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

from loopgauge.errors import GroupElementError, InvalidStateError, KernelError
from loopgauge.services.quantum.qlinalg import RealMatrix4, pauli
from loopgauge.services.quantum.states import DensityMatrix, LocalOp

logger = structlog.get_logger()

ETA = np.diag([1.0, -1.0, -1.0, -1.0])

# Column convention of T fixes the 0..3 axis order.
T = np.array(
    [
        [1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, 1j, -1j, 0],
        [1, 0, 0, -1],
    ],
    dtype=complex,
) / np.sqrt(2.0)

_PAULI = [pauli(i) for i in range(4)]
_PAULI_PAIRS = np.array([[np.kron(_PAULI[i], _PAULI[j]) for j in range(4)] for i in range(4)])

BELL_CORRELATIONS = {
    "bell_psi_minus": 0.5 * np.diag([1.0, -1.0, -1.0, -1.0]),
    "bell_psi_plus": 0.5 * np.diag([1.0, 1.0, 1.0, -1.0]),
    "bell_phi_minus": 0.5 * np.diag([1.0, -1.0, 1.0, 1.0]),
    "bell_phi_plus": 0.5 * np.diag([1.0, 1.0, -1.0, 1.0]),
}

GROUP_TOL = 1e-10
HOMOMORPHISM_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationMatrix:
    S: RealMatrix4
    pair: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        s = np.asarray(self.S, dtype=float)
        if s.shape != (4, 4) or not np.all(np.isfinite(s)):
            raise InvalidStateError("Correlation matrix must be a finite real 4x4 matrix")
        object.__setattr__(self, "S", s)
        if self.pair is not None:
            object.__setattr__(self, "pair", tuple(int(q) for q in self.pair))

    @property
    def s00(self) -> float:
        return float(self.S[0, 0])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.S))

    def swapped(self) -> "CorrelationMatrix":
        pair = (self.pair[1], self.pair[0]) if self.pair else None
        return CorrelationMatrix(self.S.T.copy(), pair)

    def transformed(self, left: RealMatrix4, right: RealMatrix4) -> "CorrelationMatrix":
        """Gauge action S -> U_first S U_second^T."""
        return CorrelationMatrix(left @ self.S @ right.T, self.pair)

    def rank(self, tolerance: float = 1e-10) -> int:
        values = np.linalg.svd(self.S, compute_uv=False)
        if values[0] == 0.0:
            return 0
        return int(np.sum(values / values[0] >= tolerance))


@dataclass(frozen=True)
class LorentzCheck:
    metric_defect: float
    det: float
    u00: float
    metric_preserving: bool
    proper: bool
    orthochronous: bool

    @property
    def in_so_plus(self) -> bool:
        return self.metric_preserving and self.proper and self.orthochronous


def is_lorentz(u: RealMatrix4, tolerance: float = GROUP_TOL) -> LorentzCheck:
    u = np.asarray(u, dtype=float)
    scale = max(1.0, float(np.max(np.abs(u)))) ** 2
    defect = float(np.max(np.abs(u @ ETA @ u.T - ETA)))
    det = float(np.linalg.det(u))
    preserving = defect <= tolerance * scale
    return LorentzCheck(
        metric_defect=defect,
        det=det,
        u00=float(u[0, 0]),
        metric_preserving=preserving,
        proper=det > 0.0,
        orthochronous=u[0, 0] >= 1.0 - tolerance * scale,
    )


@dataclass(frozen=True)
class LorentzMatrix:
    """Element of SO+(1,3), validated on construction."""

    U: RealMatrix4

    def __post_init__(self):
        u = np.asarray(self.U, dtype=float)
        if u.shape != (4, 4) or not np.all(np.isfinite(u)):
            raise GroupElementError("Lorentz matrix must be a finite real 4x4 matrix")
        check = is_lorentz(u)
        if not check.in_so_plus:
            raise GroupElementError(
                "Matrix is not a proper orthochronous Lorentz transformation",
                metric_defect=check.metric_defect,
                det=check.det,
                u00=check.u00,
            )
        object.__setattr__(self, "U", u)

    @classmethod
    def identity(cls) -> "LorentzMatrix":
        return cls(np.eye(4))

    def inverse(self) -> "LorentzMatrix":
        return LorentzMatrix(ETA @ self.U.T @ ETA)

    def __matmul__(self, other: "LorentzMatrix") -> "LorentzMatrix":
        return LorentzMatrix(self.U @ other.U)


def lorentz_project(u: RealMatrix4, max_iterations: int = 12) -> RealMatrix4:
    """Nearest-group correction of an almost-Lorentz matrix.

    Newton-Schulz in the eta inner product: U <- U (3 - eta U^T eta U) / 2.
    Matrices far from the group are returned unchanged for the caller to reject.
    """
    u = np.asarray(u, dtype=float)
    floor = 1e-15 * max(1.0, float(np.max(np.abs(u)))) ** 2
    for _ in range(max_iterations):
        g = ETA @ u.T @ ETA @ u
        defect = float(np.max(np.abs(g - np.eye(4))))
        if defect <= floor or defect > 0.1:
            break
        u = 0.5 * u @ (3.0 * np.eye(4) - g)
    return u


def corr_matrix(rho: DensityMatrix, pair: Optional[Sequence[int]] = None) -> CorrelationMatrix:
    if rho.n_qubits != 2:
        raise InvalidStateError("Correlation matrices need a two-qubit state", n_qubits=rho.n_qubits)
    s = 0.5 * np.einsum("ijab,ba->ij", _PAULI_PAIRS, rho.matrix).real
    bound = abs(s[0, 0]) * (1.0 + 1e-10) + 1e-12
    if np.max(np.abs(s)) > bound:
        raise InvalidStateError("Correlation entries exceed the normalization bound")
    return CorrelationMatrix(s, tuple(pair) if pair is not None else None)


def density_from_corr(corr: CorrelationMatrix) -> DensityMatrix:
    rho = 0.5 * np.einsum("ij,ijab->ab", corr.S, _PAULI_PAIRS)
    trace = float(np.trace(rho).real)
    return DensityMatrix(rho, normalized=abs(trace - 1.0) <= 1e-10)


def _trace_formula(a: np.ndarray) -> np.ndarray:
    adag = a.conj().T
    return np.array(
        [[0.5 * np.trace(adag @ _PAULI[i] @ a @ _PAULI[k]) for k in range(4)] for i in range(4)]
    )


def sl2_to_lorentz(op: LocalOp) -> LorentzMatrix:
    if not op.unimodular:
        raise GroupElementError("Only unimodular operations map into SO+(1,3)")
    a = op.matrix
    by_trace = _trace_formula(a)
    by_t = T @ np.kron(a, a.conj()) @ T.conj().T
    scale = max(1.0, float(np.max(np.abs(by_trace))))
    gap = float(np.max(np.abs(by_trace - by_t)))
    if gap > HOMOMORPHISM_TOL * scale * 10:
        raise KernelError("Lorentz image formulas disagree", gap=gap)
    if np.max(np.abs(by_trace.imag)) > HOMOMORPHISM_TOL * scale * 10:
        raise KernelError("Lorentz image is not real")
    return LorentzMatrix(by_trace.real)


def _canonical_sign(a: np.ndarray) -> np.ndarray:
    tol = 1e-12 * max(1.0, float(np.max(np.abs(a))))
    for entry in a.ravel():
        if abs(entry) <= tol:
            continue
        if entry.real < -tol or (abs(entry.real) <= tol and entry.imag < 0.0):
            return -a
        return a
    return a


def lorentz_to_sl2(u: LorentzMatrix) -> LocalOp:
    """Preimage under the double cover, sign fixed lexicographically."""
    m = T.conj().T @ u.U @ T  # = A (x) A*
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)  # vec(A) vec(A)^H
    r = 0.5 * (r + r.conj().T)
    values, vectors = np.linalg.eigh(r)
    vec = vectors[:, -1] * np.sqrt(max(values[-1], 0.0))
    a = vec.reshape(2, 2)
    det = np.linalg.det(a)
    if abs(det) < 1e-300:
        raise GroupElementError("Lorentz matrix has no SL(2,C) preimage")
    a = _canonical_sign(a / np.sqrt(det))

    op = LocalOp(a)
    back = sl2_to_lorentz(op).U
    gap = float(np.max(np.abs(back - u.U)))
    if gap > 1e-9 * max(1.0, float(np.max(np.abs(u.U)))):
        raise GroupElementError("SL(2,C) preimage does not reproduce the Lorentz matrix", gap=gap)
    return op


def boost(direction: Sequence[float], rapidity: float) -> RealMatrix4:
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        return np.eye(4)
    n = n / norm
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    out = np.eye(4)
    out[0, 0] = ch
    out[0, 1:] = sh * n
    out[1:, 0] = sh * n
    out[1:, 1:] += (ch - 1.0) * np.outer(n, n)
    return out


def rotation(rotvec: Sequence[float]) -> RealMatrix4:
    out = np.eye(4)
    out[1:, 1:] = Rotation.from_rotvec(np.asarray(rotvec, dtype=float)).as_matrix()
    return out


def align_to_z(vector: Sequence[float]) -> RealMatrix4:
    """Spatial rotation taking `vector` onto the +z axis."""
    v = np.asarray(vector, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return np.eye(4)
    v = v / norm
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(v, z)
    s = np.linalg.norm(axis)
    angle = np.arctan2(s, float(v @ z))
    if s < 1e-15:
        return np.eye(4) if v[2] > 0 else pi_rotation(1)
    return rotation(axis / s * angle)


def pi_rotation(axis: int) -> RealMatrix4:
    """Rotation by pi about spatial axis 1, 2 or 3: diag with two -1 entries."""
    if axis not in (1, 2, 3):
        raise KernelError("Spatial axis must be 1, 2 or 3", axis=axis)
    d = -np.ones(4)
    d[0] = 1.0
    d[axis] = 1.0
    return np.diag(d)


def _psd_root(m: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Hermitian square root; eigenvalues at round-off level count as zero."""
    values, vectors = scipy.linalg.eigh(m)
    floor = 16.0 * np.finfo(float).eps * max(float(values[-1]), 0.0)
    roots = np.sqrt(np.where(values > floor, values, 0.0))
    return (vectors * roots) @ vectors.conj().T


def wootters_lambdas(rho: DensityMatrix) -> NDArray[np.float64]:
    """Square roots of the eigenvalues of rho (s_y s_y) rho* (s_y s_y), non-increasing.

    Taken as the singular values of sqrt(rho) sqrt(rho~), which keeps full
    precision on the vanishing ones of rank-deficient states.
    """
    if rho.n_qubits != 2:
        raise InvalidStateError("Concurrence needs a two-qubit state", n_qubits=rho.n_qubits)
    flip = np.kron(_PAULI[2], _PAULI[2])
    root = _psd_root(rho.matrix)
    flipped_root = flip @ root.conj() @ flip
    return np.sort(scipy.linalg.svdvals(root @ flipped_root))[::-1]


def concurrence_wootters(rho: DensityMatrix) -> float:
    lam = wootters_lambdas(rho)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_from_sigma(sigma: Sequence[float]) -> float:
    return float(max(0.0, -float(np.sum(sigma))))
