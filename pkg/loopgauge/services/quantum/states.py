import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from loopgauge.errors import InvalidStateError, KernelError
from loopgauge.services.quantum.qlinalg import ComplexMatrix, n_qubits_of, partial_trace

logger = structlog.get_logger()

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    """An n-qubit state. Qubit 0 is the most significant bit of basis labels.

    `normalized=False` marks SLOCC outputs kept at their success weight.
    """

    matrix: ComplexMatrix
    n_qubits: int = field(default=0)
    normalized: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = n_qubits_of(m)
        if self.n_qubits not in (0, n):
            raise InvalidStateError("Qubit count does not match matrix size", n_qubits=self.n_qubits, dim=m.shape[0])
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "n_qubits", n)

        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * scale * 10:
            raise InvalidStateError("Density matrix is not Hermitian")
        trace = float(np.trace(m).real)
        if self.normalized and abs(trace - 1.0) > TRACE_TOL * 10 * m.shape[0]:
            raise InvalidStateError("Density matrix does not have unit trace", trace=trace)
        smallest = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if smallest < PSD_TOL * max(1.0, trace):
            raise InvalidStateError("Density matrix is not positive semidefinite", smallest_eigenvalue=smallest)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True)
class LocalOp:
    """A 2x2 local operation; unimodular ones are SL(2,C) elements."""

    matrix: ComplexMatrix
    unimodular: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidStateError("Local operation must be 2x2", shape=list(m.shape))
        if self.unimodular and abs(np.linalg.det(m) - 1.0) > 1e-12 * max(1.0, np.linalg.norm(m) ** 2):
            raise InvalidStateError("Local operation is not unimodular", det=[float(np.linalg.det(m).real), float(np.linalg.det(m).imag)])
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "LocalOp":
        return cls(np.eye(2, dtype=complex))

    @classmethod
    def unimodular_from(cls, matrix: ComplexMatrix) -> "LocalOp":
        """Rescale an invertible 2x2 matrix to determinant one."""
        m = np.asarray(matrix, dtype=complex)
        det = np.linalg.det(m)
        if abs(det) < 1e-300:
            raise InvalidStateError("Cannot rescale a singular operation")
        return cls(m / np.sqrt(det))


@dataclass(frozen=True)
class LocalOutcome:
    state: DensityMatrix
    weight: float


# Qubit-order helpers

def _basis_vector(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def ket(amplitudes: Dict[str, complex]) -> np.ndarray:
    """Build an (unnormalized) state vector from ket strings like {"001": x}."""
    width = {len(k) for k in amplitudes}
    if len(width) != 1:
        raise InvalidStateError("Ket labels must share one length")
    n = width.pop()
    v = np.zeros(2 ** n, dtype=complex)
    for bits, amp in amplitudes.items():
        v += amp * _basis_vector(bits)
    return v


def permute_qubits(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """Reorder tensor factors: output qubit k is input qubit order[k]."""
    n = rho.n_qubits
    order = list(order)
    if sorted(order) != list(range(n)):
        raise InvalidStateError("Invalid qubit permutation", order=order)
    t = rho.matrix.reshape([2] * (2 * n))
    t = np.transpose(t, order + [n + k for k in order])
    return DensityMatrix(t.reshape(2 ** n, 2 ** n), normalized=rho.normalized)


def embed_pair(rho_pair: DensityMatrix, pair: Tuple[int, int], n_qubits: int) -> DensityMatrix:
    """Place a two-qubit state on `pair`, maximally mixed elsewhere."""
    if rho_pair.n_qubits != 2:
        raise InvalidStateError("embed_pair expects a two-qubit state")
    rest = [q for q in range(n_qubits) if q not in pair]
    full = rho_pair.matrix
    for _ in rest:
        full = np.kron(full, np.eye(2) / 2)
    # current factor order is pair + rest; move factors back to their labels
    current = list(pair) + rest
    order = [current.index(q) for q in range(n_qubits)]
    return permute_qubits(DensityMatrix(full), order)


# Constructors

def pure_state(amplitudes: Sequence[complex]) -> DensityMatrix:
    v = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise InvalidStateError("Cannot build a state from the zero vector")
    v = v / norm
    return DensityMatrix(np.outer(v, v.conj()))


def ghz_class_state(delta: float, alpha: float, beta: float, gamma: float, phi: float) -> DensityMatrix:
    """c_d|000> + s_d e^{i phi}|phi_a phi_b phi_c>, normalized."""
    in_range = (
        all(0.0 < t <= np.pi / 2 for t in (alpha, beta, gamma))
        and 0.0 < delta <= np.pi / 4
        and 0.0 < phi <= 2 * np.pi
    )
    if not in_range:
        warnings.warn("GHZ-class parameters outside the class-representative ranges", stacklevel=2)
        logger.warning("GHZ parameters out of range", delta=delta, alpha=alpha, beta=beta, gamma=gamma, phi=phi)

    def qubit(theta):
        return np.array([np.cos(theta), np.sin(theta)], dtype=complex)

    tail = np.kron(np.kron(qubit(alpha), qubit(beta)), qubit(gamma))
    v = np.cos(delta) * _basis_vector("000") + np.sin(delta) * np.exp(1j * phi) * tail
    return pure_state(v)


def w_class_state(w: float, x: float, y: float, z: float) -> DensityMatrix:
    """w|000> + x|001> + y|010> + z|100>, normalized."""
    if min(x, y, z) <= 0.0 or w < 0.0:
        raise InvalidStateError("W-class amplitudes need x, y, z > 0 and w >= 0", w=w, x=x, y=y, z=z)
    return pure_state(ket({"000": w, "001": x, "010": y, "100": z}))


def mix(components: Sequence[Tuple[float, DensityMatrix]]) -> DensityMatrix:
    if not components:
        raise InvalidStateError("Empty mixture")
    weights = np.array([float(w) for w, _ in components])
    if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > WEIGHT_TOL * 10:
        raise InvalidStateError("Mixture weights must be probabilities", weights=weights.tolist())
    dims = {rho.matrix.shape for _, rho in components}
    if len(dims) != 1:
        raise InvalidStateError("Mixture components differ in dimension")
    total = sum(w * rho.matrix for w, rho in components)
    return DensityMatrix(total)


_BELL_VECTORS = {
    "bell_psi_minus": ket({"01": 1, "10": -1}),
    "bell_psi_plus": ket({"01": 1, "10": 1}),
    "bell_phi_minus": ket({"00": 1, "11": -1}),
    "bell_phi_plus": ket({"00": 1, "11": 1}),
}


def bell_state(name: str) -> DensityMatrix:
    return pure_state(_BELL_VECTORS[name])


def _amplitudes(params: Dict[str, float], names: Sequence[str], defaults: Dict[str, float]) -> List[float]:
    values = []
    for name in names:
        if name in params:
            values.append(float(params[name]))
        elif name in defaults:
            values.append(defaults[name])
        else:
            raise InvalidStateError("Missing catalog parameter", parameter=name)
    return values


def _probability(params: Dict[str, float]) -> float:
    if "p" not in params:
        raise InvalidStateError("Missing catalog parameter", parameter="p")
    p = float(params["p"])
    if not 0.0 <= p <= 1.0:
        raise InvalidStateError("Mixing probability outside [0, 1]", p=p)
    return p


def rank3_family(p: float, x: float, y: float, z: float, w: float) -> DensityMatrix:
    """p|GHZ><GHZ| + (1-p)|psi><psi| with psi = x|001>+y|010>+z|100>+w|111>."""
    if min(x, y, z, w) < 0.0:
        raise InvalidStateError("Amplitudes must be nonnegative")
    ghz = pure_state(ket({"000": 1, "111": 1}))
    psi = pure_state(ket({"001": x, "010": y, "100": z, "111": w}))
    return mix([(p, ghz), (1.0 - p, psi)])


def rank4_family(p: float, x: float, y: float, z: float, w: float = 0.0) -> DensityMatrix:
    """p|W><W| + (1-p)|W̄><W̄| with |W̄> the bit-flipped W-class state."""
    if min(x, y, z, w) < 0.0:
        raise InvalidStateError("Amplitudes must be nonnegative")
    w_state = pure_state(ket({"000": w, "001": x, "010": y, "100": z}))
    w_bar = pure_state(ket({"111": w, "110": x, "101": y, "011": z}))
    return mix([(p, w_state), (1.0 - p, w_bar)])


def _singlet_mixture() -> DensityMatrix:
    singlet = bell_state("bell_psi_minus")
    placed = [embed_pair(singlet, pair, 3) for pair in ((0, 1), (1, 2), (0, 2))]
    return mix([(1.0 / 3.0, rho) for rho in placed])


def _ghz_w_mixture() -> DensityMatrix:
    ghz = pure_state(ket({"000": np.sqrt(1 / 3), "111": np.sqrt(2 / 3)}))
    w = pure_state(ket({"001": 1, "010": 1, "100": 1}))
    return mix([(0.5, ghz), (0.5, w)])


CATALOG_NAMES = (
    "bell_psi_minus",
    "bell_psi_plus",
    "bell_phi_minus",
    "bell_phi_plus",
    "werner_third",
    "singlet_mixture_3q",
    "ghz_w_mixture_3q",
    "rank3_family",
    "rank4_family",
)


def catalog(name: str, params: Optional[Dict[str, float]] = None) -> DensityMatrix:
    params = params or {}
    if name in _BELL_VECTORS:
        return bell_state(name)
    if name == "werner_third":
        return DensityMatrix(np.eye(4) / 6 + bell_state("bell_psi_minus").matrix / 3)
    if name == "singlet_mixture_3q":
        return _singlet_mixture()
    if name == "ghz_w_mixture_3q":
        return _ghz_w_mixture()
    if name == "rank3_family":
        x, y, z, w = _amplitudes(params, ("x", "y", "z", "w"), {})
        return rank3_family(_probability(params), x, y, z, w)
    if name == "rank4_family":
        x, y, z, w = _amplitudes(params, ("x", "y", "z", "w"), {"w": 0.0})
        return rank4_family(_probability(params), x, y, z, w)
    raise InvalidStateError("Unknown catalog state", name=name, known=list(CATALOG_NAMES))


# Local operations

def apply_local(rho: DensityMatrix, ops: Sequence[Optional[LocalOp]], renormalize: bool = True) -> LocalOutcome:
    """Conjugate `rho` by the tensor product of per-qubit operations.

    `None` entries mean identity. The trace after conjugation is reported as
    the success weight.
    """
    n = rho.n_qubits
    if len(ops) != n:
        raise InvalidStateError("Need one local operation per qubit", n_qubits=n, ops=len(ops))
    t = rho.matrix.reshape([2] * (2 * n))
    for q, op in enumerate(ops):
        if op is None:
            continue
        a = op.matrix
        t = np.moveaxis(np.tensordot(a, t, axes=([1], [q])), 0, q)
        t = np.moveaxis(np.tensordot(t, a.conj().T, axes=([n + q], [0])), -1, n + q)
    out = t.reshape(2 ** n, 2 ** n)
    out = 0.5 * (out + out.conj().T)
    weight = float(np.trace(out).real)
    if weight <= 1e-300:
        raise InvalidStateError("Local operation annihilates the state", weight=weight)
    if renormalize:
        return LocalOutcome(DensityMatrix(out / weight), weight)
    return LocalOutcome(DensityMatrix(out, normalized=False), weight)


def marginal(rho: DensityMatrix, pair: Sequence[int]) -> DensityMatrix:
    try:
        reduced = partial_trace(rho.matrix, pair)
    except KernelError as e:
        raise InvalidStateError(e.message, **e.details)
    return DensityMatrix(reduced, normalized=rho.normalized)


# Random states for seeded checks

def random_state(n_qubits: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre-distributed mixed state; rank defaults to full."""
    dim = 2 ** n_qubits
    k = rank or dim
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_pure_state(n_qubits: int, rng: np.random.Generator) -> DensityMatrix:
    dim = 2 ** n_qubits
    return pure_state(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_local_op(rng: np.random.Generator, spread: float = 1.0) -> LocalOp:
    m = np.eye(2) + spread * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / 2
    return LocalOp.unimodular_from(m)


# State files

def load_state(path: str) -> DensityMatrix:
    payload = json.loads(Path(path).read_text())
    return state_from_payload(payload)


def state_from_payload(payload: dict) -> DensityMatrix:
    if "catalog" in payload:
        return catalog(payload["catalog"], payload.get("params") or {})
    try:
        entries = np.array(payload["matrix"], dtype=float)
        matrix = entries[..., 0] + 1j * entries[..., 1]
    except (KeyError, IndexError, ValueError, TypeError) as e:
        raise InvalidStateError("Malformed state file", error=str(e))
    rho = DensityMatrix(matrix)
    if "n_qubits" in payload and payload["n_qubits"] != rho.n_qubits:
        raise InvalidStateError("n_qubits does not match matrix", n_qubits=payload["n_qubits"])
    return rho


def state_to_payload(rho: DensityMatrix) -> dict:
    return {
        "n_qubits": rho.n_qubits,
        "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in rho.matrix],
    }
