"""
Hand-built SL(2,C) gauges for pure states: the single-link singlet gauge,
the GHZ-class reduction and the W-class quasi-distillation sequence.
"""

from typing import Tuple

import numpy as np

from loopgauge.errors import InvalidStateError
from loopgauge.services.quantum.states import LocalOp


def _root4(value: complex) -> complex:
    return complex(np.power(complex(value), 0.25))


def pure_two_qubit_gauge(alpha: float, beta: float) -> Tuple[np.ndarray, LocalOp]:
    """Lorentz gauge on the first qubit of alpha|00> + beta|11> and its SL(2,C) form.

    The gauge turns the link into alpha*beta times the singlet correlations.
    """
    if alpha <= 0.0 or beta <= 0.0:
        raise InvalidStateError("Schmidt coefficients must be positive", alpha=alpha, beta=beta)
    ab = 2.0 * alpha * beta
    u = np.array(
        [
            [1.0 / ab, 0.0, 0.0, (beta ** 2 - alpha ** 2) / ab],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [(alpha ** 2 - beta ** 2) / ab, 0.0, 0.0, -1.0 / ab],
        ]
    )
    a = np.array([[0.0, -np.sqrt(alpha / beta)], [np.sqrt(beta / alpha), 0.0]], dtype=complex)
    return u, LocalOp(a)


def _ghz_first(theta: float, delta: float, phi: float) -> np.ndarray:
    s2 = np.sin(theta) ** 2
    c4_over_s2 = np.cos(theta) ** 4 / s2
    t = np.tan(delta)
    e = np.exp(1j * phi)
    return np.array(
        [
            [0.0, _root4(np.conj(e) / (s2 * t))],
            [-_root4(e * s2 * t), _root4(e * c4_over_s2 * t)],
        ]
    )


def ghz_proof_gauges(delta: float, alpha: float, beta: float, gamma: float, phi: float) -> Tuple[LocalOp, LocalOp, LocalOp]:
    """Gauges A, B, C for c_d|000> + s_d e^{i phi}|phi_a phi_b phi_c>.

    Principal fourth roots; each matrix is rescaled to unit determinant.
    """
    if min(np.sin(alpha), np.sin(beta), np.sin(gamma)) <= 0.0 or np.tan(delta) <= 0.0:
        raise InvalidStateError("GHZ gauges need nonzero sines and tan(delta)", alpha=alpha, beta=beta, gamma=gamma, delta=delta)
    a = _ghz_first(alpha, delta, phi)
    c = _ghz_first(gamma, delta, phi)

    s2 = np.sin(beta) ** 2
    t = np.tan(delta)
    e = np.exp(1j * phi)
    b = np.array(
        [
            [_root4(e * s2 * t), -_root4(e * np.cos(beta) ** 4 / s2 * t)],
            [0.0, _root4(np.conj(e) / (s2 * t))],
        ]
    )
    return LocalOp.unimodular_from(a), LocalOp.unimodular_from(b), LocalOp.unimodular_from(c)


def w_class_gauges(w: float, x: float, y: float, z: float, n: float) -> Tuple[LocalOp, LocalOp, LocalOp]:
    """Gauges for w|000>+x|001>+y|010>+z|100> sharpened by Q = diag(1/n, n).

    As n grows the links approach yz and xy times the singlet and xz times
    the triplet diag(1, 1, 1, -1); the success weight vanishes.
    """
    if min(x, y, z) <= 0.0 or w < 0.0 or n <= 0.0:
        raise InvalidStateError("W gauges need x, y, z, n > 0 and w >= 0", w=w, x=x, y=y, z=z, n=n)
    q = np.diag([1.0 / n, n]).astype(complex)
    a = q @ np.array([[np.sqrt(z / x), -w / np.sqrt(x * z)], [0.0, np.sqrt(x / z)]], dtype=complex)
    b = q @ np.diag([-1j * np.sqrt(y / x), 1j * np.sqrt(x / y)])
    return LocalOp(a), LocalOp(b), LocalOp(q)
