"""
Closed-form predictions for the two three-qubit mixed families.

Rank-3 family: p|GHZ><GHZ| + (1-p)|psi><psi|, psi = x|001>+y|010>+z|100>+w|111>.
Rank-4 family: p|W><W| + (1-p)|W~><W~| with w = 0.

Links are labelled (Q, P) with Q the row qubit of S(Q,P); R is the third
qubit. Qubit 0 carries amplitude z, qubit 1 y and qubit 2 x.
"""

from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.optimize import brentq

from loopgauge.errors import InvalidStateError, KernelError
from loopgauge.services.twist.holonomy import loop_pairs
from loopgauge.services.twist.lsvd import RANK3_AMPLITUDE_OF_QUBIT, rank3_region

logger = structlog.get_logger()

LOOP = (0, 1, 2)
REGIONS = ("I", "II", "III")
ALL_COMBINATIONS = tuple("".join(c) for c in product(("1", "2", "3"), repeat=3))


def eps(p: float, q: float) -> float:
    return float(np.sqrt(p + 2.0 * (1.0 - p) * q * q))


def _normalized(params: Dict[str, float], names: Sequence[str]) -> Dict[str, float]:
    values = np.array([float(params.get(k, 0.0)) for k in names])
    if np.any(values < 0.0):
        raise InvalidStateError("Amplitudes must be nonnegative", **{k: float(params.get(k, 0.0)) for k in names})
    norm = np.linalg.norm(values)
    if norm == 0.0:
        raise InvalidStateError("Amplitudes vanish")
    return dict(zip(names, values / norm))


def _probability(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise InvalidStateError("Mixing probability outside [0, 1]", p=p)
    return float(p)


def _amplitudes(amps: Dict[str, float], pair: Tuple[int, int]) -> Tuple[float, float, float]:
    q, p = pair
    (r,) = {0, 1, 2} - {q, p}
    return amps[RANK3_AMPLITUDE_OF_QUBIT[p]], amps[RANK3_AMPLITUDE_OF_QUBIT[q]], amps[RANK3_AMPLITUDE_OF_QUBIT[r]]


def canonical_from_raw(raw: Sequence[float]) -> np.ndarray:
    """(s0, t |s|_sorted) with t the sign of s1 s2 s3."""
    raw = np.asarray(raw, dtype=float)
    t = np.sign(np.prod(raw[1:])) or 1.0
    spatial = np.sort(np.abs(raw[1:]))[::-1]
    return np.concatenate(([raw[0]], t * spatial))


# Rank-3 family

@dataclass(frozen=True)
class Rank3Link:
    pair: Tuple[int, int]
    raw_sigma: np.ndarray
    sigma: np.ndarray
    region: str
    concurrence: float


@dataclass(frozen=True)
class Rank3Prediction:
    links: List[Rank3Link]
    combination: str
    holonomy_family: str
    xi: Optional[float]
    eigenvalues: Optional[np.ndarray]


def rank3_link(p: float, amps: Dict[str, float], pair: Tuple[int, int], margin: Optional[float] = None) -> Rank3Link:
    a_p, a_q, a_r = _amplitudes(amps, pair)
    w = amps["w"]
    e_w, e_r = eps(p, w), eps(p, a_r)
    pq = a_p * a_q
    raw = np.array(
        [
            0.5 * e_w * e_r + (1.0 - p) * pq,
            (1.0 - p) * (pq + w * a_r),
            (1.0 - p) * (pq - w * a_r),
            0.5 * e_w * e_r - (1.0 - p) * pq,
        ]
    )
    region = rank3_region(p, w, a_r, pq, margin)
    concurrence = {"I": -2.0 * raw[2], "III": -2.0 * raw[3]}.get(region, 0.0)
    return Rank3Link(pair, raw, canonical_from_raw(raw), region, float(max(concurrence, 0.0)))


def _boost_ratio(p: float, amps: Dict[str, float], pair: Tuple[int, int], sign: float) -> float:
    a_p, a_q, _ = _amplitudes(amps, pair)
    return (a_p * eps(p, a_q) + sign * a_q * eps(p, a_p)) ** 2 / (4.0 * a_p * a_q * eps(p, a_p) * eps(p, a_q))


def rank3_closed_form(p: float, x: float, y: float, z: float, w: float, margin: Optional[float] = None) -> Rank3Prediction:
    p = _probability(p)
    amps = _normalized({"x": x, "y": y, "z": z, "w": w}, ("x", "y", "z", "w"))
    links = [rank3_link(p, amps, pair, margin) for pair in loop_pairs(LOOP)]
    regions = [link.region for link in links]
    combination = "".join(str(REGIONS.index(r) + 1) if r in REGIONS else "b" for r in regions)

    if "boundary" in regions:
        return Rank3Prediction(links, combination, "boundary", None, None)

    count_i = regions.count("I")
    count_iii = regions.count("III")
    if count_i % 2 == 1:
        family, xi = "pi_rotation", 0.0
        eigenvalues = np.array([1.0, -1.0, 1.0, -1.0])
    elif count_i == 0:
        if count_iii % 2 == 0:
            family, xi = "identity", 1.0
            eigenvalues = np.ones(4)
        else:
            family, xi = "pi_rotation", 0.0
            eigenvalues = np.array([1.0, -1.0, 1.0, -1.0])
    else:
        odd = next(link for link in links if link.region != "I")
        a_p, a_q, _ = _amplitudes(amps, odd.pair)
        ratio = a_q * eps(p, a_p) / (a_p * eps(p, a_q))
        middle = -1.0 if odd.region == "III" else 1.0
        family = "so11_pi_rotation" if odd.region == "III" else "so11"
        xi = _boost_ratio(p, amps, odd.pair, middle)
        eigenvalues = np.array([ratio, middle, middle, 1.0 / ratio])
    return Rank3Prediction(links, combination, family, float(xi), eigenvalues)


# Rank-4 family

@dataclass(frozen=True)
class Rank4Link:
    pair: Tuple[int, int]
    beta: float
    rapidity: float
    s3: float
    det_sign: int


@dataclass(frozen=True)
class Rank4Prediction:
    links: List[Rank4Link]
    rapidity_sum: float
    negative_links: int
    xi: float


def _rank4_s3(p: float, a_p: float, a_q: float, a_r: float) -> float:
    """Sign-carrying spatial singular value on the boost axis, up to a positive factor."""
    g = np.sqrt(p * (1.0 - p))
    return float(a_r * a_r * g - np.sqrt(p * (1.0 - p) * (a_q ** 2 - a_p ** 2) ** 2 + a_q ** 2 * a_p ** 2))


def rank4_link(p: float, amps: Dict[str, float], pair: Tuple[int, int]) -> Rank4Link:
    a_p, a_q, a_r = _amplitudes(amps, pair)
    beta = (1.0 - 2.0 * p) * (a_q ** 2 - a_p ** 2) / (a_q ** 2 + a_p ** 2)
    if abs(beta) >= 1.0:
        raise KernelError("Boost velocity out of range", beta=beta, link=list(pair))
    s3 = _rank4_s3(p, a_p, a_q, a_r)
    return Rank4Link(pair, float(beta), float(np.arctanh(beta)), s3, int(np.sign(s3)))


def rank4_closed_form(p: float, x: float, y: float, z: float) -> Rank4Prediction:
    p = _probability(p)
    amps = _normalized({"x": x, "y": y, "z": z}, ("x", "y", "z"))
    if min(amps.values()) <= 0.0:
        raise InvalidStateError("Rank-4 closed forms need x, y, z > 0")
    links = [rank4_link(p, amps, pair) for pair in loop_pairs(LOOP)]
    total = sum(link.rapidity for link in links)
    negative = sum(1 for link in links if link.det_sign < 0)
    xi = np.cosh(total / 2.0) ** 2 if negative % 2 == 0 else np.sinh(total / 2.0) ** 2
    return Rank4Prediction(links, float(total), negative, float(xi))


def rank4_critical_p(x: float, y: float, z: float, pair: Tuple[int, int] = (1, 0), lower: float = 1e-6, upper: float = 0.5) -> float:
    """Mixing probability in (lower, upper) where the link's boost-axis value changes sign."""
    amps = _normalized({"x": x, "y": y, "z": z}, ("x", "y", "z"))
    a_p, a_q, a_r = _amplitudes(amps, pair)
    f = lambda p: _rank4_s3(p, a_p, a_q, a_r)  # noqa: E731
    if np.sign(f(lower)) == np.sign(f(upper)):
        raise KernelError("No sign change in the bracket", link=list(pair), lower=lower, upper=upper)
    return float(brentq(f, lower, upper, xtol=1e-14))


# Bell-diagonal weights

BELL_SIGNS = {
    "bell_psi_minus": np.array([1.0, -1.0, -1.0, -1.0]),
    "bell_psi_plus": np.array([1.0, 1.0, 1.0, -1.0]),
    "bell_phi_minus": np.array([1.0, -1.0, 1.0, 1.0]),
    "bell_phi_plus": np.array([1.0, 1.0, -1.0, 1.0]),
}


def bell_weights(sigma: Sequence[float]) -> Dict[str, float]:
    """Bell weights of the (unnormalized) state 1/2 sum_i s_i s_i(x)s_i."""
    sigma = np.asarray(sigma, dtype=float)
    return {name: float(0.5 * signs @ sigma) for name, signs in BELL_SIGNS.items()}


def rank2_sigma(wootters: Sequence[float]) -> np.ndarray:
    """(y, -x, -x, -y) from the two nonzero Wootters eigenvalues."""
    l0, l1 = float(wootters[0]), float(wootters[1])
    y, x = 0.5 * (l0 + l1), 0.5 * (l0 - l1)
    return np.array([y, -x, -x, -y])
