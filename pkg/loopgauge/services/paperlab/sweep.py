"""
Parameter sweeps over the rank-3 and rank-4 families: pipeline twist next
to the closed-form prediction at every grid point.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import structlog

from loopgauge.config import get_settings
from loopgauge.errors import InvalidStateError, LoopGaugeError
from loopgauge.services.paperlab.closed_forms import ALL_COMBINATIONS, LOOP, rank3_closed_form, rank4_closed_form
from loopgauge.services.quantum.states import rank3_family, rank4_family
from loopgauge.services.twist.holonomy import twist

logger = structlog.get_logger()

FAMILIES = ("rank3", "rank4")
_PARAMS = {"rank3": ("p", "x", "y", "z", "w"), "rank4": ("p", "x", "y", "z")}


@dataclass
class SweepPoint:
    index: int
    params: Dict[str, float]
    xi: Optional[float] = None
    predicted_xi: Optional[float] = None
    combination: Optional[str] = None
    holonomy_family: Optional[str] = None
    error: Optional[Dict] = None

    @property
    def gap(self) -> Optional[float]:
        if self.xi is None or self.predicted_xi is None:
            return None
        return abs(self.xi - self.predicted_xi) / max(1.0, abs(self.predicted_xi))


@dataclass
class SweepResult:
    family: str
    method: str
    points: List[SweepPoint]
    realized: List[str] = field(default_factory=list)

    @property
    def worst_gap(self) -> Optional[float]:
        gaps = [p.gap for p in self.points if p.gap is not None]
        return max(gaps) if gaps else None


def grid_points(family: str, grid: Mapping[str, Sequence[float]]) -> List[Dict[str, float]]:
    """Cartesian product of per-parameter value lists, first name slowest."""
    if family not in FAMILIES:
        raise InvalidStateError("Unknown sweep family", family=family, known=list(FAMILIES))
    names = _PARAMS[family]
    missing = [n for n in names if n not in grid]
    if missing:
        raise InvalidStateError("Sweep grid is missing parameters", missing=missing)
    values = [[float(v) for v in np.atleast_1d(grid[n])] for n in names]
    return [dict(zip(names, combo)) for combo in product(*values)]


def random_points(family: str, samples: int, seed: int) -> List[Dict[str, float]]:
    if family not in FAMILIES:
        raise InvalidStateError("Unknown sweep family", family=family, known=list(FAMILIES))
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(samples):
        point = {"p": float(rng.uniform(0.02, 0.98))}
        for name in ("x", "y", "z"):
            point[name] = float(rng.uniform(0.1, 1.0))
        if family == "rank3":
            point["w"] = float(rng.uniform(0.0, 1.5))
        points.append(point)
    return points


def _evaluate(family: str, index: int, params: Dict[str, float], method: str) -> SweepPoint:
    point = SweepPoint(index=index, params=params)
    try:
        if family == "rank3":
            prediction = rank3_closed_form(**params)
            point.combination = prediction.combination
            point.holonomy_family = prediction.holonomy_family
            point.predicted_xi = prediction.xi
            rho = rank3_family(**params)
        else:
            prediction = rank4_closed_form(**params)
            point.holonomy_family = "so11" if prediction.negative_links % 2 == 0 else "so11_pi_rotation"
            point.predicted_xi = prediction.xi
            rho = rank4_family(**params)
        point.xi = twist(rho, LOOP, method=method).xi
    except LoopGaugeError as e:
        point.error = e.to_dict()
    return point


def sweep(
    family: str,
    grid: Optional[Mapping[str, Sequence[float]]] = None,
    samples: Optional[int] = None,
    seed: int = 7,
    method: str = "sqrt",
    threads: Optional[int] = None,
) -> SweepResult:
    """Run the pipeline over a grid (or seeded random points) in parallel.

    Results come back in input order whatever the thread count.
    """
    if grid is not None:
        params = grid_points(family, grid)
    elif samples is not None:
        params = random_points(family, samples, seed)
    else:
        raise InvalidStateError("A sweep needs a grid or a sample count")

    workers = max(1, threads or get_settings().threads)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        points = list(pool.map(lambda item: _evaluate(family, item[0], item[1], method), enumerate(params)))

    realized = sorted({p.combination for p in points if p.combination in ALL_COMBINATIONS})
    failed = sum(1 for p in points if p.error is not None)
    logger.info("Sweep finished", family=family, points=len(points), failed=failed, threads=workers)
    return SweepResult(family=family, method=method, points=points, realized=realized)
