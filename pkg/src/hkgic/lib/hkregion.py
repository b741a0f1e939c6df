"""
Han-Kobayashi rate region of the 2-user GIC for a given power split, and its
optimization over a grid of splits.
"""

import logging
import math
from collections.abc import Sequence
from functools import partial
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field

from .config import get_settings
from .miterms import HK_TERMS
from .miterms import RATE_COORDS
from .miterms import HkBounds
from .miterms import compute_bounds
from .models import DomainError
from .models import GicChannel
from .models import PowerSplit
from .models import RatePair
from .models import RateTuple4
from .models import awgn_capacity
from .polytope import GEOM_TOL
from .polytope import RatePolytope
from .polytope import Region2D
from .polytope import convex_hull
from .polytope import eliminate_all
from .polytope import extract_region2d
from .polytope import maximize
from .polytope import maximize_value
from .runner import run_grid

logger = logging.getLogger(__name__)

R_COORDS = ("r1", "r2")
# elimination order from layer rates to user rates
LAYER_ELIMINATION = ("ru1", "rv1", "ru2", "rv2")


class HkInstance(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    channel: GicChannel
    split: PowerSplit
    bounds: HkBounds
    polytope: RatePolytope

    def swapped(self) -> "HkInstance":
        return build_instance(self.channel.swapped(), self.split.swapped())


def build_instance(channel: GicChannel, split: PowerSplit) -> HkInstance:
    """
    The 18-row HK system over (ru1, ru2, rv1, rv2): rows HK1..HK14 followed by
    the four nonnegativity rows.
    """
    bounds = compute_bounds(channel, split)
    rows = [({c: 1.0 for c in term.pattern}, bounds.bound(term.index), term.label) for term in HK_TERMS]
    poly = RatePolytope.from_rows(RATE_COORDS, rows, nonneg=True)
    return HkInstance(channel=channel, split=split, bounds=bounds, polytope=poly)


def user_rate_objective(w1: float, w2: float) -> np.ndarray:
    """w1 r1 + w2 r2 written over (ru1, ru2, rv1, rv2)"""
    return np.array([w1, w2, w1, w2])


def weights_for(mu: float) -> tuple[float, float]:
    """
    (1, mu) for finite mu; infinity is the objective swap that maximizes r2 alone.
    """
    if math.isnan(mu) or mu < 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    if math.isinf(mu):
        return 0.0, 1.0
    return 1.0, mu


def project_r1r2(inst: HkInstance, tol: float = GEOM_TOL) -> Region2D:
    """
    Region of user rates (r1, r2) = (ru1 + rv1, ru2 + rv2) for one split.
    """
    coords = RATE_COORDS + R_COORDS
    link = np.array(
        [
            [-1.0, 0.0, -1.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 1.0, 0.0, -1.0, 0.0],
            [0.0, -1.0, 0.0, -1.0, 0.0, 1.0],
            [0.0, 1.0, 0.0, 1.0, 0.0, -1.0],
        ]
    )
    poly = inst.polytope.embed(coords).add_rows(link, np.zeros(4), ["r1<=", "r1>=", "r2<=", "r2>="])
    poly = eliminate_all(poly, LAYER_ELIMINATION, tol)
    return extract_region2d(poly, tol)


class GridPoint(NamedTuple):
    lam1: float
    lam2: float
    split: PowerSplit


def check_grid(grid_k: int) -> None:
    if isinstance(grid_k, bool) or not isinstance(grid_k, (int, np.integer)) or grid_k < 2:
        raise DomainError(f"grid_k must be an integer >= 2, got {grid_k!r}")


def split_grid(channel: GicChannel, grid_k: int) -> list[GridPoint]:
    """
    grid_k x grid_k private-fraction splits, lam1 outer and lam2 inner, ascending.
    """
    check_grid(grid_k)
    lams = np.linspace(0.0, 1.0, int(grid_k))
    return [
        GridPoint(float(l1), float(l2), PowerSplit.from_fractions(channel, float(l1), float(l2)))
        for l1 in lams
        for l2 in lams
    ]


class BoundaryEntry(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="strings")

    mu: float = Field(ge=0)
    lam1: float
    lam2: float
    best_split: PowerSplit
    rate_pair: RatePair
    objective_value: float


class BoundaryTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    entries: tuple[BoundaryEntry, ...]


def _weighted_value(channel: GicChannel, objective: np.ndarray, point: GridPoint) -> float:
    return maximize_value(build_instance(channel, point.split).polytope, objective)


def balanced_point(inst: HkInstance, objective: np.ndarray, tol: float = GEOM_TOL) -> tuple[float, np.ndarray]:
    """
    Point of the optimal face of objective that minimizes |r1 - r2|.

    On a swap-symmetric polytope with equal weights the face is symmetric
    too, so the returned point has r1 = r2.
    """
    poly = inst.polytope
    value = maximize_value(poly, objective)
    gap = np.array([1.0, -1.0, 1.0, -1.0, 0.0])
    slack = np.zeros(len(RATE_COORDS) + 1)
    slack[-1] = 1.0
    face = poly.embed((*RATE_COORDS, "gap")).add_rows(
        [np.append(-objective, 0.0), gap - slack, -gap - slack],
        [-(value - tol), 0.0, 0.0],
        ["face", "gap+", "gap-"],
    )
    _, x = maximize(face, -slack, tol)
    return value, x[: len(RATE_COORDS)]


def optimize_weighted(
    channel: GicChannel,
    mu: float,
    grid_k: int,
    tol: float = GEOM_TOL,
    workers: int | None = None,
) -> BoundaryEntry:
    """
    Maximize r1 + mu r2 over the HK polytope of every grid split.

    The best split is the first one in grid order whose value beats the running
    best by more than tol, so ties go to the smaller (lam1, lam2). Equal weights
    on a symmetric channel prefer a tied split with lam1 = lam2 and report the
    balanced point of its optimal face.
    """
    check_grid(grid_k)
    w1, w2 = weights_for(mu)
    objective = user_rate_objective(w1, w2)
    points = split_grid(channel, grid_k)
    values = run_grid(partial(_weighted_value, channel, objective), points, workers)
    best = 0
    for idx, value in enumerate(values):
        if value > values[best] + tol:
            best = idx
    balanced = channel.is_symmetric and w1 == w2
    if balanced:
        tied = [i for i, p in enumerate(points) if p.lam1 == p.lam2 and values[i] >= values[best] - tol]
        if tied:
            best = tied[0]
    point = points[best]
    inst = build_instance(channel, point.split)
    if balanced:
        _, x = balanced_point(inst, objective, tol)
    else:
        _, x = maximize(inst.polytope, objective, tol)
    pair = RateTuple4.from_point(x).rate_pair()
    logger.debug(f"mu={mu}: best split lam=({point.lam1}, {point.lam2}) value={values[best]}")
    return BoundaryEntry(
        mu=mu,
        lam1=point.lam1,
        lam2=point.lam2,
        best_split=point.split,
        rate_pair=pair,
        objective_value=w1 * pair.r1 + w2 * pair.r2,
    )


def default_mu_sweep() -> list[float]:
    """0, log-spaced weights, then the r2-only proxy for mu = infinity"""
    settings = get_settings()
    exps = np.linspace(settings.mu_sweep_min_exp, settings.mu_sweep_max_exp, settings.mu_sweep_count)
    return [0.0] + [float(2.0**e) for e in exps] + [math.inf]


def trace_boundary(
    channel: GicChannel,
    mus: Sequence[float] | None,
    grid_k: int,
    tol: float = GEOM_TOL,
    workers: int | None = None,
) -> BoundaryTrace:
    if mus is None:
        mus = default_mu_sweep()
    if len(mus) == 0:
        raise DomainError("mu list is empty")
    logger.info(f"tracing {len(mus)} weights on a {grid_k}x{grid_k} split grid")
    entries = [optimize_weighted(channel, mu, grid_k, tol, workers) for mu in sorted(mus)]
    return BoundaryTrace(entries=tuple(entries))


def _split_region(channel: GicChannel, tol: float, point: GridPoint) -> Region2D:
    return project_r1r2(build_instance(channel, point.split), tol)


class RegionSweep(BaseModel):
    """
    Per-split (r1, r2) regions and their convex hull. The raw union is the
    members themselves; the hull adds time sharing between splits.
    """

    model_config = ConfigDict(frozen=True)

    points: tuple[tuple[float, float], ...]
    regions: tuple[Region2D, ...]
    hull: Region2D

    def raw_contains(self, point, tol: float = GEOM_TOL) -> bool:
        return any(r.contains(point, tol) for r in self.regions)


def region_sweep(
    channel: GicChannel,
    grid_k: int,
    tol: float = GEOM_TOL,
    workers: int | None = None,
) -> RegionSweep:
    points = split_grid(channel, grid_k)
    logger.info(f"projecting {len(points)} split regions")
    regions = run_grid(partial(_split_region, channel, tol), points, workers)
    hull = convex_hull(np.vstack([r.points for r in regions]), R_COORDS, tol)
    return RegionSweep(
        points=tuple((p.lam1, p.lam2) for p in points),
        regions=tuple(regions),
        hull=hull,
    )


def region_union(
    channel: GicChannel,
    grid_k: int,
    tol: float = GEOM_TOL,
    workers: int | None = None,
) -> Region2D:
    """Convex hull of the per-split regions over the split grid."""
    return region_sweep(channel, grid_k, tol, workers).hull


def no_interference_rectangle(channel: GicChannel) -> Region2D:
    """[0, C(p1/n1)] x [0, C(p2/n2)], the region with both cross gains at zero."""
    c1 = awgn_capacity(channel.p1 / channel.n1)
    c2 = awgn_capacity(channel.p2 / channel.n2)
    return convex_hull([(0.0, 0.0), (c1, 0.0), (c1, c2), (0.0, c2)], R_COORDS)
