"""
MAC projections of the HK system and numeric checks of its geometric claims.

The HK polytope is the intersection of the receiver-1 MAC over (ru1, ru2, rv1)
and the receiver-2 MAC over (ru1, ru2, rv2). MAC1 and MAC2 are its 3-d
projections. mac1 and mac2 live in the (rv1, rv2) plane: each is the receiver
MAC in its corner region, where the other user's private layer is decoded last
at the AWGN rate C(a pv2 / n1) (resp. C(b pv1 / n2)), projected onto the
private rates.

Claims are reported, never assumed: every report carries a verdict, a
witness, the measured violation and the tolerance used.
"""

import logging
from collections import Counter
from collections.abc import Iterable
from enum import Enum
from functools import partial

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict

from .hkregion import GridPoint
from .hkregion import HkInstance
from .hkregion import build_instance
from .hkregion import split_grid
from .miterms import RATE_COORDS
from .miterms import last_layer_rates
from .models import DomainError
from .models import GicChannel
from .polytope import GEOM_TOL
from .polytope import InfeasibleError
from .polytope import RatePolytope
from .polytope import Region2D
from .polytope import chebyshev_ball
from .polytope import eliminate
from .polytope import eliminate_all
from .polytope import extract_region2d
from .polytope import intersect2d
from .polytope import maximize
from .polytope import remove_redundant
from .runner import run_grid

logger = logging.getLogger(__name__)

CLAIM_TOL = 1e-6
ZERO_AREA = 1e-12
V_COORDS = ("rv1", "rv2")
U_COORDS = ("ru1", "ru2")


class MacLabel(str, Enum):
    MAC1 = "MAC1"
    MAC2 = "MAC2"
    mac1 = "mac1"
    mac2 = "mac2"


class ClaimId(str, Enum):
    REDUNDANCY = "redundancy_hk11_hk12"
    RECTANGLE = "rectangle_mac_intersection"
    CORNER = "corner_coincidence"
    UV_VOLUME = "uv_volume"


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    DEGENERATE = "degenerate"


class MacProjection(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: MacLabel
    polytope: RatePolytope
    region: Region2D | None = None


class MacProjections(BaseModel):
    model_config = ConfigDict(frozen=True)

    MAC1: MacProjection
    MAC2: MacProjection
    mac1: MacProjection
    mac2: MacProjection


class ClaimReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    claim_id: ClaimId
    verdict: Verdict
    witness: dict
    violation: float
    tolerance: float


def _lift(poly: RatePolytope, coord: str, upper: float) -> RatePolytope:
    """poly over (ru1, ru2, rv1, rv2) with 0 <= coord <= upper added."""
    lifted = poly.embed(RATE_COORDS)
    row = np.zeros(len(RATE_COORDS))
    row[RATE_COORDS.index(coord)] = 1.0
    return lifted.add_rows([row, -row], [upper, 0.0], [f"last:{coord}", f"nonneg:{coord}"])


def corner_polytopes(
    inst: HkInstance, mac1_3d: RatePolytope, mac2_3d: RatePolytope
) -> tuple[RatePolytope, RatePolytope]:
    """Receiver MACs in their corner regions, as 4-d polytopes."""
    last1, last2 = last_layer_rates(inst.channel, inst.split)
    return _lift(mac1_3d, "rv2", last1), _lift(mac2_3d, "rv1", last2)


def build_mac_projections(inst: HkInstance, tol: float = GEOM_TOL) -> MacProjections:
    MAC1 = eliminate(inst.polytope, "rv2", tol)
    MAC2 = eliminate(inst.polytope, "rv1", tol)
    bar1, bar2 = corner_polytopes(inst, MAC1, MAC2)
    mac1 = eliminate_all(bar1, U_COORDS, tol)
    mac2 = eliminate_all(bar2, U_COORDS, tol)
    return MacProjections(
        MAC1=MacProjection(label=MacLabel.MAC1, polytope=MAC1),
        MAC2=MacProjection(label=MacLabel.MAC2, polytope=MAC2),
        mac1=MacProjection(label=MacLabel.mac1, polytope=mac1, region=extract_region2d(mac1, tol)),
        mac2=MacProjection(label=MacLabel.mac2, polytope=mac2, region=extract_region2d(mac2, tol)),
    )


def _lex_max(points: np.ndarray, first: int, tol: float) -> tuple[float, float]:
    second = 1 - first
    top = points[:, first].max()
    near = points[points[:, first] >= top - tol]
    best = near[np.argmax(near[:, second])]
    return float(best[0]), float(best[1])


def corner_points(mac: MacProjection | Region2D, tol: float = GEOM_TOL) -> tuple[tuple[float, float], tuple[float, float]]:
    """
    (upper, lower) corners of a 2-d MAC region: upper maximizes rv2 then rv1,
    lower maximizes rv1 then rv2. Coordinates within tol count as ties.
    """
    region = mac.region if isinstance(mac, MacProjection) else mac
    if region is None:
        raise DomainError(f"{mac.label.value} is not a 2-d projection")
    if region.is_empty:
        raise InfeasibleError("corner points of an empty region")
    pts = region.points
    return _lex_max(pts, 1, tol), _lex_max(pts, 0, tol)


def _row_margin(poly: RatePolytope, row: int) -> tuple[float, np.ndarray]:
    """max of row's left-hand side over the other rows, minus its bound, and the maximizer"""
    others = poly.select([i for i in range(poly.n_rows) if i != row])
    value, x = maximize(others, poly.A[row])
    return value - poly.b[row], x


def _check_redundancy(inst: HkInstance, tol_geom: float, tol_claim: float) -> ClaimReport:
    poly = inst.polytope
    _, removed = remove_redundant(poly, tol_geom)
    witness: dict = {}
    worst = -np.inf
    worst_label = None
    for label in ("HK11", "HK12"):
        idx = poly.row_index(label)
        margin, x = _row_margin(poly, idx)
        witness[label] = {"removed": idx in removed, "margin": margin, "point": [float(v) for v in x]}
        if margin > worst:
            worst, worst_label = margin, label
    witness["row"] = worst_label
    verdict = Verdict.FAILS if worst > tol_claim else Verdict.HOLDS
    return ClaimReport(
        claim_id=ClaimId.REDUNDANCY,
        verdict=verdict,
        witness=witness,
        violation=float(worst),
        tolerance=tol_claim,
    )


def _bbox_corners(region: Region2D) -> np.ndarray:
    x0, y0, x1, y1 = region.bounding_box()
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


def _check_rectangle(macs: MacProjections, tol_geom: float, tol_claim: float) -> ClaimReport:
    inter = intersect2d(macs.mac1.region, macs.mac2.region, tol_geom)
    witness: dict = {"intersection": [list(v) for v in inter.vertices]}
    if inter.is_empty or len(inter.vertices) == 1:
        return ClaimReport(
            claim_id=ClaimId.RECTANGLE,
            verdict=Verdict.DEGENERATE,
            witness=witness,
            violation=0.0,
            tolerance=tol_claim,
        )
    corners = _bbox_corners(inter)
    dist = [inter.distance_outside(c) for c in corners]
    worst = int(np.argmax(dist))
    witness["point"] = [float(v) for v in corners[worst]]
    violation = max(float(dist[worst]), 0.0)
    return ClaimReport(
        claim_id=ClaimId.RECTANGLE,
        verdict=Verdict.FAILS if violation > tol_claim else Verdict.HOLDS,
        witness=witness,
        violation=violation,
        tolerance=tol_claim,
    )


def _check_corners(macs: MacProjections, tol_geom: float, tol_claim: float) -> ClaimReport:
    upper1, _ = corner_points(macs.mac1, tol_geom)
    _, lower2 = corner_points(macs.mac2, tol_geom)
    witness = {"mac1_upper": list(upper1), "mac2_lower": list(lower2)}
    if len(macs.mac1.region.vertices) == 1 or len(macs.mac2.region.vertices) == 1:
        return ClaimReport(
            claim_id=ClaimId.CORNER,
            verdict=Verdict.DEGENERATE,
            witness=witness,
            violation=0.0,
            tolerance=tol_claim,
        )
    violation = float(np.max(np.abs(np.subtract(upper1, lower2))))
    return ClaimReport(
        claim_id=ClaimId.CORNER,
        verdict=Verdict.FAILS if violation > tol_claim else Verdict.HOLDS,
        witness=witness,
        violation=violation,
        tolerance=tol_claim,
    )


def joint_corner_polytope(inst: HkInstance, macs: MacProjections) -> RatePolytope:
    bar1, bar2 = corner_polytopes(inst, macs.MAC1.polytope, macs.MAC2.polytope)
    return bar1.add_rows(bar2.A, bar2.b, bar2.labels)


def _check_uv_volume(inst: HkInstance, macs: MacProjections, tol_geom: float, tol_claim: float) -> ClaimReport:
    joint = joint_corner_polytope(inst, macs)
    v_shadow = eliminate_all(joint, U_COORDS, tol_geom)
    u_shadow = eliminate_all(joint, V_COORDS, tol_geom)
    v_region = extract_region2d(v_shadow, tol_geom)
    u_region = extract_region2d(u_shadow, tol_geom)
    center, radius = chebyshev_ball(v_shadow)
    witness = {
        "v_area": v_region.area,
        "u_area": u_region.area,
        "point": [float(c) for c in center],
        "radius": radius,
    }
    if u_region.area <= ZERO_AREA:
        verdict = Verdict.DEGENERATE
    elif radius <= tol_claim:
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.FAILS
    return ClaimReport(
        claim_id=ClaimId.UV_VOLUME,
        verdict=verdict,
        witness=witness,
        violation=radius,
        tolerance=tol_claim,
    )


def verify_claims(
    inst: HkInstance,
    tol_geom: float = GEOM_TOL,
    tol_claim: float = CLAIM_TOL,
) -> list[ClaimReport]:
    """
    Reports, in order, for: redundancy of HK11/HK12, mac1 and mac2 meeting in a
    rectangle, the upper corner of mac1 meeting the lower corner of mac2, and the
    (rv1, rv2) shadow of the joint corner region having zero area while the
    (ru1, ru2) shadow does not.
    """
    macs = build_mac_projections(inst, tol_geom)
    return [
        _check_redundancy(inst, tol_geom, tol_claim),
        _check_rectangle(macs, tol_geom, tol_claim),
        _check_corners(macs, tol_geom, tol_claim),
        _check_uv_volume(inst, macs, tol_geom, tol_claim),
    ]


def recheck_claim(inst: HkInstance, report: ClaimReport, tol_geom: float = GEOM_TOL) -> float:
    """
    Re-evaluate a report's violation from its witness alone, against the
    inequalities that define the claim.
    """
    w = report.witness
    match report.claim_id:
        case ClaimId.REDUNDANCY:
            label = w["row"]
            idx = inst.polytope.row_index(label)
            point = np.array(w[label]["point"])
            others = [i for i in range(inst.polytope.n_rows) if i != idx]
            slack = float(np.max(inst.polytope.A[others] @ point - inst.polytope.b[others]))
            if slack > 10 * tol_geom:
                raise DomainError(f"witness for {label} violates the other rows by {slack}")
            return float(inst.polytope.A[idx] @ point - inst.polytope.b[idx])
        case ClaimId.RECTANGLE:
            macs = build_mac_projections(inst, tol_geom)
            inter = intersect2d(macs.mac1.region, macs.mac2.region, tol_geom)
            return max(inter.distance_outside(w["point"]), 0.0) if "point" in w else 0.0
        case ClaimId.CORNER:
            return float(np.max(np.abs(np.subtract(w["mac1_upper"], w["mac2_lower"]))))
        case ClaimId.UV_VOLUME:
            macs = build_mac_projections(inst, tol_geom)
            v_shadow = eliminate_all(joint_corner_polytope(inst, macs), U_COORDS, tol_geom)
            # radius of the witness disk that still fits inside the shadow
            norms = np.linalg.norm(v_shadow.A, axis=1)
            return float(np.min((v_shadow.b - v_shadow.A @ np.array(w["point"])) / norms))
    raise DomainError(f"unknown claim {report.claim_id}")


class SplitClaims(BaseModel):
    """Claim reports for one split of the grid."""

    model_config = ConfigDict(frozen=True)

    lam1: float
    lam2: float
    reports: tuple[ClaimReport, ...]


def _split_claims(channel: GicChannel, tol_geom: float, tol_claim: float, point: GridPoint) -> SplitClaims:
    inst = build_instance(channel, point.split)
    reports = verify_claims(inst, tol_geom, tol_claim)
    return SplitClaims(lam1=point.lam1, lam2=point.lam2, reports=tuple(reports))


def verify_grid(
    channel: GicChannel,
    grid_k: int,
    tol_geom: float = GEOM_TOL,
    tol_claim: float = CLAIM_TOL,
    workers: int | None = None,
) -> list[SplitClaims]:
    points = split_grid(channel, grid_k)
    logger.info(f"checking claims on {len(points)} splits")
    return run_grid(partial(_split_claims, channel, tol_geom, tol_claim), points, workers)


def summarize(results: Iterable[SplitClaims]) -> dict[str, int]:
    counts = Counter(r.verdict for s in results for r in s.reports)
    return {v.value: counts.get(v, 0) for v in Verdict}
