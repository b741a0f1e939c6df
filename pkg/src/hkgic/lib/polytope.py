"""
Half-space polytopes over named rate coordinates.

Linear programs are solved with HiGHS through ``scipy.optimize.linprog``.
All geometric comparisons use an absolute tolerance (GEOM_TOL by default);
rows are normalized so their largest coefficient has magnitude 1.
"""

import logging
from collections.abc import Iterable
from collections.abc import Mapping
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from scipy.optimize import linprog

from .models import DomainError

logger = logging.getLogger(__name__)

GEOM_TOL = 1e-9
_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}
# linprog status codes
_OPTIMAL = 0
_INFEASIBLE = 2
_UNBOUNDED = 3


class PolytopeError(Exception):
    pass


class InfeasibleError(PolytopeError):
    pass


class UnboundedError(PolytopeError):
    pass


def _normalize(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    scale = np.max(np.abs(A), axis=1) if A.shape[1] else np.zeros(A.shape[0])
    nonzero = scale > 0.0
    safe = np.where(nonzero, scale, 1.0)
    return A / safe[:, None], b / safe, nonzero


class RatePolytope:
    """
    The set {x : A x <= b} over named coordinates.

    Rows are normalized on construction and all-zero rows are dropped; a zero
    row with a negative bound means the set is empty and raises InfeasibleError.
    """

    def __init__(
        self,
        coords: Sequence[str],
        A,
        b,
        labels: Sequence[str] | None = None,
        tol: float = GEOM_TOL,
    ):
        coords = tuple(coords)
        if len(set(coords)) != len(coords):
            raise DomainError(f"duplicate coordinate names in {coords}")
        A = np.array(A, dtype=float).reshape(-1, len(coords))
        b = np.array(b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise DomainError(f"{A.shape[0]} rows but {b.shape[0]} bounds")
        if labels is None:
            labels = [f"row{i}" for i in range(A.shape[0])]
        labels = tuple(labels)
        if len(labels) != A.shape[0]:
            raise DomainError(f"{A.shape[0]} rows but {len(labels)} labels")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise DomainError("polytope rows must be finite")
        A, b, nonzero = _normalize(A, b)
        if np.any(~nonzero & (b < -tol)):
            raise InfeasibleError("constraint 0 <= negative bound")
        self.coords = coords
        self.A = A[nonzero]
        self.b = b[nonzero]
        self.labels = tuple(lab for lab, keep in zip(labels, nonzero) if keep)
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    @classmethod
    def from_rows(
        cls,
        coords: Sequence[str],
        rows: Iterable[tuple[Mapping[str, float], float, str]],
        nonneg: bool = False,
    ) -> "RatePolytope":
        """
        Build from (coefficients by coordinate name, bound, label) triples.
        """
        coords = tuple(coords)
        A, b, labels = [], [], []
        for coeffs, bound, label in rows:
            row = np.zeros(len(coords))
            for name, value in coeffs.items():
                if name not in coords:
                    raise DomainError(f"unknown coordinate {name!r}")
                row[coords.index(name)] = value
            A.append(row)
            b.append(bound)
            labels.append(label)
        poly = cls(coords, np.array(A).reshape(-1, len(coords)), b, labels)
        if nonneg:
            poly = poly.with_nonnegativity()
        return poly

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def __len__(self) -> int:
        return self.n_rows

    def __repr__(self) -> str:
        return f"RatePolytope(coords={self.coords}, rows={self.n_rows})"

    def index(self, coord: str) -> int:
        if coord not in self.coords:
            raise DomainError(f"unknown coordinate {coord!r}, have {self.coords}")
        return self.coords.index(coord)

    def row_index(self, label: str) -> int:
        return self.labels.index(label)

    def with_nonnegativity(self) -> "RatePolytope":
        eye = -np.eye(self.dim)
        return self.add_rows(eye, np.zeros(self.dim), [f"nonneg:{c}" for c in self.coords])

    def add_rows(self, A, b, labels: Sequence[str]) -> "RatePolytope":
        A = np.array(A, dtype=float).reshape(-1, self.dim)
        return RatePolytope(
            self.coords,
            np.vstack([self.A, A]),
            np.concatenate([self.b, np.asarray(b, dtype=float)]),
            self.labels + tuple(labels),
        )

    def embed(self, coords: Sequence[str]) -> "RatePolytope":
        """Same rows over a superset of coordinates (new coordinates get zero columns)."""
        coords = tuple(coords)
        missing = [c for c in self.coords if c not in coords]
        if missing:
            raise DomainError(f"embedding drops coordinates {missing}")
        A = np.zeros((self.n_rows, len(coords)))
        for j, c in enumerate(self.coords):
            A[:, coords.index(c)] = self.A[:, j]
        return RatePolytope(coords, A, self.b, self.labels)

    def permuted(self, order: Sequence[int]) -> "RatePolytope":
        order = list(order)
        return RatePolytope(self.coords, self.A[order], self.b[order], [self.labels[i] for i in order])

    def scaled_rows(self, factors) -> "RatePolytope":
        """Same set with row i multiplied by factors[i] > 0 (normalization undoes it)."""
        factors = np.asarray(factors, dtype=float).reshape(-1)
        if factors.shape[0] != self.n_rows or np.any(factors <= 0):
            raise DomainError("row factors must be positive, one per row")
        return RatePolytope(self.coords, self.A * factors[:, None], self.b * factors, self.labels)

    def select(self, keep: Sequence[int]) -> "RatePolytope":
        return self.permuted(sorted(keep))

    def violation(self, point) -> float:
        """Largest row excess at point (<= 0 inside)."""
        if self.n_rows == 0:
            return -np.inf
        return float(np.max(self.A @ np.asarray(point, dtype=float) - self.b))

    def contains(self, point, tol: float = GEOM_TOL) -> bool:
        return self.violation(point) <= tol

    def is_bounded(self) -> bool:
        for j in range(self.dim):
            for sign in (1.0, -1.0):
                c = np.zeros(self.dim)
                c[j] = sign
                if _solve_max(c, self.A, self.b).status == _UNBOUNDED:
                    return False
        return True


def _solve_max(c: np.ndarray, A: np.ndarray, b: np.ndarray):
    """maximize c.x subject to A x <= b with free variables"""
    n = c.shape[0]
    if A.shape[0] == 0:
        A_ub, b_ub = None, None
    else:
        A_ub, b_ub = A, b
    return linprog(
        -c,
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=[(None, None)] * n,
        method="highs",
        options=_HIGHS_OPTIONS,
    )


def _check_status(res, what: str) -> None:
    if res.status == _INFEASIBLE:
        raise InfeasibleError(f"{what}: polytope is empty")
    if res.status == _UNBOUNDED:
        raise UnboundedError(f"{what}: objective is unbounded")
    if res.status != _OPTIMAL:
        logger.warning(f"{what}: LP solver returned status {res.status} ({res.message})")
        raise PolytopeError(f"{what}: LP solver failed with status {res.status}")


def is_feasible(poly: RatePolytope) -> bool:
    res = _solve_max(np.zeros(poly.dim), poly.A, poly.b)
    return res.status == _OPTIMAL


def _objective(poly: RatePolytope, objective) -> np.ndarray:
    obj = np.asarray(objective, dtype=float).reshape(-1)
    if obj.shape[0] != poly.dim:
        raise DomainError(f"objective has {obj.shape[0]} entries, polytope has {poly.dim} coordinates")
    return obj


def maximize_value(poly: RatePolytope, objective) -> float:
    """Optimal value of objective.x over poly (one LP, no vertex tie-break)."""
    res = _solve_max(_objective(poly, objective), poly.A, poly.b)
    _check_status(res, "maximize")
    return float(-res.fun)


def maximize(poly: RatePolytope, objective, tol: float = GEOM_TOL) -> tuple[float, np.ndarray]:
    """
    Maximize objective.x over poly.

    Returns the optimal value and the lexicographically largest point (in
    coordinate order) among those attaining the optimum within tol.
    """
    obj = _objective(poly, objective)
    res = _solve_max(obj, poly.A, poly.b)
    _check_status(res, "maximize")
    value = float(-res.fun)
    point = np.asarray(res.x, dtype=float)
    A_face = np.vstack([poly.A, -obj])
    b_face = np.append(poly.b, -(value - tol))
    for j in range(poly.dim):
        e = np.zeros(poly.dim)
        e[j] = 1.0
        sub = _solve_max(e, A_face, b_face)
        if sub.status != _OPTIMAL:
            logger.warning(f"lexicographic step {j} returned status {sub.status}, keeping LP vertex")
            break
        point = np.asarray(sub.x, dtype=float)
        xj = point[j]
        A_face = np.vstack([A_face, -e])
        b_face = np.append(b_face, -(xj - 1e-12 * max(1.0, abs(xj))))
    return value, point


def _canonical_order(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    # primary key: first coefficient, then the rest, then the bound
    keys = [b] + [A[:, j] for j in reversed(range(A.shape[1]))]
    return np.lexsort(keys)


def remove_redundant(poly: RatePolytope, tol: float = GEOM_TOL) -> tuple[RatePolytope, list[int]]:
    """
    Drop rows implied by the others.

    A row is removed when max(a_i.x) over the remaining rows stays <= b_i + tol.
    Rows are visited in a canonical order (sorted normalized rows), so the
    removed set does not depend on how the input rows were ordered. Returns the
    reduced polytope and the removed row indices in input order.
    """
    if not is_feasible(poly):
        raise InfeasibleError("remove_redundant: polytope is empty")
    A, b = poly.A, poly.b
    kept = np.ones(poly.n_rows, dtype=bool)
    removed = []
    for i in _canonical_order(A, b):
        kept[i] = False
        res = _solve_max(A[i], A[kept], b[kept])
        if res.status == _OPTIMAL and -res.fun <= b[i] + tol:
            removed.append(int(i))
        else:
            kept[i] = True
    removed.sort()
    if removed:
        logger.debug(f"removed {len(removed)} of {poly.n_rows} rows: {[poly.labels[i] for i in removed]}")
    return poly.select(np.nonzero(kept)[0]), removed


def _dedupe(A: np.ndarray, b: np.ndarray, labels: list[str], tol: float):
    """Keep the tightest bound among rows with equal normalized coefficients."""
    A, b, nonzero = _normalize(A, b)
    keep: list[int] = []
    for i in np.nonzero(nonzero)[0]:
        for pos, j in enumerate(keep):
            if np.max(np.abs(A[i] - A[j])) <= tol:
                if b[i] < b[j]:
                    keep[pos] = i
                break
        else:
            keep.append(i)
    zero_rows = np.nonzero(~nonzero)[0]
    if np.any(b[zero_rows] < -tol):
        raise InfeasibleError("elimination produced 0 <= negative bound")
    return A[keep], b[keep], [labels[i] for i in keep]


def eliminate(poly: RatePolytope, coord: str, tol: float = GEOM_TOL, reduce: bool = True) -> RatePolytope:
    """
    Project poly onto the remaining coordinates by Fourier-Motzkin elimination.

    Every pair of rows with opposite-sign coefficients on coord is combined with
    positive multipliers; rows not involving coord carry over unchanged.
    """
    k = poly.index(coord)
    A, b = poly.A, poly.b
    col = A[:, k]
    pos = np.nonzero(col > tol)[0]
    neg = np.nonzero(col < -tol)[0]
    zero = np.nonzero(np.abs(col) <= tol)[0]

    rows = [A[i] for i in zero]
    bounds = [b[i] for i in zero]
    labels = [poly.labels[i] for i in zero]
    for p in pos:
        for q in neg:
            rows.append(A[p] * -col[q] + A[q] * col[p])
            bounds.append(b[p] * -col[q] + b[q] * col[p])
            labels.append(f"({poly.labels[p]}&{poly.labels[q]})")
    coords = poly.coords[:k] + poly.coords[k + 1 :]
    if rows:
        A_new = np.delete(np.array(rows), k, axis=1)
        b_new = np.array(bounds)
        A_new, b_new, labels = _dedupe(A_new, b_new, labels, tol)
    else:
        A_new, b_new = np.zeros((0, len(coords))), np.zeros(0)
    logger.debug(
        f"eliminate {coord}: pos={len(pos)} neg={len(neg)} zero={len(zero)} -> {A_new.shape[0]} rows before reduction"
    )
    out = RatePolytope(coords, A_new, b_new, labels, tol=tol)
    if reduce and out.n_rows:
        out, _ = remove_redundant(out, tol)
    return out


def eliminate_all(poly: RatePolytope, coords: Iterable[str], tol: float = GEOM_TOL) -> RatePolytope:
    for c in coords:
        poly = eliminate(poly, c, tol)
    return poly


def chebyshev_ball(poly: RatePolytope) -> tuple[np.ndarray, float]:
    """
    Center and radius of the largest Euclidean ball inside poly.

    Radius 0 means the set has no interior (it is flat or a point).
    """
    norms = np.linalg.norm(poly.A, axis=1)
    A = np.hstack([poly.A, norms[:, None]])
    c = np.zeros(poly.dim + 1)
    c[-1] = 1.0
    A = np.vstack([A, -c])
    b = np.append(poly.b, 0.0)
    res = _solve_max(c, A, b)
    _check_status(res, "chebyshev_ball")
    return np.asarray(res.x[:-1], dtype=float), max(float(res.x[-1]), 0.0)


class Region2D(BaseModel):
    """
    Convex polygon with counterclockwise vertices starting at the
    lexicographically smallest vertex. Two vertices describe a segment, one a
    point, none the empty set.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    coords: tuple[str, str]
    vertices: tuple[tuple[float, float], ...] = ()

    @classmethod
    def empty(cls, coords: Sequence[str]) -> "Region2D":
        return cls(coords=tuple(coords), vertices=())

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    @property
    def is_degenerate(self) -> bool:
        return len(self.vertices) < 3

    @property
    def points(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float).reshape(-1, 2)

    @property
    def area(self) -> float:
        if self.is_degenerate:
            return 0.0
        x, y = self.points.T
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def bounding_box(self) -> tuple[float, float, float, float]:
        if self.is_empty:
            raise InfeasibleError("bounding box of an empty region")
        pts = self.points
        return (
            float(pts[:, 0].min()),
            float(pts[:, 1].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].max()),
        )

    def halfplanes(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit-normal half-planes A x <= b describing the region."""
        pts = self.points
        if self.is_empty:
            raise InfeasibleError("half-planes of an empty region")
        if len(pts) == 1:
            (px, py) = pts[0]
            A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
            return A, np.array([px, -px, py, -py])
        if len(pts) == 2:
            p, q = pts
            d = (q - p) / np.linalg.norm(q - p)
            n = np.array([-d[1], d[0]])
            A = np.array([n, -n, d, -d])
            return A, np.array([n @ p, -(n @ p), d @ q, -(d @ p)])
        edges = np.roll(pts, -1, axis=0) - pts
        normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        return normals, np.einsum("ij,ij->i", normals, pts)

    def to_polytope(self) -> RatePolytope:
        A, b = self.halfplanes()
        return RatePolytope(self.coords, A, b)

    def distance_outside(self, point) -> float:
        """Largest half-plane excess at point (<= 0 inside)."""
        A, b = self.halfplanes()
        return float(np.max(A @ np.asarray(point, dtype=float) - b))

    def contains(self, point, tol: float = GEOM_TOL) -> bool:
        if self.is_empty:
            return False
        return self.distance_outside(point) <= tol

    def swapped(self) -> "Region2D":
        coords = (self.coords[1], self.coords[0])
        if self.is_empty:
            return Region2D.empty(coords)
        return convex_hull(self.points[:, ::-1], coords)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _strict_hull(pts: np.ndarray) -> np.ndarray:
    """Exact monotone chain over lexsorted points; one O(n) pass per chain."""
    seq = pts.tolist()
    if len(seq) < 3:
        return pts

    def chain(items):
        out: list[list[float]] = []
        for p in items:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    lower = chain(seq)
    upper = chain(reversed(seq))
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def convex_hull(points, coords: Sequence[str], tol: float = GEOM_TOL) -> Region2D:
    """
    Monotone-chain convex hull; points closer than tol are merged and
    vertices within tol of the line through their neighbours are dropped.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return Region2D.empty(coords)
    pts = _strict_hull(pts[np.lexsort((pts[:, 1], pts[:, 0]))])
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    # pairwise merge only ever sees hull candidates
    uniq: list[np.ndarray] = []
    for p in pts:
        if not any(np.max(np.abs(p - q)) <= tol for q in uniq):
            uniq.append(p)
    if len(uniq) == 1:
        return Region2D(coords=tuple(coords), vertices=(tuple(float(v) + 0.0 for v in uniq[0]),))

    def chain(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= tol * np.linalg.norm(p - out[-2]):
                out.pop()
            out.append(p)
        return out

    lower = chain(uniq)
    upper = chain(list(reversed(uniq)))
    hull = lower[:-1] + upper[:-1]
    return Region2D(coords=tuple(coords), vertices=tuple((float(x) + 0.0, float(y) + 0.0) for x, y in hull))


def extract_region2d(poly: RatePolytope, tol: float = GEOM_TOL) -> Region2D:
    """
    Vertices of a 2-coordinate polytope: every pairwise intersection of row
    lines that satisfies all rows within tol, ordered counterclockwise.
    """
    if poly.dim != 2:
        raise DomainError(f"extract_region2d needs 2 coordinates, got {poly.coords}")
    if not poly.is_bounded():
        raise UnboundedError(f"region over {poly.coords} is unbounded")
    A, b = poly.A, poly.b
    i, j = np.triu_indices(poly.n_rows, 1)
    det = A[i, 0] * A[j, 1] - A[i, 1] * A[j, 0]
    ok = np.abs(det) > 1e-14
    i, j, det = i[ok], j[ok], det[ok]
    x = (b[i] * A[j, 1] - b[j] * A[i, 1]) / det
    y = (A[i, 0] * b[j] - A[j, 0] * b[i]) / det
    cand = np.column_stack([x, y])
    if len(cand):
        excess = np.max(A @ cand.T - b[:, None], axis=0)
        cand = cand[excess <= tol]
    if len(cand) == 0:
        if is_feasible(poly):
            raise UnboundedError(f"region over {poly.coords} has no vertices")
        raise InfeasibleError(f"region over {poly.coords} is empty")
    return convex_hull(cand, poly.coords, tol)


def intersect2d(r1: Region2D, r2: Region2D, tol: float = GEOM_TOL) -> Region2D:
    """Intersection of two convex regions; the empty region when they are disjoint."""
    if r1.coords != r2.coords:
        raise DomainError(f"cannot intersect regions over {r1.coords} and {r2.coords}")
    if r1.is_empty or r2.is_empty:
        return Region2D.empty(r1.coords)
    A1, b1 = r1.halfplanes()
    A2, b2 = r2.halfplanes()
    poly = RatePolytope(r1.coords, np.vstack([A1, A2]), np.concatenate([b1, b2]))
    try:
        return extract_region2d(poly, tol)
    except InfeasibleError:
        return Region2D.empty(r1.coords)
