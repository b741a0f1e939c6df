"""
Desk-scale acceptance runs. Not collected by default (testpaths is
tests/unit); run with ``pytest tests/functional``.
"""

import json
import logging

import numpy as np
import pytest
from typer.testing import CliRunner

from hkgic.cli import app
from hkgic.lib.hkregion import build_instance
from hkgic.lib.hkregion import no_interference_rectangle
from hkgic.lib.hkregion import project_r1r2
from hkgic.lib.hkregion import region_union
from hkgic.lib.macgeom import Verdict
from hkgic.lib.macgeom import recheck_claim
from hkgic.lib.macgeom import verify_grid
from hkgic.lib.models import PowerSplit
from hkgic.lib.polytope import convex_hull
from tests.factories import make_channel
from tests.factories import random_instance

logger = logging.getLogger(__name__)

STEP = 0.005


def grid_tops(inst, step: float = STEP) -> np.ndarray:
    """
    Brute-force shadow of the HK polytope on a rate grid.

    ru1, ru2 and rv1 run over multiples of step; rv2 is pushed to its largest
    feasible value. Entry i is the highest r2 cell reachable with
    r1 = i * step (-1 when none); the shadow is downward closed, so that
    column top describes it completely.
    """
    poly = inst.polytope
    k = poly.index("rv2")
    A, b = poly.A, poly.b
    rest = np.delete(A, k, axis=1)
    lifts = A[:, k] > 0
    free = A[:, k] == 0
    axes = [np.arange(0.0, inst.bounds.bound(i) + step / 2, step) for i in (1, 4, 5)]
    ru2_idx, rv1_idx = np.meshgrid(np.arange(len(axes[1])), np.arange(len(axes[2])), indexing="ij")
    ru2_idx, rv1_idx = ru2_idx.ravel(), rv1_idx.ravel()
    top = np.full(len(axes[0]) + len(axes[2]), -1)
    for i, ru1 in enumerate(axes[0]):
        pts = np.column_stack([np.full(ru2_idx.size, ru1), axes[1][ru2_idx], axes[2][rv1_idx]])
        lhs = pts @ rest.T
        room = np.min((b[lifts] - lhs[:, lifts]) / A[lifts, k], axis=1)
        ok = np.all(lhs[:, free] <= b[free] + 1e-12, axis=1) & (room >= -1e-12)
        reach = ru2_idx + np.floor(np.maximum(room, 0.0) / step + 1e-9).astype(int)
        np.maximum.at(top, i + rv1_idx[ok], reach[ok])
    return top


@pytest.mark.parametrize("seed", range(20))
def test_projection_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 0.1, 2.0)
    region = project_r1r2(inst)
    top = grid_tops(inst)
    x0, y0, x1, y1 = region.bounding_box()
    misses = 0
    for i in range(int(x1 / STEP) + 3):
        for j in range(int(y1 / STEP) + 3):
            point = (i * STEP, j * STEP)
            dist = region.distance_outside(point)
            if abs(dist) <= 0.01:
                continue
            reached = i < len(top) and j <= top[i]
            misses += (dist < 0) != reached
    assert misses == 0


def test_containment_chain():
    for ch in (make_channel(), make_channel(p1=10.0, p2=2.0, a=0.6, b=1.5, n2=0.5)):
        coarse = region_union(ch, 11)
        fine = region_union(ch, 51)
        rect = no_interference_rectangle(ch)
        for v in coarse.vertices:
            assert fine.contains(v, 1e-9)
        for v in fine.vertices:
            assert rect.contains(v, 1e-9)


def test_claim_checker_integrity():
    ch = make_channel(p1=6.0, p2=6.0, a=0.25, b=0.25, n1=1.0, n2=1.0)
    results = verify_grid(ch, 21)
    mirrored = {(s.lam1, s.lam2): s for s in verify_grid(ch.swapped(), 21)}
    for s in results:
        inst = build_instance(ch, PowerSplit.from_fractions(ch, s.lam1, s.lam2))
        other = mirrored[(s.lam2, s.lam1)]
        for report, mirror in zip(s.reports, other.reports):
            assert report.verdict == mirror.verdict
            if report.verdict == Verdict.FAILS:
                assert recheck_claim(inst, report) > 5e-7


def test_cli_grid_containment(tmp_path, monkeypatch):
    monkeypatch.setenv("HKGIC_GRID_WORKERS", "0")
    runner = CliRunner()
    args = ["region", "--p1", "6", "--p2", "6", "--a", "0.25", "--b", "0.25", "--n1", "1", "--n2", "1", "--format", "json"]
    for k in (11, 101):
        result = runner.invoke(app, [*args, "--grid", str(k), "--out", str(tmp_path / f"r{k}.json")])
        assert result.exit_code == 0, result.output

    hulls = {}
    for k in (11, 101):
        doc = json.loads((tmp_path / f"r{k}.json").read_text())
        points = [(v["r1"], v["r2"]) for v in doc["vertices"] if v["kind"] == "hull"]
        hulls[k] = convex_hull(points, ("r1", "r2"))
    for v in hulls[11].vertices:
        assert hulls[101].contains(v, 1e-9)
