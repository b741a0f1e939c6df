"""
Tables and report files for the command-line front end.

Every command produces a pandas DataFrame. CSV output is the frame with a
header row and ``%.12g`` floats; JSON output wraps the same records with the
config echo and a meta block. Both are byte-identical for identical inputs.
"""

import json
import math
from collections.abc import Iterable
from pathlib import Path

import pandas as pd

import hkgic

from .config import RunConfig
from .config import get_settings
from .hkregion import BoundaryTrace
from .hkregion import RegionSweep
from .macgeom import MacProjections
from .macgeom import SplitClaims
from .miterms import RATE_COORDS

REGION_COLUMNS = ["kind", "member", "lam1", "lam2", "vertex", "r1", "r2"]
BOUNDARY_COLUMNS = ["mu", "lam1", "lam2", "r1", "r2", "objective"]
CLAIM_COLUMNS = ["lam1", "lam2", "claim_id", "verdict", "violation", "tolerance", "witness"]
MAC_COLUMNS = ["label", "kind", "name", *RATE_COORDS, "bound"]


def round_sig(value, digits: int | None = None):
    """
    Round every float in a nested structure to ``digits`` significant digits.

    NaN becomes None and infinities become the strings "inf" / "-inf".
    """
    if digits is None:
        digits = get_settings().significant_digits
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(f"{value:.{digits}g}") + 0.0
    if isinstance(value, int):
        return value
    if isinstance(value, dict):
        return {k: round_sig(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v, digits) for v in value]
    if hasattr(value, "item"):
        # numpy scalar
        return round_sig(value.item(), digits)
    return value


def region_frame(sweep: RegionSweep) -> pd.DataFrame:
    """raw-union member vertices followed by the hull vertices"""
    rows = []
    for member, ((lam1, lam2), region) in enumerate(zip(sweep.points, sweep.regions)):
        for k, (r1, r2) in enumerate(region.vertices):
            rows.append(("raw", member, lam1, lam2, k, r1, r2))
    for k, (r1, r2) in enumerate(sweep.hull.vertices):
        rows.append(("hull", -1, math.nan, math.nan, k, r1, r2))
    return pd.DataFrame(rows, columns=REGION_COLUMNS)


def boundary_frame(trace: BoundaryTrace) -> pd.DataFrame:
    rows = [
        (e.mu, e.lam1, e.lam2, e.rate_pair.r1, e.rate_pair.r2, e.objective_value)
        for e in trace.entries
    ]
    return pd.DataFrame(rows, columns=BOUNDARY_COLUMNS)


def witness_text(witness: dict, digits: int | None = None) -> str:
    return json.dumps(round_sig(witness, digits), sort_keys=True, separators=(",", ":"))


def claims_frame(results: Iterable[SplitClaims], digits: int | None = None) -> pd.DataFrame:
    rows = [
        (
            s.lam1,
            s.lam2,
            r.claim_id.value,
            r.verdict.value,
            r.violation,
            r.tolerance,
            witness_text(r.witness, digits),
        )
        for s in results
        for r in s.reports
    ]
    return pd.DataFrame(rows, columns=CLAIM_COLUMNS)


def mac_frame(macs: MacProjections) -> pd.DataFrame:
    """
    MAC1 and MAC2 as half-space rows over (ru1, ru2, rv1, rv2), mac1 and mac2
    as polygon vertices over (rv1, rv2).
    """
    rows = []
    for proj in (macs.MAC1, macs.MAC2):
        poly = proj.polytope
        for label, coeffs, bound in zip(poly.labels, poly.A, poly.b):
            rec = dict.fromkeys(RATE_COORDS, math.nan)
            rec.update(zip(poly.coords, map(float, coeffs)))
            rows.append((proj.label.value, "row", label, *(rec[c] for c in RATE_COORDS), float(bound)))
    for proj in (macs.mac1, macs.mac2):
        for k, (rv1, rv2) in enumerate(proj.region.vertices):
            rows.append((proj.label.value, "vertex", str(k), math.nan, math.nan, rv1, rv2, math.nan))
    return pd.DataFrame(rows, columns=MAC_COLUMNS)


def _records(frame: pd.DataFrame) -> list[dict]:
    return [dict(zip(frame.columns, row)) for row in frame.itertuples(index=False, name=None)]


def render_csv(frame: pd.DataFrame, summary: dict | None = None, digits: int | None = None) -> str:
    if digits is None:
        digits = get_settings().significant_digits
    floats = frame.select_dtypes("float").columns
    # -0.0 would print as "-0"
    frame = frame.assign(**{c: frame[c] + 0.0 for c in floats})
    text = frame.to_csv(index=False, float_format=f"%.{digits}g", lineterminator="\n")
    if summary is not None:
        text += "# summary: " + " ".join(f"{k}={v}" for k, v in summary.items()) + "\n"
    return text


def render_json(
    frame: pd.DataFrame,
    config: RunConfig,
    key: str,
    summary: dict | None = None,
    digits: int | None = None,
) -> str:
    meta: dict = {
        "tool_version": hkgic.__version__,
        "tolerances": {"tol_geom": config.tol_geom, "tol_claim": config.tol_claim},
    }
    if summary is not None:
        meta["summary"] = summary
    doc = {
        "config_echo": config.echo(),
        key: _records(frame),
        "meta": meta,
    }
    return json.dumps(round_sig(doc, digits), indent=2) + "\n"


def render(
    frame: pd.DataFrame,
    config: RunConfig,
    key: str,
    summary: dict | None = None,
) -> str:
    if config.format.value == "json":
        return render_json(frame, config, key, summary)
    return render_csv(frame, summary)


def write_output(text: str, out: Path | None) -> None:
    """Write to ``out``; stdout when no path is given."""
    if out is None:
        print(text, end="")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
