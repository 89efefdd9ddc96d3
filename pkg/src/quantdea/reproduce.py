"""Recompute the published efficiency table for the built-in example and
compare cell by cell.

The published values are stored as printed.  Comparison statuses:

* ``MATCH``     computed value within 1e-3 of the published cell;
* ``MISMATCH``  the column has an unambiguous definition and the values differ;
* ``UNMAPPED``  the values differ, but the definition behind the published
  column is not stated precisely enough to call it an error;
* ``-``         no published counterpart.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

from .dataset import PAPER_EXAMPLE, PointSet
from .distance import Orientation, TropicalVariant, distance_convex, distance_fdh, distance_quantized_lp, distance_tropical
from .technology import Returns

__all__ = ["PUBLISHED_COLUMNS", "PUBLISHED", "ReproColumn", "reproduce", "format_text", "format_json", "format_csv"]

MATCH_TOL = 1e-3

# Efficiency scores published for the 7-firm example, firms 1..7 per column.
PUBLISHED_COLUMNS = ("-inf", "-2", "-1", "-1/2", "FDH", "Convex", "1/2", "1", "2", "+inf")
PUBLISHED = {
    "-inf": (1, 2, 1, 0, 1, 1, 0),
    "-2": (0.9729, 1.6836, 0.9729, 0, 0.9729, 0.9729, 0),
    "-1": (0.9932, 1.5475, 0.9932, 0, 1.0986, 0.9932, 0),
    "-1/2": (1, 1.4445, 1, 0, 1, 1, 0),
    "FDH": (1, 0, 0, 0, 1, 0, 0),
    "Convex": (1, 0.8889, 0, 0, 1, 0.5, 0),
    "1/2": (1, 1.2282, 1, 0, 1, 1, 0),
    "1": (1, 1.14383, 1, 0, 1, 1, 0),
    "2": (0.9830, 1, 1.0012, 0, 1, 1.0012, 0),
    "+inf": (1, 1, 1, 0, 1, 1, 0),
}


@dataclass
class ReproColumn:
    name: str
    values: list[float]
    reference: str | None
    strict: bool
    statuses: list[str]

    @property
    def matches(self) -> int:
        return self.statuses.count("MATCH")


def _status(value: float, ref: float | None, strict: bool) -> str:
    if ref is None:
        return "-"
    if math.isfinite(value) and abs(value - ref) <= MATCH_TOL:
        return "MATCH"
    return "MISMATCH" if strict else "UNMAPPED"


def _column(name: str, values: list[float], reference: str | None, strict: bool) -> ReproColumn:
    ref = PUBLISHED.get(reference) if reference else None
    st = [_status(v, None if ref is None else ref[i], strict) for i, v in enumerate(values)]
    return ReproColumn(name, values, reference, strict, st)


def reproduce(ds: PointSet = PAPER_EXAMPLE) -> list[ReproColumn]:
    """All computable columns for the example, each paired with its published column if any."""
    ks = range(ds.ell)
    cols: list[ReproColumn] = []
    O = Orientation
    cols.append(_column("fdh-out", [distance_fdh(ds, k, O.OUT).delta for k in ks], "FDH", True))
    cols.append(_column("fdh-in", [distance_fdh(ds, k, O.IN).delta for k in ks], None, True))
    cols.append(_column("convex-vrs-out", [distance_convex(ds, k, Returns.VRS, O.OUT).delta for k in ks], "Convex", False))
    cols.append(_column("convex-vrs-in", [distance_convex(ds, k, Returns.VRS, O.IN).delta for k in ks], None, False))
    for v, ref in (
        (TropicalVariant.MAXPLUS_CRS, "+inf"),
        (TropicalVariant.MINPLUS_CRS, "-inf"),
        (TropicalVariant.MAXPLUS_VRS, None),
        (TropicalVariant.MINPLUS_VRS, None),
    ):
        for o in O:
            # the CRS forms coincide for both orientations; compare the output one
            r = ref if (o is O.OUT) else None
            cols.append(_column(f"{v.value}-{o.value}", [distance_tropical(ds, k, v, o).delta for k in ks], r, True))
    for label, a in (("-2", -2.0), ("-1", -1.0), ("-1/2", -0.5), ("1/2", 0.5), ("1", 1.0), ("2", 2.0)):
        cols.append(
            _column(
                f"quant-crs:{label}",
                [distance_quantized_lp(ds, k, a, Returns.CRS, O.OUT).delta for k in ks],
                label,
                False,
            )
        )
        for o in O:
            cols.append(
                _column(
                    f"quant-vrs:{label}-{o.value}",
                    [distance_quantized_lp(ds, k, a, Returns.VRS, o).delta for k in ks],
                    label,
                    False,
                )
            )
    return cols


def _cell(v: float) -> str:
    return f"{v:.4f}" if math.isfinite(v) else str(v)


def format_text(cols: list[ReproColumn], ids: tuple[str, ...]) -> str:
    lines = ["Published example: recomputed scores against the printed table", ""]
    for c in cols:
        ref = f" vs published column {c.reference}" if c.reference else " (no published column)"
        lines.append(f"{c.name}{ref}")
        for i, fid in enumerate(ids):
            pub = "" if c.reference is None else f"  published {PUBLISHED[c.reference][i]:<8}"
            lines.append(f"  firm {fid}: {_cell(c.values[i]):>9}{pub}  {c.statuses[i]}")
        if c.reference:
            lines.append(f"  {c.matches}/{len(ids)} MATCH")
        lines.append("")
    return "\n".join(lines)


def format_json(cols: list[ReproColumn], ids: tuple[str, ...]) -> str:
    doc = {
        "match_tolerance": MATCH_TOL,
        "columns": [
            {
                "name": c.name,
                "published_column": c.reference,
                "cells": [
                    {
                        "firm": fid,
                        "computed": c.values[i],
                        "published": None if c.reference is None else PUBLISHED[c.reference][i],
                        "status": c.statuses[i],
                    }
                    for i, fid in enumerate(ids)
                ],
            }
            for c in cols
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def format_csv(cols: list[ReproColumn], ids: tuple[str, ...]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["column", "published_column", "firm", "computed", "published", "status"])
    for c in cols:
        for i, fid in enumerate(ids):
            pub = "" if c.reference is None else PUBLISHED[c.reference][i]
            w.writerow([c.name, c.reference or "", fid, format(c.values[i], ".17g"), pub, c.statuses[i]])
    return buf.getvalue()
