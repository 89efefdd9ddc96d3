"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure,
4 oracle battery reported a failing check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import hulls, reproduce
from .dataset import load_dataset
from .distance import Orientation, TropicalVariant, audit_benchmark, distance_quantized_lp, distance_tropical, report_csv, report_json, score_all
from .duality import duality_check
from .errors import DataError, NumericalFailure, PreconditionError
from .kp_algebra import Alpha
from .oracle import reports_json, verify_suite
from .technology import Returns, TechSpec

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL, EXIT_ORACLE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _alphas(text: str) -> list[Alpha]:
    try:
        return [Alpha.parse(t) for t in text.split(",") if t.strip()]
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None


def _target(text: str) -> int:
    t = text.strip().lower()
    if t in ("+inf", "inf"):
        return 1
    if t == "-inf":
        return -1
    raise UsageError(f"--target must be +inf or -inf, got {text!r}")


def _checked_alphas(args) -> tuple[list[Alpha], int]:
    if args.alphas is None:
        raise UsageError("--alphas is required")
    als = _alphas(args.alphas)
    sign = _target(args.target)
    if len(als) < 2:
        raise UsageError("--alphas needs at least two values")
    for a in als:
        if not a.is_finite or a.sign != sign:
            raise UsageError(f"alpha {a} is not a finite value on the side of target {args.target}")
    return als, sign


def _fmt(v: float, digits: int | None) -> str:
    if not math.isfinite(v):
        return "+inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return f"{round(v, digits):.{digits}f}" if digits is not None else format(v, ".17g")


def _jnum(v: float):
    return v if math.isfinite(v) else ("+inf" if v > 0 else "-inf")


def _add_common(p: argparse.ArgumentParser, data: bool = True) -> None:
    if data:
        p.add_argument("--data", default="paper-example", help="CSV path or 'paper-example'")
        p.add_argument("--inputs", type=int, help="number of input columns in the CSV")
        p.add_argument("--outputs", type=int, help="number of output columns in the CSV")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--round", type=int, dest="digits", help="round CSV numbers to this many decimals")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="quantdea", description="Efficiency scores under quantized, tropical, convex and FDH technologies.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("score", help="score every firm under one technology")
    _add_common(p)
    p.add_argument("--tech", required=True, help="convex-vrs|convex-crs|fdh|quant-vrs:A|quant-crs:A, optional :discrete")
    p.add_argument("--orientation", choices=("in", "out"), default="out")

    p = sub.add_parser("sweep", help="quantized scores over several alphas beside the tropical limit")
    _add_common(p)
    p.add_argument("--alphas", help="comma-separated finite alphas, all of the target's sign")
    p.add_argument("--target", default="+inf")
    p.add_argument("--returns", choices=("crs", "vrs"), default="crs")
    p.add_argument("--orientation", choices=("in", "out"), default="out")

    p = sub.add_parser("hulls", help="sampled Hausdorff gap to the tropical hull (CSV)")
    _add_common(p, data=False)
    p.add_argument("--points", help="CSV of planar generators (default: built-in 5-point set)")
    p.add_argument("--alphas", default="1,2,5,10,50")
    p.add_argument("--target", default="+inf")
    p.add_argument("--samples", type=int, default=500)
    p.set_defaults(format="csv")

    p = sub.add_parser("duality", help="weak and strong duality report (JSON)")
    _add_common(p)
    p.add_argument("--tech", required=True, help="quant-vrs:A or quant-crs:A with finite A")
    p.add_argument("--orientation", choices=("in", "out"), default="in")
    p.add_argument("--firm", help="firm id (default: every firm)")
    p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("reproduce", help="recompute the built-in example table and compare")
    _add_common(p, data=False)
    p.add_argument("--text", action="store_true", help="human-readable output")

    p = sub.add_parser("oracle-verify", help="run the independent oracle battery")
    _add_common(p, data=False)
    return ap


# --- commands ---------------------------------------------------------------------------------


def _dataset(args):
    return load_dataset(args.data, args.inputs, args.outputs)


def cmd_score(args) -> str:
    ds = _dataset(args)
    tech = TechSpec.parse(args.tech)
    recs = score_all(ds, tech, args.orientation)
    bad = [r.firm_id for r in recs if not audit_benchmark(r, ds)]
    if bad:
        raise NumericalFailure(f"benchmark audit failed for firms {bad}")
    if args.format == "csv":
        return report_csv(recs, args.digits)
    return report_json(recs, args.data, tech, Orientation.parse(args.orientation))


def cmd_sweep(args) -> str:
    als, sign = _checked_alphas(args)
    ds = _dataset(args)
    returns, o = Returns(args.returns), Orientation.parse(args.orientation)
    variant = TropicalVariant.of(sign, returns)
    rows = []
    for k in range(ds.ell):
        limit = distance_tropical(ds, k, variant, o).delta
        for a in als:
            d = distance_quantized_lp(ds, k, a, returns, o).delta
            gap = abs(d - limit) if math.isfinite(d) and math.isfinite(limit) else (0.0 if d == limit else math.inf)
            rows.append((ds.ids[k], a.value, d, limit, gap))
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["firm", "alpha", "delta", "limit", "gap"])
        for fid, a, d, lim, g in rows:
            w.writerow([fid, format(a, ".17g"), _fmt(d, args.digits), _fmt(lim, args.digits), _fmt(g, args.digits)])
        return buf.getvalue()
    doc = {
        "dataset": args.data,
        "returns": returns.value,
        "orientation": o.value,
        "target": "+inf" if sign > 0 else "-inf",
        "rows": [{"firm": f, "alpha": a, "delta": _jnum(d), "limit": _jnum(lim), "gap": _jnum(g)} for f, a, d, lim, g in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def _read_points(path: str) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    try:
        pts = [[float(v) for v in r] for r in rows]
    except ValueError:
        pts = None
    if pts is None:  # header row
        try:
            pts = [[float(v) for v in r] for r in rows[1:]]
        except ValueError as exc:
            raise DataError(f"{path}: non-numeric entry ({exc})") from None
    if not pts or len({len(r) for r in pts}) != 1:
        raise DataError(f"{path}: need a nonempty rectangular table of coordinates")
    P = np.array(pts)
    if not np.all(np.isfinite(P)):
        raise DataError(f"{path}: coordinates must be finite")
    return P


def cmd_hulls(args) -> str:
    als, sign = _checked_alphas(args)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    P = hulls.LIMIT_EXAMPLE if args.points is None else _read_points(args.points)
    gaps = hulls.limit_gap(P, [a.value for a in als], sign, args.samples, args.seed)
    if args.format == "json":
        return json.dumps({"target": args.target, "samples": args.samples, "seed": args.seed, "gaps": [{"alpha": a, "gap": g} for a, g in gaps]}, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "gap"])
    for a, g in gaps:
        w.writerow([format(a, ".17g"), _fmt(g, args.digits)])
    return buf.getvalue()


def cmd_duality(args) -> str:
    ds = _dataset(args)
    tech = TechSpec.parse(args.tech)
    if not tech.is_quantized or not tech.alpha.is_finite:
        raise UsageError("duality needs quant-vrs:A or quant-crs:A with a finite alpha")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    firms = [args.firm] if args.firm is not None else list(ds.ids)
    cache: dict = {}
    try:
        reps = [duality_check(ds, f, tech, args.orientation, args.trials, args.seed, cache) for f in firms]
    except KeyError as exc:
        raise DataError(f"unknown firm {exc}") from None
    return json.dumps([r.to_dict() for r in reps], indent=2) + "\n"


def cmd_reproduce(args) -> str:
    ds = reproduce.PAPER_EXAMPLE
    cols = reproduce.reproduce(ds)
    if args.text:
        return reproduce.format_text(cols, ds.ids)
    if args.format == "csv":
        return reproduce.format_csv(cols, ds.ids)
    return reproduce.format_json(cols, ds.ids)


_COMMANDS = {
    "score": cmd_score,
    "sweep": cmd_sweep,
    "hulls": cmd_hulls,
    "duality": cmd_duality,
    "reproduce": cmd_reproduce,
}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)


_SIGNED_VALUE_FLAGS = ("--alphas", "--target")


def _attach_signed_values(argv: list[str]) -> list[str]:
    """Turn ``--target -inf`` into ``--target=-inf`` so argparse does not read ``-inf`` as a flag."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _SIGNED_VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    argv = _attach_signed_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = ap.parse_args(argv)
        if args.command is None:
            raise UsageError(ap.format_usage() + "quantdea: error: a subcommand is required")
        if args.command == "oracle-verify":
            reps = verify_suite(args.seed)
            _emit(reports_json(reps), args.out)
            failed = [r for r in reps if not r.passed]
            print(f"oracle-verify: {len(reps) - len(failed)}/{len(reps)} checks passed", file=sys.stderr)
            return EXIT_OK if not failed else EXIT_ORACLE
        _emit(_COMMANDS[args.command](args), args.out)
        return EXIT_OK
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"quantdea: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"quantdea: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalFailure as exc:
        print(f"quantdea: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
