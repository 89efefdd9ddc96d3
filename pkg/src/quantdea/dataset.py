"""Observed production data and the transforms applied to it.

A :class:`PointSet` is any finite list of (x, y) vectors sharing dimensions m
and n.  A :class:`Dataset` is a point set whose coordinates are finite and
nonnegative, i.e. genuine observations.  The distance engines accept either,
because the Max-Plus/Min-Plus duality identities evaluate technologies built
on negated, swapped data.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError, NumericalFailure, PreconditionError

__all__ = [
    "Firm",
    "PointSet",
    "Dataset",
    "parse_csv",
    "to_csv",
    "swap_negate",
    "exp_transform",
    "builtin_dataset",
    "load_dataset",
    "PAPER_EXAMPLE",
]


@dataclass(frozen=True)
class Firm:
    id: str
    x: tuple[float, ...]
    y: tuple[float, ...]


def _is_integer_array(a: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(a)) and np.all(a == np.floor(a)))


@dataclass(frozen=True, eq=False)
class PointSet:
    """Rows of ``X`` (l x m) are input vectors, rows of ``Y`` (l x n) outputs."""

    X: np.ndarray
    Y: np.ndarray
    ids: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=float, ndmin=2)
        Y = np.array(self.Y, dtype=float, ndmin=2)
        if X.ndim != 2 or Y.ndim != 2:
            raise DataError("X and Y must be two-dimensional")
        if X.shape[0] != Y.shape[0]:
            raise DataError(f"{X.shape[0]} input rows but {Y.shape[0]} output rows")
        if X.shape[0] == 0:
            raise DataError("a point set needs at least one firm")
        if X.shape[1] == 0 or Y.shape[1] == 0:
            raise DataError("need at least one input and one output")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DataError("coordinates must be finite")
        ids = tuple(str(i) for i in self.ids) if self.ids else tuple(str(k + 1) for k in range(X.shape[0]))
        if len(ids) != X.shape[0]:
            raise DataError(f"{len(ids)} ids for {X.shape[0]} firms")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "ids", ids)

    @property
    def m(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.Y.shape[1]

    @property
    def ell(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.m + self.n

    @property
    def is_integer(self) -> bool:
        """Every coordinate is an integer (sign unrestricted)."""
        return _is_integer_array(self.X) and _is_integer_array(self.Y)

    @property
    def integral(self) -> bool:
        """Every coordinate is a nonnegative integer."""
        return self.is_integer and bool(np.all(self.X >= 0) and np.all(self.Y >= 0))

    @property
    def firms(self) -> list[Firm]:
        return [Firm(i, tuple(x), tuple(y)) for i, x, y in zip(self.ids, self.X.tolist(), self.Y.tolist())]

    def __iter__(self) -> Iterator[Firm]:
        return iter(self.firms)

    def __len__(self) -> int:
        return self.ell

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return (
            type(self) is type(other)
            and self.ids == other.ids
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.Y, other.Y)
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.ids, self.X.tobytes(), self.Y.tobytes()))

    def shifted(self, c: float) -> "PointSet":
        """Translate every coordinate by ``c``."""
        return PointSet(self.X + c, self.Y + c, self.ids)

    def index_of(self, firm: int | str) -> int:
        if isinstance(firm, str):
            try:
                return self.ids.index(firm)
            except ValueError:
                raise PreconditionError(f"unknown firm id {firm!r}") from None
        if not 0 <= firm < self.ell:
            raise PreconditionError(f"firm index {firm} out of range [0, {self.ell})")
        return firm


@dataclass(frozen=True, eq=False)
class Dataset(PointSet):
    """Observed firms: all coordinates finite and nonnegative."""

    def __post_init__(self) -> None:
        super().__post_init__()
        bad = np.argwhere(np.hstack([self.X, self.Y]) < 0)
        if bad.size:
            row = int(bad[0, 0])
            raise DataError(f"firm {self.ids[row]!r} has a negative coordinate")

    @classmethod
    def from_firms(cls, firms: Sequence[Firm]) -> "Dataset":
        if not firms:
            raise DataError("empty firm list")
        return cls(
            np.array([f.x for f in firms], dtype=float),
            np.array([f.y for f in firms], dtype=float),
            tuple(f.id for f in firms),
        )


def parse_csv(text: str | bytes, m: int, n: int) -> Dataset:
    """Read ``id,x1..xm,y1..yn`` rows (header required) into a Dataset."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise DataError(f"input is not UTF-8: {exc}") from exc
    if m < 1 or n < 1:
        raise DataError("need m >= 1 inputs and n >= 1 outputs")
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError("empty file")
    header, body = rows[0], rows[1:]
    if len(header) != 1 + m + n:
        raise DataError(f"row 1: header has {len(header)} columns, expected {1 + m + n} (id + {m} inputs + {n} outputs)")
    if not body:
        raise DataError("no data rows")
    ids, xs, ys = [], [], []
    for lineno, row in enumerate(body, start=2):
        if len(row) != 1 + m + n:
            raise DataError(f"row {lineno}: {len(row)} columns, expected {1 + m + n}")
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError:
            raise DataError(f"row {lineno}: non-numeric value in {row[1:]}") from None
        if any(not math.isfinite(v) for v in vals):
            raise DataError(f"row {lineno}: non-finite value")
        if any(v < 0 for v in vals):
            raise DataError(f"row {lineno}: negative value")
        ids.append(row[0].strip())
        xs.append(vals[:m])
        ys.append(vals[m:])
    if len(set(ids)) != len(ids):
        raise DataError("duplicate firm ids")
    return Dataset(np.array(xs), np.array(ys), tuple(ids))


def _fmt(v: float) -> str:
    return str(int(v)) if v == math.floor(v) and abs(v) < 2**53 else repr(v)


def to_csv(ds: PointSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id"] + [f"x{i + 1}" for i in range(ds.m)] + [f"y{j + 1}" for j in range(ds.n)])
    for f in ds:
        w.writerow([f.id] + [_fmt(v) for v in f.x] + [_fmt(v) for v in f.y])
    return buf.getvalue()


def swap_negate(ds: PointSet) -> PointSet:
    """The swapped data set ``{(-y_k, -x_k)}``: outputs become inputs, negated."""
    return PointSet(-ds.Y, -ds.X, ds.ids)


def exp_transform(ds: PointSet, alpha: float) -> PointSet:
    """Elementwise ``exp(alpha * coordinate)``; all results are positive."""
    a = float(alpha)
    if not math.isfinite(a) or a == 0.0:
        raise PreconditionError("exp_transform needs a finite nonzero alpha")
    with np.errstate(over="ignore"):
        X, Y = np.exp(a * ds.X), np.exp(a * ds.Y)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NumericalFailure(f"exp_transform overflows at alpha={a}")
    if np.any(X == 0) or np.any(Y == 0):
        raise NumericalFailure(f"exp_transform underflows to zero at alpha={a}")
    return PointSet(X, Y, ds.ids)


# Built-in example: 7 firms, two inputs, one output.
PAPER_EXAMPLE = Dataset(
    np.array([[1, 3], [2, 2], [2, 1], [1, 3], [1, 4], [3, 2], [4, 4]], dtype=float),
    np.array([[2], [2], [2], [3], [2], [3], [5]], dtype=float),
    ("1", "2", "3", "4", "5", "6", "7"),
)

_BUILTINS = {"paper-example": PAPER_EXAMPLE}


def builtin_dataset(name: str) -> Dataset:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise DataError(f"unknown built-in dataset {name!r}; known: {sorted(_BUILTINS)}") from None


def load_dataset(source: str, m: int | None = None, n: int | None = None) -> Dataset:
    """Resolve a built-in name or read a CSV file path."""
    if source in _BUILTINS:
        return _BUILTINS[source]
    if m is None or n is None:
        raise DataError("reading a CSV file needs --inputs and --outputs")
    try:
        with open(source, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {source}: {exc}") from exc
    return parse_csv(raw, m, n)
