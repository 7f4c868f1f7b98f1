"""Point sets, sampling windows, metrics and CSV input/output."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class EmptyDatasetError(ValueError):
    def __init__(self):
        super().__init__("empty dataset")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered set of points in R^d with optional ground-truth labels.

    Label -1 marks background noise. Arrays are read-only after construction.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if pts.size else pts.reshape(0, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must be an (N, d) array with d >= 1")
        object.__setattr__(self, "points", _frozen(pts.copy()))
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (pts.shape[0],):
                raise ValueError("labels must have one entry per point")
            object.__setattr__(self, "labels", _frozen(lab.copy()))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        if self.points.shape != other.points.shape:
            return False
        if not np.array_equal(self.points, other.points):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)

    __hash__ = None

    def subset(self, indices) -> "PointSet":
        idx = np.asarray(indices, dtype=np.int64)
        lab = None if self.labels is None else self.labels[idx]
        return PointSet(self.points[idx], lab)


@dataclass(frozen=True, eq=False)
class Window:
    """Axis-aligned box [lo, hi] used as the background sampling region."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=np.float64))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be vectors of the same length")
        if np.any(lo > hi):
            raise ValueError("window needs lo <= hi on every axis")
        object.__setattr__(self, "lo", _frozen(lo.copy()))
        object.__setattr__(self, "hi", _frozen(hi.copy()))

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return np.all((p >= self.lo) & (p <= self.hi), axis=-1)

    def __eq__(self, other):
        if not isinstance(other, Window):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    __hash__ = None

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Window":
        return cls(d["lo"], d["hi"])

    @classmethod
    def unit(cls, dim: int = 2) -> "Window":
        return cls(np.zeros(dim), np.ones(dim))


@dataclass(frozen=True)
class Metric:
    """A distance function. ``distances(x, Y)`` maps a point and an (M, d)
    array to the M distances. The Euclidean metric has a compiled fast path."""

    name: str = "euclidean"
    distances: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )

    @property
    def is_euclidean(self) -> bool:
        return self.name == "euclidean" and self.distances is None

    def to_many(self, x: np.ndarray, Y: np.ndarray) -> np.ndarray:
        if self.distances is None:
            if self.name != "euclidean":
                raise ValueError(f"metric {self.name!r} has no distance function")
            return np.sqrt(((Y - x) ** 2).sum(axis=1))
        return np.asarray(self.distances(x, Y), dtype=np.float64)

    def __call__(self, x, y) -> float:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).reshape(1, -1)
        return float(self.to_many(x, y)[0])


EUCLIDEAN = Metric()


def bounding_window(ps: PointSet) -> Window:
    if ps.n == 0:
        raise EmptyDatasetError()
    return Window(ps.points.min(axis=0), ps.points.max(axis=0))


def generate_uniform(n: int, w: Window, seed: int) -> PointSet:
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    return PointSet(uniform_in(rng, n, w))


def uniform_in(rng: np.random.Generator, n: int, w: Window) -> np.ndarray:
    """n uniform points in w drawn from rng (degenerate axes are constant)."""
    u = rng.random((n, w.dim))
    return w.lo + u * (w.hi - w.lo)


class CsvParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def _parse_rows(lines, path_label: str, labels_column: bool):
    rows = []
    labels = []
    width = None
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if not row or all(not f.strip() for f in row):
            continue
        if width is None:
            width = len(row)
            if labels_column and width < 2:
                raise CsvParseError(lineno, "expected coordinates and a label")
        elif len(row) != width:
            raise CsvParseError(lineno, f"expected {width} fields, got {len(row)}")
        try:
            vals = [float(f) for f in (row[:-1] if labels_column else row)]
        except ValueError:
            raise CsvParseError(lineno, "non-numeric field") from None
        if not all(np.isfinite(vals)):
            raise CsvParseError(lineno, "non-finite coordinate")
        if labels_column:
            try:
                labels.append(int(row[-1]))
            except ValueError:
                raise CsvParseError(lineno, "non-integer label") from None
        rows.append(vals)
    return rows, labels, width


def load_csv(path, labels_column: bool = False) -> PointSet:
    """Read one point per line. With labels_column the last field is an
    integer label."""
    with open(path, newline="") as fh:
        rows, labels, width = _parse_rows(fh, str(path), labels_column)
    if not rows:
        return PointSet(np.zeros((0, 1)))
    pts = np.array(rows, dtype=np.float64)
    return PointSet(pts, np.array(labels) if labels_column else None)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_csv(path, ps: PointSet) -> None:
    with open(path, "w", newline="") as fh:
        for p in ps.points:
            fh.write(",".join(_fmt(v) for v in p) + "\n")


def save_labels(path, ps: PointSet, labels: Sequence[int]) -> None:
    lab = np.asarray(labels, dtype=np.int64)
    if lab.shape != (ps.n,):
        raise ValueError("one label per point required")
    with open(path, "w", newline="") as fh:
        for p, l in zip(ps.points, lab):
            fh.write(",".join(_fmt(v) for v in p) + f",{int(l)}\n")
