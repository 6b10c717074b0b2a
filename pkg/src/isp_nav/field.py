"""Image-space potential fields: fixed-size grids of <tau, tau_dot> tuples.

A field is stored as two dense row-major float64 arrays (``tau`` and
``tau_dot``) of shape ``(height, width)``; x indexes columns, y indexes rows,
origin top-left.  Infinities are ordinary IEEE values; NaN is rejected at
every constructor.

Fields are immutable: every operation returns a new field and the backing
arrays are flagged read-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, NamedTuple, Sequence

import numpy as np

INF = math.inf


class FieldError(ValueError):
    pass


def _check_real(value, name):
    value = float(value)
    if math.isnan(value):
        raise FieldError(f"{name} must not be NaN")
    # fold -0.0 into 0.0 so selections are bit-stable
    return value + 0.0


class PotentialTuple(NamedTuple):
    tau: float
    tau_dot: float

    @classmethod
    def make(cls, tau, tau_dot):
        tau = _check_real(tau, "tau")
        tau_dot = _check_real(tau_dot, "tau_dot")
        if tau < 0:
            raise FieldError(f"tau must be >= 0 or +inf, got {tau}")
        return cls(tau, tau_dot)

    def key(self):
        return (self.tau, self.tau_dot)


BACKGROUND = PotentialTuple(INF, INF)


def tuple_min(a: PotentialTuple, b: PotentialTuple) -> PotentialTuple:
    """Smaller tau wins; equal tau falls back to the smaller tau_dot."""
    return b if (b.tau, b.tau_dot) < (a.tau, a.tau_dot) else a


@dataclass(frozen=True)
class RegionOfInterest:
    """Inclusive pixel rectangle. May extend past the image; use ``clip``."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def clip(self, width: int, height: int) -> "RegionOfInterest | None":
        x0, y0 = max(self.x_min, 0), max(self.y_min, 0)
        x1, y1 = min(self.x_max, width - 1), min(self.y_max, height - 1)
        if x0 > x1 or y0 > y1:
            return None
        return RegionOfInterest(x0, y0, x1, y1)

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    @property
    def area(self) -> int:
        return max(self.width, 0) * max(self.height, 0)


def _freeze(arr):
    arr.flags.writeable = False
    return arr


class IspField:
    """Dense ``height x width`` grid of potential tuples."""

    __slots__ = ("_tau", "_tau_dot")

    def __init__(self, tau: np.ndarray, tau_dot: np.ndarray):
        tau = np.asarray(tau, dtype=np.float64)
        tau_dot = np.asarray(tau_dot, dtype=np.float64)
        if tau.ndim != 2 or tau.shape != tau_dot.shape:
            raise FieldError("tau and tau_dot must be 2-D arrays of equal shape")
        if tau.shape[0] < 1 or tau.shape[1] < 1:
            raise FieldError("field dimensions must be >= 1")
        if np.isnan(tau).any() or np.isnan(tau_dot).any():
            raise FieldError("field values must not be NaN")
        if (tau < 0).any():
            raise FieldError("tau must be >= 0 or +inf")
        self._tau = _freeze(tau + 0.0)
        self._tau_dot = _freeze(tau_dot + 0.0)

    @classmethod
    def _wrap(cls, tau, tau_dot):
        # trusted internal path: arrays already validated and exclusively owned
        obj = cls.__new__(cls)
        obj._tau = _freeze(tau)
        obj._tau_dot = _freeze(tau_dot)
        return obj

    @property
    def tau(self) -> np.ndarray:
        return self._tau

    @property
    def tau_dot(self) -> np.ndarray:
        return self._tau_dot

    @property
    def width(self) -> int:
        return self._tau.shape[1]

    @property
    def height(self) -> int:
        return self._tau.shape[0]

    @property
    def shape(self):
        return self._tau.shape

    @property
    def nbytes(self) -> int:
        return self._tau.nbytes + self._tau_dot.nbytes

    def __len__(self):
        return self._tau.size

    def __getitem__(self, xy) -> PotentialTuple:
        x, y = xy
        return PotentialTuple(float(self._tau[y, x]), float(self._tau_dot[y, x]))

    def __eq__(self, other):
        if not isinstance(other, IspField):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self._tau, other._tau)
            and np.array_equal(self._tau_dot, other._tau_dot)
        )

    def __hash__(self):
        return hash((self.shape, self._tau.tobytes(), self._tau_dot.tobytes()))

    def __repr__(self):
        return f"IspField(width={self.width}, height={self.height})"

    def is_background(self) -> bool:
        return bool(np.isposinf(self._tau).all() and np.isposinf(self._tau_dot).all())


def make_field(width: int, height: int) -> IspField:
    if int(width) != width or int(height) != height or width < 1 or height < 1:
        raise FieldError(f"invalid field dimensions {width}x{height}")
    shape = (int(height), int(width))
    return IspField._wrap(np.full(shape, INF), np.full(shape, INF))


def _select_second(t1, d1, t2, d2):
    """Mask of cells where (t2, d2) is lexicographically smaller than (t1, d1)."""
    return (t2 < t1) | ((t2 == t1) & (d2 < d1))


def _compose_into(tau, tau_dot, t2, d2):
    take = _select_second(tau, tau_dot, t2, d2)
    np.copyto(tau, t2, where=take)
    np.copyto(tau_dot, d2, where=take)


def write_roi(field: IspField, roi: RegionOfInterest, value: PotentialTuple) -> IspField:
    """Compose ``value`` into every cell of ``roi``; cells outside are untouched."""
    value = PotentialTuple.make(*value)
    clipped = roi.clip(field.width, field.height)
    if clipped is None:
        return field
    tau = field.tau.copy()
    tau_dot = field.tau_dot.copy()
    sl = (slice(clipped.y_min, clipped.y_max + 1), slice(clipped.x_min, clipped.x_max + 1))
    _compose_into(tau[sl], tau_dot[sl], value.tau, value.tau_dot)
    return IspField._wrap(tau, tau_dot)


def _check_same_shape(fields):
    shapes = {f.shape for f in fields}
    if len(shapes) > 1:
        raise FieldError(f"field dimension mismatch: {sorted(shapes)}")


def compose(f1: IspField, f2: IspField) -> IspField:
    _check_same_shape((f1, f2))
    tau = f1.tau.copy()
    tau_dot = f1.tau_dot.copy()
    _compose_into(tau, tau_dot, f2.tau, f2.tau_dot)
    return IspField._wrap(tau, tau_dot)


def compose_many(fields: Iterable[IspField], width: int | None = None,
                 height: int | None = None) -> IspField:
    """Left fold of :func:`compose`.

    An empty sequence needs ``width`` and ``height`` and yields the background
    field. The fold accumulates into one pair of buffers, so memory does not
    grow with the number of inputs.
    """
    fields = list(fields)
    if not fields:
        if width is None or height is None:
            raise FieldError("compose_many of no fields needs width and height")
        return make_field(width, height)
    _check_same_shape(fields)
    if width is not None and (fields[0].width, fields[0].height) != (width, height):
        raise FieldError("fields do not match the requested dimensions")
    tau = fields[0].tau.copy()
    tau_dot = fields[0].tau_dot.copy()
    for f in fields[1:]:
        _compose_into(tau, tau_dot, f.tau, f.tau_dot)
    return IspField._wrap(tau, tau_dot)


def _lexmin(tau: np.ndarray, tau_dot: np.ndarray) -> PotentialTuple:
    t = tau.min()
    d = tau_dot[tau == t].min()
    return PotentialTuple(float(t), float(d))


def min_over_window(field: IspField, x_lo: int, x_hi: int, y_lo: int, y_hi: int) -> PotentialTuple:
    """Min-tau tuple over the inclusive window, clipped to the field."""
    roi = RegionOfInterest(x_lo, y_lo, x_hi, y_hi).clip(field.width, field.height)
    if roi is None:
        raise FieldError(f"window [{x_lo},{x_hi}]x[{y_lo},{y_hi}] is empty after clipping")
    sl = (slice(roi.y_min, roi.y_max + 1), slice(roi.x_min, roi.x_max + 1))
    return _lexmin(field.tau[sl], field.tau_dot[sl])


def field_min(field: IspField) -> PotentialTuple:
    return _lexmin(field.tau, field.tau_dot)


# -- text dump ---------------------------------------------------------------

def _fmt(v: float) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return f"{v:.6g}"


def dumps(field: IspField) -> str:
    lines = [f"{field.width} {field.height}"]
    for y in range(field.height):
        lines.append(" ".join(
            f"{_fmt(t)}:{_fmt(d)}"
            for t, d in zip(field.tau[y].tolist(), field.tau_dot[y].tolist())
        ))
    return "\n".join(lines) + "\n"


def loads(text: str) -> IspField:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FieldError("empty field dump")
    try:
        width, height = (int(v) for v in lines[0].split())
    except ValueError:
        raise FieldError(f"line 1: expected 'width height', got {lines[0]!r}") from None
    if len(lines) - 1 != height:
        raise FieldError(f"expected {height} rows, found {len(lines) - 1}")
    tau = np.empty((height, width))
    tau_dot = np.empty((height, width))
    for y, line in enumerate(lines[1:]):
        entries = line.split()
        if len(entries) != width:
            raise FieldError(f"line {y + 2}: expected {width} entries, found {len(entries)}")
        for x, entry in enumerate(entries):
            try:
                t, d = entry.split(":")
                tau[y, x], tau_dot[y, x] = float(t), float(d)
            except ValueError:
                raise FieldError(f"line {y + 2}: bad entry {entry!r}") from None
    return IspField(tau, tau_dot)


def save(field: IspField, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps(field))


def load(path) -> IspField:
    with open(path, encoding="ascii") as fh:
        return loads(fh.read())


def from_tuples(rows: Sequence[Sequence[PotentialTuple]]) -> IspField:
    tau = np.array([[c[0] for c in row] for row in rows], dtype=np.float64)
    tau_dot = np.array([[c[1] for c in row] for row in rows], dtype=np.float64)
    return IspField(tau, tau_dot)


def fold_cells(field: IspField) -> PotentialTuple:
    """Reference fold of :func:`tuple_min` over every cell, one at a time."""
    cells = (PotentialTuple(t, d) for t, d in
             zip(field.tau.ravel().tolist(), field.tau_dot.ravel().tolist()))
    return reduce(tuple_min, cells, BACKGROUND)
