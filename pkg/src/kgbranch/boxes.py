"""Finite unions of closed boxes in R or R^2, compared up to Lebesgue-null sets.

All Boolean operations go through a common grid: the sorted endpoints of
every box in every coordinate cut space into cells, a cell either lies in a
box or meets it in a null set, and the result is re-assembled into a
canonical list of maximal strips.  Canonical form makes a.e. equality a
plain comparison.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

from .scalars import Real, as_fraction, fmt, normalize, rcmp

__all__ = ["Box", "BoxSet", "BoxError", "make_box", "box_intersect", "box_is_null", "fmt_box"]


class BoxError(ValueError):
    pass


Box = tuple[tuple[Real, Real], ...]

_key = cmp_to_key(rcmp)


def make_box(*intervals: Sequence) -> Box:
    out = []
    for lo, hi in intervals:
        lo, hi = normalize(lo), normalize(hi)
        if rcmp(lo, hi) >= 0:
            raise BoxError(f"degenerate interval [{fmt(lo)}, {fmt(hi)}]")
        out.append((lo, hi))
    return tuple(out)


def box_intersect(a: Box, b: Box):
    """The intersection box, or None when it is null."""
    out = []
    for (a0, a1), (b0, b1) in zip(a, b):
        lo = a0 if rcmp(a0, b0) >= 0 else b0
        hi = a1 if rcmp(a1, b1) <= 0 else b1
        if rcmp(lo, hi) >= 0:
            return None
        out.append((lo, hi))
    return tuple(out)


def box_is_null(b: Box) -> bool:
    return any(rcmp(lo, hi) >= 0 for lo, hi in b)


def box_inside(a: Box, b: Box) -> bool:
    return all(rcmp(b0, a0) <= 0 and rcmp(a1, b1) <= 0 for (a0, a1), (b0, b1) in zip(a, b))


def fmt_box(b: Box) -> str:
    return " x ".join(f"[{fmt(lo)},{fmt(hi)}]" for lo, hi in b)


class BoxSet:
    """A finite union of boxes of a fixed dimension, stored in canonical form."""

    __slots__ = ("dim", "boxes")

    def __init__(self, dim: int, boxes: Iterable[Box] = (), *, _canonical: bool = False):
        if dim not in (1, 2):
            raise BoxError("only dimensions 1 and 2 are supported")
        self.dim = dim
        boxes = [tuple((normalize(lo), normalize(hi)) for lo, hi in b) for b in boxes]
        for b in boxes:
            if len(b) != dim:
                raise BoxError(f"box {fmt_box(b)} does not have dimension {dim}")
        boxes = [b for b in boxes if not box_is_null(b)]
        self.boxes: tuple[Box, ...] = tuple(boxes) if _canonical else _canonical_form(dim, boxes)

    @classmethod
    def empty(cls, dim: int) -> "BoxSet":
        return cls(dim, (), _canonical=True)

    @classmethod
    def of(cls, *intervals) -> "BoxSet":
        b = make_box(*intervals)
        return cls(len(b), [b])

    def is_null(self) -> bool:
        return not self.boxes

    def _combine(self, other: "BoxSet", op) -> "BoxSet":
        if self.dim != other.dim:
            raise BoxError("dimension mismatch")
        grid = _grid(self.dim, self.boxes + other.boxes)
        a = _cells(grid, self.boxes)
        b = _cells(grid, other.boxes)
        return BoxSet(self.dim, _assemble(grid, op(a, b)), _canonical=True)

    def __or__(self, other):
        return self._combine(other, lambda a, b: a | b)

    def __and__(self, other):
        return self._combine(other, lambda a, b: a & b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __xor__(self, other):
        return self._combine(other, lambda a, b: a ^ b)

    def __le__(self, other) -> bool:
        return (self - other).is_null()

    def __eq__(self, other):
        return isinstance(other, BoxSet) and self.dim == other.dim and self.boxes == other.boxes

    def __hash__(self):
        return hash((self.dim, self.boxes))

    def disjoint(self, other) -> bool:
        return (self & other).is_null()

    def measure(self) -> Fraction:
        """Lebesgue measure; endpoints must be rational."""
        total = Fraction(0)
        for b in self.boxes:
            m = Fraction(1)
            for lo, hi in b:
                m *= as_fraction(hi) - as_fraction(lo)
            total += m
        return total

    def hull(self) -> Box:
        if not self.boxes:
            raise BoxError("hull of an empty set")
        out = []
        for i in range(self.dim):
            lo = min((b[i][0] for b in self.boxes), key=_key)
            hi = max((b[i][1] for b in self.boxes), key=_key)
            out.append((lo, hi))
        return tuple(out)

    def __iter__(self):
        return iter(self.boxes)

    def __repr__(self):
        return "BoxSet(" + " u ".join(fmt_box(b) for b in self.boxes) + ")" if self.boxes else "BoxSet(empty)"

    def __str__(self):
        return " u ".join(fmt_box(b) for b in self.boxes) if self.boxes else "empty"


def _sorted_unique(values) -> list:
    vals = sorted(set(values), key=_key)
    out = []
    for v in vals:
        if not out or rcmp(out[-1], v) != 0:
            out.append(v)
    return out


def _grid(dim, boxes) -> list[list]:
    return [_sorted_unique([b[i][j] for b in boxes for j in (0, 1)]) for i in range(dim)]


def _cells(grid, boxes) -> set[tuple[int, ...]]:
    index = [{v: k for k, v in enumerate(axis)} for axis in grid]
    out = set()
    for b in boxes:
        spans = [range(index[i][b[i][0]], index[i][b[i][1]]) for i in range(len(grid))]
        if len(spans) == 1:
            out.update((i,) for i in spans[0])
        else:
            out.update((i, j) for i in spans[0] for j in spans[1])
    return out


def _runs(idx: list[int]) -> list[tuple[int, int]]:
    runs = []
    for i in sorted(idx):
        if runs and runs[-1][1] == i:
            runs[-1] = (runs[-1][0], i + 1)
        else:
            runs.append((i, i + 1))
    return runs


def _assemble(grid, cells) -> tuple[Box, ...]:
    if len(grid) == 1:
        xs = grid[0]
        return tuple(((xs[a], xs[b]),) for a, b in _runs([c[0] for c in cells]))
    xs, ys = grid
    columns: dict[int, list[int]] = {}
    for i, j in cells:
        columns.setdefault(i, []).append(j)
    out = []
    strip_start, profile = None, None
    for i in range(len(xs)):
        prof = tuple(_runs(columns[i])) if i in columns else None
        if prof != profile or (strip_start is not None and prof is None):
            if profile:
                out.extend(((xs[strip_start], xs[i]), (ys[a], ys[b])) for a, b in profile)
            strip_start, profile = i, prof
    return tuple(sorted(out, key=lambda b: tuple(_key(v) for iv in b for v in iv)))


def _canonical_form(dim, boxes) -> tuple[Box, ...]:
    if not boxes:
        return ()
    grid = _grid(dim, boxes)
    return _assemble(grid, _cells(grid, boxes))
