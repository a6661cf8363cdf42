"""Multi-scale patch grids.

An image axis of extent ``D`` is cut into ``n`` base tiles of real length
``b = D / n``. With overlap ``O`` each tile grows by ``O * b / 2`` on every
side that touches a neighbouring tile; sides on the image border stay put.
Real edges are rounded half-up to whole pixels and clamped to ``[0, D]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InvalidArgument, UnsupportedImageSize

SIZE_CLASSES = ("large", "medium", "small")


@dataclass(frozen=True)
class ImageDims:
    width: int
    height: int

    def __post_init__(self):
        if int(self.width) != self.width or int(self.height) != self.height:
            raise InvalidArgument(f"image dims must be integers, got {self.width}x{self.height}")
        if self.width < 1 or self.height < 1:
            raise InvalidArgument(f"image dims must be positive, got {self.width}x{self.height}")

    def transposed(self) -> "ImageDims":
        return ImageDims(self.height, self.width)

    def as_tuple(self) -> tuple[int, int]:
        return (self.width, self.height)


DEFAULT_SCALES: dict[tuple[int, int], dict[str, int]] = {
    (4000, 6000): {"large": 6, "medium": 8, "small": 12},
    (1365, 2048): {"large": 2, "medium": 3, "small": 4},
}


@dataclass(frozen=True)
class ScaleTable:
    """Tiles-per-axis ``n`` for each (canonical image size, size class).

    Scales are stored as integer denominators, so a 1/6 scale is ``6``.
    """

    entries: Mapping[tuple[int, int], Mapping[str, int]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_SCALES.items()}
    )

    def __post_init__(self):
        for size, classes in self.entries.items():
            for size_class, n in classes.items():
                if int(n) != n or n < 1:
                    raise InvalidArgument(f"scale denominator for {size}/{size_class} must be a positive integer")

    @classmethod
    def from_scales(cls, scales: Mapping[tuple[int, int], Mapping[str, float]]) -> "ScaleTable":
        """Build from fractional scales such as ``1/6``; ``n = round(1 / scale)``."""
        return cls({size: {c: int(round(1.0 / s)) for c, s in classes.items()} for size, classes in scales.items()})

    def canonical(self, dims: ImageDims) -> tuple[int, int] | None:
        key = dims.as_tuple()
        if key in self.entries:
            return key
        if key[::-1] in self.entries:
            return key[::-1]
        return None

    def lookup(self, dims: ImageDims, size_class: str) -> int:
        key = self.canonical(dims)
        if key is None:
            raise UnsupportedImageSize(dims.as_tuple())
        try:
            return int(self.entries[key][size_class])
        except KeyError:
            raise InvalidArgument(f"no scale for size class {size_class!r} at {key}") from None


@dataclass(frozen=True)
class PatchConfig:
    threshold: float = 0.5
    overlap: float = 0.1
    scale_table: ScaleTable = field(default_factory=ScaleTable)
    size_classes: tuple[str, ...] = SIZE_CLASSES

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidArgument(f"threshold must be in [0, 1], got {self.threshold}")
        if not 0.0 <= self.overlap < 1.0:
            raise InvalidArgument(f"overlap must be in [0, 1), got {self.overlap}")
        object.__setattr__(self, "size_classes", tuple(self.size_classes))
        if not self.size_classes:
            raise InvalidArgument("size_classes must not be empty")
        unknown = [c for c in self.size_classes if c not in SIZE_CLASSES]
        if unknown:
            raise InvalidArgument(f"unknown size classes: {unknown}")
        if len(set(self.size_classes)) != len(self.size_classes):
            raise InvalidArgument("size_classes must not repeat")


@dataclass(frozen=True)
class PatchRect:
    x0: int
    y0: int
    width: int
    height: int
    size_class: str | None
    grid_row: int
    grid_col: int

    @property
    def x1(self) -> int:
        return self.x0 + self.width

    @property
    def y1(self) -> int:
        return self.y0 + self.height

    @property
    def area(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class PatchGrid:
    image: ImageDims
    size_class: str | None
    n: int
    rects: tuple[PatchRect, ...]

    def __len__(self):
        return len(self.rects)

    def __iter__(self):
        return iter(self.rects)


def _round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def axis_intervals(extent: int, n: int, overlap: float) -> list[tuple[int, int]]:
    """Integer ``(start, stop)`` pixel intervals of the ``n`` patches along one axis."""
    half = overlap / 2.0
    out = []
    for i in range(n):
        lo = (i - (half if i > 0 else 0.0)) * extent / n
        hi = (i + 1 + (half if i < n - 1 else 0.0)) * extent / n
        lo = min(max(_round_half_up(lo), 0), extent)
        hi = min(max(_round_half_up(hi), 0), extent)
        out.append((lo, hi))
    return out


def compute_grid(dims: ImageDims, n: int, overlap: float, size_class: str | None = None) -> PatchGrid:
    if int(n) != n or n < 1:
        raise InvalidArgument(f"tiles per axis must be a positive integer, got {n}")
    if not 0.0 <= overlap < 1.0:
        raise InvalidArgument(f"overlap must be in [0, 1), got {overlap}")
    if not isinstance(dims, ImageDims):
        dims = ImageDims(*dims)
    n = int(n)
    cols = axis_intervals(dims.width, n, overlap)
    rows = axis_intervals(dims.height, n, overlap)
    rects = tuple(
        PatchRect(x0, y0, x1 - x0, y1 - y0, size_class, r, c)
        for r, (y0, y1) in enumerate(rows)
        for c, (x0, x1) in enumerate(cols)
    )
    return PatchGrid(dims, size_class, n, rects)


def grids_for_image(dims: ImageDims, config: PatchConfig) -> list[PatchGrid]:
    """One grid per configured size class, in config order.

    The scale lookup accepts the canonical size or its transpose; the grid is
    laid out on ``dims`` as given.
    """
    if not isinstance(dims, ImageDims):
        dims = ImageDims(*dims)
    return [
        compute_grid(dims, config.scale_table.lookup(dims, c), config.overlap, size_class=c)
        for c in config.size_classes
    ]


def average_patch_dims(grid: PatchGrid | Sequence[PatchRect]) -> tuple[float, float]:
    rects = grid.rects if isinstance(grid, PatchGrid) else tuple(grid)
    if not rects:
        raise InvalidArgument("grid has no patches")
    return (
        sum(r.width for r in rects) / len(rects),
        sum(r.height for r in rects) / len(rects),
    )
