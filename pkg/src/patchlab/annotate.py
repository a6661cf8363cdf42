"""Clipping of bounding boxes to patches and the visibility threshold."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping

from .errors import InvalidAnnotation, InvalidArgument
from .geometry import PatchRect

FRACTION_TOL = 1e-9
MIN_CLIP_AREA = 1.0  # px^2


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, top-left origin, COCO ``[x, y, w, h]`` layout."""

    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidAnnotation(f"box must have positive area, got {self.width}x{self.height}")

    @property
    def x1(self) -> float:
        return self.x + self.width

    @property
    def y1(self) -> float:
        return self.y + self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.width, self.height]

    @classmethod
    def from_corners(cls, x0, y0, x1, y1) -> "BBox":
        return cls(x0, y0, x1 - x0, y1 - y0)


@dataclass(frozen=True)
class Annotation:
    box: BBox
    image_id: Hashable
    category: int = 0
    id: Hashable | None = None
    extra: Mapping | None = field(default=None, compare=False, hash=False)


@dataclass(frozen=True)
class PatchAnnotation:
    box: BBox  # patch-local
    visible_fraction: float
    source: tuple  # (image_id, annotation id)
    patch: tuple  # (size_class, grid_row, grid_col)
    category: int = 0


def _overlap_extent(a0, a1, b0, b1) -> float:
    return max(0.0, min(a1, b1) - max(a0, b0))


def visible_fraction(box: BBox, rect: PatchRect) -> float:
    """Share of the box area that falls inside the patch."""
    area = box.width * box.height
    if not area > 0:
        raise InvalidAnnotation("visible fraction of a zero-area box is undefined")
    inter = _overlap_extent(box.x, box.x1, rect.x0, rect.x1) * _overlap_extent(box.y, box.y1, rect.y0, rect.y1)
    return min(inter / area, 1.0)


def clip_to_patch(ann: Annotation, rect: PatchRect, threshold: float) -> PatchAnnotation | None:
    """Patch-local clipped annotation, or ``None`` when it is discarded.

    A box is discarded when its visible fraction is below ``threshold``;
    equality keeps it. Clips under one square pixel are always discarded.
    """
    if not 0.0 <= threshold <= 1.0:
        raise InvalidArgument(f"threshold must be in [0, 1], got {threshold}")
    box = ann.box
    frac = visible_fraction(box, rect)
    if frac <= 0.0 or frac < threshold - FRACTION_TOL:
        return None
    x0 = max(box.x, rect.x0)
    y0 = max(box.y, rect.y0)
    x1 = min(box.x1, rect.x1)
    y1 = min(box.y1, rect.y1)
    if (x1 - x0) * (y1 - y0) < MIN_CLIP_AREA:
        return None
    local = BBox(x0 - rect.x0, y0 - rect.y0, x1 - x0, y1 - y0)
    return PatchAnnotation(
        box=local,
        visible_fraction=frac,
        source=(ann.image_id, ann.id),
        patch=(rect.size_class, rect.grid_row, rect.grid_col),
        category=ann.category,
    )


def remap_to_image(patch_box: BBox, rect: PatchRect) -> BBox:
    """Translate a patch-local box back into original-image coordinates."""
    tol = FRACTION_TOL * max(rect.width, rect.height, 1)
    if (
        patch_box.x < -tol
        or patch_box.y < -tol
        or patch_box.x1 > rect.width + tol
        or patch_box.y1 > rect.height + tol
    ):
        raise InvalidArgument(f"box {patch_box.as_list()} exceeds patch extent {rect.width}x{rect.height}")
    return BBox(patch_box.x + rect.x0, patch_box.y + rect.y0, patch_box.width, patch_box.height)
