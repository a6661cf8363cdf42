"""Patched-dataset construction, statistics, and COCO/YOLO interchange."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

from .annotate import Annotation, BBox, PatchAnnotation, clip_to_patch
from .errors import EmptySelection, IntegrityError, InvalidAnnotation, InvalidArgument, ParseError
from .geometry import DEFAULT_SCALES, ImageDims, PatchConfig, PatchGrid, PatchRect, ScaleTable, grids_for_image

log = logging.getLogger(__name__)

SPLITS = ("train", "val")
DEFAULT_CATEGORIES = ({"id": 0, "name": "moose"},)


@dataclass
class ImageRecord:
    id: Hashable
    file_name: str
    dims: ImageDims
    split: str = "train"
    extra: dict = field(default_factory=dict)


@dataclass
class Dataset:
    images: list[ImageRecord]
    annotations: list[Annotation]
    categories: list[dict] = field(default_factory=lambda: [dict(c) for c in DEFAULT_CATEGORIES])
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        dup = []
        for im in self.images:
            if im.id in seen:
                dup.append(im.id)
            seen.add(im.id)
        if dup:
            raise IntegrityError("duplicate image ids", dup)
        dangling = [a.id if a.id is not None else a.image_id for a in self.annotations if a.image_id not in seen]
        if dangling:
            raise IntegrityError("annotations reference missing images", dangling)

    def annotations_by_image(self) -> dict[Hashable, list[Annotation]]:
        out: dict[Hashable, list[Annotation]] = {im.id: [] for im in self.images}
        for a in self.annotations:
            out[a.image_id].append(a)
        return out


# COCO input


def _require(obj, key, loc):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", loc)
    if key not in obj:
        raise ParseError(f"missing required field {key!r}", loc)
    return obj[key]


def _as_int(v, loc):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ParseError(f"expected an integer, got {v!r}", loc)
    return int(v)


def coco_to_dataset(doc: Any, split: str = "train", source: str = "<memory>") -> Dataset:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", source)
    images_raw = _require(doc, "images", source)
    anns_raw = _require(doc, "annotations", source)
    cats_raw = doc.get("categories", [dict(c) for c in DEFAULT_CATEGORIES])
    for key, val in (("images", images_raw), ("annotations", anns_raw), ("categories", cats_raw)):
        if not isinstance(val, list):
            raise ParseError("expected an array", f"{source}:{key}")

    images = []
    for i, im in enumerate(images_raw):
        loc = f"{source}:images[{i}]"
        img_id = _require(im, "id", loc)
        w = _as_int(_require(im, "width", loc), f"{loc}.width")
        h = _as_int(_require(im, "height", loc), f"{loc}.height")
        sp = im.get("split", split)
        if sp not in SPLITS:
            raise ParseError(f"split must be one of {SPLITS}, got {sp!r}", f"{loc}.split")
        try:
            dims = ImageDims(w, h)
        except InvalidArgument as e:
            raise ParseError(str(e), loc) from None
        extra = {k: v for k, v in im.items() if k not in ("id", "width", "height", "file_name", "split")}
        images.append(ImageRecord(img_id, str(im.get("file_name", "")), dims, sp, extra))

    anns = []
    for i, a in enumerate(anns_raw):
        loc = f"{source}:annotations[{i}]"
        bbox = _require(a, "bbox", loc)
        if not isinstance(bbox, list) or len(bbox) != 4 or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox
        ):
            raise ParseError("bbox must be [x, y, w, h] numbers", f"{loc}.bbox")
        try:
            box = BBox(*bbox)
        except InvalidAnnotation as e:
            raise ParseError(str(e), f"{loc}.bbox") from None
        extra = {k: v for k, v in a.items() if k not in ("id", "image_id", "bbox", "category_id")}
        anns.append(
            Annotation(
                box=box,
                image_id=_require(a, "image_id", loc),
                category=a.get("category_id", 0),
                id=a.get("id", i),
                extra=extra,
            )
        )
    top_extra = {k: v for k, v in doc.items() if k not in ("images", "annotations", "categories")}
    return Dataset(images, anns, list(cats_raw), top_extra)


def load_coco(path, split: str = "train") -> Dataset:
    """Read a COCO annotation file. Images without a ``split`` key get ``split``."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", f"{path}:{e.lineno}:{e.colno}") from None
    return coco_to_dataset(doc, split=split, source=str(path))


def merge_datasets(parts: Sequence[Dataset]) -> Dataset:
    images, anns, cats, extra = [], [], [], {}
    for d in parts:
        images.extend(d.images)
        anns.extend(d.annotations)
        for c in d.categories:
            if c not in cats:
                cats.append(c)
        extra.update(d.extra)
    return Dataset(images, anns, cats, extra)


# Orientation


def rotate_box_ccw(box: BBox, dims: ImageDims) -> BBox:
    """Box position after rotating a ``dims`` image 90 degrees counter-clockwise.

    A point ``(x, y)`` moves to ``(y, W - x)``.
    """
    return BBox(box.y, dims.width - box.x1, box.height, box.width)


def normalize_orientation(
    dims: ImageDims, boxes: Sequence[BBox], canonical: Iterable[tuple[int, int]] | None = None
) -> tuple[ImageDims, list[BBox]]:
    """Rotate transposed variants of a canonical size so the dims match it.

    Sizes that are canonical, or unrelated to any canonical size, pass through.
    """
    if not isinstance(dims, ImageDims):
        dims = ImageDims(*dims)
    canonical = set(DEFAULT_SCALES if canonical is None else canonical)
    key = dims.as_tuple()
    if key in canonical or key[::-1] not in canonical:
        return dims, list(boxes)
    return dims.transposed(), [rotate_box_ccw(b, dims) for b in boxes]


# Patched dataset


@dataclass(frozen=True)
class PatchRecord:
    id: str
    image_id: Hashable
    rect: PatchRect
    split: str
    file_name: str = ""  # source image file
    rotated: bool = False


def patch_id(image_id, rect: PatchRect) -> str:
    return f"{image_id}_{rect.size_class}_{rect.grid_row}_{rect.grid_col}"


@dataclass
class PatchedDataset:
    patches: list[PatchRecord]
    annotations: dict[str, list[PatchAnnotation]]
    config: PatchConfig
    keep_empty: bool = False
    categories: list[dict] = field(default_factory=lambda: [dict(c) for c in DEFAULT_CATEGORIES])

    def __post_init__(self):
        ids = [p.id for p in self.patches]
        if len(set(ids)) != len(ids):
            raise IntegrityError("duplicate patch ids", sorted({i for i in ids if ids.count(i) > 1}))
        for p in self.patches:
            self.annotations.setdefault(p.id, [])
        extra = set(self.annotations) - set(ids)
        if extra:
            raise IntegrityError("annotations keyed by unknown patches", sorted(extra))
        self._by_id = {p.id: p for p in self.patches}

    def patch(self, pid: str) -> PatchRecord:
        return self._by_id[pid]

    def __contains__(self, pid) -> bool:
        return pid in self._by_id

    def select(self, split: str | None = None, size_class: str | None = None) -> list[PatchRecord]:
        return [
            p
            for p in self.patches
            if (split is None or p.split == split) and (size_class is None or p.rect.size_class == size_class)
        ]

    def subset(self, split: str | None = None, size_class: str | None = None) -> "PatchedDataset":
        keep = self.select(split, size_class)
        return PatchedDataset(
            keep, {p.id: list(self.annotations[p.id]) for p in keep}, self.config, self.keep_empty, self.categories
        )

    @property
    def num_annotations(self) -> int:
        return sum(len(v) for v in self.annotations.values())


def _patch_one_image(args):
    image, anns, config, keep_empty, canonical = args
    dims, boxes = normalize_orientation(image.dims, [a.box for a in anns], canonical)
    rotated = dims != image.dims
    local = [Annotation(b, a.image_id, a.category, a.id) for a, b in zip(anns, boxes)]
    records, out_anns = [], {}
    for grid in grids_for_image(dims, config):
        for rect in grid.rects:
            kept = [pa for pa in (clip_to_patch(a, rect, config.threshold) for a in local) if pa is not None]
            if kept or keep_empty:
                pid = patch_id(image.id, rect)
                records.append(PatchRecord(pid, image.id, rect, image.split, image.file_name, rotated))
                out_anns[pid] = kept
    return records, out_anns


def build_patched_dataset(
    ds: Dataset, config: PatchConfig, keep_empty: bool = False, jobs: int = 1
) -> PatchedDataset:
    """Cut every image into patches for each size class and clip its annotations.

    Patches without any retained annotation are dropped unless ``keep_empty``.
    Output order follows the input image order, then size class, row, column.
    """
    by_image = ds.annotations_by_image()
    canonical = tuple(config.scale_table.entries)
    work = [(im, by_image[im.id], config, keep_empty, canonical) for im in ds.images]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_patch_one_image, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        results = [_patch_one_image(w) for w in work]
    patches, anns = [], {}
    for recs, a in results:
        patches.extend(recs)
        anns.update(a)
    log.info("built %d patches with %d annotations", len(patches), sum(len(v) for v in anns.values()))
    return PatchedDataset(patches, anns, config, keep_empty, [dict(c) for c in ds.categories])


def crop_patches(pixels: np.ndarray, grid: PatchGrid) -> list[np.ndarray]:
    """Lossless crops of an ``(H, W, ...)`` pixel array, one per grid rect."""
    pixels = np.asarray(pixels)
    if pixels.ndim < 2 or pixels.shape[:2] != (grid.image.height, grid.image.width):
        raise InvalidArgument(
            f"pixel buffer {pixels.shape[:2]} does not match grid image {grid.image.height}x{grid.image.width}"
        )
    return [pixels[r.y0 : r.y1, r.x0 : r.x1].copy() for r in grid.rects]


def crop_rect(pixels: np.ndarray, rect: PatchRect) -> np.ndarray:
    return np.asarray(pixels)[rect.y0 : rect.y1, rect.x0 : rect.x1].copy()


def load_pixels(path, rotate: bool = False) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"))
    return np.rot90(arr).copy() if rotate else arr


def write_patch_images(pd: PatchedDataset, image_root, out_dir, jobs: int = 1) -> list[Path]:
    """Materialize patch pixels as PNG files named ``{patch_id}.png``."""
    from PIL import Image

    image_root, out_dir = Path(image_root), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[Hashable, list[PatchRecord]] = {}
    for p in pd.patches:
        groups.setdefault(p.image_id, []).append(p)

    def work(recs: list[PatchRecord]) -> list[Path]:
        first = recs[0]
        src = image_root / first.file_name
        arr = load_pixels(src, rotate=first.rotated)
        written = []
        for p in recs:
            if arr.shape[0] < p.rect.y1 or arr.shape[1] < p.rect.x1:
                raise InvalidArgument(f"{src} is smaller than patch {p.id}")
            dest = out_dir / f"{p.id}.png"
            Image.fromarray(crop_rect(arr, p.rect)).save(dest, format="PNG")
            written.append(dest)
        return written

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        nested = list(pool.map(work, groups.values()))
    return [p for chunk in nested for p in chunk]


# Statistics


@dataclass(frozen=True)
class StatsRow:
    split: str
    size_filter: str
    image_count: int
    mean_annotations: float
    mean_box_area: float
    normalized_area: float


def dataset_stats(pd: PatchedDataset, split: str | None = None, size_class: str | None = None) -> StatsRow:
    """Patch count, annotations per patch, and box area (absolute and over mean patch area).

    Annotations duplicated across overlapping patches count once per patch.
    """
    sel = pd.select(split, size_class)
    if not sel:
        raise EmptySelection(f"no patches for split={split or 'all'} size={size_class or 'all'}")
    areas = [a.box.area for p in sel for a in pd.annotations[p.id]]
    mean_patch = sum(p.rect.area for p in sel) / len(sel)
    mean_area = sum(areas) / len(areas) if areas else math.nan
    return StatsRow(
        split=split or "all",
        size_filter=size_class or "all",
        image_count=len(sel),
        mean_annotations=len(areas) / len(sel),
        mean_box_area=mean_area,
        normalized_area=mean_area / mean_patch,
    )


def stats_table(pd: PatchedDataset) -> list[StatsRow]:
    """Per-split rows over all sizes, then per-split rows for each size class."""
    keys = [(split, None) for split in SPLITS]
    keys += [(split, size) for split in SPLITS for size in pd.config.size_classes]
    return [dataset_stats(pd, split, size) for split, size in keys if pd.select(split, size)]


STATS_COLUMNS = ("split", "size", "images", "avg_annos_per_img", "avg_bbox_area", "avg_bbox_area_norm")


def write_stats_csv(rows: Sequence[StatsRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_COLUMNS)
        for r in rows:
            w.writerow([r.split, r.size_filter, r.image_count, repr(r.mean_annotations),
                        repr(r.mean_box_area), repr(r.normalized_area)])


def format_stats(rows: Sequence[StatsRow]) -> str:
    lines = [f"{'split':<6} {'size':<7} {'images':>7} {'annos/img':>9} {'bbox area':>10} {'norm':>7}"]
    for r in rows:
        lines.append(
            f"{r.split:<6} {r.size_filter:<7} {r.image_count:>7d} {r.mean_annotations:>9.2f} "
            f"{r.mean_box_area:>10.0f} {r.normalized_area:>7.3f}"
        )
    return "\n".join(lines)


# Export


def export_coco(pd: PatchedDataset, path=None) -> dict:
    """COCO document for the patched dataset; written to ``path`` when given.

    Image ids are 1-based positions in patch order. Each image carries its
    ``patch_id`` and provenance so :func:`patched_from_coco` can invert it.
    """
    cfg = pd.config
    doc = {
        "info": {
            "description": "patched dataset",
            "threshold": cfg.threshold,
            "overlap": cfg.overlap,
            "size_classes": list(cfg.size_classes),
            "keep_empty": pd.keep_empty,
            "scales": [
                {"width": w, "height": h, **{c: n for c, n in classes.items()}}
                for (w, h), classes in cfg.scale_table.entries.items()
            ],
        },
        "images": [],
        "annotations": [],
        "categories": [dict(c) for c in pd.categories],
    }
    ann_id = 0
    for k, p in enumerate(pd.patches, start=1):
        r = p.rect
        doc["images"].append(
            {
                "id": k,
                "file_name": f"{p.id}.png",
                "width": r.width,
                "height": r.height,
                "split": p.split,
                "patch_id": p.id,
                "source_image_id": p.image_id,
                "source_file": p.file_name,
                "rotated": p.rotated,
                "x0": r.x0,
                "y0": r.y0,
                "size_class": r.size_class,
                "grid_row": r.grid_row,
                "grid_col": r.grid_col,
            }
        )
        for a in pd.annotations[p.id]:
            ann_id += 1
            doc["annotations"].append(
                {
                    "id": ann_id,
                    "image_id": k,
                    "bbox": a.box.as_list(),
                    "area": a.box.area,
                    "category_id": a.category,
                    "iscrowd": 0,
                    "visible_fraction": a.visible_fraction,
                    "source_image_id": a.source[0],
                    "source_annotation_id": a.source[1],
                }
            )
    if path is not None:
        write_json(doc, path)
    return doc


def write_json(doc, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def patched_from_coco(ds: Dataset) -> PatchedDataset:
    """Rebuild a :class:`PatchedDataset` from a document written by :func:`export_coco`."""
    info = ds.extra.get("info", {})
    try:
        scales = {(s["width"], s["height"]): {c: s[c] for c in s if c not in ("width", "height")}
                  for s in info["scales"]}
        config = PatchConfig(info["threshold"], info["overlap"], ScaleTable(scales), tuple(info["size_classes"]))
    except (KeyError, TypeError) as e:
        raise ParseError(f"not a patched dataset (info block missing {e})", "info") from None
    patches, by_coco_id = [], {}
    for im in ds.images:
        x = im.extra
        try:
            rect = PatchRect(x["x0"], x["y0"], im.dims.width, im.dims.height, x["size_class"], x["grid_row"], x["grid_col"])
            rec = PatchRecord(x["patch_id"], x["source_image_id"], rect, im.split, x.get("source_file", ""), x.get("rotated", False))
        except KeyError as e:
            raise ParseError(f"missing patch provenance field {e}", f"images[id={im.id}]") from None
        patches.append(rec)
        by_coco_id[im.id] = rec
    anns: dict[str, list[PatchAnnotation]] = {p.id: [] for p in patches}
    for a in ds.annotations:
        rec = by_coco_id[a.image_id]
        x = a.extra or {}
        anns[rec.id].append(
            PatchAnnotation(
                box=a.box,
                visible_fraction=x.get("visible_fraction", 1.0),
                source=(x.get("source_image_id", rec.image_id), x.get("source_annotation_id")),
                patch=(rec.rect.size_class, rec.rect.grid_row, rec.rect.grid_col),
                category=a.category,
            )
        )
    return PatchedDataset(patches, anns, config, bool(info.get("keep_empty", False)), list(ds.categories))


def load_patched_coco(path) -> PatchedDataset:
    return patched_from_coco(load_coco(path))


def _category_index(pd: PatchedDataset) -> dict:
    return {c["id"]: i for i, c in enumerate(sorted(pd.categories, key=lambda c: c["id"]))}


def _yolo_lines(anns: Sequence[PatchAnnotation], rect: PatchRect, cat_index: dict) -> list[str]:
    out = []
    for a in anns:
        b = a.box
        vals = (
            (b.x + b.width / 2) / rect.width,
            (b.y + b.height / 2) / rect.height,
            b.width / rect.width,
            b.height / rect.height,
        )
        out.append(" ".join([str(cat_index.get(a.category, 0))] + [f"{v:.6g}" for v in vals]))
    return out


def yolo_lines(pd: PatchedDataset, pid: str) -> list[str]:
    return _yolo_lines(pd.annotations[pid], pd.patch(pid).rect, _category_index(pd))


def export_yolo(pd: PatchedDataset, directory) -> list[Path]:
    """One ``{patch_id}.txt`` per patch: ``class cx cy w h`` normalized to patch size."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cat_index = _category_index(pd)
    paths = []
    for rec in pd.patches:
        dest = directory / f"{rec.id}.txt"
        lines = _yolo_lines(pd.annotations[rec.id], rec.rect, cat_index)
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(line + "\n" for line in lines))
        paths.append(dest)
    names = [c["name"] for c in sorted(pd.categories, key=lambda c: c["id"])]
    with open(directory / "classes.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(n + "\n" for n in names))
    return paths


def ensure_writable(directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if not os.access(directory, os.W_OK):
        raise OSError(f"{directory} is not writable")
    return directory
