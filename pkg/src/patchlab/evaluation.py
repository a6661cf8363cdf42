"""COCO-style detection scoring on patched datasets.

Detections are matched per patch in descending score order, each to the
still-unmatched ground truth with the highest IoU at or above the threshold.
AP is the 101-point interpolated precision average used by pycocotools.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .annotate import BBox
from .errors import EmptySelection, IntegrityError, InvalidArgument, ParseError
from .pipeline import PatchedDataset

IOU_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
MAX_DETS = 100


@dataclass(frozen=True)
class Detection:
    patch_id: str
    box: BBox
    score: float
    category: int = 0
    id: Hashable | None = None

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise InvalidArgument(f"score must be in [0, 1], got {self.score}")

    def sort_key(self):
        b = self.box
        return (-self.score, str(self.id) if self.id is not None else "", self.patch_id, b.x, b.y, b.width, b.height)


@dataclass(frozen=True)
class EvalResult:
    map50: float
    map5095: float
    per_threshold: tuple[tuple[float, float], ...]
    num_gt: int
    num_detections: int
    size_class: str | None = None

    def ap_at(self, thr: float) -> float:
        for t, ap in self.per_threshold:
            if math.isclose(t, thr):
                return ap
        raise KeyError(thr)


def iou(a: BBox, b: BBox) -> float:
    iw = min(a.x1, b.x1) - max(a.x, b.x)
    ih = min(a.y1, b.y1) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def iou_matrix(dets: Sequence[BBox], gts: Sequence[BBox]) -> np.ndarray:
    out = np.zeros((len(dets), len(gts)))
    for i, d in enumerate(dets):
        for j, g in enumerate(gts):
            out[i, j] = iou(d, g)
    return out


def match_detections(gts: Sequence[BBox], dets: Sequence[Detection], iou_thr: float, ious=None) -> np.ndarray:
    """True-positive flags for ``dets`` (aligned with the input order)."""
    order = sorted(range(len(dets)), key=lambda i: dets[i].sort_key())
    if ious is None:
        ious = iou_matrix([d.box for d in dets], gts)
    taken = np.zeros(len(gts), dtype=bool)
    tp = np.zeros(len(dets), dtype=bool)
    for i in order:
        best, best_iou = -1, iou_thr
        for j in range(len(gts)):
            if taken[j]:
                continue
            if ious[i, j] >= best_iou and (best < 0 or ious[i, j] > ious[i, best]):
                best, best_iou = j, ious[i, j]
        if best >= 0:
            taken[best] = True
            tp[i] = True
    return tp


def average_precision(tp: Sequence[bool], num_gt: int) -> float:
    """101-point interpolated AP from TP flags already sorted by descending score.

    Returns 0 when there is no ground truth but there are detections, and NaN
    when both are empty.
    """
    tp = np.asarray(tp, dtype=bool)
    if num_gt == 0:
        return 0.0 if tp.size else math.nan
    if tp.size == 0:
        return 0.0
    ctp = np.cumsum(tp)
    cfp = np.cumsum(~tp)
    precision = ctp / (ctp + cfp)
    # Interpolated precision: running max from the right.
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    # Recall >= i/100 tested in integers so points such as 3/10 are not lost to rounding.
    idx = np.searchsorted(ctp * 100, np.arange(101) * num_gt, side="left")
    q = np.where(idx < precision.size, precision[np.minimum(idx, precision.size - 1)], 0.0)
    return float(q.mean())


def _group(dets: Iterable[Detection]) -> dict[str, list[Detection]]:
    out: dict[str, list[Detection]] = {}
    for d in dets:
        out.setdefault(d.patch_id, []).append(d)
    return out


def evaluate(
    gt: PatchedDataset,
    dets: Sequence[Detection],
    size_class: str | None = None,
    split: str | None = None,
    max_dets: int = MAX_DETS,
    iou_thresholds: Sequence[float] = IOU_THRESHOLDS,
) -> EvalResult:
    """mAP@0.5 and mAP@0.5:0.95 of ``dets`` against the patches of ``gt``.

    ``size_class``/``split`` restrict both ground truth and detections.
    """
    unknown = sorted({d.patch_id for d in dets if d.patch_id not in gt})
    if unknown:
        raise IntegrityError("detections reference unknown patches", unknown)
    patches = gt.select(split, size_class)
    by_patch = _group(dets)
    scored: list[tuple[tuple, np.ndarray]] = []
    num_gt = 0
    num_dets = 0
    for p in patches:
        boxes = [a.box for a in gt.annotations[p.id]]
        pdets = sorted(by_patch.get(p.id, []), key=Detection.sort_key)[:max_dets]
        num_gt += len(boxes)
        num_dets += len(pdets)
        if not pdets:
            continue
        ious = iou_matrix([d.box for d in pdets], boxes)
        flags = np.stack([match_detections(boxes, pdets, t, ious) for t in iou_thresholds], axis=1)
        scored.extend((d.sort_key(), flags[i]) for i, d in enumerate(pdets))
    if num_gt == 0 and num_dets == 0:
        raise EmptySelection(f"nothing to evaluate for split={split or 'all'} size={size_class or 'all'}")
    scored.sort(key=lambda item: item[0])
    table = np.array([f for _, f in scored], dtype=bool).reshape(len(scored), len(iou_thresholds))
    aps = tuple((float(t), average_precision(table[:, k], num_gt)) for k, t in enumerate(iou_thresholds))
    values = [ap for _, ap in aps]
    map50 = next(ap for t, ap in aps if math.isclose(t, 0.5))
    # fsum plus the clamp keeps an all-equal AP vector from averaging 1 ulp above its members
    mean = min(math.fsum(values) / len(values), max(values))
    return EvalResult(map50, mean, aps, num_gt, num_dets, size_class)


def evaluate_by_size(gt: PatchedDataset, dets: Sequence[Detection], split: str | None = None, **kw) -> list[EvalResult]:
    """Overall result followed by one result per size class present in ``gt``."""
    out = [evaluate(gt, dets, None, split, **kw)]
    for size in gt.config.size_classes:
        if gt.select(split, size):
            out.append(evaluate(gt, dets, size, split, **kw))
    return out


# I/O


def load_detections(path_or_doc, gt: PatchedDataset, coco_ids: Mapping | None = None) -> list[Detection]:
    """Parse a COCO results list (``image_id``, ``bbox``, ``score``, ``category_id``).

    ``image_id`` may be a patch id string or an integer image id of the exported
    patched COCO file (resolved through ``coco_ids``, default 1-based patch order).
    """
    if isinstance(path_or_doc, (str, Path)):
        with open(path_or_doc, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON: {e.msg}", f"{path_or_doc}:{e.lineno}") from None
    else:
        doc = path_or_doc
    if not isinstance(doc, list):
        raise ParseError("detections must be a JSON array", str(path_or_doc) if isinstance(path_or_doc, (str, Path)) else None)
    if coco_ids is None:
        coco_ids = {k: p.id for k, p in enumerate(gt.patches, start=1)}
    out, bad = [], []
    for i, row in enumerate(doc):
        loc = f"detections[{i}]"
        try:
            img, bbox, score = row["image_id"], row["bbox"], row["score"]
        except (KeyError, TypeError):
            raise ParseError("needs image_id, bbox and score", loc) from None
        if not isinstance(bbox, list) or len(bbox) != 4:
            raise ParseError("bbox must be [x, y, w, h]", loc)
        pid = img if isinstance(img, str) else coco_ids.get(img)
        if pid is None:
            bad.append(img)
            continue
        out.append(Detection(pid, BBox(*bbox), float(score), row.get("category_id", 0), row.get("id", i)))
    if bad:
        raise IntegrityError("detections reference unknown images", bad)
    return out


def detections_from_ground_truth(gt: PatchedDataset, score: float = 1.0) -> list[Detection]:
    return [
        Detection(p.id, a.box, score, a.category, f"{p.id}#{k}")
        for p in gt.patches
        for k, a in enumerate(gt.annotations[p.id])
    ]


RESULT_COLUMNS = ("split", "size", "num_gt", "num_detections", "map50", "map5095") + tuple(
    f"ap{int(round(t * 100))}" for t in IOU_THRESHOLDS
)


def write_results_csv(results: Sequence[EvalResult], path, split: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in results:
            w.writerow([split or "all", r.size_class or "all", r.num_gt, r.num_detections, repr(r.map50),
                        repr(r.map5095)] + [repr(ap) for _, ap in r.per_threshold])


def results_summary(results: Sequence[EvalResult], split: str | None = None) -> dict:
    return {
        "split": split or "all",
        "results": [
            {
                "size": r.size_class or "all",
                "num_gt": r.num_gt,
                "num_detections": r.num_detections,
                "map50": r.map50,
                "map5095": r.map5095,
                "ap_per_iou": {f"{t:.2f}": ap for t, ap in r.per_threshold},
            }
            for r in results
        ],
    }
