import random

import pytest

from oracles import box_iou, lexicographic_matching, naive_ap
from patchlab.annotate import BBox, PatchAnnotation
from patchlab.errors import EmptySelection, IntegrityError, InvalidArgument, ParseError
from patchlab.evaluation import (
    Detection,
    average_precision,
    detections_from_ground_truth,
    evaluate,
    evaluate_by_size,
    iou,
    load_detections,
    match_detections,
)
from patchlab.geometry import PatchConfig, PatchRect
from patchlab.pipeline import PatchRecord, PatchedDataset


def test_iou_identical_and_disjoint():
    assert iou(BBox(0, 0, 10, 10), BBox(0, 0, 10, 10)) == 1.0
    assert iou(BBox(0, 0, 10, 10), BBox(20, 20, 5, 5)) == 0.0


def test_iou_half_shift():
    assert iou(BBox(0, 0, 10, 10), BBox(5, 0, 10, 10)) == pytest.approx(50 / 150)


def test_iou_random_against_oracle():
    rng = random.Random(0)
    for _ in range(1000):
        a = (rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(0.1, 20), rng.uniform(0.1, 20))
        b = (rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(0.1, 20), rng.uniform(0.1, 20))
        assert iou(BBox(*a), BBox(*b)) == pytest.approx(box_iou(a, b), abs=1e-12)


def det(box, score, k=0, pid="p"):
    return Detection(pid, BBox(*box), score, 0, k)


def test_single_match_tp():
    # IoU 0.6 against a 10x10 GT: shift by 2.5 px
    assert match_detections([BBox(0, 0, 10, 10)], [det((2.5, 0, 10, 10), 0.9)], 0.5).tolist() == [True]


def test_second_detection_is_fp():
    gts = [BBox(0, 0, 10, 10)]
    dets = [det((0, 0, 10, 10), 0.4, 0), det((0.5, 0, 10, 10), 0.9, 1)]
    assert match_detections(gts, dets, 0.5).tolist() == [False, True]


def test_matching_against_lexicographic_oracle():
    rng = random.Random(1)
    for _ in range(300):
        gts = [(rng.uniform(0, 30), rng.uniform(0, 30), rng.uniform(5, 20), rng.uniform(5, 20)) for _ in range(rng.randint(0, 5))]
        boxes = []
        for _ in range(rng.randint(0, 5)):
            if gts and rng.random() < 0.7:
                g = rng.choice(gts)
                boxes.append((g[0] + rng.uniform(-3, 3), g[1] + rng.uniform(-3, 3), g[2], g[3]))
            else:
                boxes.append((rng.uniform(0, 30), rng.uniform(0, 30), rng.uniform(5, 20), rng.uniform(5, 20)))
        scores = rng.sample(range(1, 1000), len(boxes))
        dets = [det(b, s / 1000, k) for k, (b, s) in enumerate(zip(boxes, scores))]
        order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
        thr = rng.choice([0.5, 0.75, 0.9])
        got = match_detections([BBox(*g) for g in gts], dets, thr)
        want = lexicographic_matching(gts, [boxes[i] for i in order], thr)
        assert [bool(got[i]) for i in order] == want


def test_ap_all_matched():
    assert average_precision([True, True, True], 3) == 1.0


def test_ap_no_detections():
    assert average_precision([], 4) == 0.0


def test_ap_tp_fp_tp_hand_computed():
    # interpolated precision is 1 up to recall 0.5 (51 points) and 2/3 for the remaining 50
    assert average_precision([True, False, True], 2) == pytest.approx((51 + 50 * 2 / 3) / 101, abs=1e-12)


def test_ap_conventions_without_gt():
    assert average_precision([False], 0) == 0.0
    assert average_precision([], 0) != average_precision([], 0)  # NaN


def test_ap_against_naive():
    rng = random.Random(2)
    for _ in range(300):
        flags = [rng.random() < 0.5 for _ in range(rng.randint(0, 15))]
        ngt = max(sum(flags), 1) + rng.randint(0, 3)
        assert average_precision(flags, ngt) == pytest.approx(naive_ap(flags, ngt), abs=1e-12)


def gt_dataset(per_patch, size_classes=("large",)):
    patches, anns = [], {}
    for k, boxes in enumerate(per_patch):
        size = size_classes[k % len(size_classes)]
        pid = f"p{k}"
        patches.append(PatchRecord(pid, "img", PatchRect(0, 0, 100, 100, size, 0, k), "val"))
        anns[pid] = [PatchAnnotation(BBox(*b), 1.0, ("img", j), (size, 0, k)) for j, b in enumerate(boxes)]
    return PatchedDataset(patches, anns, PatchConfig())


def test_perfect_predictions():
    gt = gt_dataset([[(0, 0, 10, 10), (30, 30, 5, 8)], [(50, 50, 20, 20)]])
    r = evaluate(gt, detections_from_ground_truth(gt))
    assert r.map50 == 1.0 and r.map5095 == 1.0


def test_iou_point_six_jitter():
    gt = gt_dataset([[(0, 0, 10, 10)]])
    r = evaluate(gt, [det((2.5, 0, 10, 10), 0.9, pid="p0")])
    assert r.map50 == 1.0
    assert r.ap_at(0.6) == 1.0 and r.ap_at(0.65) == 0.0
    assert r.map5095 == pytest.approx(0.3)


def test_empty_predictions_score_zero():
    gt = gt_dataset([[(0, 0, 10, 10)]])
    r = evaluate(gt, [])
    assert r.map50 == 0.0 and r.map5095 == 0.0


def test_unknown_patch_id():
    gt = gt_dataset([[(0, 0, 10, 10)]])
    with pytest.raises(IntegrityError):
        evaluate(gt, [det((0, 0, 10, 10), 0.9, pid="ghost")])


def test_nothing_to_evaluate():
    gt = gt_dataset([[]])
    with pytest.raises(EmptySelection):
        evaluate(gt, [])


def test_max_dets_cap():
    gt = gt_dataset([[(0, 0, 10, 10)]])
    junk = [det((80, 80, 5, 5), 0.99, k, "p0") for k in range(100)]
    hit = det((0, 0, 10, 10), 0.5, 999, "p0")
    assert evaluate(gt, junk + [hit]).map50 == 0.0


def test_per_size_rows():
    gt = gt_dataset([[(0, 0, 10, 10)], [(0, 0, 20, 20)], [(5, 5, 5, 5)]], ("large", "medium", "small"))
    results = evaluate_by_size(gt, detections_from_ground_truth(gt))
    assert [r.size_class for r in results] == [None, "large", "medium", "small"]
    assert all(r.map50 == 1.0 for r in results)


def test_load_detections_by_index_and_name():
    gt = gt_dataset([[(0, 0, 10, 10)], [(0, 0, 10, 10)]])
    dets = load_detections([{"image_id": 2, "bbox": [0, 0, 10, 10], "score": 0.5},
                            {"image_id": "p0", "bbox": [0, 0, 10, 10], "score": 0.7}], gt)
    assert [d.patch_id for d in dets] == ["p1", "p0"]


def test_load_detections_errors():
    gt = gt_dataset([[(0, 0, 10, 10)]])
    with pytest.raises(IntegrityError):
        load_detections([{"image_id": 5, "bbox": [0, 0, 1, 1], "score": 0.5}], gt)
    with pytest.raises(ParseError):
        load_detections([{"image_id": 1, "bbox": [0, 0, 1], "score": 0.5}], gt)
    with pytest.raises(ParseError):
        load_detections({"not": "a list"}, gt)


def test_score_range():
    with pytest.raises(InvalidArgument):
        det((0, 0, 1, 1), 1.5)
