import random

import numpy as np
import pytest

from oracles import raster_fraction
from patchlab.annotate import Annotation, BBox, clip_to_patch, remap_to_image, visible_fraction
from patchlab.errors import InvalidAnnotation, InvalidArgument
from patchlab.geometry import PatchRect


def rect(x0, y0, w, h):
    return PatchRect(x0, y0, w, h, "large", 0, 0)


def test_fully_inside_is_one():
    assert visible_fraction(BBox(10, 10, 5, 5), rect(0, 0, 100, 100)) == 1.0


def test_half_cut():
    assert visible_fraction(BBox(0, 0, 10, 10), rect(5, 0, 96, 100)) == 0.5


def test_zero_area_box_rejected():
    with pytest.raises(InvalidAnnotation):
        BBox(0, 0, 0, 5)


def test_fraction_against_monte_carlo():
    rng = np.random.default_rng(0)
    for _ in range(20):
        box = BBox(*rng.uniform(0, 50, 2), *rng.uniform(1, 40, 2))
        r = rect(*rng.integers(0, 50, 2), *rng.integers(5, 60, 2))
        pts = rng.uniform(0, 1, (100_000, 2)) * [box.width, box.height] + [box.x, box.y]
        inside = ((pts[:, 0] >= r.x0) & (pts[:, 0] < r.x1) & (pts[:, 1] >= r.y0) & (pts[:, 1] < r.y1)).mean()
        assert visible_fraction(box, r) == pytest.approx(inside, abs=1e-2)


def test_fraction_against_raster_count():
    rng = random.Random(4)
    for _ in range(200):
        box = (rng.randint(0, 40), rng.randint(0, 40), rng.randint(1, 30), rng.randint(1, 30))
        r = (rng.randint(0, 40), rng.randint(0, 40), rng.randint(1, 30), rng.randint(1, 30))
        assert visible_fraction(BBox(*box), rect(*r)) == pytest.approx(raster_fraction(box, r), abs=1e-12)


def ann(x, y, w, h):
    return Annotation(BBox(x, y, w, h), "img", 0, 1)


def test_threshold_equality_keeps():
    pa = clip_to_patch(ann(0, 0, 10, 10), rect(5, 0, 100, 100), 0.5)
    assert pa is not None and pa.visible_fraction == 0.5
    assert pa.box == BBox(0, 0, 5, 10)


def test_full_visibility_required_at_one():
    assert clip_to_patch(ann(0, 0, 10, 10), rect(7, 0, 100, 100), 1.0) is None


def test_disjoint_never_emitted():
    assert clip_to_patch(ann(0, 0, 10, 10), rect(50, 50, 10, 10), 0.0) is None


def test_threshold_out_of_range():
    with pytest.raises(InvalidArgument):
        clip_to_patch(ann(0, 0, 10, 10), rect(0, 0, 10, 10), 1.5)


def test_clip_records_source_and_patch():
    r = PatchRect(0, 0, 50, 50, "small", 2, 3)
    pa = clip_to_patch(Annotation(BBox(1, 1, 2, 2), "im7", 4, 99), r, 0.5)
    assert pa.source == ("im7", 99) and pa.patch == ("small", 2, 3) and pa.category == 4


def test_remap_translation():
    assert remap_to_image(BBox(0, 0, 5, 5), rect(100, 200, 50, 50)) == BBox(100, 200, 5, 5)


def test_remap_rejects_box_past_patch():
    with pytest.raises(InvalidArgument):
        remap_to_image(BBox(40, 0, 20, 5), rect(0, 0, 50, 50))


def test_clip_then_remap_recovers_clipped_region():
    rng = random.Random(9)
    for _ in range(500):
        r = rect(rng.randint(0, 100), rng.randint(0, 100), rng.randint(10, 100), rng.randint(10, 100))
        a = ann(rng.uniform(0, 200), rng.uniform(0, 200), rng.uniform(2, 60), rng.uniform(2, 60))
        pa = clip_to_patch(a, r, 0.0)
        if pa is None:
            continue
        back = remap_to_image(pa.box, r)
        assert back.x == pytest.approx(max(a.box.x, r.x0))
        assert back.y == pytest.approx(max(a.box.y, r.y0))
        assert back.x1 == pytest.approx(min(a.box.x1, r.x1))
        assert back.y1 == pytest.approx(min(a.box.y1, r.y1))


def test_fully_contained_round_trip_is_identity():
    rng = random.Random(10)
    for _ in range(500):
        r = rect(rng.randint(0, 100), rng.randint(0, 100), 100, 100)
        w, h = rng.uniform(1, 50), rng.uniform(1, 50)
        a = ann(r.x0 + rng.uniform(0, 100 - w), r.y0 + rng.uniform(0, 100 - h), w, h)
        back = remap_to_image(clip_to_patch(a, r, 1.0).box, r)
        assert back.as_list() == pytest.approx(a.box.as_list(), abs=1e-9)
