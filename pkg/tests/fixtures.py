"""Synthetic inputs shared across test modules."""

from __future__ import annotations

import json
import random

SOURCE_SIZES = [(4000, 6000), (6000, 4000), (1365, 2048), (2048, 1365)]


def synthetic_coco(seed: int, n_images: int = 4, boxes_per_image: int = 5, first_id: int = 1) -> dict:
    rng = random.Random(seed)
    images, anns = [], []
    for i in range(n_images):
        w, h = SOURCE_SIZES[i % len(SOURCE_SIZES)]
        iid = first_id + i
        images.append({"id": iid, "file_name": f"img_{iid}.jpg", "width": w, "height": h})
        for _ in range(boxes_per_image):
            bw, bh = rng.randint(15, 180), rng.randint(15, 180)
            anns.append({
                "id": len(anns) + 100 * first_id,
                "image_id": iid,
                "bbox": [rng.randint(0, w - bw), rng.randint(0, h - bh), bw, bh],
                "category_id": 0,
            })
    return {"images": images, "annotations": anns, "categories": [{"id": 0, "name": "moose"}]}


def write_split_files(tmp_path, seed: int = 7):
    train = tmp_path / "train.json"
    val = tmp_path / "val.json"
    train.write_text(json.dumps(synthetic_coco(seed, 4, 5, 1)))
    val.write_text(json.dumps(synthetic_coco(seed + 1, 3, 4, 50)))
    return train, val
