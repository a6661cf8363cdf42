"""
Scoring detections on patches
=============================

A tiny synthetic dataset is patched, then scored three ways: with the ground
truth itself, with the ground truth shifted so each IoU is about 0.6, and with
no detections at all.
"""

import random

from patchlab import BBox, PatchConfig
from patchlab.evaluation import Detection, detections_from_ground_truth, evaluate
from patchlab.pipeline import build_patched_dataset, coco_to_dataset

rng = random.Random(0)
images, anns = [], []
for i, (w, h) in enumerate([(4000, 6000), (2048, 1365)], start=1):
    images.append({"id": i, "file_name": f"img{i}.jpg", "width": w, "height": h})
    for _ in range(6):
        bw, bh = rng.randint(40, 150), rng.randint(40, 150)
        anns.append({"id": len(anns) + 1, "image_id": i, "category_id": 0,
                     "bbox": [rng.randint(0, w - bw), rng.randint(0, h - bh), bw, bh]})
doc = {"images": images, "annotations": anns, "categories": [{"id": 0, "name": "moose"}]}

patched = build_patched_dataset(coco_to_dataset(doc, "val"), PatchConfig(threshold=0.5, overlap=0.1))
print(f"{len(patched.patches)} patches, {patched.num_annotations} clipped boxes")

perfect = evaluate(patched, detections_from_ground_truth(patched))
print(f"ground truth as predictions: mAP@0.5={perfect.map50:.3f}  mAP@0.5:0.95={perfect.map5095:.3f}")

# Shifting a box by a quarter of its width gives IoU = 0.75 / 1.25 = 0.6.
shifted = []
for p in patched.patches:
    for k, a in enumerate(patched.annotations[p.id]):
        b = a.box
        shifted.append(Detection(p.id, BBox(b.x + b.width / 4, b.y, b.width, b.height), 0.9, 0, f"{p.id}/{k}"))
r = evaluate(patched, shifted)
print(f"shifted boxes:               mAP@0.5={r.map50:.3f}  mAP@0.5:0.95={r.map5095:.3f}")
print("  per IoU threshold:", ", ".join(f"{t:.2f}:{ap:.2f}" for t, ap in r.per_threshold))

print(f"no detections:               mAP@0.5={evaluate(patched, []).map50:.3f}")
