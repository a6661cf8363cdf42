"""Multi-scale patching of detection datasets, COCO-style scoring, and
regression analysis of patching hyperparameters."""

from .annotate import Annotation, BBox, clip_to_patch, visible_fraction
from .errors import PatchlabError
from .geometry import ImageDims, PatchConfig, PatchRect, ScaleTable, compute_grid, grids_for_image

__all__ = [
    "Annotation", "BBox", "ImageDims", "PatchConfig", "PatchRect", "PatchlabError", "ScaleTable",
    "clip_to_patch", "compute_grid", "grids_for_image", "visible_fraction",
]

__version__ = "0.1.0"
