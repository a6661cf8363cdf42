"""
Patch grids at three scales
===========================

Each size class cuts the image into an n x n grid. Overlap widens every tile
on the sides it shares with a neighbour, so edge tiles grow less than
interior ones and the mean patch size lands between the two.
"""

from patchlab import ImageDims, ScaleTable, compute_grid
from patchlab.geometry import average_patch_dims

table = ScaleTable()

for dims in (ImageDims(4000, 6000), ImageDims(1365, 2048)):
    print(f"\nsource {dims.width}x{dims.height}")
    print(f"{'class':<7} {'n':>3}  " + "  ".join(f"O={o:<4}" + " " * 7 for o in (0.0, 0.1, 0.3)))
    for size_class in ("large", "medium", "small"):
        n = table.lookup(dims, size_class)
        cells = []
        for overlap in (0.0, 0.1, 0.3):
            w, h = average_patch_dims(compute_grid(dims, n, overlap, size_class))
            cells.append(f"({w:4.0f}, {h:4.0f})")
        print(f"{size_class:<7} {n:>3}  " + "  ".join(cells))

# A single row of a 6-tile grid makes the border effect visible: the first and
# last tiles only grow inwards.
grid = compute_grid(ImageDims(4000, 6000), 6, 0.1)
print("\nfirst row, x extents:", [(r.x0, r.x1) for r in grid.rects[:6]])
