"""Procedural instance maps: fixed shapes for invariance checks, randomized
maps for equivalence sweeps, and a deterministic benchmark scene.

All generators return ``InstanceMap`` grids with background 0 and instance
ids 1..k. Shapes may overlap; later ids overwrite earlier ones, which is a
feature — partially occluded regions exercise odd contours.
"""

from __future__ import annotations

import numpy as np

from .ingest import InstanceMap


def blank(height: int, width: int) -> np.ndarray:
    return np.zeros((height, width), dtype=np.int64)


def add_rect(grid: np.ndarray, x0: int, y0: int, w: int, h: int, inst_id: int):
    """Paint an axis-aligned w-by-h rectangle, clipped to the grid."""
    gh, gw = grid.shape
    grid[max(0, y0):min(gh, y0 + h), max(0, x0):min(gw, x0 + w)] = inst_id


def add_disk(grid: np.ndarray, cx: int, cy: int, radius: int, inst_id: int):
    """Paint the pixels with (x-cx)^2 + (y-cy)^2 <= radius^2."""
    gh, gw = grid.shape
    yy, xx = np.mgrid[0:gh, 0:gw]
    grid[(xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius] = inst_id


def square_map(side: int, offset: tuple[int, int] = (1, 1),
               shape: tuple[int, int] | None = None) -> InstanceMap:
    """One square of ``side`` pixels with its top-left corner at ``offset``."""
    x0, y0 = offset
    if shape is None:
        shape = (y0 + side + 1, x0 + side + 1)
    grid = blank(*shape)
    add_rect(grid, x0, y0, side, side, 1)
    return InstanceMap(grid)


def disk_map(radius: int, center: tuple[int, int] | None = None,
             shape: tuple[int, int] | None = None) -> InstanceMap:
    """One rasterized disk. Default canvas leaves a 1-pixel margin."""
    if center is None:
        center = (radius + 1, radius + 1)
    cx, cy = center
    if shape is None:
        shape = (cy + radius + 2, cx + radius + 2)
    grid = blank(*shape)
    add_disk(grid, cx, cy, radius, 1)
    return InstanceMap(grid)


def car_map(scale: int = 1, offset: tuple[int, int] = (4, 4)) -> InstanceMap:
    """Side view of a car: body slab, cabin, two wheels, one instance id.

    Integer ``scale`` re-rasterizes the same silhouette at another size, so
    pairs of these maps make natural fixtures for scale-robustness checks.
    Returns the map; landmark pixels are at ``car_landmarks``.
    """
    x0, y0 = offset
    s = scale
    grid = blank((y0 + 14) * s + 2, (x0 + 26) * s + 2)
    add_rect(grid, (x0 + 4) * s, y0 * s, 14 * s, 5 * s, 1)        # cabin
    add_rect(grid, x0 * s, (y0 + 4) * s, 24 * s, 6 * s, 1)        # body
    add_disk(grid, (x0 + 5) * s, (y0 + 10) * s, 3 * s, 1)         # rear wheel
    add_disk(grid, (x0 + 19) * s, (y0 + 10) * s, 3 * s, 1)        # front wheel
    return InstanceMap(grid)


def car_landmarks(scale: int = 1, offset: tuple[int, int] = (4, 4)) -> dict[str, tuple[int, int]]:
    """Named pixels of ``car_map`` at the same scale: wheel hubs, body, cabin."""
    x0, y0 = offset
    s = scale
    return {
        "rear_wheel": ((x0 + 5) * s, (y0 + 10) * s),
        "front_wheel": ((x0 + 19) * s, (y0 + 10) * s),
        "body_center": ((x0 + 12) * s, (y0 + 7) * s),
        "cabin_center": ((x0 + 11) * s, (y0 + 2) * s),
    }


def random_map(rng: np.random.Generator, height: int, width: int,
               max_instances: int = 4) -> InstanceMap:
    """A few random rectangles and disks; may include none at all."""
    grid = blank(height, width)
    for inst_id in range(1, int(rng.integers(0, max_instances + 1)) + 1):
        if rng.random() < 0.5:
            w = int(rng.integers(1, max(2, width // 2)))
            h = int(rng.integers(1, max(2, height // 2)))
            x0 = int(rng.integers(-2, width - 1))
            y0 = int(rng.integers(-2, height - 1))
            add_rect(grid, x0, y0, w, h, inst_id)
        else:
            r = int(rng.integers(1, max(2, min(height, width) // 3)))
            cx = int(rng.integers(0, width))
            cy = int(rng.integers(0, height))
            add_disk(grid, cx, cy, r, inst_id)
    return InstanceMap(grid)


def bench_scene(height: int = 256, width: int = 512) -> InstanceMap:
    """Deterministic scene with a spread of instance sizes and shapes."""
    grid = blank(height, width)
    inst_id = 1
    for i, r in enumerate((6, 9, 12, 16, 20, 25)):
        add_disk(grid, 40 + i * 75, 60, r, inst_id)
        inst_id += 1
    for i, s in enumerate((8, 14, 22, 30)):
        add_rect(grid, 30 + i * 110, 130, s, s, inst_id)
        inst_id += 1
    add_rect(grid, 60, 190, 300, 18, inst_id)            # a long thin slab
    inst_id += 1
    add_disk(grid, 340, 200, 30, inst_id)                # occludes the slab's end
    return InstanceMap(grid)
