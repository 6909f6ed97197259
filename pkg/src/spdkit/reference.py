"""Slow, literal descriptor computation used as the in-package cross-check.

One contour point at a time, plain Python floats, and the scalar
``spd.bin_index`` for every bin decision (looked up through the module at
call time, so a broken bin_index breaks this route too and the self-test
equivalence property names it). Nothing here is vectorized on purpose — the
value of the route is that it looks nothing like the fast path.
"""

from __future__ import annotations

import math

import numpy as np

from . import spd
from .ingest import InstanceMap, extract_instances
from .spd import BinSpec


def descriptor_at(px: int, py: int, contour_xy, spec: BinSpec | None = None) -> np.ndarray:
    """Histogram of ``contour_xy`` around (px, py), one point at a time.

    Matches ``spd.descriptor`` including its degenerate case: if every
    contour point sits on the origin, the vector is all zeros.
    """
    if spec is None:
        spec = BinSpec()
    points = [(float(cx), float(cy)) for cx, cy in contour_xy]
    max_raw = 0.0
    for cx, cy in points:
        dx = float(px) - cx
        dy = float(py) - cy
        max_raw = max(max_raw, math.sqrt(dx * dx + dy * dy))
    hist = np.zeros(spec.m * spec.n, dtype=np.float64)
    if max_raw == 0.0:
        return hist
    for cx, cy in points:
        dx = float(px) - cx
        dy = float(py) - cy
        raw = math.sqrt(dx * dx + dy * dy)
        r = raw / (max_raw / 2.0)
        theta = math.atan2(dx, -dy)
        if theta < 0.0:
            theta += 2.0 * math.pi
        i, j = spd.bin_index(r, theta, spec)
        hist[i * spec.n + j] += 1.0
    return hist / float(len(points))


def map_reference(inst: InstanceMap, spec: BinSpec | None = None) -> np.ndarray:
    """Full descriptor map via ``descriptor_at`` on every interior pixel."""
    if spec is None:
        spec = BinSpec()
    out = np.zeros((inst.height, inst.width, spec.m * spec.n), dtype=np.float64)
    for region in extract_instances(inst):
        contour = [tuple(p) for p in region.contour]
        for px, py in region.interior:
            out[py, px] = descriptor_at(int(px), int(py), contour, spec)
    return out
