"""Log-polar histogram descriptor of a point's position inside an instance contour.

Every interior point of an instance gets a histogram over ``m`` radius rings
and ``n`` angle sectors recording where the instance's contour points fall
relative to it. Distances are scaled per point by half the maximum
point-to-contour distance, so the farthest contour point always sits exactly
on the outermost ring edge (r = 2). That normalization makes the descriptor
independent of absolute position and, in continuous coordinates, exactly
independent of uniform scale; counts are divided by the contour size so a
non-empty contour always contributes total mass 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistance, EmptyContour, OutOfRange

TWO_PI = 2.0 * np.pi

# Grace margin above the outermost radius edge. Normalization puts the
# farthest point at exactly 2.0; anything further than this is a caller bug.
_R_EPS = 1e-9


@dataclass(frozen=True)
class BinSpec:
    """Log-polar binning: ``m`` radius rings and ``n`` uniform angle sectors.

    ``r_edges`` holds the m ascending upper edges of the radius rings. The
    default ladder halves at every step down from the outermost edge 2.0
    (log-uniform with ratio 2), and the innermost ring has no lower cutoff.
    Custom edges may be supplied for sensitivity studies as long as they
    ascend strictly and end at exactly 2.0.
    """

    m: int = 12
    n: int = 6
    r_edges: np.ndarray | None = None

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("bin counts must be >= 1")
        if self.r_edges is None:
            edges = 2.0 * 2.0 ** -np.arange(self.m - 1, -1, -1, dtype=np.float64)
            object.__setattr__(self, "r_edges", edges)
        else:
            edges = np.array(self.r_edges, dtype=np.float64)
            if edges.shape != (self.m,):
                raise ValueError("r_edges must have exactly m entries")
            if np.any(np.diff(edges) <= 0):
                raise ValueError("r_edges must ascend strictly")
            if edges[-1] != 2.0:
                raise ValueError("the outermost radius edge must be exactly 2.0")
            object.__setattr__(self, "r_edges", edges)
        self.r_edges.setflags(write=False)

    @property
    def nbins(self) -> int:
        return self.m * self.n


@dataclass(frozen=True)
class PolarOffsets:
    """Polar coordinates of contour points around one pole.

    ``r`` is the normalized distance in [0, 2] and ``theta`` the angle in
    [0, 2*pi); both have one entry per contour point.
    """

    r: np.ndarray
    theta: np.ndarray


def polar_transform(o, contour) -> PolarOffsets:
    """Polar coordinates of every contour point as seen from pole ``o``.

    Coordinates follow the image convention (x right, y down). With
    dx = o.x - c.x and dy = o.y - c.y per contour point c, the angle is
    atan2(dx, -dy) wrapped into [0, 2*pi), so zero points up-screen and
    angles grow clockwise on screen. Distances are divided by half their
    maximum, which puts the farthest contour point at exactly r = 2.

    Raises EmptyContour for an empty point set and DegenerateDistance when
    the maximum raw distance is zero (the pole coincides with the sole
    contour point), since the normalization is undefined there.
    """
    pts = np.asarray(contour, dtype=np.float64)
    if pts.size == 0:
        raise EmptyContour("contour point set is empty")
    pts = pts.reshape(-1, 2)
    dx = float(o[0]) - pts[:, 0]
    dy = float(o[1]) - pts[:, 1]
    raw = np.sqrt(dx * dx + dy * dy)
    max_raw = float(raw.max())
    if max_raw == 0.0:
        raise DegenerateDistance("pole coincides with every contour point")
    r = raw / (max_raw / 2.0)
    theta = np.arctan2(dx, -dy)
    theta = np.where(theta < 0.0, theta + TWO_PI, theta)
    return PolarOffsets(r=r, theta=theta)


def bin_index(r: float, theta: float, spec: BinSpec) -> tuple[int, int]:
    """Map one polar offset to its (radius_bin, angle_bin) pair.

    Radius rings are cumulative: the first ring whose upper edge is >= r
    wins, so the innermost ring has no lower cutoff and the outermost edge
    is inclusive (the farthest contour point, at exactly r = 2, must count).
    Angle sectors have width 2*pi/n; quotients that reach n through float
    rounding of angles just below 2*pi clamp into the last sector.
    """
    edges = spec.r_edges
    if r > edges[-1] + _R_EPS:
        raise OutOfRange(f"normalized distance {r!r} exceeds outermost edge {edges[-1]!r}")
    i = int(np.searchsorted(edges, r, side="left"))
    if i == spec.m:
        i = spec.m - 1
    j = int(theta / (TWO_PI / spec.n))
    if j >= spec.n:
        j = spec.n - 1
    return i, j


def descriptor(o, contour, spec: BinSpec | None = None) -> np.ndarray:
    """Normalized histogram of ``contour`` as seen from ``o``, radius-major.

    Returns a float64 vector of length m*n whose entry [i*n + j] is the
    fraction of contour points falling in radius ring i and angle sector j.
    Entries sum to exactly 1 for any non-empty, non-degenerate contour.
    The degenerate case (no distance scale: the pole coincides with every
    contour point) yields the all-zero vector, matching the background
    encoding of descriptor maps, rather than propagating NaN.
    """
    spec = spec or BinSpec()
    try:
        polar = polar_transform(o, contour)
    except DegenerateDistance:
        return np.zeros(spec.nbins, dtype=np.float64)
    flat = radius_bins(polar.r, spec) * spec.n + angle_bins(polar.theta, spec.n)
    counts = np.bincount(flat, minlength=spec.nbins)
    return counts.astype(np.float64) / polar.r.size


def radius_bins(r: np.ndarray, spec: BinSpec) -> np.ndarray:
    """Vectorized radius ring lookup; same semantics as ``bin_index``."""
    edges = spec.r_edges
    if np.any(r > edges[-1] + _R_EPS):
        raise OutOfRange("normalized distances exceed the outermost edge")
    idx = np.searchsorted(edges, r, side="left")
    return np.minimum(idx, spec.m - 1)


def angle_bins(theta: np.ndarray, n: int) -> np.ndarray:
    """Vectorized angle sector lookup; same semantics as ``bin_index``."""
    j = (theta / (TWO_PI / n)).astype(np.int64)
    return np.minimum(j, n - 1)


def descriptor_block(px: np.ndarray, py: np.ndarray, cx: np.ndarray, cy: np.ndarray,
                     spec: BinSpec) -> np.ndarray:
    """Descriptors of many poles against one contour, one row per pole.

    Exactly the arithmetic of ``descriptor`` applied row-wise; rows of
    degenerate poles come back all-zero. Kept in this module so the scalar
    and the batched paths share one definition of the binning.
    """
    dx = px[:, None] - cx[None, :]
    dy = py[:, None] - cy[None, :]
    raw = np.sqrt(dx * dx + dy * dy)
    max_raw = raw.max(axis=1)
    degenerate = max_raw == 0.0
    safe = np.where(degenerate, 1.0, max_raw)
    r = raw / (safe[:, None] / 2.0)
    theta = np.arctan2(dx, -dy)
    theta = np.where(theta < 0.0, theta + TWO_PI, theta)
    flat = radius_bins(r, spec) * spec.n + angle_bins(theta, spec.n)
    nb = spec.nbins
    rows = np.arange(px.size, dtype=np.int64)[:, None]
    counts = np.bincount((rows * nb + flat).ravel(), minlength=px.size * nb)
    out = counts.reshape(px.size, nb).astype(np.float64) / cx.size
    out[degenerate] = 0.0
    return out
