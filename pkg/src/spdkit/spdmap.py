"""Dense per-image descriptor maps: assembly, pooling, and the SPD1 file format.

A map holds one descriptor row per pixel (all-zero outside instances) as a
(H, W, m*n) float64 array. Files store the same payload in float32 under the
magic "SPD1"; see ``serialize`` for the exact layout.
"""

from __future__ import annotations

import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, IoError, NonDivisibleDims
from .ingest import InstanceMap, extract_instances
from .spd import BinSpec, descriptor_block

log = logging.getLogger(__name__)

MAGIC = b"SPD1"
_HEADER = struct.Struct("<4I")  # height, width, m, n (little-endian u32)

# Upper bound on pole*contour pairs per work unit, to bound the distance
# matrix to ~16 MB of float64 regardless of instance size.
_PAIRS_PER_CHUNK = 2_000_000


@dataclass(frozen=True)
class SpdMap:
    """Per-pixel descriptor field with its binning counts."""

    m: int
    n: int
    data: np.ndarray  # (H, W, m*n) float64, row-major by pixel, bins radius-major

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != self.m * self.n:
            raise ValueError(
                f"data shape {self.data.shape} does not match m*n={self.m * self.n}"
            )

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def compute_map(inst: InstanceMap, spec: BinSpec | None = None, threads: int = 1) -> SpdMap:
    """Descriptor map of every instance pixel in ``inst``.

    Each pixel of an instance gets the descriptor of its position against
    that instance's contour; background pixels stay all-zero. Work is split
    into fixed-size pole chunks; with ``threads`` > 1 the chunks run on a
    thread pool. Chunks write disjoint pixel rows and their content does not
    depend on scheduling, so serial and parallel runs produce identical bits.
    """
    spec = spec or BinSpec()
    h, w = inst.ids.shape
    out = np.zeros((h, w, spec.nbins), dtype=np.float64)

    jobs = []
    degenerate = 0
    for region in extract_instances(inst):
        if len(region.interior) == 1:
            degenerate += 1
        cx = region.contour[:, 0].astype(np.float64)
        cy = region.contour[:, 1].astype(np.float64)
        step = max(64, _PAIRS_PER_CHUNK // max(1, cx.size))
        for start in range(0, len(region.interior), step):
            jobs.append((region.interior[start:start + step], cx, cy))
    if degenerate:
        log.debug("%d single-pixel instance(s) carry zero descriptors", degenerate)

    def run(job):
        pts, cx, cy = job
        rows = descriptor_block(
            pts[:, 0].astype(np.float64), pts[:, 1].astype(np.float64), cx, cy, spec
        )
        out[pts[:, 1], pts[:, 0]] = rows

    if threads <= 1:
        for job in jobs:
            run(job)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, jobs))
    return SpdMap(m=spec.m, n=spec.n, data=out)


def pool_map(spd_map: SpdMap, factor: int, mode: str = "mean") -> SpdMap:
    """Downscale a map by a power-of-two ``factor`` per bin channel.

    ``mean`` averages factor x factor blocks, which preserves the unit-sum
    structure in expectation (and, because the factor is a power of two,
    commutes exactly with per-pixel bin sums). ``nearest`` keeps each
    block's center pixel instead, for ablation.
    """
    if factor < 1 or factor & (factor - 1):
        raise ValueError(f"pool factor must be a power of two, got {factor}")
    if mode not in ("mean", "nearest"):
        raise ValueError(f"unknown pooling mode {mode!r}")
    if factor == 1:
        return SpdMap(m=spd_map.m, n=spd_map.n, data=spd_map.data.copy())
    h, w = spd_map.height, spd_map.width
    if h % factor or w % factor:
        raise NonDivisibleDims(f"dims {h}x{w} are not divisible by factor {factor}")
    if mode == "nearest":
        data = spd_map.data[factor // 2::factor, factor // 2::factor].copy()
    else:
        blocks = spd_map.data.reshape(h // factor, factor, w // factor, factor, -1)
        data = blocks.sum(axis=(1, 3)) / float(factor * factor)
    return SpdMap(m=spd_map.m, n=spd_map.n, data=data)


def serialize(spd_map: SpdMap, path: str):
    """Write ``spd_map`` to ``path`` in the SPD1 format.

    Layout: magic "SPD1", little-endian u32 height, width, m, n, then a
    float32 payload of height*width*m*n values, pixel-major row-major with
    radius-major bins. No compression. Values are rounded from the in-memory
    float64 to the format's float32.
    """
    payload = np.ascontiguousarray(spd_map.data, dtype="<f4").tobytes()
    header = MAGIC + _HEADER.pack(spd_map.height, spd_map.width, spd_map.m, spd_map.n)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc


def deserialize(path: str) -> SpdMap:
    """Read an SPD1 file back into a map.

    The float32 payload is widened to the in-memory float64 exactly, so
    serialize(deserialize(f)) reproduces f byte for byte.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path!r}: {exc}") from exc
    if blob[:4] != MAGIC:
        raise FormatError(f"{path!r} is not an SPD1 file (bad magic)")
    if len(blob) < 4 + _HEADER.size:
        raise FormatError(f"{path!r} header is truncated")
    height, width, m, n = _HEADER.unpack_from(blob, 4)
    if m < 1 or n < 1:
        raise FormatError(f"{path!r} declares empty binning m={m} n={n}")
    expected = height * width * m * n * 4
    payload = blob[4 + _HEADER.size:]
    if len(payload) != expected:
        raise FormatError(
            f"{path!r} payload is {len(payload)} bytes, header implies {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return SpdMap(m=m, n=n, data=data.reshape(height, width, m * n))
