"""Loading of label/instance grids and extraction of instance regions.

Grids come in as binary PGM (P5, 8-bit), indexed PNG (the palette index is
the ID), or plain CSV of integers. A pixel's coordinate is (x, y) with x
running right and y running down; point lists are emitted in row-major scan
order so downstream output is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClassOutOfRange, FormatError, IoError

FORMATS = ("pgm", "png-indexed", "raw-csv")

_EXTENSIONS = {".pgm": "pgm", ".png": "png-indexed", ".csv": "raw-csv"}


@dataclass(frozen=True)
class LabelMap:
    """H x W grid of semantic class IDs; 0 means unlabeled."""

    classes: np.ndarray

    def __post_init__(self):
        _check_grid(self.classes, "class")

    @property
    def width(self) -> int:
        return self.classes.shape[1]

    @property
    def height(self) -> int:
        return self.classes.shape[0]


@dataclass(frozen=True)
class InstanceMap:
    """H x W grid of instance IDs; 0 means no instance (stuff/background)."""

    ids: np.ndarray

    def __post_init__(self):
        _check_grid(self.ids, "instance")

    @property
    def width(self) -> int:
        return self.ids.shape[1]

    @property
    def height(self) -> int:
        return self.ids.shape[0]


@dataclass(frozen=True)
class InstanceRegion:
    """One instance's pixels: the full interior and its boundary subset.

    ``interior`` and ``contour`` are (N, 2) integer arrays of (x, y) pixel
    coordinates in row-major scan order. A contour pixel is an interior
    pixel with at least one 8-neighbor outside the instance mask, or one
    lying on the image border. IDs spread over several disconnected
    components still form a single region whose contour is the union.
    """

    id: int
    interior: np.ndarray
    contour: np.ndarray


def _check_grid(grid: np.ndarray, kind: str):
    if grid.ndim != 2:
        raise ValueError(f"{kind} grid must be 2-D, got shape {grid.shape}")
    if not np.issubdtype(grid.dtype, np.integer):
        raise ValueError(f"{kind} grid must be integer-typed, got {grid.dtype}")
    if grid.size and grid.min() < 0:
        raise FormatError(f"negative {kind} IDs are not allowed")


def resolve_format(path: str, fmt: str | None = None) -> str:
    """Pick a loader format: an explicit name wins, else the file extension."""
    if fmt:
        if fmt not in FORMATS:
            raise FormatError(f"unknown format {fmt!r}; expected one of {FORMATS}")
        return fmt
    ext = "." + path.rsplit(".", 1)[-1].lower() if "." in path else ""
    if ext not in _EXTENSIONS:
        raise FormatError(f"cannot infer format from {path!r}; pass one of {FORMATS}")
    return _EXTENSIONS[ext]


def load_label_map(path: str, fmt: str | None = None) -> LabelMap:
    """Read a semantic label grid from ``path`` (see module docstring for formats)."""
    return LabelMap(classes=_load_grid(path, resolve_format(path, fmt)))


def load_instance_map(path: str, fmt: str | None = None) -> InstanceMap:
    """Read an instance ID grid from ``path`` (see module docstring for formats)."""
    return InstanceMap(ids=_load_grid(path, resolve_format(path, fmt)))


def _load_grid(path: str, fmt: str) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path!r}: {exc}") from exc
    if fmt == "pgm":
        return _parse_pgm(blob)
    if fmt == "png-indexed":
        return _parse_indexed_png(blob, path)
    return _parse_csv(blob, path)


def _parse_pgm(blob: bytes) -> np.ndarray:
    # P5 header: magic, width, height, maxval, single whitespace, raw bytes.
    # '#' comments may appear between header tokens.
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(blob):
            c = blob[pos:pos + 1]
            if c == b"#":
                nl = blob.find(b"\n", pos)
                pos = len(blob) if nl < 0 else nl + 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        return blob[start:pos]

    if next_token() != b"P5":
        raise FormatError("not a binary PGM: magic is not P5")
    try:
        width, height, maxval = (int(next_token()) for _ in range(3))
    except ValueError as exc:
        raise FormatError(f"bad PGM header: {exc}") from exc
    if width <= 0 or height <= 0:
        raise FormatError(f"bad PGM dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise FormatError(f"only 8-bit PGM is supported, maxval={maxval}")
    pos += 1  # single whitespace after maxval
    payload = blob[pos:pos + width * height]
    if len(payload) < width * height:
        raise FormatError(
            f"PGM payload holds {len(payload)} values, header says {width}x{height}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).astype(np.int64)


def _parse_indexed_png(blob: bytes, path: str) -> np.ndarray:
    import io

    from PIL import Image, UnidentifiedImageError

    try:
        img = Image.open(io.BytesIO(blob))
        img.load()
    except UnidentifiedImageError as exc:
        raise FormatError(f"{path!r} is not a PNG image") from exc
    except OSError as exc:
        raise FormatError(f"{path!r} failed to decode: {exc}") from exc
    if img.format != "PNG":
        raise FormatError(f"{path!r} is {img.format}, expected PNG")
    if img.mode != "P":
        raise FormatError(f"{path!r} is not palette-indexed (mode {img.mode})")
    return np.asarray(img, dtype=np.int64)


def _parse_csv(blob: bytes, path: str) -> np.ndarray:
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path!r} is not text: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([int(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise FormatError(f"{path!r} line {lineno}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path!r} holds no rows")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise FormatError(f"{path!r} has ragged rows (expected {width} columns)")
    return np.asarray(rows, dtype=np.int64)


def extract_instances(inst: InstanceMap) -> list[InstanceRegion]:
    """All instance regions of ``inst``, sorted by ID.

    The interior is every pixel carrying the ID; the contour keeps the
    interior pixels whose 8-neighborhood leaves the mask or that lie on the
    image border. The scan itself is order-free: output depends only on the
    grid content.
    """
    ids = np.unique(inst.ids)
    ids = ids[ids != 0]
    regions = []
    for i in ids:
        mask = inst.ids == i
        contour_mask = mask & ~_erode8(mask)
        regions.append(InstanceRegion(
            id=int(i),
            interior=np.argwhere(mask)[:, ::-1].astype(np.int64),
            contour=np.argwhere(contour_mask)[:, ::-1].astype(np.int64),
        ))
    return regions


def _erode8(mask: np.ndarray) -> np.ndarray:
    """Pixels whose full 8-neighborhood stays inside the mask.

    The pad treats everything beyond the image border as outside, so border
    pixels never survive.
    """
    h, w = mask.shape
    padded = np.pad(mask, 1, constant_values=False)
    out = mask.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            out &= padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return out


def one_hot(labels: LabelMap, num_classes: int) -> np.ndarray:
    """One-hot layout of shape (1, num_classes, H, W) with float 0/1 entries."""
    cls = labels.classes
    if cls.size and cls.max() >= num_classes:
        raise ClassOutOfRange(
            f"class ID {int(cls.max())} does not fit num_classes={num_classes}"
        )
    h, w = cls.shape
    out = np.zeros((1, num_classes, h, w), dtype=np.float64)
    out[0, cls, np.arange(h)[:, None], np.arange(w)[None, :]] = 1.0
    return out
