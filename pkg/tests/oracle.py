"""Independent oracles for the test suite.

Everything in this file is written as a literal, unoptimized transcription
of the documented behavior — nested Python loops, no shared helpers with
the package under test. Slow on purpose: these are the second route of
every dual-route check, so they must not reuse the fast path's code.
"""

from __future__ import annotations

import math

import numpy as np

# ---------------------------------------------------------------------------
# descriptor oracle


def log_edges(m: int) -> list[float]:
    """Radius edges doubling upward to exactly 2.0."""
    return [2.0 / 2.0 ** (m - 1 - i) for i in range(m)]


def radius_ring(r: float, edges: list[float]) -> int:
    """Cumulative thresholding: count edges >= r, convert to a 0-based ring."""
    rq = 0
    for e in edges:
        if r <= e:
            rq += 1
    assert rq >= 1, f"r={r} beyond the outermost edge"
    return len(edges) - rq


def angle_sector(theta: float, n: int) -> int:
    """1-based floor quantization of the angle, returned 0-based.

    A quotient that reaches n (theta rounded onto 2*pi) stays in the last
    sector.
    """
    tq = 1 + math.floor(theta / (2.0 * math.pi / n))
    if tq > n:
        tq = n
    return tq - 1


def spd_vector(px: float, py: float, contour, m: int = 12, n: int = 6) -> np.ndarray:
    """Descriptor of one pole against a contour point list, fully spelled out."""
    edges = log_edges(m)
    hist = np.zeros(m * n, dtype=np.float64)
    if len(contour) == 0:
        raise ValueError("empty contour")
    max_raw = 0.0
    for (cx, cy) in contour:
        xgap = float(px) - float(cx)
        ygap = float(py) - float(cy)
        dist = math.sqrt(xgap * xgap + ygap * ygap)
        if dist > max_raw:
            max_raw = dist
    if max_raw == 0.0:
        return hist
    for (cx, cy) in contour:
        xgap = float(px) - float(cx)
        ygap = float(py) - float(cy)
        raw = math.sqrt(xgap * xgap + ygap * ygap)
        r = raw / (max_raw / 2.0)
        theta = math.atan2(xgap, -ygap)
        if theta < 0.0:
            theta += 2.0 * math.pi
        hist[radius_ring(r, edges) * n + angle_sector(theta, n)] += 1.0
    return hist / float(len(contour))


# ---------------------------------------------------------------------------
# region oracle


def regions_bruteforce(ids: np.ndarray) -> dict[int, tuple[list, list]]:
    """Per-ID (interior, contour) pixel lists via a per-pixel neighbor scan."""
    h, w = ids.shape
    out: dict[int, tuple[list, list]] = {}
    for y in range(h):
        for x in range(w):
            v = int(ids[y, x])
            if v == 0:
                continue
            interior, contour = out.setdefault(v, ([], []))
            interior.append((x, y))
            on_border = x == 0 or y == 0 or x == w - 1 or y == h - 1
            touches_out = False
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dx == 0 and dy == 0:
                        continue
                    nx, ny = x + dx, y + dy
                    if 0 <= nx < w and 0 <= ny < h and int(ids[ny, nx]) != v:
                        touches_out = True
            if on_border or touches_out:
                contour.append((x, y))
    return out


def spd_map(ids: np.ndarray, m: int = 12, n: int = 6) -> np.ndarray:
    """Full descriptor map, one literal spd_vector call per interior pixel."""
    h, w = ids.shape
    out = np.zeros((h, w, m * n), dtype=np.float64)
    for _id, (interior, contour) in sorted(regions_bruteforce(ids).items()):
        for (x, y) in interior:
            out[y, x] = spd_vector(x, y, contour, m, n)
    return out


# ---------------------------------------------------------------------------
# dense-op oracles (plain loops)


def conv2d_naive(x: np.ndarray, w: np.ndarray, pad: int = 1) -> np.ndarray:
    b, c, h, wd = x.shape
    co, ci, kh, kw = w.shape
    assert ci == c
    ho = h + 2 * pad - kh + 1
    wo = wd + 2 * pad - kw + 1
    out = np.zeros((b, co, ho, wo))
    for nb in range(b):
        for o in range(co):
            for yy in range(ho):
                for xx in range(wo):
                    acc = 0.0
                    for ic in range(c):
                        for i in range(kh):
                            for j in range(kw):
                                sy = yy + i - pad
                                sx = xx + j - pad
                                if 0 <= sy < h and 0 <= sx < wd:
                                    acc += x[nb, ic, sy, sx] * w[o, ic, i, j]
                    out[nb, o, yy, xx] = acc
    return out


def unfold3x3_naive(x: np.ndarray) -> np.ndarray:
    b, c, h, w = x.shape
    out = np.zeros((b, 9 * c, h, w))
    for nb in range(b):
        for ic in range(c):
            for k in range(9):
                dy, dx = k // 3 - 1, k % 3 - 1
                for yy in range(h):
                    for xx in range(w):
                        sy, sx = yy + dy, xx + dx
                        if 0 <= sy < h and 0 <= sx < w:
                            out[nb, ic * 9 + k, yy, xx] = x[nb, ic, sy, sx]
    return out


def dwconv_naive(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    b, c, h, w = x.shape
    out = np.zeros((b, c, h, w))
    for nb in range(b):
        for ic in range(c):
            for yy in range(h):
                for xx in range(w):
                    acc = 0.0
                    for k in range(9):
                        dy, dx = k // 3 - 1, k % 3 - 1
                        sy, sx = yy + dy, xx + dx
                        if 0 <= sy < h and 0 <= sx < w:
                            acc += kernels[nb, ic * 9 + k, yy, xx] * x[nb, ic, sy, sx]
                    out[nb, ic, yy, xx] = acc
    return out


def standardize_naive(x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    out = np.empty_like(x)
    for c in range(x.shape[1]):
        vals = x[:, c, :, :]
        mu = float(vals.mean())
        var = float(((vals - mu) ** 2).mean())
        out[:, c, :, :] = (vals - mu) / math.sqrt(var + eps)
    return out


def safm_forward_naive(f_prev, seg, spd, params) -> np.ndarray:
    """The whole block re-built from the naive ops above."""
    emb = conv2d_naive(spd, params.spd_embed, pad=0)
    ka = conv2d_naive(seg, params.seg_to_kernels_a, pad=1)
    kb = conv2d_naive(seg, params.seg_to_kernels_b, pad=1)
    h1 = dwconv_naive(emb, ka)
    h2 = dwconv_naive(h1, kb)
    cat = np.concatenate([h1, h2], axis=1)
    fused = conv2d_naive(cat, params.fuse, pad=1)
    gamma = conv2d_naive(fused, params.gamma_head, pad=1)
    beta = conv2d_naive(fused, params.beta_head, pad=1)
    return standardize_naive(f_prev) * (1.0 + gamma) + beta
