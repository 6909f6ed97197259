"""Reference forward pass of the semantic-shape adaptive feature modulation block.

The block takes three activations that share spatial dims: the features to
modulate ``f_prev`` (N, Cf, H, W), a one-hot semantic layout (N, C, H, W),
and a descriptor map laid out as channels (N, B, H, W). Two convolutions on
the layout predict per-position 3x3 depthwise kernel banks; the descriptor
channels are embedded to D channels and filtered twice by those predicted
kernels, so the class at each position decides how that position's shape
features are mixed. The two filtering stages are concatenated, fused by one
3x3 convolution, and mapped by two heads to per-position modulation maps
(gamma, beta); the output is standardize(f_prev) * (1 + gamma) + beta.

Everything is plain float64 numpy with no learned state: all weights live in
``SafmParams`` and there are no biases or activations, so the block is an
exact identity transform of the standardized input at zero init, and it is
smooth, which the finite-difference gradient checks rely on.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields

import numpy as np

from .errors import FormatError, IoError, NonFinite, ShapeMismatch

# Patch slot k of a 3x3 window is (dy, dx) = (k // 3 - 1, k % 3 - 1); unfold
# output and kernel banks both use channel index c * 9 + k.
_OFFSETS = [(k // 3 - 1, k % 3 - 1) for k in range(9)]

_STANDARDIZE_EPS = 1e-5


def _require(cond: bool, msg: str):
    if not cond:
        raise ShapeMismatch(msg)


def conv2d(x: np.ndarray, w: np.ndarray, stride: int = 1, pad: int = 1) -> np.ndarray:
    """Cross-correlation of (N, C, H, W) input with (Co, C, kh, kw) weights."""
    _require(x.ndim == 4, f"input must be 4-D, got {x.shape}")
    _require(w.ndim == 4, f"weights must be 4-D, got {w.shape}")
    n, c, h, wd = x.shape
    co, ci, kh, kw = w.shape
    _require(ci == c, f"weights expect {ci} input channels, input has {c}")
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (wd + 2 * pad - kw) // stride + 1
    _require(ho > 0 and wo > 0, f"kernel {kh}x{kw} does not fit input {h}x{wd} with pad {pad}")
    out = np.zeros((n, co, ho, wo), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, :, i:i + ho * stride:stride, j:j + wo * stride:stride]
            out += np.einsum("nchw,oc->nohw", patch, w[:, :, i, j])
    return out


def conv2d_backward(x: np.ndarray, w: np.ndarray, grad_out: np.ndarray,
                    pad: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Input and weight gradients of stride-1 ``conv2d`` for cotangent ``grad_out``."""
    n, c, h, wd = x.shape
    co, ci, kh, kw = w.shape
    _require(grad_out.shape == (n, co, h + 2 * pad - kh + 1, wd + 2 * pad - kw + 1),
             f"cotangent shape {grad_out.shape} does not match the forward output")
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    ho, wo = grad_out.shape[2:]
    grad_w = np.zeros_like(w)
    grad_xp = np.zeros_like(xp)
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, :, i:i + ho, j:j + wo]
            grad_w[:, :, i, j] = np.einsum("nohw,nchw->oc", grad_out, patch)
            grad_xp[:, :, i:i + ho, j:j + wo] += np.einsum(
                "nohw,oc->nchw", grad_out, w[:, :, i, j]
            )
    grad_x = grad_xp[:, :, pad:pad + h, pad:pad + wd] if pad else grad_xp
    return grad_x, grad_w


def unfold3x3(x: np.ndarray) -> np.ndarray:
    """Sliding 3x3 patches of ``x`` as channels: (N, C, H, W) -> (N, 9C, H, W).

    Output channel c*9 + k holds input channel c shifted by patch offset k;
    patches hanging over the border read zeros.
    """
    _require(x.ndim == 4, f"input must be 4-D, got {x.shape}")
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    out = np.empty((n, c, 9, h, w), dtype=np.float64)
    for k, (dy, dx) in enumerate(_OFFSETS):
        out[:, :, k] = xp[:, :, 1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return out.reshape(n, c * 9, h, w)


def dynamic_depthwise_conv(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """Depthwise 3x3 filtering with a different kernel at every position.

    ``kernels`` has shape (N, 9C, H, W): channel c*9 + k is the weight of
    patch slot k for input channel c at each position. Output:
    out[n, c, p] = sum_k kernels[n, c*9 + k, p] * patch(x, n, c, p)[k].
    """
    n, c, h, w = x.shape
    _require(kernels.shape == (n, 9 * c, h, w),
             f"kernels {kernels.shape} do not match input {x.shape} (need (N, 9C, H, W))")
    patches = unfold3x3(x).reshape(n, c, 9, h, w)
    return (patches * kernels.reshape(n, c, 9, h, w)).sum(axis=2)


def dynamic_depthwise_backward(x: np.ndarray, kernels: np.ndarray,
                               grad_out: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Input and kernel gradients of ``dynamic_depthwise_conv``."""
    n, c, h, w = x.shape
    _require(grad_out.shape == x.shape, "cotangent must match the input shape")
    patches = unfold3x3(x).reshape(n, c, 9, h, w)
    grad_kernels = (patches * grad_out[:, :, None]).reshape(n, 9 * c, h, w)
    kern = kernels.reshape(n, c, 9, h, w)
    grad_xp = np.zeros((n, c, h + 2, w + 2), dtype=np.float64)
    for k, (dy, dx) in enumerate(_OFFSETS):
        grad_xp[:, :, 1 + dy:1 + dy + h, 1 + dx:1 + dx + w] += grad_out * kern[:, :, k]
    return grad_xp[:, :, 1:1 + h, 1:1 + w], grad_kernels


def standardize(x: np.ndarray) -> np.ndarray:
    """Parameter-free per-channel standardization over batch and spatial dims.

    Returns (x - mean) / sqrt(var + 1e-5) per channel. The epsilon floor
    sends constant channels to zero instead of NaN.
    """
    _require(x.ndim == 4, f"input must be 4-D, got {x.shape}")
    mean = x.mean(axis=(0, 2, 3), keepdims=True)
    var = ((x - mean) ** 2).mean(axis=(0, 2, 3), keepdims=True)
    return (x - mean) / np.sqrt(var + _STANDARDIZE_EPS)


def standardize_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """Input gradient of ``standardize``.

    With xh = (x - mean)/s and reductions over batch+spatial per channel:
    dx = (g - mean(g) - xh * mean(g * xh)) / s.
    """
    mean = x.mean(axis=(0, 2, 3), keepdims=True)
    var = ((x - mean) ** 2).mean(axis=(0, 2, 3), keepdims=True)
    s = np.sqrt(var + _STANDARDIZE_EPS)
    xh = (x - mean) / s
    g_mean = grad_out.mean(axis=(0, 2, 3), keepdims=True)
    gx_mean = (grad_out * xh).mean(axis=(0, 2, 3), keepdims=True)
    return (grad_out - g_mean - xh * gx_mean) / s


@dataclass
class SafmParams:
    """All weights of the block. Shapes, with C = layout classes, B = descriptor
    bins, D = embedded descriptor channels, Hd = fuse width, Cf = feature channels:

    - spd_embed:        (D, B, 1, 1)    1x1 embedding of descriptor channels
    - seg_to_kernels_a: (9D, C, 3, 3)   first predicted depthwise kernel bank
    - seg_to_kernels_b: (9D, C, 3, 3)   second predicted depthwise kernel bank
    - fuse:             (Hd, 2D, 3, 3)  fusion of both filtering stages
    - gamma_head:       (Cf, Hd, 3, 3)  multiplicative modulation map
    - beta_head:        (Cf, Hd, 3, 3)  additive modulation map
    """

    spd_embed: np.ndarray
    seg_to_kernels_a: np.ndarray
    seg_to_kernels_b: np.ndarray
    fuse: np.ndarray
    gamma_head: np.ndarray
    beta_head: np.ndarray

    def __post_init__(self):
        d = self.spd_embed.shape[0]
        c = self.seg_to_kernels_a.shape[1]
        hd = self.fuse.shape[0]
        cf = self.gamma_head.shape[0]
        shapes = {
            "spd_embed": (d, self.spd_embed.shape[1], 1, 1),
            "seg_to_kernels_a": (9 * d, c, 3, 3),
            "seg_to_kernels_b": (9 * d, c, 3, 3),
            "fuse": (hd, 2 * d, 3, 3),
            "gamma_head": (cf, hd, 3, 3),
            "beta_head": (cf, hd, 3, 3),
        }
        for name, want in shapes.items():
            got = getattr(self, name).shape
            if got != want:
                raise ShapeMismatch(f"{name} has shape {got}, expected {want}")
            if not np.isfinite(getattr(self, name)).all():
                raise NonFinite(f"{name} holds non-finite entries")

    @classmethod
    def zeros(cls, num_classes: int = 8, bins: int = 72, embed: int = 16,
              hidden: int = 32, feat: int = 8) -> "SafmParams":
        return cls(
            spd_embed=np.zeros((embed, bins, 1, 1)),
            seg_to_kernels_a=np.zeros((9 * embed, num_classes, 3, 3)),
            seg_to_kernels_b=np.zeros((9 * embed, num_classes, 3, 3)),
            fuse=np.zeros((hidden, 2 * embed, 3, 3)),
            gamma_head=np.zeros((feat, hidden, 3, 3)),
            beta_head=np.zeros((feat, hidden, 3, 3)),
        )

    @classmethod
    def random(cls, rng: np.random.Generator, num_classes: int = 8, bins: int = 72,
               embed: int = 16, hidden: int = 32, feat: int = 8,
               scale: float = 0.1) -> "SafmParams":
        p = cls.zeros(num_classes, bins, embed, hidden, feat)
        for f in fields(cls):
            arr = getattr(p, f.name)
            arr += rng.normal(scale=scale, size=arr.shape)
        return p

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, f.name) for f in fields(self)]


def save_params_csv(params: SafmParams, path: str) -> None:
    """Write every weight tensor as one CSV row: name, 4 dims, flat values.

    Values are written with ``repr`` so the float64 bits survive the text
    round trip.
    """
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for fld in fields(SafmParams):
            arr = getattr(params, fld.name)
            writer.writerow([fld.name, *arr.shape,
                             *(repr(float(v)) for v in arr.ravel())])


def load_params_csv(path: str) -> SafmParams:
    """Rebuild :class:`SafmParams` from the row-per-tensor CSV fixture format."""
    try:
        with open(path, newline="") as f:
            rows = {row[0]: row[1:] for row in csv.reader(f) if row}
    except OSError as exc:
        raise IoError(f"cannot read parameter file {path}: {exc}") from exc
    kwargs = {}
    for fld in fields(SafmParams):
        if fld.name not in rows:
            raise FormatError(f"{path} is missing tensor {fld.name!r}")
        row = rows[fld.name]
        try:
            shape = tuple(int(t) for t in row[:4])
            values = np.array([float(t) for t in row[4:]], dtype=np.float64)
        except ValueError as exc:
            raise FormatError(f"{path}: bad entry in {fld.name!r}: {exc}") from exc
        if values.size != int(np.prod(shape)):
            raise FormatError(
                f"{path}: {fld.name!r} declares shape {shape} "
                f"({int(np.prod(shape))} values) but holds {values.size}"
            )
        kwargs[fld.name] = values.reshape(shape)
    return SafmParams(**kwargs)


def _forward_parts(f_prev, seg_onehot, spd, params: SafmParams):
    _require(f_prev.ndim == 4 and seg_onehot.ndim == 4 and spd.ndim == 4,
             "all inputs must be 4-D (N, C, H, W)")
    _require(f_prev.shape[0] == seg_onehot.shape[0] == spd.shape[0],
             "batch sizes differ")
    _require(f_prev.shape[2:] == seg_onehot.shape[2:] == spd.shape[2:],
             "spatial dims differ; pool the layout and descriptor map first")
    if not np.isfinite(f_prev).all():
        raise NonFinite("f_prev holds non-finite entries")
    emb = conv2d(spd, params.spd_embed, pad=0)
    kern_a = conv2d(seg_onehot, params.seg_to_kernels_a, pad=1)
    kern_b = conv2d(seg_onehot, params.seg_to_kernels_b, pad=1)
    h1 = dynamic_depthwise_conv(emb, kern_a)
    h2 = dynamic_depthwise_conv(h1, kern_b)
    cat = np.concatenate([h1, h2], axis=1)
    fused = conv2d(cat, params.fuse, pad=1)
    gamma = conv2d(fused, params.gamma_head, pad=1)
    beta = conv2d(fused, params.beta_head, pad=1)
    return emb, kern_a, kern_b, h1, h2, cat, fused, gamma, beta


def safm_forward(f_prev: np.ndarray, seg_onehot: np.ndarray, spd: np.ndarray,
                 params: SafmParams) -> np.ndarray:
    """Modulated features: standardize(f_prev) * (1 + gamma) + beta.

    gamma and beta are produced from the layout-conditioned filtering of the
    descriptor channels as described in the module docstring. With all-zero
    params this returns exactly standardize(f_prev).
    """
    *_, gamma, beta = _forward_parts(f_prev, seg_onehot, spd, params)
    _require(gamma.shape == f_prev.shape,
             f"modulation shape {gamma.shape} does not match features {f_prev.shape}")
    return standardize(f_prev) * (1.0 + gamma) + beta


def safm_backward(f_prev: np.ndarray, seg_onehot: np.ndarray, spd: np.ndarray,
                  params: SafmParams, grad_out: np.ndarray):
    """Analytic gradients of ``safm_forward`` for an upstream cotangent.

    Returns (param_grads: SafmParams, grad_f_prev, grad_seg, grad_spd).
    Implemented only to back the finite-difference verification harness; the
    forward graph is recomputed rather than cached.
    """
    emb, kern_a, kern_b, h1, h2, cat, fused, gamma, beta = _forward_parts(
        f_prev, seg_onehot, spd, params
    )
    xh = standardize(f_prev)

    g_xh = grad_out * (1.0 + gamma)
    g_gamma = grad_out * xh
    g_beta = grad_out

    g_fused_g, g_gamma_head = conv2d_backward(fused, params.gamma_head, g_gamma, pad=1)
    g_fused_b, g_beta_head = conv2d_backward(fused, params.beta_head, g_beta, pad=1)
    g_cat, g_fuse = conv2d_backward(cat, params.fuse, g_fused_g + g_fused_b, pad=1)

    d = emb.shape[1]
    g_h1 = g_cat[:, :d]
    g_h2 = g_cat[:, d:]
    g_h1_b, g_kern_b = dynamic_depthwise_backward(h1, kern_b, g_h2)
    g_emb, g_kern_a = dynamic_depthwise_backward(emb, kern_a, g_h1 + g_h1_b)

    g_seg_a, g_w_a = conv2d_backward(seg_onehot, params.seg_to_kernels_a, g_kern_a, pad=1)
    g_seg_b, g_w_b = conv2d_backward(seg_onehot, params.seg_to_kernels_b, g_kern_b, pad=1)
    g_spd, g_embed_w = conv2d_backward(spd, params.spd_embed, g_emb, pad=0)
    g_f_prev = standardize_backward(f_prev, g_xh)

    grads = SafmParams(
        spd_embed=g_embed_w,
        seg_to_kernels_a=g_w_a,
        seg_to_kernels_b=g_w_b,
        fuse=g_fuse,
        gamma_head=g_gamma_head,
        beta_head=g_beta_head,
    )
    return grads, g_f_prev, g_seg_a + g_seg_b, g_spd


def finite_diff_check(op, inputs: list[np.ndarray], analytic_grads: list[np.ndarray],
                      step: float = 1e-5) -> float:
    """Max relative error between central differences of ``op`` and given gradients.

    ``op`` is a zero-argument callable returning a scalar that reads the
    arrays in ``inputs``; each input entry is perturbed in place by +-step
    and restored. The error for one entry is |fd - analytic| / max(1, |fd|),
    and the max over all entries of all inputs comes back.
    """
    worst = 0.0
    for x, g in zip(inputs, analytic_grads):
        if x.shape != g.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} does not match input {x.shape}")
        flat_x = x.reshape(-1)
        flat_g = g.reshape(-1)
        for idx in range(flat_x.size):
            orig = flat_x[idx]
            flat_x[idx] = orig + step
            f_plus = float(op())
            flat_x[idx] = orig - step
            f_minus = float(op())
            flat_x[idx] = orig
            fd = (f_plus - f_minus) / (2.0 * step)
            if not np.isfinite(fd):
                raise NonFinite(f"finite difference diverged at entry {idx}")
            err = abs(fd - float(flat_g[idx])) / max(1.0, abs(fd))
            worst = max(worst, err)
    return worst
