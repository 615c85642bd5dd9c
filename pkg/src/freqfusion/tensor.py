"""Dense (C, H, W) float32 tensor primitives.

Tensors are plain ``numpy.ndarray`` objects of dtype float32 and rank 3.
Filter fields keep one K x K kernel per pixel, laid out as (K*K, H, W)
with kernel tap (p, q) stored at channel ``(p + r) * K + (q + r)`` where
``r = (K - 1) // 2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ShapeError

DTYPE = np.float32


class PaddingMode(enum.Enum):
    REPLICATE = "replicate"
    ZERO = "zero"


class FilterKind(enum.Enum):
    LOW_PASS = "low_pass"
    HIGH_PASS = "high_pass"


def as_tensor(x, name="tensor") -> np.ndarray:
    """Validate and coerce ``x`` to a contiguous float32 (C, H, W) array."""
    t = np.ascontiguousarray(x, dtype=DTYPE)
    if t.ndim != 3:
        raise ShapeError(f"{name} must have rank 3 (C, H, W), got shape {t.shape}")
    if min(t.shape) < 1:
        raise ShapeError(f"{name} has an empty dimension: {t.shape}")
    return t


def kernel_size_from_taps(taps: int) -> int:
    k = math.isqrt(taps)
    if k * k != taps or k % 2 == 0:
        raise ShapeError(f"{taps} channels is not K*K for an odd kernel size K")
    return k


@dataclass(frozen=True)
class FilterField:
    """Per-pixel K x K kernels, stored as (K*K, H, W)."""

    weights: np.ndarray
    kind: FilterKind = FilterKind.LOW_PASS

    def __post_init__(self):
        w = as_tensor(self.weights, "filter field")
        kernel_size_from_taps(w.shape[0])
        object.__setattr__(self, "weights", w)

    @property
    def kernel_size(self) -> int:
        return math.isqrt(self.weights.shape[0])

    @property
    def height(self) -> int:
        return self.weights.shape[1]

    @property
    def width(self) -> int:
        return self.weights.shape[2]

    def kernel_at(self, i: int, j: int) -> np.ndarray:
        k = self.kernel_size
        return self.weights[:, i, j].reshape(k, k)


def pad(t: np.ndarray, r: int, padding: PaddingMode) -> np.ndarray:
    if r == 0:
        return t
    mode = "edge" if padding is PaddingMode.REPLICATE else "constant"
    return np.pad(t, ((0, 0), (r, r), (r, r)), mode=mode)


def conv2d(x, weight, bias=None, stride: int = 1, padding: PaddingMode = PaddingMode.REPLICATE) -> np.ndarray:
    """Direct 2-D cross-correlation with same-size padding ``(k - 1) / 2``.

    ``weight`` is (Cout, Cin, k, k).  With ``stride`` 2 the output is
    (Cout, ceil(H / 2), ceil(W / 2)).  Each output pixel sums over
    (cin, ky, kx) in ascending order and adds the bias last.
    """
    x = as_tensor(x, "conv2d input")
    weight = np.ascontiguousarray(weight, dtype=DTYPE)
    if weight.ndim != 4 or weight.shape[2] != weight.shape[3]:
        raise ShapeError(f"conv weight must be (Cout, Cin, k, k), got {weight.shape}")
    cout, cin, k, _ = weight.shape
    if k % 2 == 0:
        raise ShapeError(f"even kernel size {k} has no centred same-size padding")
    if cin != x.shape[0]:
        raise ShapeError(f"conv expects {cin} input channels, got {x.shape[0]}")
    if stride not in (1, 2):
        raise ShapeError(f"stride must be 1 or 2, got {stride}")
    if bias is None:
        bias = np.zeros(cout, dtype=DTYPE)
    bias = np.ascontiguousarray(bias, dtype=DTYPE).reshape(-1)
    if bias.shape != (cout,):
        raise ShapeError(f"bias must have {cout} entries, got {bias.shape}")
    _, h, w = x.shape
    out = np.empty((cout, (h - 1) // stride + 1, (w - 1) // stride + 1), dtype=DTYPE)
    _kernels.conv2d_padded(pad(x, (k - 1) // 2, padding), weight, bias, stride, out)
    return out


def kernel_softmax(raw) -> FilterField:
    """Normalize each pixel's K*K logits into a non-negative, sum-to-one kernel."""
    raw = as_tensor(raw, "filter logits")
    kernel_size_from_taps(raw.shape[0])
    # float64 internally so the float32 kernels sum to one within a few ulps
    v = raw.astype(np.float64)
    e = np.exp(v - v.max(axis=0, keepdims=True))
    w = e / e.sum(axis=0, keepdims=True)
    return FilterField(w.astype(DTYPE), FilterKind.LOW_PASS)


def identity_kernel_taps(k: int) -> np.ndarray:
    e = np.zeros(k * k, dtype=DTYPE)
    e[(k * k) // 2] = 1.0
    return e


def _check_spatial(feature, field):
    if feature.shape[1:] != field.weights.shape[1:]:
        raise ShapeError(
            f"feature spatial size {feature.shape[1:]} does not match filter field {field.weights.shape[1:]}"
        )


def apply_filter_field(feature, field: FilterField, padding: PaddingMode = PaddingMode.REPLICATE) -> np.ndarray:
    """out[c, i, j] = sum_(p, q) field[(p, q), i, j] * feature[c, i + p, j + q].

    Kernels are shared across channels; taps are summed in ascending
    channel-index order.
    """
    feature = as_tensor(feature, "feature")
    _check_spatial(feature, field)
    out = np.empty_like(feature)
    r = (field.kernel_size - 1) // 2
    _kernels.filter_field_padded(pad(feature, r, padding), field.weights, out)
    return out


def pixel_unshuffle(t) -> np.ndarray:
    """(C, 2H, 2W) -> (4C, H, W) with out[4c + 2*dy + dx, i, j] = t[c, 2i + dy, 2j + dx]."""
    t = as_tensor(t)
    c, h2, w2 = t.shape
    if h2 % 2 or w2 % 2:
        raise ShapeError(f"pixel_unshuffle needs even spatial dims, got {t.shape[1:]}")
    out = t.reshape(c, h2 // 2, 2, w2 // 2, 2).transpose(0, 2, 4, 1, 3)
    return np.ascontiguousarray(out.reshape(4 * c, h2 // 2, w2 // 2))


def pixel_shuffle(t) -> np.ndarray:
    """(4C, H, W) -> (C, 2H, 2W); the exact inverse of :func:`pixel_unshuffle`."""
    t = as_tensor(t)
    c4, h, w = t.shape
    if c4 % 4:
        raise ShapeError(f"pixel_shuffle needs channels divisible by 4, got {c4}")
    out = t.reshape(c4 // 4, 2, 2, h, w).transpose(0, 3, 1, 4, 2)
    return np.ascontiguousarray(out.reshape(c4 // 4, 2 * h, 2 * w))


def bilinear_gather(planes: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample every plane of ``planes`` (C, H, W) at per-point coordinates.

    ``ys`` and ``xs`` share one shape S; the result is (C, *S).  Coordinates
    are clamped to the image before interpolation, and integer coordinates
    return the stored values exactly.
    """
    _, h, w = planes.shape
    y = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1)
    x = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1)
    y0 = np.floor(y).astype(np.intp)
    x0 = np.floor(x).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = y - y0
    wx = x - x0
    out = (
        (1.0 - wy) * (1.0 - wx) * planes[:, y0, x0]
        + (1.0 - wy) * wx * planes[:, y0, x1]
        + wy * (1.0 - wx) * planes[:, y1, x0]
        + wy * wx * planes[:, y1, x1]
    )
    return out.astype(DTYPE)


def bilinear_sample(feature, y: float, x: float) -> np.ndarray:
    """Per-channel bilinear value of ``feature`` at fractional pixel (y, x)."""
    feature = as_tensor(feature, "feature")
    if not (math.isfinite(y) and math.isfinite(x)):
        raise ValueError("sample coordinates must be finite")
    return bilinear_gather(feature, np.array(y), np.array(x))


def upsample2x(t, mode: str = "bilinear") -> np.ndarray:
    """Fixed 2x upsampling with half-pixel (align-corners off) sampling."""
    t = as_tensor(t)
    _, h, w = t.shape
    if mode == "nearest":
        return np.ascontiguousarray(t.repeat(2, axis=1).repeat(2, axis=2))
    if mode != "bilinear":
        raise ValueError(f"unknown upsampling mode {mode!r}")
    sy = (np.arange(2 * h) + 0.5) / 2 - 0.5
    sx = (np.arange(2 * w) + 0.5) / 2 - 0.5
    yy, xx = np.meshgrid(sy, sx, indexing="ij")
    return bilinear_gather(t, yy, xx)


def avg_pool2x(t) -> np.ndarray:
    t = as_tensor(t)
    c, h, w = t.shape
    if h % 2 or w % 2:
        raise ShapeError(f"avg_pool2x needs even spatial dims, got {t.shape[1:]}")
    return t.reshape(c, h // 2, 2, w // 2, 2).mean(axis=(2, 4), dtype=np.float64).astype(DTYPE)


def sigmoid(x) -> np.ndarray:
    """Overflow-free logistic, clamped so every value lies strictly inside (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    s = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(DTYPE)
    tiny = np.finfo(DTYPE).tiny
    return np.clip(s, tiny, np.nextafter(DTYPE(1), DTYPE(0)))
