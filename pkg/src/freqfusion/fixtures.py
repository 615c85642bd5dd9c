"""Deterministic synthetic inputs, fully determined by (kind, seed, dims, sigma)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import LabelMap
from .prng import SplitMix64
from .tensor import DTYPE, avg_pool2x

KINDS = ("two_class_noisy", "white_noise", "cosine_grid", "pyramid")


@dataclass
class Fixture:
    tensors: list  # for pyramids: finest level first
    labels: LabelMap | None = None

    @property
    def tensor(self) -> np.ndarray:
        return self.tensors[0]


def _check_dims(dims):
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ValueError(f"fixture dims must be three positive counts (C, H, W), got {dims}")
    return dims


def split_labels(h: int, w: int) -> LabelMap:
    """Left half label 0, right half label 1."""
    labels = np.zeros((h, w), dtype=np.int32)
    labels[:, w // 2 :] = 1
    return LabelMap(labels)


def orthonormal_centers(rng: SplitMix64, n: int, c: int) -> np.ndarray:
    """``n`` Gram-Schmidt orthonormalized Gaussian directions in R^c, shape (n, c)."""
    if n > c:
        raise ValueError(f"cannot orthogonalize {n} centers in {c} dimensions")
    vs = rng.gaussians(n * c).astype(np.float64).reshape(n, c)
    out = []
    for v in vs:
        for u in out:
            v = v - (v @ u) * u
        out.append(v / np.linalg.norm(v))
    return np.array(out)


def two_class_noisy(seed: int, dims, sigma: float = 0.3) -> Fixture:
    c, h, w = _check_dims(dims)
    if c < 2 or w < 2:
        raise ValueError("two_class_noisy needs at least 2 channels and 2 columns")
    rng = SplitMix64(seed)
    centers = orthonormal_centers(rng, 2, c)
    labels = split_labels(h, w)
    noise = rng.gaussians(c * h * w).astype(np.float64).reshape(c, h, w)
    x = centers[labels.labels].transpose(2, 0, 1) + sigma * noise
    return Fixture([x.astype(DTYPE)], labels)


def white_noise(seed: int, dims, sigma: float = 1.0) -> Fixture:
    c, h, w = _check_dims(dims)
    x = SplitMix64(seed).gaussians(c * h * w).astype(np.float64) * sigma
    return Fixture([x.reshape(c, h, w).astype(DTYPE)])


def cosine_grid(seed: int, dims, sigma: float = 0.0) -> Fixture:
    """One pure tone per channel on the DFT grid, frequency indices drawn from the seed."""
    c, h, w = _check_dims(dims)
    rng = SplitMix64(seed)
    idx = rng.u64(2 * c).reshape(c, 2)
    hh, ww = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    x = np.empty((c, h, w))
    for ch in range(c):
        ky, kx = int(idx[ch, 0]) % h, int(idx[ch, 1]) % w
        x[ch] = np.cos(2 * np.pi * (ky * hh / h + kx * ww / w))
    if sigma:
        x += sigma * rng.gaussians(c * h * w).astype(np.float64).reshape(c, h, w)
    return Fixture([x.astype(DTYPE)])


def pyramid(seed: int, dims, sigma: float = 0.3, levels: int = 3, value: float | None = None) -> Fixture:
    """Two-class noisy base (or a constant ``value``) with repeated 2x average pooling."""
    c, h, w = _check_dims(dims)
    if levels < 1 or h % (1 << (levels - 1)) or w % (1 << (levels - 1)):
        raise ValueError(f"{h}x{w} cannot be halved {levels - 1} times")
    if value is None:
        base = two_class_noisy(seed, dims, sigma)
    else:
        base = Fixture([np.full((c, h, w), value, dtype=DTYPE)], split_labels(h, w))
    out = [base.tensor]
    for _ in range(levels - 1):
        out.append(avg_pool2x(out[-1]))
    return Fixture(out, base.labels)


def make_fixture(kind: str, seed: int, dims, sigma: float | None = None, **kw) -> Fixture:
    makers = {"two_class_noisy": two_class_noisy, "white_noise": white_noise, "cosine_grid": cosine_grid, "pyramid": pyramid}
    if kind not in makers:
        raise ValueError(f"unknown fixture kind {kind!r}; choose from {', '.join(KINDS)}")
    if sigma is not None:
        kw["sigma"] = sigma
    return makers[kind](seed, dims, **kw)
