"""Filter and offset generators driven by the compressed guidance feature."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .tensor import (
    DTYPE,
    FilterField,
    FilterKind,
    PaddingMode,
    apply_filter_field,
    as_tensor,
    bilinear_gather,
    conv2d,
    identity_kernel_taps,
    kernel_softmax,
    pixel_shuffle,
    pixel_unshuffle,
    sigmoid,
)

# neighbour order of the similarity map channels
NEIGHBOURS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
COS_EPS = 1e-8


@dataclass(frozen=True)
class ConvParams:
    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weight, dtype=DTYPE)
        b = np.ascontiguousarray(self.bias, dtype=DTYPE).reshape(-1)
        if w.ndim != 4 or b.shape != (w.shape[0],):
            raise ShapeError(f"conv params need (Cout, Cin, k, k) weight and Cout bias, got {w.shape}, {b.shape}")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @classmethod
    def zeros(cls, cout, cin, k):
        return cls(np.zeros((cout, cin, k, k), DTYPE), np.zeros(cout, DTYPE))

    @property
    def in_channels(self):
        return self.weight.shape[1]

    @property
    def out_channels(self):
        return self.weight.shape[0]

    def __call__(self, x):
        return conv2d(x, self.weight, self.bias, padding=PaddingMode.REPLICATE)


@dataclass(frozen=True)
class GeneratorParams:
    """Weights of the low-pass, high-pass and offset generators.

    One instance serves both the initial and the final fusion stage.
    """

    alpf: ConvParams
    ahpf: ConvParams
    offset_dir: ConvParams
    offset_scale: ConvParams
    kbar: int = 5
    khat: int = 3
    groups: int = 4

    def __post_init__(self):
        cz = self.alpf.in_channels
        for name, k in (("kbar", self.kbar), ("khat", self.khat)):
            if k < 1 or k % 2 == 0:
                raise ShapeError(f"{name} must be a positive odd kernel size, got {k}")
        expected = {
            "alpf": (self.alpf, self.kbar**2, cz),
            "ahpf": (self.ahpf, self.khat**2, cz),
            "offset_dir": (self.offset_dir, 2 * self.groups, cz + 8),
            "offset_scale": (self.offset_scale, 2 * self.groups, cz + 8),
        }
        for name, (p, cout, cin) in expected.items():
            if p.weight.shape != (cout, cin, 3, 3):
                raise ShapeError(f"{name} weight must be {(cout, cin, 3, 3)}, got {p.weight.shape}")

    @property
    def channels(self) -> int:
        return self.alpf.in_channels

    @classmethod
    def zeros(cls, cz, kbar=5, khat=3, groups=4):
        return cls(
            ConvParams.zeros(kbar**2, cz, 3),
            ConvParams.zeros(khat**2, cz, 3),
            ConvParams.zeros(2 * groups, cz + 8, 3),
            ConvParams.zeros(2 * groups, cz + 8, 3),
            kbar,
            khat,
            groups,
        )


@dataclass(frozen=True)
class OffsetField:
    """Per-group displacements (2G, H, W): channel 2g is vertical, 2g + 1 horizontal."""

    offsets: np.ndarray

    def __post_init__(self):
        o = as_tensor(self.offsets, "offsets")
        if o.shape[0] % 2:
            raise ShapeError(f"offset field needs an even channel count, got {o.shape[0]}")
        object.__setattr__(self, "offsets", o)

    @property
    def groups(self) -> int:
        return self.offsets.shape[0] // 2


def _check_channels(z, params):
    if z.shape[0] != params.channels:
        raise ShapeError(f"generator expects {params.channels} guidance channels, got {z.shape[0]}")


def alpf_generate(z, params: GeneratorParams) -> FilterField:
    z = as_tensor(z, "guidance feature")
    _check_channels(z, params)
    return kernel_softmax(params.alpf(z))


def alpf_upsample(y_high, field: FilterField) -> np.ndarray:
    """Sub-pixel 2x upsampling: each of the four output phases gets its own filters.

    Output pixel (2i + dy, 2j + dx) is the filter at that position applied
    to ``y_high`` around (i, j).
    """
    y_high = as_tensor(y_high, "high-level feature")
    c, h, w = y_high.shape
    if field.weights.shape[1:] != (2 * h, 2 * w):
        raise ShapeError(f"filter field {field.weights.shape[1:]} must be twice the feature size {(h, w)}")
    taps = field.weights.shape[0]
    phases = pixel_unshuffle(field.weights).reshape(taps, 4, h, w)
    out = np.empty((c, 4, h, w), dtype=DTYPE)
    for g in range(4):
        out[:, g] = apply_filter_field(y_high, FilterField(phases[:, g], field.kind))
    return pixel_shuffle(out.reshape(4 * c, h, w))


def ahpf_generate(z, params: GeneratorParams) -> FilterField:
    z = as_tensor(z, "guidance feature")
    _check_channels(z, params)
    low = kernel_softmax(params.ahpf(z)).weights
    e = identity_kernel_taps(params.khat)[:, None, None]
    return FilterField((e - low).astype(DTYPE), FilterKind.HIGH_PASS)


def ahpf_enhance(x, field: FilterField) -> np.ndarray:
    """Add the high-pass response of ``x`` back onto ``x``."""
    x = as_tensor(x)
    return x + apply_filter_field(x, field, PaddingMode.REPLICATE)


def _cosine(dot, na, nb):
    ok = (na >= COS_EPS) & (nb >= COS_EPS)
    denom = np.where(ok, na * nb, 1.0)
    return np.where(ok, np.clip(dot / denom, -1.0, 1.0), 0.0)


def local_similarity(z) -> np.ndarray:
    """Cosine similarity of each pixel with its 8 neighbours, shape (8, H, W).

    Borders replicate the edge pixel; a zero-norm vector has similarity 0.
    """
    z = as_tensor(z, "guidance feature").astype(np.float64)
    _, h, w = z.shape
    padded = np.pad(z, ((0, 0), (1, 1), (1, 1)), mode="edge")
    norm = np.sqrt((z * z).sum(axis=0))
    pnorm = np.pad(norm, 1, mode="edge")
    out = np.empty((8, h, w), dtype=DTYPE)
    for n, (p, q) in enumerate(NEIGHBOURS):
        nb = padded[:, 1 + p : 1 + p + h, 1 + q : 1 + q + w]
        out[n] = _cosine((z * nb).sum(axis=0), norm, pnorm[1 + p : 1 + p + h, 1 + q : 1 + q + w])
    return out


def offset_generate(z, sim, params: GeneratorParams) -> OffsetField:
    """Offsets as direction times a sigmoid-bounded scale, both predicted from [z, sim]."""
    z = as_tensor(z, "guidance feature")
    sim = as_tensor(sim, "similarity map")
    _check_channels(z, params)
    if sim.shape != (8,) + z.shape[1:]:
        raise ShapeError(f"similarity map must be {(8,) + z.shape[1:]}, got {sim.shape}")
    g = np.concatenate([z, sim], axis=0)
    direction = params.offset_dir(g)
    scale = sigmoid(params.offset_scale(g))
    return OffsetField(direction * scale)


def resample(y_up, offsets: OffsetField, groups: int | None = None) -> np.ndarray:
    """Bilinearly resample each channel block at its group's displaced coordinates."""
    y_up = as_tensor(y_up, "upsampled feature")
    c, h, w = y_up.shape
    g = offsets.groups if groups is None else groups
    if offsets.groups != g:
        raise ShapeError(f"offset field has {offsets.groups} groups, expected {g}")
    if c % g:
        raise ShapeError(f"{c} channels cannot be split into {g} offset groups")
    if offsets.offsets.shape[1:] != (h, w):
        raise ShapeError(f"offsets {offsets.offsets.shape[1:]} do not match feature {(h, w)}")
    ii, jj = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    o = offsets.offsets.astype(np.float64)
    block = c // g
    out = np.empty_like(y_up)
    for gi in range(g):
        sl = slice(gi * block, (gi + 1) * block)
        out[sl] = bilinear_gather(y_up[sl], ii + o[2 * gi], jj + o[2 * gi + 1])
    return out
