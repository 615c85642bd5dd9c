"""Two-stage frequency-aware fusion and the plain upsample-and-add baseline."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ShapeError
from .generators import (
    ConvParams,
    GeneratorParams,
    OffsetField,
    ahpf_enhance,
    ahpf_generate,
    alpf_generate,
    alpf_upsample,
    local_similarity,
    offset_generate,
    resample,
)
from .tensor import DTYPE, FilterField, FilterKind, as_tensor, upsample2x

FLAG_NAMES = (
    "use_enhanced_initial_alpf",
    "use_enhanced_initial_ahpf",
    "use_final_alpf",
    "use_offset",
    "use_final_ahpf",
)


@dataclass(frozen=True)
class FusionConfig:
    in_channels: int
    reduction: int = 4
    kbar: int = 5
    khat: int = 3
    groups: int = 4
    use_enhanced_initial_alpf: bool = True
    use_enhanced_initial_ahpf: bool = True
    use_final_alpf: bool = True
    use_offset: bool = True
    use_final_ahpf: bool = True

    def __post_init__(self):
        if self.in_channels < 1 or self.reduction < 1 or self.groups < 1:
            raise ShapeError(f"invalid fusion config {self}")
        if self.in_channels % self.groups:
            raise ShapeError(f"{self.in_channels} channels not divisible by {self.groups} offset groups")
        for name in ("kbar", "khat"):
            k = getattr(self, name)
            if k < 1 or k % 2 == 0:
                raise ShapeError(f"{name} must be a positive odd kernel size, got {k}")

    @property
    def compressed_channels(self) -> int:
        return max(self.in_channels // self.reduction, 8)

    def with_flags(self, **flags) -> "FusionConfig":
        return replace(self, **flags)


@dataclass(frozen=True)
class FusionParams:
    """All learned weights of one fusion module: the two 1x1 compressions plus the generators."""

    compress_low: ConvParams
    compress_high: ConvParams
    generators: GeneratorParams

    @classmethod
    def zeros(cls, config: FusionConfig) -> "FusionParams":
        cz, c = config.compressed_channels, config.in_channels
        return cls(
            ConvParams.zeros(cz, c, 1),
            ConvParams.zeros(cz, c, 1),
            GeneratorParams.zeros(cz, config.kbar, config.khat, config.groups),
        )

    @classmethod
    def random(cls, config: FusionConfig, seed: int = 0, scale: float = 0.5) -> "FusionParams":
        """Deterministic Gaussian weights (std ``scale``) from the library PRNG."""
        from .prng import SplitMix64

        rng = SplitMix64(seed)
        zeros = cls.zeros(config)

        def draw(p: ConvParams) -> ConvParams:
            w = rng.gaussians(p.weight.size).reshape(p.weight.shape) * scale
            b = rng.gaussians(p.bias.size) * scale
            return ConvParams(w, b)

        g = zeros.generators
        return cls(
            draw(zeros.compress_low),
            draw(zeros.compress_high),
            replace(
                g,
                alpf=draw(g.alpf),
                ahpf=draw(g.ahpf),
                offset_dir=draw(g.offset_dir),
                offset_scale=draw(g.offset_scale),
            ),
        )

    def check(self, config: FusionConfig):
        expected = FusionParams.zeros(config)
        pairs = [
            ("comp_low", self.compress_low, expected.compress_low),
            ("comp_high", self.compress_high, expected.compress_high),
            ("alpf", self.generators.alpf, expected.generators.alpf),
            ("ahpf", self.generators.ahpf, expected.generators.ahpf),
            ("off_dir", self.generators.offset_dir, expected.generators.offset_dir),
            ("off_scale", self.generators.offset_scale, expected.generators.offset_scale),
        ]
        for name, got, want in pairs:
            if got.weight.shape != want.weight.shape:
                raise ShapeError(f"{name}.w must be {want.weight.shape} for {config}, got {got.weight.shape}")
        g = self.generators
        if (g.kbar, g.khat, g.groups) != (config.kbar, config.khat, config.groups):
            raise ShapeError("generator kernel sizes or groups disagree with the fusion config")


@dataclass
class FusionOutput:
    fused: np.ndarray
    z: np.ndarray
    lowpass: FilterField | None = None
    highpass: FilterField | None = None
    offsets: OffsetField | None = None
    similarity: np.ndarray | None = None


def _check_pair(x_low, y_high):
    x_low = as_tensor(x_low, "low-level feature")
    y_high = as_tensor(y_high, "high-level feature")
    (c, h2, w2), (ch, h, w) = x_low.shape, y_high.shape
    if c != ch or (h2, w2) != (2 * h, 2 * w):
        raise ShapeError(f"low-level {x_low.shape} must be (C, 2H, 2W) for high-level {y_high.shape}")
    return x_low, y_high


def standard_fusion(x_low, y_high, mode: str = "bilinear") -> np.ndarray:
    """Fixed 2x upsampling of the coarse feature plus the fine one."""
    x_low, y_high = _check_pair(x_low, y_high)
    return upsample2x(y_high, mode) + x_low


def initial_fusion(x_low, y_high, config: FusionConfig, params: FusionParams) -> np.ndarray:
    """Compress both inputs and fuse them into the guidance feature z (Cz, 2H, 2W)."""
    x_low, y_high = _check_pair(x_low, y_high)
    if x_low.shape[0] != config.in_channels:
        raise ShapeError(f"config expects {config.in_channels} channels, inputs have {x_low.shape[0]}")
    params.check(config)
    gen = params.generators
    x_hat = params.compress_low(x_low)
    y_hat = params.compress_high(y_high)
    # z does not exist yet, so the initial filters come from the compressed low-level feature
    if config.use_enhanced_initial_ahpf:
        x_hat = ahpf_enhance(x_hat, ahpf_generate(x_hat, gen))
    if config.use_enhanced_initial_alpf:
        y_up = alpf_upsample(y_hat, alpf_generate(x_hat, gen))
    else:
        y_up = upsample2x(y_hat, "bilinear")
    return y_up + x_hat


def freqfusion_forward(x_low, y_high, config: FusionConfig, params: FusionParams) -> FusionOutput:
    """Fuse a fine feature (C, 2H, 2W) with a coarse one (C, H, W)."""
    x_low, y_high = _check_pair(x_low, y_high)
    z = initial_fusion(x_low, y_high, config, params)
    gen = params.generators
    out = FusionOutput(fused=None, z=z)

    if config.use_final_alpf:
        out.lowpass = alpf_generate(z, gen)
        y_up = alpf_upsample(y_high, out.lowpass)
    else:
        y_up = upsample2x(y_high, "bilinear")
    if config.use_offset:
        out.similarity = local_similarity(z)
        out.offsets = offset_generate(z, out.similarity, gen)
        y_up = resample(y_up, out.offsets, config.groups)
    if config.use_final_ahpf:
        out.highpass = ahpf_generate(z, gen)
        x_up = ahpf_enhance(x_low, out.highpass)
    else:
        x_up = x_low
    out.fused = y_up + x_up
    return out


def bilinear_filter_field(h: int, w: int, kernel_size: int = 3) -> FilterField:
    """Fixed low-pass field at (2H, 2W) that reproduces bilinear 2x upsampling.

    Under replicate padding, ``alpf_upsample(y, bilinear_filter_field(H, W))``
    equals ``upsample2x(y, "bilinear")`` up to rounding.
    """
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise ShapeError("bilinear weights need an odd kernel of size >= 3")
    k, r = kernel_size, kernel_size // 2
    taps = np.zeros((k, k, 2, 2))
    for dy in (0, 1):
        for dx in (0, 1):
            # phase dy samples rows i - 0.25 (dy = 0) or i + 0.25 (dy = 1)
            ry = {0: {-1: 0.25, 0: 0.75}, 1: {0: 0.75, 1: 0.25}}[dy]
            rx = {0: {-1: 0.25, 0: 0.75}, 1: {0: 0.75, 1: 0.25}}[dx]
            for p, wp in ry.items():
                for q, wq in rx.items():
                    taps[p + r, q + r, dy, dx] = wp * wq
    field = np.empty((k * k, 2 * h, 2 * w), dtype=DTYPE)
    for dy in (0, 1):
        for dx in (0, 1):
            field[:, dy::2, dx::2] = taps[:, :, dy, dx].reshape(-1, 1, 1)
    return FilterField(field, FilterKind.LOW_PASS)


def cascade_fuse(features, configs, params) -> np.ndarray:
    """Left fold of :func:`freqfusion_forward` over a coarse-to-fine pyramid.

    ``configs[k]`` and ``params[k]`` fuse ``features[k + 1]`` into the result
    accumulated so far.
    """
    features = [as_tensor(f, f"pyramid level {k}") for k, f in enumerate(features)]
    if len(features) < 2:
        raise ShapeError("a cascade needs at least two pyramid levels")
    if len(configs) != len(features) - 1 or len(params) != len(features) - 1:
        raise ShapeError(f"{len(features)} levels need {len(features) - 1} configs and parameter sets")
    for coarse, fine in zip(features, features[1:]):
        if fine.shape[1:] != (2 * coarse.shape[1], 2 * coarse.shape[2]):
            raise ShapeError(f"pyramid is not dyadic: {coarse.shape} -> {fine.shape}")
    fused = features[0]
    for fine, cfg, p in zip(features[1:], configs, params):
        fused = freqfusion_forward(fine, fused, cfg, p).fused
    return fused
