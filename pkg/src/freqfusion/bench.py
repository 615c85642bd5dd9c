"""Micro-benchmarks with a correctness gate against naive reference kernels."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ShapeError, ValidationError
from .fusion import FusionConfig, FusionParams, freqfusion_forward
from .generators import local_similarity, offset_generate, resample
from .prng import SplitMix64
from .tensor import (
    DTYPE,
    FilterField,
    FilterKind,
    PaddingMode,
    apply_filter_field,
    as_tensor,
    conv2d,
    identity_kernel_taps,
    kernel_softmax,
    pad,
    pixel_shuffle,
    pixel_unshuffle,
    avg_pool2x,
    upsample2x,
)

OPS = ("filter_field", "conv", "fusion")
GATE_ATOL = 1e-4
REPEATS = 5


def apply_filter_field_naive(feature, field: FilterField, padding: PaddingMode = PaddingMode.REPLICATE) -> np.ndarray:
    """Reference filter application: one scalar accumulator per output element."""
    feature = as_tensor(feature, "feature")
    if feature.shape[1:] != field.weights.shape[1:]:
        raise ShapeError(f"feature {feature.shape[1:]} does not match filter field {field.weights.shape[1:]}")
    out = np.empty_like(feature)
    _kernels.filter_field_naive(pad(feature, field.kernel_size // 2, padding), field.weights, out)
    return out


def conv2d_naive(x, weight, bias, stride=1, padding: PaddingMode = PaddingMode.REPLICATE) -> np.ndarray:
    x = as_tensor(x)
    weight = np.ascontiguousarray(weight, dtype=DTYPE)
    bias = np.ascontiguousarray(bias, dtype=DTYPE)
    cout, cin, k, _ = weight.shape
    if cin != x.shape[0] or k % 2 == 0:
        raise ShapeError(f"bad conv shapes {x.shape} * {weight.shape}")
    _, h, w = x.shape
    out = np.empty((cout, (h - 1) // stride + 1, (w - 1) // stride + 1), dtype=DTYPE)
    _kernels.conv2d_naive(pad(x, k // 2, padding), weight, bias, stride, out)
    return out


def freqfusion_naive(x_low, y_high, config: FusionConfig, params: FusionParams) -> np.ndarray:
    """The fusion pipeline rebuilt on the naive conv and filter kernels."""

    def conv(x, p):
        return conv2d_naive(x, p.weight, p.bias)

    def lowpass(z, p):
        return kernel_softmax(conv(z, p))

    def highpass(z, p, k):
        return FilterField(identity_kernel_taps(k)[:, None, None] - lowpass(z, p).weights, FilterKind.HIGH_PASS)

    def upsample(y, field):
        c, h, w = y.shape
        taps = field.weights.shape[0]
        phases = pixel_unshuffle(field.weights).reshape(taps, 4, h, w)
        parts = [apply_filter_field_naive(y, FilterField(phases[:, g])) for g in range(4)]
        return pixel_shuffle(np.stack(parts, axis=1).reshape(4 * c, h, w))

    def enhance(x, field):
        return x + apply_filter_field_naive(x, field)

    g = params.generators
    x_hat = conv(x_low, params.compress_low)
    y_hat = conv(y_high, params.compress_high)
    if config.use_enhanced_initial_ahpf:
        x_hat = enhance(x_hat, highpass(x_hat, g.ahpf, g.khat))
    if config.use_enhanced_initial_alpf:
        y_up = upsample(y_hat, lowpass(x_hat, g.alpf))
    else:
        y_up = upsample2x(y_hat)
    z = y_up + x_hat
    y_up = upsample(y_high, lowpass(z, g.alpf)) if config.use_final_alpf else upsample2x(y_high)
    if config.use_offset:
        y_up = resample(y_up, offset_generate(z, local_similarity(z), g), config.groups)
    x_up = enhance(x_low, highpass(z, g.ahpf, g.khat)) if config.use_final_ahpf else x_low
    return y_up + x_up


@dataclass(frozen=True)
class BenchResult:
    op: str
    dims: tuple
    iters: int
    ns_per_iter: float
    naive_ns_per_iter: float
    flops_per_iter: int
    workers: int

    @property
    def gflops_effective(self) -> float:
        return self.flops_per_iter / self.ns_per_iter

    @property
    def speedup(self) -> float:
        return self.naive_ns_per_iter / self.ns_per_iter


def filter_field_flops(c, h, w, k) -> int:
    return 2 * c * h * w * k * k


def conv_flops(cout, cin, h, w, k) -> int:
    return 2 * cout * cin * h * w * k * k


def fusion_flops(config: FusionConfig, h2, w2) -> int:
    """Multiply-adds of the convolutions and filter applications in one fusion call."""
    c, cz = config.in_channels, config.compressed_channels
    h, w = h2 // 2, w2 // 2
    kb, kh, g = config.kbar, config.khat, config.groups
    total = conv_flops(cz, c, h2, w2, 1) + conv_flops(cz, c, h, w, 1)
    if config.use_enhanced_initial_ahpf:
        total += conv_flops(kh * kh, cz, h2, w2, 3) + filter_field_flops(cz, h2, w2, kh)
    if config.use_enhanced_initial_alpf:
        total += conv_flops(kb * kb, cz, h2, w2, 3) + filter_field_flops(cz, h2, w2, kb)
    if config.use_final_alpf:
        total += conv_flops(kb * kb, cz, h2, w2, 3) + filter_field_flops(c, h2, w2, kb)
    if config.use_offset:
        total += 2 * conv_flops(2 * g, cz + 8, h2, w2, 3)
    if config.use_final_ahpf:
        total += conv_flops(kh * kh, cz, h2, w2, 3) + filter_field_flops(c, h2, w2, kh)
    return total


def _time(fn, iters: int) -> float:
    """Median over repeats of the mean wall time per call, in nanoseconds."""
    fn()  # warm-up (and JIT compilation)
    samples = []
    for _ in range(REPEATS):
        t0 = time.perf_counter_ns()
        for _ in range(iters):
            fn()
        samples.append((time.perf_counter_ns() - t0) / iters)
    return max(statistics.median(samples), 1.0)


def _setup(op, dims, kernel_size):
    c, h, w = dims
    rng = SplitMix64(0)
    x = rng.gaussians(c * h * w).reshape(c, h, w)
    if op == "filter_field":
        field = kernel_softmax(rng.gaussians(kernel_size**2 * h * w).reshape(-1, h, w))
        return (
            lambda: apply_filter_field(x, field),
            lambda: apply_filter_field_naive(x, field),
            filter_field_flops(c, h, w, kernel_size),
        )
    if op == "conv":
        wt = rng.gaussians(c * c * kernel_size**2).reshape(c, c, kernel_size, kernel_size) * 0.1
        b = rng.gaussians(c)
        return (
            lambda: conv2d(x, wt, b),
            lambda: conv2d_naive(x, wt, b),
            conv_flops(c, c, h, w, kernel_size),
        )
    if op == "fusion":
        if h % 2 or w % 2:
            raise ShapeError("fusion benchmark needs even H and W")
        config = FusionConfig(c)
        params = FusionParams.random(config, seed=0, scale=0.1)
        y = avg_pool2x(x)
        return (
            lambda: freqfusion_forward(x, y, config, params).fused,
            lambda: freqfusion_naive(x, y, config, params),
            fusion_flops(config, h, w),
        )
    raise ValueError(f"unknown benchmark op {op!r}; choose from {', '.join(OPS)}")


def run_bench(op: str, dims, iters: int, kernel_size: int = 5, workers: int | None = None, optimized=None) -> BenchResult:
    """Time ``op`` and its naive reference on deterministic seed-0 inputs.

    Both kernels run once first; if they disagree by more than
    ``GATE_ATOL`` a :class:`ValidationError` is raised before any timing.
    ``optimized`` replaces the optimized callable (used to test the gate).
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ValueError(f"dims must be three positive counts, got {dims}")
    n_workers = _kernels.set_workers(workers)
    fast, naive, flops = _setup(op, dims, kernel_size)
    if optimized is not None:
        fast = optimized
    got, want = np.asarray(fast()), np.asarray(naive())
    if got.shape != want.shape:
        raise ValidationError(f"{op}: optimized output shape {got.shape} != reference {want.shape}")
    err = float(np.max(np.abs(got.astype(np.float64) - want)))
    if not err <= GATE_ATOL:
        raise ValidationError(f"{op}: optimized kernel deviates from the reference by {err:.3g} > {GATE_ATOL}")
    return BenchResult(op, dims, iters, _time(fast, iters), _time(naive, iters), flops, n_workers)
