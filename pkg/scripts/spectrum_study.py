"""Frequency behaviour of the adaptive filters.

1. High-band energy of white noise before and after high-pass enhancement,
   over many seeds and random generator weights.
2. Radially averaged power spectra of bilinear and frequency-aware fusion
   outputs on the noisy pyramid (written as CSV for plotting).
3. Amplitude response of the zero-weight (uniform) low-pass kernel.

    python3 scripts/spectrum_study.py --out-dir runs/spectrum
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass

import numpy as np

from freqfusion.analysis import kernel_frequency_response, nyquist_band_energy, radial_power_spectrum
from freqfusion.fixtures import make_fixture
from freqfusion.fusion import FusionConfig, FusionParams, freqfusion_forward, standard_fusion
from freqfusion.generators import ConvParams, GeneratorParams, ahpf_enhance, ahpf_generate
from freqfusion.prng import SplitMix64
from freqfusion.tensor import avg_pool2x


@dataclass
class SpectrumConfig:
    seeds: int = 100
    size: int = 32
    bins: int = 16
    weight_scale: float = 0.5
    out_dir: str = "runs/spectrum"


def random_ahpf(rng: SplitMix64, cz: int, scale: float) -> GeneratorParams:
    zeros = GeneratorParams.zeros(cz)
    w = rng.gaussians(9 * cz * 9).reshape(9, cz, 3, 3) * scale
    return GeneratorParams(zeros.alpf, ConvParams(w, rng.gaussians(9) * scale), zeros.offset_dir, zeros.offset_scale)


def enhancement_gain(cfg: SpectrumConfig):
    gains = []
    for seed in range(cfg.seeds):
        x = make_fixture("white_noise", seed, (1, cfg.size, cfg.size)).tensor
        p = random_ahpf(SplitMix64(1000 + seed), 1, cfg.weight_scale)
        gains.append(nyquist_band_energy(ahpf_enhance(x, ahpf_generate(x, p))) - nyquist_band_energy(x))
    return np.array(gains)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--bins", type=int, default=16)
    ap.add_argument("--out-dir", default="runs/spectrum")
    a = ap.parse_args(argv)
    cfg = SpectrumConfig(seeds=a.seeds, bins=a.bins, out_dir=a.out_dir)
    os.makedirs(cfg.out_dir, exist_ok=True)

    gains = enhancement_gain(cfg)
    print(f"high-band energy gain: {np.mean(gains > 0) * 100:.0f}% of {cfg.seeds} fixtures, mean {gains.mean():+.4f}")

    fx = make_fixture("two_class_noisy", 42, (16, cfg.size, cfg.size), 0.5)
    y_high = avg_pool2x(fx.tensor)
    fc = FusionConfig(16)
    outputs = {
        "input": fx.tensor,
        "bilinear": standard_fusion(fx.tensor, y_high),
        "freqfusion": freqfusion_forward(fx.tensor, y_high, fc, FusionParams.zeros(fc)).fused,
    }
    spectra = {k: radial_power_spectrum(v, cfg.bins) for k, v in outputs.items()}
    bins = spectra["input"].bins
    write_csv(
        os.path.join(cfg.out_dir, "fusion_spectra.csv"),
        ["bin_center"] + [f"log_power_{k}" for k in spectra],
        [[f"{b:.6f}"] + [f"{s.log_values[i]:.6f}" for s in spectra.values()] for i, b in enumerate(bins)],
    )
    resp = kernel_frequency_response(np.full((5, 5), 1 / 25), n_bins=cfg.bins)
    write_csv(
        os.path.join(cfg.out_dir, "uniform_kernel_response.csv"),
        ["bin_center", "amplitude"],
        [[f"{b:.6f}", f"{v:.8f}"] for b, v in zip(resp.bins, resp.values)],
    )
    print(f"wrote {cfg.out_dir}/fusion_spectra.csv and uniform_kernel_response.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
