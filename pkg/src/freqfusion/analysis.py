"""Feature-quality metrics: category similarity and frequency spectra.

Similarity metrics work per pixel against category centers (mean feature
of each label).  Cosine similarities treat any vector with norm below
``COS_EPS`` as similarity 0; ignored pixels come out as NaN.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

COS_EPS = 1e-8
LOG_FLOOR = 1e-12
NYQUIST = 0.25


@dataclass(frozen=True)
class LabelMap:
    labels: np.ndarray
    ignore_index: int = 255

    def __post_init__(self):
        lab = np.ascontiguousarray(self.labels, dtype=np.int32)
        if lab.ndim != 2:
            raise ShapeError(f"label map must be (H, W), got {lab.shape}")
        if (lab < 0).any():
            raise ValueError("labels must be non-negative")
        object.__setattr__(self, "labels", lab)

    @property
    def shape(self):
        return self.labels.shape

    @property
    def valid(self) -> np.ndarray:
        return self.labels != self.ignore_index

    def categories(self) -> list[int]:
        return sorted(int(k) for k in np.unique(self.labels[self.valid]))


def _as_labels(labels) -> LabelMap:
    return labels if isinstance(labels, LabelMap) else LabelMap(labels)


def _prepare(f, labels):
    f = np.asarray(f, dtype=np.float64)
    if f.ndim == 2:
        f = f[None]
    labels = _as_labels(labels)
    if f.ndim != 3 or f.shape[1:] != labels.shape:
        raise ShapeError(f"features {f.shape} and labels {labels.shape} differ spatially")
    if not labels.valid.any():
        raise ValueError("label map has no valid (non-ignored) pixels")
    return f, labels


def category_centers(f, labels) -> dict[int, np.ndarray]:
    """Mean C-vector of every category present; ignored pixels excluded."""
    f, labels = _prepare(f, labels)
    return {k: f[:, labels.labels == k].mean(axis=1) for k in labels.categories()}


def cosine_to(vectors: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Cosine similarity of each column of (C, N) ``vectors`` to ``center``."""
    na = np.sqrt((vectors * vectors).sum(axis=0))
    nb = np.sqrt(center @ center)
    dot = center @ vectors
    ok = (na >= COS_EPS) & (nb >= COS_EPS)
    return np.where(ok, np.clip(dot / np.where(ok, na * nb, 1.0), -1.0, 1.0), 0.0)


def _center_sims(f, labels):
    """Similarity of every pixel to every center: (n_categories, H, W)."""
    centers = category_centers(f, labels)
    f, labels = _prepare(f, labels)
    cats = list(centers)
    flat = f.reshape(f.shape[0], -1)
    sims = np.stack([cosine_to(flat, centers[k]).reshape(labels.shape) for k in cats])
    return cats, sims, labels


def _own_index(cats, labels):
    lookup = {k: n for n, k in enumerate(cats)}
    idx = np.zeros(labels.shape, dtype=np.intp)
    for k, n in lookup.items():
        idx[labels.labels == k] = n
    return idx


def intra_similarity(f, labels) -> np.ndarray:
    cats, sims, labels = _center_sims(f, labels)
    own = np.take_along_axis(sims, _own_index(cats, labels)[None], axis=0)[0]
    return np.where(labels.valid, own, np.nan)


def inter_similarity(f, labels) -> np.ndarray:
    """Highest similarity to any *other* category center (the worst confuser)."""
    cats, sims, labels = _center_sims(f, labels)
    if len(cats) < 2:
        raise ValueError("inter-category similarity needs at least two categories")
    own = _own_index(cats, labels)
    masked = sims.copy()
    np.put_along_axis(masked, own[None], -np.inf, axis=0)
    return np.where(labels.valid, masked.max(axis=0), np.nan)


def similarity_margin(f, labels) -> np.ndarray:
    return intra_similarity(f, labels) - inter_similarity(f, labels)


def similarity_accuracy(f, labels, mask=None) -> float:
    """Fraction of pixels whose own center is strictly the most similar; ties are wrong."""
    cats, sims, labels = _center_sims(f, labels)
    if len(cats) < 2:
        raise ValueError("similarity accuracy needs at least two categories")
    sel = labels.valid if mask is None else labels.valid & np.asarray(mask, dtype=bool)
    if not sel.any():
        raise ValueError("mask selects no valid pixels")
    own = _own_index(cats, labels)
    own_sim = np.take_along_axis(sims, own[None], axis=0)[0]
    others = sims.copy()
    np.put_along_axis(others, own[None], -np.inf, axis=0)
    correct = own_sim > others.max(axis=0)
    return float(correct[sel].mean())


def boundary_mask(labels, width: int = 2) -> np.ndarray:
    """Valid pixels with a differently labelled valid pixel within Chebyshev distance ``width``."""
    labels = _as_labels(labels)
    if width < 1:
        raise ValueError("boundary width must be positive")
    lab, valid = labels.labels, labels.valid
    h, w = lab.shape
    out = np.zeros((h, w), dtype=bool)
    for dy in range(-width, width + 1):
        for dx in range(-width, width + 1):
            ys, yd = slice(max(0, -dy), min(h, h - dy)), slice(max(0, dy), min(h, h + dy))
            xs, xd = slice(max(0, -dx), min(w, w - dx)), slice(max(0, dx), min(w, w + dx))
            differs = valid[yd, xd] & (lab[yd, xd] != lab[ys, xs])
            out[ys, xs] |= differs
    return out & valid


@dataclass
class SimReport:
    intra_sim: np.ndarray
    inter_sim: np.ndarray
    sim_margin: np.ndarray
    mean_intra: float
    mean_margin: float
    sim_acc: float
    boundary_mean_intra: float
    boundary_mean_margin: float
    boundary_sim_acc: float
    boundary: np.ndarray


def sim_report(f, labels, boundary_width: int = 2) -> SimReport:
    """All similarity metrics, overall and restricted to the boundary band."""
    labels = _as_labels(labels)
    intra = intra_similarity(f, labels)
    inter = inter_similarity(f, labels)
    margin = intra - inter
    band = boundary_mask(labels, boundary_width)
    valid = labels.valid
    has_band = bool(band.any())
    return SimReport(
        intra_sim=intra,
        inter_sim=inter,
        sim_margin=margin,
        mean_intra=float(intra[valid].mean()),
        mean_margin=float(margin[valid].mean()),
        sim_acc=similarity_accuracy(f, labels),
        boundary_mean_intra=float(intra[band].mean()) if has_band else float("nan"),
        boundary_mean_margin=float(margin[band].mean()) if has_band else float("nan"),
        boundary_sim_acc=similarity_accuracy(f, labels, band) if has_band else float("nan"),
        boundary=band,
    )


# --- frequency domain -------------------------------------------------------


def dft2(x) -> np.ndarray:
    """2-D DFT with a 1/(H W) prefactor, so the DC bin is the mean."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"dft2 takes a single (H, W) plane, got {x.shape}")
    return np.fft.fft2(x) / x.size


def _channels(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.ndim == 2:
        f = f[None]
    if f.ndim != 3:
        raise ShapeError(f"expected (C, H, W) or (H, W), got {f.shape}")
    return f


def _spectra(f) -> np.ndarray:
    """Per-channel DFTs, (C, H, W) complex."""
    f = _channels(f)
    return np.fft.fft2(f, axes=(1, 2)) / (f.shape[1] * f.shape[2])


def frequency_grid(h: int, w: int):
    """Normalized frequencies (u along H, v along W) of each DFT bin."""
    return np.meshgrid(np.fft.fftfreq(h), np.fft.fftfreq(w), indexing="ij")


def radial_bin_index(h: int, w: int, n_bins: int) -> np.ndarray:
    """Radial bin of every DFT bin; equal-width bins on [0, sqrt(2)/2]."""
    if n_bins < 1:
        raise ValueError("n_bins must be positive")
    u, v = frequency_grid(h, w)
    rho = np.hypot(u, v)
    idx = np.floor(rho / (0.5 * np.sqrt(2.0)) * n_bins).astype(int)
    return np.minimum(idx, n_bins - 1)


@dataclass(frozen=True)
class Spectrum:
    bins: np.ndarray  # bin centres, cycles / pixel
    values: np.ndarray  # mean power (or amplitude) per bin, 0 in empty bins
    log_values: np.ndarray
    counts: np.ndarray  # DFT bins falling into each radial bin
    quantity: str = "power"

    @property
    def power(self) -> np.ndarray:
        return self.values

    @property
    def log_power(self) -> np.ndarray:
        return self.log_values


def _radial(plane: np.ndarray, n_bins: int, quantity: str) -> Spectrum:
    h, w = plane.shape
    idx = radial_bin_index(h, w, n_bins).ravel()
    counts = np.bincount(idx, minlength=n_bins)
    sums = np.bincount(idx, weights=plane.ravel(), minlength=n_bins)
    values = np.divide(sums, counts, out=np.zeros(n_bins), where=counts > 0)
    width = 0.5 * np.sqrt(2.0) / n_bins
    return Spectrum(
        bins=(np.arange(n_bins) + 0.5) * width,
        values=values,
        log_values=np.log(values + LOG_FLOOR),
        counts=counts,
        quantity=quantity,
    )


def radial_power_spectrum(f, n_bins: int = 32) -> Spectrum:
    """Channel-averaged |X_F|^2, averaged over radial frequency bins.

    ``sum(values * counts)`` equals the mean square of the input (Parseval).
    """
    power = (np.abs(_spectra(f)) ** 2).mean(axis=0)
    return _radial(power, n_bins, "power")


def radial_amplitude_spectrum(f, n_bins: int = 32) -> Spectrum:
    amp = np.abs(_spectra(f)).mean(axis=0)
    return _radial(amp, n_bins, "amplitude")


def nyquist_band_mask(h: int, w: int, threshold: float = NYQUIST) -> np.ndarray:
    u, v = frequency_grid(h, w)
    return (np.abs(u) > threshold) | (np.abs(v) > threshold)


def nyquist_band_energy(f, threshold: float = NYQUIST) -> float:
    """Share of spectral energy with |u| or |v| above ``threshold``; 0 for an all-zero input."""
    power = (np.abs(_spectra(f)) ** 2).mean(axis=0)
    total = power.sum()
    if total == 0:
        return 0.0
    band = power[nyquist_band_mask(*power.shape, threshold)].sum()
    return float(band / total)


def kernel_frequency_response(weights, pad_to: int = 64, n_bins: int = 32) -> Spectrum:
    """Radially binned mean DFT amplitude of every (k, k) slice of a conv weight.

    Each slice is zero-padded to (pad_to, pad_to) at the top-left corner
    before the transform.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim == 2:
        w = w[None, None]
    if w.ndim != 4 or w.shape[2] != w.shape[3]:
        raise ShapeError(f"kernel weights must be (Cout, Cin, k, k), got {w.shape}")
    k = w.shape[2]
    if k > pad_to:
        raise ShapeError(f"kernel size {k} exceeds pad_to {pad_to}")
    padded = np.zeros((w.shape[0] * w.shape[1], pad_to, pad_to))
    padded[:, :k, :k] = w.reshape(-1, k, k)
    return radial_amplitude_spectrum(padded, n_bins)
