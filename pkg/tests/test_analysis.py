import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from freqfusion.analysis import (
    LabelMap,
    boundary_mask,
    category_centers,
    dft2,
    frequency_grid,
    inter_similarity,
    intra_similarity,
    kernel_frequency_response,
    nyquist_band_energy,
    radial_amplitude_spectrum,
    radial_bin_index,
    radial_power_spectrum,
    sim_report,
    similarity_accuracy,
    similarity_margin,
)
from freqfusion.errors import ShapeError


def three_class(seed, c=5, h=6, w=7, ignore_some=True):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 3, size=(h, w)).astype(np.int32)
    labels[0, :3] = [0, 1, 2]
    if ignore_some:
        labels[-1, -1] = 255
    f = rng.standard_normal((c, h, w)).astype(np.float32)
    return f, labels


# --- similarity ---------------------------------------------------------------------


def test_centers_and_ignore():
    f = np.array([[[1.0, 3.0, 100.0]], [[0.0, 2.0, 100.0]]], np.float32)
    cs = category_centers(f, LabelMap(np.array([[0, 0, 255]])))
    assert list(cs) == [0]
    np.testing.assert_allclose(cs[0], [2.0, 1.0])


def test_perfectly_separated_features():
    # two classes along orthogonal axes: intra 1, inter 0, margin 1, accuracy 1
    f = np.zeros((2, 2, 4), np.float32)
    f[0, :, :2] = 1.0
    f[1, :, 2:] = 2.0
    labels = np.array([[0, 0, 1, 1]] * 2)
    np.testing.assert_allclose(intra_similarity(f, labels), 1.0)
    np.testing.assert_allclose(inter_similarity(f, labels), 0.0)
    np.testing.assert_allclose(similarity_margin(f, labels), 1.0)
    assert similarity_accuracy(f, labels) == 1.0


def test_identical_centers_tie_counts_wrong():
    f = np.ones((3, 2, 2), np.float32)
    labels = np.array([[0, 1], [0, 1]])
    np.testing.assert_allclose(similarity_margin(f, labels), 0.0)
    assert similarity_accuracy(f, labels) == 0.0


def test_ignored_pixels_are_nan():
    f, labels = three_class(0)
    assert math.isnan(intra_similarity(f, labels)[-1, -1])
    assert not np.isnan(intra_similarity(f, labels)[:-1]).any()


@pytest.mark.parametrize("seed", range(5))
def test_metrics_match_exhaustive_oracle(seed):
    f, labels = three_class(seed)
    intra, inter, margin, correct = oracles.similarity_maps(f, labels)
    valid = labels != 255
    np.testing.assert_allclose(intra_similarity(f, labels)[valid], intra[valid], atol=1e-6)
    np.testing.assert_allclose(inter_similarity(f, labels)[valid], inter[valid], atol=1e-6)
    np.testing.assert_allclose(similarity_margin(f, labels)[valid], margin[valid], atol=1e-6)
    assert similarity_accuracy(f, labels) == pytest.approx(correct[valid].mean(), abs=1e-12)


def test_single_class_inter_is_undefined():
    with pytest.raises(ValueError):
        inter_similarity(np.ones((2, 2, 2), np.float32), np.zeros((2, 2), int))


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        intra_similarity(np.ones((2, 3, 3), np.float32), np.zeros((3, 4), int))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_similarity_scale_invariance(seed, lam):
    f, labels = three_class(seed, ignore_some=False)
    base = similarity_accuracy(f, labels)
    assert similarity_accuracy(np.float32(lam) * f, labels) == pytest.approx(base, abs=1e-12)
    assert similarity_accuracy(3 * f, labels) == base


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_metric_ranges(seed):
    f, labels = three_class(seed)
    rep = sim_report(f, labels)
    valid = labels != 255
    assert (np.abs(rep.intra_sim[valid]) <= 1 + 1e-12).all()
    assert (np.abs(rep.sim_margin[valid]) <= 2 + 1e-12).all()
    assert 0.0 <= rep.sim_acc <= 1.0


# --- boundary -----------------------------------------------------------------------


def test_boundary_two_halves():
    labels = np.array([[0] * 4 + [1] * 4] * 3)
    band = boundary_mask(labels, 2)
    assert band[:, 2:6].all() and not band[:, :2].any() and not band[:, 6:].any()


def test_boundary_single_class_empty_and_ignore_excluded():
    assert not boundary_mask(np.zeros((4, 4), int), 2).any()
    labels = np.array([[0, 255, 1]])
    band = boundary_mask(labels, 1)
    # the ignored pixel is never in the band and 0, 1 are 2 apart
    assert band.tolist() == [[False, False, False]]
    assert boundary_mask(labels, 2).tolist() == [[True, False, True]]


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_boundary_matches_oracle(seed, d):
    _, labels = three_class(seed)
    assert np.array_equal(boundary_mask(labels, d), oracles.boundary(labels, d))


def test_boundary_monotone_in_width():
    _, labels = three_class(7, h=12, w=12)
    bands = [boundary_mask(labels, d) for d in (1, 2, 3)]
    assert (bands[0] <= bands[1]).all() and (bands[1] <= bands[2]).all()


def test_sim_report_boundary_subset():
    f, labels = three_class(8)
    rep = sim_report(f, labels, 1)
    assert np.array_equal(rep.boundary, boundary_mask(labels, 1))
    assert rep.boundary_mean_intra == pytest.approx(np.nanmean(rep.intra_sim[rep.boundary]))


# --- spectra ------------------------------------------------------------------------


def test_dft2_constant_is_dc_only():
    x = dft2(np.full((4, 6), 2.5))
    assert x[0, 0] == pytest.approx(2.5)
    x[0, 0] = 0
    assert np.abs(x).max() < 1e-12


def test_dft2_cosine_peaks():
    c = 1.7
    x = c * np.cos(2 * np.pi * 2 * np.arange(8) / 8)[None, :].repeat(4, 0)
    spec = np.abs(dft2(x))
    assert spec[0, 2] == pytest.approx(c / 2) and spec[0, 6] == pytest.approx(c / 2)
    spec[0, 2] = spec[0, 6] = 0
    assert spec.max() < 1e-12


def test_dft2_matches_direct_sum():
    x = np.random.default_rng(0).standard_normal((5, 6))
    np.testing.assert_allclose(dft2(x), oracles.dft2(x), atol=1e-12)


@pytest.mark.parametrize("n", [16, 32])
def test_parseval(n):
    x = np.random.default_rng(n).standard_normal((n, n))
    assert (np.abs(dft2(x)) ** 2).sum() == pytest.approx((x**2).mean(), abs=1e-4)


def test_frequency_grid_signs():
    u, v = frequency_grid(4, 5)
    assert [u[k, 0] for k in range(4)] == [oracles.signed_freq(k, 4) for k in range(4)]
    np.testing.assert_allclose(v[0], [oracles.signed_freq(k, 5) for k in range(5)])


def test_radial_bins_cover_all_frequencies():
    idx = radial_bin_index(32, 32, 8)
    assert idx.min() == 0 and idx.max() == 7
    assert idx[16, 16] == 7  # corner frequency (0.5, 0.5) is the outermost bin


def test_power_spectrum_parseval_and_counts():
    x = np.random.default_rng(1).standard_normal((3, 16, 16))
    spec = radial_power_spectrum(x, 10)
    assert spec.counts.sum() == 256
    assert (spec.values * spec.counts).sum() == pytest.approx((x**2).mean(), rel=1e-10)
    np.testing.assert_allclose(spec.log_values, np.log(spec.values + 1e-12))
    assert spec.power is spec.values and spec.log_power is spec.log_values


def test_amplitude_spectrum_of_constant():
    spec = radial_amplitude_spectrum(np.full((8, 8), 3.0), 4)
    assert spec.values[0] == pytest.approx(3.0 / spec.counts[0])
    assert np.allclose(spec.values[1:], 0.0)


def test_nyquist_band_energy():
    n = 32
    assert nyquist_band_energy(np.zeros((n, n))) == 0.0
    assert nyquist_band_energy(np.full((n, n), 4.0)) == 0.0
    tone = np.cos(2 * np.pi * 0.375 * np.arange(n))[:, None].repeat(n, 1)
    assert nyquist_band_energy(tone) == pytest.approx(1.0, abs=1e-6)
    low = np.cos(2 * np.pi * 0.125 * np.arange(n))[None, :].repeat(n, 0)
    assert nyquist_band_energy(low) == pytest.approx(0.0, abs=1e-12)


def test_uniform_kernel_response_decreases():
    spec = kernel_frequency_response(np.full((1, 1, 5, 5), 1 / 25), pad_to=64, n_bins=32)
    # 1/(H W) prefactor: the DC bin of a unit-sum kernel padded to 64x64 is 1/4096
    assert 0 < spec.values[0] <= 1 / 4096 + 1e-15
    assert (np.diff(spec.values[:4]) <= 0).all()


def test_kernel_response_delta_is_flat():
    k = np.zeros((3, 3))
    k[1, 1] = 1.0
    spec = kernel_frequency_response(k, pad_to=16, n_bins=4)
    np.testing.assert_allclose(spec.values, 1.0 / 256)
