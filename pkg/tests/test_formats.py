import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import corruptions
import oracles
from freqfusion import errors, formats
from freqfusion.analysis import LabelMap, sim_report
from freqfusion.fixtures import make_fixture
from freqfusion.fusion import FusionConfig, FusionParams
from freqfusion.prng import SplitMix64, gaussian_stream, prng_next

# --- tensors, labels, weights --------------------------------------------------------


def test_tensor_roundtrip(tmp_path):
    t = np.random.default_rng(0).standard_normal((3, 4, 5)).astype(np.float32)
    formats.write_tensor(tmp_path / "t.fftn", t)
    back = formats.read_tensor(tmp_path / "t.fftn")
    assert back.dtype == np.float32 and back.tobytes() == t.tobytes()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=2, max_size=3), st.integers(0, 2**32 - 1))
def test_tensor_roundtrip_property(shape, seed):
    t = np.random.default_rng(seed).standard_normal(shape).astype(np.float32)
    assert formats.decode_tensor(formats.encode_tensor(t)).tobytes() == t.tobytes()


def test_tensor_file_size_arithmetic():
    data = formats.encode_tensor(np.array([[1, 2], [3, 4]], np.float32))
    assert len(data) == 36
    assert data[:4] == b"FFTN"
    assert data[12:20] == b"\2\0\0\0\2\0\0\0"


def test_bad_magic():
    with pytest.raises(errors.BadMagic):
        formats.decode_tensor(b"XXXX" + formats.encode_tensor(np.ones((1, 1, 1)))[4:])


def test_write_rejects_nan_and_rank(tmp_path):
    with pytest.raises(errors.NonFiniteValue):
        formats.write_tensor(tmp_path / "n.fftn", np.array([[np.nan]]))
    with pytest.raises(errors.InvalidHeader):
        formats.encode_tensor(np.ones(3))


def test_labels_roundtrip(tmp_path):
    lab = LabelMap(np.random.default_rng(1).integers(0, 4, size=(5, 7)), ignore_index=3)
    formats.write_labels(tmp_path / "l.fflb", lab)
    back = formats.read_labels(tmp_path / "l.fflb")
    assert back.ignore_index == 3 and np.array_equal(back.labels, lab.labels)


def test_weights_roundtrip(tmp_path):
    cfg = FusionConfig(8)
    params = FusionParams.random(cfg, seed=2)
    formats.write_weights(tmp_path / "w.ffwt", params)
    entries = formats.read_weights(tmp_path / "w.ffwt")
    assert list(entries) == list(formats.WEIGHT_NAMES)
    back = formats.read_weights(tmp_path / "w.ffwt", cfg)
    for name, arr in formats.params_to_entries(params).items():
        assert formats.params_to_entries(back)[name].tobytes() == arr.tobytes()


def test_minimal_weight_set_uses_floored_channels():
    shapes = formats.expected_shapes(FusionConfig(8, reduction=4, kbar=5, khat=3, groups=4))
    assert shapes["comp_low.w"] == (8, 8, 1, 1)
    assert shapes["alpf.w"] == (25, 8, 3, 3)
    assert shapes["ahpf.w"] == (9, 8, 3, 3)
    assert shapes["off_dir.w"] == (8, 16, 3, 3)
    entries = {name: np.zeros(shape, np.float32) for name, shape in shapes.items()}
    formats.entries_to_params(formats.decode_weights(formats.encode_weights(entries)), FusionConfig(8))


def test_shape_mismatch_names_entry():
    entries = corruptions.weight_entries()
    entries["alpf.w"] = np.zeros((9, 8, 3, 3), np.float32)
    with pytest.raises(errors.ShapeMismatch) as info:
        formats.entries_to_params(entries, FusionConfig(8, kbar=5))
    assert info.value.entry == "alpf.w"
    assert "alpf.w" in str(info.value)


@pytest.mark.parametrize("case", corruptions.cases(), ids=lambda c: c[0])
def test_corrupted_files_raise_typed_errors(case):
    _, kind, data, err = case
    with pytest.raises(err):
        corruptions.load(kind, data)


def test_valid_files_in_catalogue_load():
    for kind, data in (("tensor", corruptions.valid_tensor()), ("labels", corruptions.valid_labels()), ("weights", corruptions.valid_weights())):
        corruptions.load(kind, data)


# --- prng -----------------------------------------------------------------------------


def test_splitmix_reference_value():
    assert prng_next(0)[0] == 0xE220A8397B1DCDAF
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF
    assert oracles.splitmix64(0, 1)[0] == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("seed", [0, 1, 42, 2**64 - 1])
def test_vectorized_matches_scalar(seed):
    a, b = SplitMix64(seed), SplitMix64(seed)
    got = a.u64(5).tolist() + a.u64(3).tolist()
    assert got == [b.next_u64() for _ in range(8)] == oracles.splitmix64(seed, 8)
    assert a.state == b.state


def test_uniform_and_gaussian_construction():
    raw = oracles.splitmix64(7, 4)
    u = [(v >> 11) * 2.0**-53 for v in raw]
    assert SplitMix64(7).uniforms(4).tolist() == u
    r = np.sqrt(-2 * np.log1p(-u[0]))
    want = np.float32([r * np.cos(2 * np.pi * u[1]), r * np.sin(2 * np.pi * u[1])])
    assert SplitMix64(7).gaussians(2).tobytes() == want.tobytes()


def test_gaussian_streams_deterministic_and_seeded():
    s0, s0b, s1 = gaussian_stream(0), gaussian_stream(0), gaussian_stream(1)
    a = [next(s0) for _ in range(2000)]
    assert a == [next(s0b) for _ in range(2000)]
    assert a[0] != next(s1)
    assert abs(np.mean(a)) < 0.1 and abs(np.std(a) - 1) < 0.1


# --- fixtures -------------------------------------------------------------------------


def test_two_class_noiseless_is_separable():
    fx = make_fixture("two_class_noisy", 3, (8, 6, 8), sigma=0.0)
    rep = sim_report(fx.tensor, fx.labels)
    assert rep.sim_acc == 1.0 and rep.mean_margin > 0
    np.testing.assert_allclose(np.linalg.norm(fx.tensor[:, 0, 0]), 1.0, atol=1e-6)


def test_white_noise_mean():
    x = make_fixture("white_noise", 42, (1, 16, 16)).tensor
    assert abs(x.mean()) <= 3 / 16


def test_pyramid_constant_levels():
    fx = make_fixture("pyramid", 0, (2, 16, 16), levels=3, value=1.5)
    assert [t.shape for t in fx.tensors] == [(2, 16, 16), (2, 8, 8), (2, 4, 4)]
    assert all(np.all(t == 1.5) for t in fx.tensors)


def test_cosine_grid_is_pure_tones():
    x = make_fixture("cosine_grid", 5, (3, 8, 8)).tensor
    for plane in x:
        spec = np.abs(np.fft.fft2(plane)) > 1e-6
        assert 1 <= spec.sum() <= 2


@pytest.mark.parametrize("kind", ["two_class_noisy", "white_noise", "cosine_grid", "pyramid"])
def test_fixtures_byte_deterministic(kind):
    a = make_fixture(kind, 11, (4, 8, 8), sigma=0.2)
    b = make_fixture(kind, 11, (4, 8, 8), sigma=0.2)
    assert all(x.tobytes() == y.tobytes() for x, y in zip(a.tensors, b.tensors))
    c = make_fixture(kind, 12, (4, 8, 8), sigma=0.2)
    assert a.tensor.tobytes() != c.tensor.tobytes()


def test_fixture_errors():
    with pytest.raises(ValueError):
        make_fixture("plaid", 0, (1, 2, 2))
    with pytest.raises(ValueError):
        make_fixture("white_noise", 0, (0, 2, 2))
    with pytest.raises(ValueError):
        make_fixture("pyramid", 0, (1, 6, 6), levels=3)
