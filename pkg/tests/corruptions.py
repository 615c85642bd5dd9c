"""Catalogue of malformed files and the typed error each must raise."""
import struct

import numpy as np

from freqfusion import errors, formats
from freqfusion.analysis import LabelMap
from freqfusion.fusion import FusionConfig, FusionParams

CONFIG = FusionConfig(8)


def valid_tensor() -> bytes:
    return formats.encode_tensor(np.arange(60, dtype=np.float32).reshape(3, 4, 5) / 7)


def valid_labels() -> bytes:
    lab = np.zeros((4, 6), np.int32)
    lab[:, 3:] = 1
    return formats.encode_labels(LabelMap(lab))


def weight_entries(config=CONFIG) -> dict:
    return formats.params_to_entries(FusionParams.random(config, seed=1))


def valid_weights() -> bytes:
    return formats.encode_weights(weight_entries())


def _patch(data: bytes, offset: int, fmt: str, *values) -> bytes:
    raw = struct.pack("<" + fmt, *values)
    return data[:offset] + raw + data[offset + len(raw) :]


def _tensor_cases():
    t = valid_tensor()
    nan = bytearray(t)
    nan[-4:] = struct.pack("<f", float("nan"))
    return [
        ("tensor_bad_magic", b"XXXX" + t[4:], errors.BadMagic),
        ("tensor_version_2", _patch(t, 4, "I", 2), errors.UnsupportedVersion),
        ("tensor_truncated_payload", t[:-4], errors.TruncatedFile),
        ("tensor_truncated_header", t[:10], errors.TruncatedFile),
        ("tensor_empty", b"", errors.TruncatedFile),
        ("tensor_trailing_bytes", t + b"\0\0\0\0", errors.TrailingBytes),
        ("tensor_ndim_4", _patch(t, 8, "I", 4), errors.InvalidHeader),
        ("tensor_dims_overstate", _patch(t, 20, "I", 6), errors.TruncatedFile),
        ("tensor_dims_understate", _patch(t, 20, "I", 4), errors.TrailingBytes),
        ("tensor_zero_dim", _patch(t, 12, "I", 0), errors.InvalidHeader),
        ("tensor_nan_payload", bytes(nan), errors.NonFiniteValue),
    ]


def _label_cases():
    lab = valid_labels()
    return [
        ("labels_bad_magic", b"FFTN" + lab[4:], errors.BadMagic),
        ("labels_truncated", lab[:-1], errors.TruncatedFile),
        ("labels_height_overstated", _patch(lab, 8, "I", 5), errors.TruncatedFile),
        ("labels_trailing_bytes", lab + b"\1\0\0\0", errors.TrailingBytes),
    ]


def _weight_cases():
    w = valid_weights()
    entries = weight_entries()
    missing = {k: v for k, v in entries.items() if k != "off_scale.b"}
    dup = formats.encode_weights(entries)
    # rename the second entry's name to the first's ("alpf.w"; both 6 bytes long)
    first = len(b"alpf.w")
    second_at = 12 + 2 + first + 4 + 16 + entries["alpf.w"].size * 4
    dup = dup[: second_at + 2] + b"alpf.w" + dup[second_at + 2 + first :]
    small = weight_entries(FusionConfig(8, kbar=3))
    mismatched = dict(entries, **{"alpf.w": small["alpf.w"], "alpf.b": small["alpf.b"]})
    bad_name = bytearray(w)
    bad_name[14] = 0xFF
    return [
        ("weights_bad_magic", b"FFLB" + w[4:], errors.BadMagic),
        ("weights_count_overstated", _patch(w, 8, "I", 13), errors.TruncatedFile),
        ("weights_duplicate_entry", dup, errors.DuplicateEntry),
        ("weights_missing_entry", formats.encode_weights(missing), errors.MissingEntry),
        ("weights_alpf_shape_lie", formats.encode_weights(mismatched), errors.ShapeMismatch),
        ("weights_truncated_name", w[:16], errors.TruncatedFile),
        ("weights_name_not_utf8", bytes(bad_name), errors.InvalidHeader),
    ]


def cases():
    """(name, kind, bytes, error class) for every corruption; kind is tensor, labels or weights."""
    out = []
    for kind, group in (("tensor", _tensor_cases()), ("labels", _label_cases()), ("weights", _weight_cases())):
        out.extend((name, kind, data, err) for name, data, err in group)
    return out


def load(kind: str, data: bytes):
    if kind == "tensor":
        return formats.decode_tensor(data)
    if kind == "labels":
        return formats.decode_labels(data)
    return formats.entries_to_params(formats.decode_weights(data), CONFIG)


def exit_code_for(err) -> int:
    return 4 if issubclass(err, errors.ShapeError) else 3


def cli_args(kind: str, path, tmp) -> list:
    """A CLI invocation that reads ``path`` as a file of ``kind``."""
    good_t, good_l = tmp / "good.fftn", tmp / "good.fflb"
    low, high = tmp / "low.fftn", tmp / "high.fftn"
    good_t.write_bytes(formats.encode_tensor(np.ones((2, 4, 6), np.float32)))
    good_l.write_bytes(valid_labels())
    low.write_bytes(formats.encode_tensor(np.ones((8, 4, 4), np.float32)))
    high.write_bytes(formats.encode_tensor(np.ones((8, 2, 2), np.float32)))
    if kind == "tensor":
        return ["spectrum", "--input", str(path), "--out-csv", str(tmp / "s.csv")]
    if kind == "labels":
        return ["analyze", "--features", str(good_t), "--labels", str(path), "--out-csv", str(tmp / "a.csv")]
    return ["fuse", "--low", str(low), "--high", str(high), "--weights", str(path), "--out", str(tmp / "o.fftn")]
