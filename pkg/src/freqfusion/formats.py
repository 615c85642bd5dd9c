"""Little-endian binary containers for tensors, label maps and weight sets.

Layouts (all integers little-endian)::

    tensor   "FFTN" u32 version=1  u32 ndim (2|3)  ndim x u32 dims  f32 payload
    labels   "FFLB" u32 version=1  u32 H  u32 W  i32 ignore_index   i32 payload
    weights  "FFWT" u32 version=1  u32 count, then per entry:
             u16 name_len  utf-8 name  u32 ndim  ndim x u32 dims  f32 payload
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .analysis import LabelMap
from .errors import (
    BadMagic,
    DuplicateEntry,
    InvalidHeader,
    MissingEntry,
    NonFiniteValue,
    ShapeMismatch,
    TrailingBytes,
    TruncatedFile,
    UnsupportedVersion,
)
from .fusion import FusionConfig, FusionParams
from .generators import ConvParams, GeneratorParams

VERSION = 1
TENSOR_MAGIC = b"FFTN"
LABEL_MAGIC = b"FFLB"
WEIGHT_MAGIC = b"FFWT"

WEIGHT_NAMES = (
    "alpf.w", "alpf.b", "ahpf.w", "ahpf.b",
    "off_dir.w", "off_dir.b", "off_scale.w", "off_scale.b",
    "comp_low.w", "comp_low.b", "comp_high.w", "comp_high.b",
)  # fmt: skip


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.pos = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFile(f"{self.what}: needed {n} bytes at offset {self.pos}, file has {len(self.data)}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack("<" + fmt, self.take(struct.calcsize("<" + fmt)))

    def header(self, magic: bytes):
        got = self.take(4)
        if got != magic:
            raise BadMagic(f"{self.what}: expected magic {magic!r}, got {got!r}")
        (version,) = self.unpack("I")
        if version != VERSION:
            raise UnsupportedVersion(f"{self.what}: version {version} (only {VERSION} is supported)")

    def floats(self, shape) -> np.ndarray:
        n = int(np.prod(shape, dtype=np.int64))
        arr = np.frombuffer(self.take(4 * n), dtype="<f4").astype(np.float32).reshape(shape)
        if not np.isfinite(arr).all():
            raise NonFiniteValue(f"{self.what}: payload contains NaN or Inf")
        return arr

    def dims(self, allowed=None):
        (ndim,) = self.unpack("I")
        if allowed is not None and ndim not in allowed:
            raise InvalidHeader(f"{self.what}: ndim {ndim} not in {sorted(allowed)}")
        if ndim > 8:
            raise InvalidHeader(f"{self.what}: implausible ndim {ndim}")
        dims = self.unpack(f"{ndim}I")
        if 0 in dims:
            raise InvalidHeader(f"{self.what}: zero-sized dimension in {dims}")
        return dims

    def finish(self):
        if self.pos != len(self.data):
            raise TrailingBytes(f"{self.what}: {len(self.data) - self.pos} unexpected trailing bytes")


def _float_payload(arr, what) -> bytes:
    arr = np.asarray(arr, dtype=np.float32)
    if not np.isfinite(arr).all():
        raise NonFiniteValue(f"refusing to write NaN/Inf values in {what}")
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


def _read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _write_bytes(path, data: bytes):
    with open(path, "wb") as fh:
        fh.write(data)


def encode_tensor(t) -> bytes:
    t = np.asarray(t)
    if t.ndim not in (2, 3):
        raise InvalidHeader(f"tensor files hold rank 2 or 3 arrays, got shape {t.shape}")
    head = TENSOR_MAGIC + struct.pack(f"<II{t.ndim}I", VERSION, t.ndim, *t.shape)
    return head + _float_payload(t, "tensor")


def decode_tensor(data: bytes, what="tensor file") -> np.ndarray:
    r = _Reader(data, what)
    r.header(TENSOR_MAGIC)
    arr = r.floats(r.dims({2, 3}))
    r.finish()
    return arr


def write_tensor(path, t):
    _write_bytes(path, encode_tensor(t))


def read_tensor(path) -> np.ndarray:
    return decode_tensor(_read_bytes(path), os.fspath(path))


def encode_labels(labels: LabelMap) -> bytes:
    lab = labels.labels
    h, w = lab.shape
    head = LABEL_MAGIC + struct.pack("<IIIi", VERSION, h, w, labels.ignore_index)
    return head + np.ascontiguousarray(lab, dtype="<i4").tobytes()


def decode_labels(data: bytes, what="label file") -> LabelMap:
    r = _Reader(data, what)
    r.header(LABEL_MAGIC)
    h, w, ignore = r.unpack("IIi")
    if h == 0 or w == 0:
        raise InvalidHeader(f"{what}: empty label map {h}x{w}")
    lab = np.frombuffer(r.take(4 * h * w), dtype="<i4").astype(np.int32).reshape(h, w)
    r.finish()
    if (lab < 0).any():
        raise InvalidHeader(f"{what}: negative labels")
    return LabelMap(lab, ignore)


def write_labels(path, labels: LabelMap):
    _write_bytes(path, encode_labels(labels))


def read_labels(path) -> LabelMap:
    return decode_labels(_read_bytes(path), os.fspath(path))


def encode_weights(entries: dict) -> bytes:
    parts = [WEIGHT_MAGIC, struct.pack("<II", VERSION, len(entries))]
    for name, arr in entries.items():
        raw = name.encode("utf-8")
        arr = np.asarray(arr, dtype=np.float32)
        parts.append(struct.pack("<H", len(raw)) + raw)
        parts.append(struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape))
        parts.append(_float_payload(arr, name))
    return b"".join(parts)


def decode_weights(data: bytes, what="weight file") -> dict:
    r = _Reader(data, what)
    r.header(WEIGHT_MAGIC)
    (count,) = r.unpack("I")
    entries = {}
    for _ in range(count):
        (n,) = r.unpack("H")
        try:
            name = r.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidHeader(f"{what}: entry name is not UTF-8") from exc
        if name in entries:
            raise DuplicateEntry(f"{what}: duplicate entry {name!r}")
        entries[name] = r.floats(r.dims())
    r.finish()
    return entries


def params_to_entries(params: FusionParams) -> dict:
    g = params.generators
    out = {}
    for prefix, p in (
        ("alpf", g.alpf),
        ("ahpf", g.ahpf),
        ("off_dir", g.offset_dir),
        ("off_scale", g.offset_scale),
        ("comp_low", params.compress_low),
        ("comp_high", params.compress_high),
    ):
        out[prefix + ".w"] = p.weight
        out[prefix + ".b"] = p.bias
    return out


def expected_shapes(config: FusionConfig) -> dict:
    return {k: v.shape for k, v in params_to_entries(FusionParams.zeros(config)).items()}


def entries_to_params(entries: dict, config: FusionConfig) -> FusionParams:
    """Validate named arrays against ``config`` and assemble them into parameters."""
    for name in WEIGHT_NAMES:
        if name not in entries:
            raise MissingEntry(f"weight set lacks required entry {name!r}")
    for name, shape in expected_shapes(config).items():
        if entries[name].shape != shape:
            raise ShapeMismatch(name, shape, entries[name].shape)

    def conv(prefix):
        return ConvParams(entries[prefix + ".w"], entries[prefix + ".b"])

    gen = GeneratorParams(conv("alpf"), conv("ahpf"), conv("off_dir"), conv("off_scale"), config.kbar, config.khat, config.groups)
    return FusionParams(conv("comp_low"), conv("comp_high"), gen)


def write_weights(path, weights):
    """Write a :class:`FusionParams` or a plain name -> array mapping."""
    entries = params_to_entries(weights) if isinstance(weights, FusionParams) else dict(weights)
    _write_bytes(path, encode_weights(entries))


def read_weights(path, config: FusionConfig | None = None):
    """Named arrays, or validated :class:`FusionParams` when ``config`` is given."""
    entries = decode_weights(_read_bytes(path), os.fspath(path))
    return entries if config is None else entries_to_params(entries, config)
