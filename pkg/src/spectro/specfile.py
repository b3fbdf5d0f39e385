"""Binary spectrogram files, plus a CSV export for human inspection.

Layout (little endian): magic "NASP", u32 version=1, u8 dtype (0: f32,
1: f64), u8 kind (0: magnitude, 1: power, 2: complex), u16 reserved=0,
u32 n_bins, u32 n_frames, f64 sample_rate, u32 hop; then the payload,
row-major bins x frames, complex cells interleaved re,im. Written bytes are
a pure function of the spectrogram, so identical runs produce identical
files, and 64-bit round trips are bit-exact.
"""

import struct

import numpy as np

from .errors import CorruptFileError
from .transforms import Spectrogram

_MAGIC = b"NASP"
_VERSION = 1
_HEADER = struct.Struct("<4sIBBHIIdI")
_DTYPE_CODES = {"f32": 0, "f64": 1}
_KIND_CODES = {"magnitude": 0, "power": 1, "complex": 2}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


def write_spec(path, spec: Spectrogram, dtype: str = "f64") -> None:
    """Write a spectrogram; ``dtype="f32"`` narrows the payload to float32."""
    if dtype not in _DTYPE_CODES:
        raise ValueError(f"dtype must be 'f32' or 'f64', got {dtype!r}")
    if spec.kind not in _KIND_CODES:
        raise ValueError(f"unknown spectrogram kind {spec.kind!r}")
    scalar = "<f4" if dtype == "f32" else "<f8"
    if spec.kind == "complex":
        flat = np.empty(spec.data.size * 2)
        flat[0::2] = spec.data.real.ravel()
        flat[1::2] = spec.data.imag.ravel()
    else:
        flat = spec.data.ravel()
    header = _HEADER.pack(_MAGIC, _VERSION, _DTYPE_CODES[dtype], _KIND_CODES[spec.kind],
                          0, spec.n_bins, spec.n_frames, spec.sample_rate, spec.hop)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flat.astype(scalar).tobytes())


def read_spec(path) -> Spectrogram:
    """Read a spectrogram file written by write_spec."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise CorruptFileError(f"{path}: shorter than the header")
    magic, version, dtype_code, kind_code, _, n_bins, n_frames, sample_rate, hop = \
        _HEADER.unpack_from(blob, 0)
    if magic != _MAGIC:
        raise CorruptFileError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise CorruptFileError(f"{path}: unsupported version {version}")
    if kind_code not in _KIND_NAMES or dtype_code not in (0, 1):
        raise CorruptFileError(f"{path}: unknown dtype/kind codes ({dtype_code}, {kind_code})")
    kind = _KIND_NAMES[kind_code]
    scalar = np.dtype("<f4") if dtype_code == 0 else np.dtype("<f8")
    cells = n_bins * n_frames * (2 if kind == "complex" else 1)
    payload = blob[_HEADER.size:]
    if len(payload) != cells * scalar.itemsize:
        raise CorruptFileError(
            f"{path}: payload is {len(payload)} bytes but the header implies "
            f"{cells * scalar.itemsize}")
    flat = np.frombuffer(payload, dtype=scalar).astype(np.float64)
    if kind == "complex":
        data = (flat[0::2] + 1j * flat[1::2]).reshape(n_bins, n_frames)
    else:
        data = flat.reshape(n_bins, n_frames)
    return Spectrogram(data=data, bin_freqs_hz=None, hop=hop,
                       sample_rate=sample_rate, kind=kind)


def write_csv(path, spec: Spectrogram) -> None:
    """Export a spectrogram as CSV, one row per bin.

    Complex spectrograms interleave re,im column pairs. Values use repr-exact
    float formatting, so the export is lossless for float64.
    """
    if spec.kind == "complex":
        out = np.empty((spec.n_bins, spec.n_frames * 2))
        out[:, 0::2] = spec.data.real
        out[:, 1::2] = spec.data.imag
    else:
        out = spec.data
    np.savetxt(path, out, delimiter=",", fmt="%.17g")
