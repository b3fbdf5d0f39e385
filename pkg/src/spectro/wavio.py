"""Minimal RIFF/WAVE reader and writer.

Reads PCM 16-bit and IEEE float 32-bit files with any channel count,
averaging channels down to mono. Writing supports the same two encodings,
mono only (a Signal is mono by definition).
"""

import struct

import numpy as np

from .errors import CorruptFileError, UnsupportedFormatError
from .signal import Signal

_FORMAT_PCM = 1
_FORMAT_IEEE_FLOAT = 3


def read_wav(path) -> Signal:
    """Read a WAV file into a mono Signal.

    16-bit samples are scaled by 1/32768 into [-1, 1); float samples are
    taken as-is. Multi-channel audio is averaged to mono. Unknown chunks are
    skipped.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptFileError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise CorruptFileError(f"{path}: truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if size < 16:
                raise CorruptFileError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word aligned

    if fmt is None or payload is None:
        raise CorruptFileError(f"{path}: missing fmt or data chunk")
    audio_format, channels, sample_rate, _, block_align, bits = fmt
    if channels < 1:
        raise CorruptFileError(f"{path}: invalid channel count {channels}")

    if audio_format == _FORMAT_PCM and bits == 16:
        raw = np.frombuffer(payload[:len(payload) - len(payload) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == _FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[:len(payload) - len(payload) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedFormatError(
            f"{path}: unsupported encoding (format tag {audio_format}, {bits}-bit); "
            "only PCM 16-bit and IEEE float 32-bit are readable")

    if samples.size % channels != 0:
        samples = samples[:samples.size - samples.size % channels]
    frames = samples.reshape(-1, channels)
    return Signal(frames.mean(axis=1), float(sample_rate))


def write_wav(path, x: Signal, encoding: str = "float32") -> None:
    """Write a mono Signal as a WAV file (``pcm16`` or ``float32``)."""
    if encoding == "pcm16":
        scaled = np.clip(np.round(x.samples * 32768.0), -32768, 32767).astype("<i2")
        payload = scaled.tobytes()
        audio_format, bits = _FORMAT_PCM, 16
    elif encoding == "float32":
        payload = x.samples.astype("<f4").tobytes()
        audio_format, bits = _FORMAT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"encoding must be 'pcm16' or 'float32', got {encoding!r}")

    sample_rate = int(round(x.sample_rate))
    block_align = bits // 8
    fmt_chunk = struct.pack("<HHIIHH", audio_format, 1, sample_rate,
                            sample_rate * block_align, block_align, bits)
    pad = b"\x00" if len(payload) % 2 else b""
    body = (b"WAVE"
            + b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk
            + b"data" + struct.pack("<I", len(payload)) + payload + pad)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)
