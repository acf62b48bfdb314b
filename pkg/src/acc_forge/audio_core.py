"""Mono waveforms, WAV I/O, resampling and SNR-controlled mixing.

All functions are pure over their inputs. Mixing never normalizes; samples
that leave [-1, 1] are only clipped when a clip is encoded to PCM-16.
"""

from __future__ import annotations

import io
import logging
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Optional, Union

import numpy as np

from .errors import (
    CorruptFile,
    EmptyClip,
    OffsetOutOfRange,
    SampleRateMismatch,
    SilentInput,
    UnsupportedFormat,
)

log = logging.getLogger(__name__)

CANONICAL_RATE = 16000

_FORMAT_PCM = 0x0001
_FORMAT_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE

PathLike = Union[str, "os.PathLike[str]"]


@dataclass(frozen=True, eq=False)
class AudioClip:
    sample_rate: int
    samples: np.ndarray
    source_id: Optional[str] = None

    def __post_init__(self):
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional (mono)")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "sample_rate", int(self.sample_rate))
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration_seconds(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class MixParams:
    offset_seconds: float
    snr_db: float
    resolved_gain: float

    def __post_init__(self):
        if not self.offset_seconds >= 0:
            raise ValueError("offset_seconds must be >= 0")
        if not (np.isfinite(self.resolved_gain) and self.resolved_gain > 0):
            raise ValueError("resolved_gain must be positive and finite")


# --------------------------------------------------------------------- WAV I/O

def _read_chunks(data: bytes, name: str):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise UnsupportedFormat(f"{name}: not a RIFF/WAVE file")
    pos = 12
    fmt = None
    payload = None
    while pos < len(data):
        if pos + 8 > len(data):
            raise CorruptFile(f"{name}: truncated chunk header at byte {pos}")
        cid = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise CorruptFile(f"{name}: chunk {cid!r} declares {size} bytes, {len(body)} present")
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise CorruptFile(f"{name}: missing fmt chunk")
    if payload is None:
        raise CorruptFile(f"{name}: missing data chunk")
    return fmt, payload


def _decode(fmt: bytes, payload: bytes, name: str):
    if len(fmt) < 16:
        raise CorruptFile(f"{name}: fmt chunk too short")
    tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == _FORMAT_EXTENSIBLE:
        if len(fmt) < 26:
            raise CorruptFile(f"{name}: extensible fmt chunk too short")
        (tag,) = struct.unpack("<H", fmt[24:26])
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{name}: {channels} channels (only mono or stereo)")
    if rate <= 0:
        raise CorruptFile(f"{name}: sample rate {rate}")
    if (tag, bits) not in ((_FORMAT_PCM, 16), (_FORMAT_PCM, 24), (_FORMAT_PCM, 32), (_FORMAT_FLOAT, 32)):
        raise UnsupportedFormat(f"{name}: format tag {tag:#06x} with {bits} bits per sample")
    width = bits // 8
    if block_align != width * channels:
        raise CorruptFile(f"{name}: block align {block_align} inconsistent with {channels}x{bits} bit")
    usable = len(payload) - len(payload) % block_align
    raw = payload[:usable]

    if tag == _FORMAT_FLOAT:
        values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    elif bits == 16:
        values = np.frombuffer(raw, dtype="<i2") / 32768.0
    elif bits == 32:
        values = np.frombuffer(raw, dtype="<i4") / 2147483648.0
    else:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        values = ints / 8388608.0
    if not np.all(np.isfinite(values)):
        raise CorruptFile(f"{name}: non-finite float samples")
    values = values.reshape(-1, channels).mean(axis=1)
    return rate, values


def load_wav(path: PathLike) -> AudioClip:
    """Read a PCM-16/24/32 or float-32 WAV file as a mono clip.

    Stereo input is averaged to mono; integer formats are scaled by
    ``2**(bits-1)`` so full scale maps to [-1, 1).
    """
    with open(path, "rb") as fh:
        data = fh.read()
    name = os.fspath(path)
    fmt, payload = _read_chunks(data, name)
    rate, samples = _decode(fmt, payload, name)
    return AudioClip(rate, samples, source_id=name)


def encode_wav(clip: AudioClip) -> tuple[bytes, int]:
    """Encode as PCM-16 little-endian; returns ``(wav_bytes, clipped_count)``."""
    x = clip.samples
    clipped = int(np.count_nonzero((x > 1.0) | (x < -1.0)))
    ints = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
    data = ints.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    fmt = b"fmt " + struct.pack("<IHHIIHH", 16, _FORMAT_PCM, 1, clip.sample_rate, clip.sample_rate * 2, 2, 16)
    return header + fmt + b"data" + struct.pack("<I", len(data)) + data, clipped


def save_wav(clip: AudioClip, path: Union[PathLike, BinaryIO]) -> int:
    """Write ``clip`` as PCM-16 and return how many samples were hard-clipped."""
    blob, clipped = encode_wav(clip)
    if isinstance(path, (io.IOBase,)) or hasattr(path, "write"):
        path.write(blob)
    else:
        with open(path, "wb") as fh:
            fh.write(blob)
    if clipped:
        log.warning("clipped %d sample(s) while writing %s", clipped, getattr(path, "name", path))
    return clipped


# ------------------------------------------------------------------ processing

def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Linear-interpolation resample; positions past the last sample hold it."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == clip.sample_rate:
        return clip
    n_in = len(clip)
    n_out = int(np.floor(n_in * target_rate / clip.sample_rate + 0.5))
    if n_in == 0 or n_out == 0:
        return AudioClip(target_rate, np.zeros(n_out), clip.source_id)
    positions = np.arange(n_out) * (clip.sample_rate / target_rate)
    out = np.interp(positions, np.arange(n_in), clip.samples)
    return AudioClip(target_rate, out, clip.source_id)


def rms(clip: AudioClip) -> float:
    if len(clip) == 0:
        raise EmptyClip(f"cannot measure an empty clip ({clip.source_id})")
    return float(np.sqrt(np.mean(np.square(clip.samples))))


def gain_for_snr(base: AudioClip, event: AudioClip, snr_db: float) -> float:
    """Scalar for ``event`` that puts it ``snr_db`` below ``base`` in RMS terms."""
    rb, re = rms(base), rms(event)
    if rb == 0 or re == 0:
        which = "base" if rb == 0 else "event"
        raise SilentInput(f"{which} clip is silent; SNR is undefined")
    return rb / re * 10.0 ** (-snr_db / 20.0)


def offset_samples(offset_seconds: float, sample_rate: int) -> int:
    return int(np.floor(offset_seconds * sample_rate + 0.5))


def mix(base: AudioClip, event: AudioClip, params: MixParams) -> AudioClip:
    if base.sample_rate != event.sample_rate:
        raise SampleRateMismatch(f"base at {base.sample_rate} Hz, event at {event.sample_rate} Hz")
    start = offset_samples(params.offset_seconds, base.sample_rate)
    if start < 0 or start > len(base):
        raise OffsetOutOfRange(
            f"offset {params.offset_seconds:.6f}s outside [0, {base.duration_seconds:.6f}s]"
        )
    n_out = max(len(base), start + len(event))
    out = np.zeros(n_out)
    out[:len(base)] = base.samples
    out[start:start + len(event)] += params.resolved_gain * event.samples
    return AudioClip(base.sample_rate, out)
