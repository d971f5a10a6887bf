"""WAV decode/encode, mono downmix, and band-limited resampling.

All audio in the pipeline is a mono float stream in [-1, 1] plus a sample
rate. WAV is the only container: recordings arrive as RIFF/WAVE (PCM16/24/32
or float32, 1-2 channels) and everything we emit is PCM16 mono.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import FormatError, UnsupportedCodecError

DEFAULT_SAMPLE_RATE = 16000

_FMT_PCM = 1
_FMT_FLOAT = 3
_FMT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sample stream. samples: 1-D float64 in [-1, 1]; rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {arr.shape}")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class WavInfo:
    """Header-only probe of a WAV file."""

    n_frames: int
    sample_rate: int
    channels: int
    bits_per_sample: int
    format_tag: int

    @property
    def duration_seconds(self) -> float:
        return self.n_frames / self.sample_rate


def _parse_chunks(data: bytes):
    """Walk the RIFF chunk list, yielding (id, payload_offset, payload_size)."""
    if len(data) < 12:
        raise FormatError("missing RIFF header (file shorter than 12 bytes)")
    if data[0:4] != b"RIFF":
        raise FormatError("missing 'RIFF' chunk id")
    if data[8:12] != b"WAVE":
        raise FormatError("missing 'WAVE' form type in RIFF header")
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        yield cid, pos + 8, size
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def _parse_fmt(data: bytes, off: int, size: int):
    if size < 16:
        raise FormatError(f"invalid 'fmt ' chunk: {size} bytes, need >= 16")
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack_from(
        "<HHIIHH", data, off)
    if tag == _FMT_EXTENSIBLE:
        # actual format lives in the first two bytes of the SubFormat GUID
        if size < 40:
            raise FormatError(
                f"invalid 'fmt ' chunk: extensible header is {size} bytes, need 40")
        (tag,) = struct.unpack_from("<H", data, off + 24)
    return tag, channels, rate, block_align, bits


def wav_info(data: bytes) -> WavInfo:
    """Read frame count and format from the header without decoding samples."""
    fmt = None
    data_size = None
    for cid, off, size in _parse_chunks(data):
        if cid == b"fmt ":
            fmt = _parse_fmt(data, off, size)
        elif cid == b"data":
            if off + size > len(data):
                raise FormatError(
                    f"'data' chunk truncated: header says {size} bytes, "
                    f"{len(data) - off} present")
            data_size = size
    if fmt is None:
        raise FormatError("missing 'fmt ' chunk")
    if data_size is None:
        raise FormatError("missing 'data' chunk")
    tag, channels, rate, block_align, bits = fmt
    if channels < 1 or block_align <= 0 or rate <= 0:
        raise FormatError("invalid 'fmt ' chunk: bad channel count, rate or block align")
    return WavInfo(n_frames=data_size // block_align, sample_rate=rate,
                   channels=channels, bits_per_sample=bits, format_tag=tag)


def decode_wav(data: bytes) -> AudioBuffer:
    """Decode a RIFF/WAVE byte string to a mono AudioBuffer.

    Accepts PCM16, PCM24, PCM32 and float32, 1-2 channels. Multi-channel
    input is averaged per frame; samples are scaled and clamped to [-1, 1].
    """
    fmt = None
    payload = None
    for cid, off, size in _parse_chunks(data):
        if cid == b"fmt ":
            fmt = _parse_fmt(data, off, size)
        elif cid == b"data":
            if off + size > len(data):
                raise FormatError(
                    f"'data' chunk truncated: header says {size} bytes, "
                    f"{len(data) - off} present")
            payload = data[off:off + size]
    if fmt is None:
        raise FormatError("missing 'fmt ' chunk")
    if payload is None:
        raise FormatError("missing 'data' chunk")

    tag, channels, rate, block_align, bits = fmt
    if rate <= 0:
        raise FormatError(f"invalid 'fmt ' chunk: sample rate {rate}")
    if channels not in (1, 2):
        raise FormatError(f"unsupported channel count {channels}, need 1 or 2")

    if tag == _FMT_PCM and bits == 16:
        raw = np.frombuffer(payload[:len(payload) // 2 * 2], dtype="<i2")
        x = raw.astype(np.float64) / 32768.0
    elif tag == _FMT_PCM and bits == 24:
        b = np.frombuffer(payload[:len(payload) // 3 * 3], dtype=np.uint8)
        b = b.reshape(-1, 3)
        raw = (b[:, 0].astype(np.int32)
               | (b[:, 1].astype(np.int32) << 8)
               | (b[:, 2].astype(np.int32) << 16))
        raw = np.where(raw >= 1 << 23, raw - (1 << 24), raw)
        x = raw.astype(np.float64) / float(1 << 23)
    elif tag == _FMT_PCM and bits == 32:
        raw = np.frombuffer(payload[:len(payload) // 4 * 4], dtype="<i4")
        x = raw.astype(np.float64) / float(1 << 31)
    elif tag == _FMT_FLOAT and bits == 32:
        x = np.frombuffer(payload[:len(payload) // 4 * 4], dtype="<f4").astype(np.float64)
        x = np.nan_to_num(x, nan=0.0, posinf=1.0, neginf=-1.0)
    else:
        raise UnsupportedCodecError(
            f"unsupported encoding: format tag {tag}, {bits} bits per sample")

    if channels == 2:
        x = x[:len(x) // 2 * 2].reshape(-1, 2).mean(axis=1)
    return AudioBuffer(np.clip(x, -1.0, 1.0), rate)


def encode_wav(buf: AudioBuffer) -> bytes:
    """Encode to mono PCM16 little-endian WAV."""
    q = np.clip(np.rint(buf.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = q.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, _FMT_PCM, 1, buf.sample_rate,
        buf.sample_rate * 2, 2, 16,
        b"data", len(payload))
    return header + payload


def read_wav(path) -> AudioBuffer:
    with open(path, "rb") as f:
        return decode_wav(f.read())


def write_wav(path, buf: AudioBuffer) -> None:
    with open(path, "wb") as f:
        f.write(encode_wav(buf))


# --- resampling -------------------------------------------------------------

_SINC_ZERO_CROSSINGS = 16
_KAISER_BETA = 9.0


@lru_cache(maxsize=32)
def _polyphase_bank(up: int, down: int) -> np.ndarray:
    """Kaiser-windowed sinc lowpass split into `up` phases, taps reversed.

    The filter runs in the zero-stuffed domain (rate = up * source rate) with
    cutoff at the tighter of the two Nyquist limits, and gain `up` to restore
    amplitude lost to zero-stuffing. Returns shape (up, taps_per_phase).
    """
    half = _SINC_ZERO_CROSSINGS * max(up, down)
    n_taps = 2 * half + 1
    t = np.arange(n_taps) - half
    cutoff = min(1.0 / up, 1.0 / down)  # fraction of zero-stuffed Nyquist
    h = cutoff * np.sinc(cutoff * t) * np.kaiser(n_taps, _KAISER_BETA) * up
    per_phase = -(-n_taps // up)
    padded = np.zeros(up * per_phase)
    padded[:n_taps] = h
    # phase p holds taps h[p::up]; reversed so each output is a plain dot with
    # a forward window of input samples
    return padded.reshape(per_phase, up).T[:, ::-1].copy()


def output_length(n: int, source_rate: int, target_rate: int) -> int:
    """round(n * target/source), half away from zero, in exact integers."""
    return (2 * n * target_rate + source_rate) // (2 * source_rate)


def resample(buf: AudioBuffer, target_rate: int, method: str = "sinc") -> AudioBuffer:
    """Resample to target_rate.

    method "sinc" is the production path (windowed-sinc polyphase, band
    limited to the tighter Nyquist); "linear" is a cheap mode kept around as
    an independent oracle for tests.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be > 0, got {target_rate}")
    if target_rate == buf.sample_rate:
        return buf
    x = buf.samples
    n = len(x)
    n_out = output_length(n, buf.sample_rate, target_rate)
    if n == 0 or n_out == 0:
        return AudioBuffer(np.zeros(0), target_rate)

    if method == "linear":
        pos = np.arange(n_out) * (buf.sample_rate / target_rate)
        y = np.interp(pos, np.arange(n), x)
        return AudioBuffer(y, target_rate)
    if method != "sinc":
        raise ValueError(f"unknown resample method {method!r}")

    g = math.gcd(buf.sample_rate, target_rate)
    up = target_rate // g
    down = buf.sample_rate // g
    bank = _polyphase_bank(up, down)
    k = bank.shape[1]
    center = _SINC_ZERO_CROSSINGS * max(up, down)

    # output m draws on input window ending at q_m = (m*down + center) // up,
    # with tap phase (m*down + center) % up
    q_last = ((n_out - 1) * down + center) // up
    pad_right = max(0, q_last + 1 - n) + 1
    xp = np.concatenate([np.zeros(k), x, np.zeros(pad_right)])
    windows = np.lib.stride_tricks.sliding_window_view(xp, k)

    y = np.empty(n_out)
    for m0 in range(min(up, n_out)):
        a0 = m0 * down + center
        phase = a0 % up
        q0 = a0 // up
        count = (n_out - m0 + up - 1) // up
        # window for output q ends at padded index q + k, so starts at q + 1
        rows = windows[q0 + 1::down][:count]
        y[m0::up] = rows @ bank[phase]
    return AudioBuffer(np.clip(y, -1.0, 1.0), target_rate)
