"""Log-mel spectrogram export for downstream trainers.

Front-end follows the common 16 kHz recipe: Hann-windowed STFT, triangular
HTK-mel filterbank spanning 0 Hz to Nyquist, log10 with a floor. Input is
zero-padded or truncated to a fixed duration before framing so every segment
yields the same matrix shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import DEFAULT_SAMPLE_RATE, AudioBuffer

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class FeatureSpec:
    n_mels: int = 80
    window_ms: float = 25.0
    hop_ms: float = 10.0
    fft_size: int = 400
    pad_to_s: float = 30.0

    def __post_init__(self):
        if self.n_mels < 1:
            raise ValueError(f"n_mels must be >= 1, got {self.n_mels}")
        window_samples = round(self.window_ms / 1000.0 * DEFAULT_SAMPLE_RATE)
        if self.fft_size < window_samples:
            raise ValueError(
                f"fft_size {self.fft_size} smaller than window "
                f"({window_samples} samples)")


def expected_frames(spec: FeatureSpec) -> int:
    """Frame count after pad/truncate: 3000 for the 30s/10ms default."""
    return round(spec.pad_to_s * 1000.0 / spec.hop_ms)


@dataclass(frozen=True)
class MelMatrix:
    """Log10 mel energies, shape (n_mels, n_frames)."""

    values: np.ndarray
    frame_hop_s: float

    @property
    def n_mels(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, fft_size: int, sample_rate: int) -> np.ndarray:
    """Triangular filters on an HTK-mel grid, shape (n_mels, fft_size//2+1)."""
    n_bins = fft_size // 2 + 1
    freqs = np.arange(n_bins) * sample_rate / fft_size
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    bank = np.zeros((n_mels, n_bins))
    for k in range(n_mels):
        lo, mid, hi = edges[k], edges[k + 1], edges[k + 2]
        rising = (freqs - lo) / max(mid - lo, 1e-12)
        falling = (hi - freqs) / max(hi - mid, 1e-12)
        bank[k] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


def mel_center_frequencies(n_mels: int, sample_rate: int) -> np.ndarray:
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    return edges[1:-1]


def log_mel(buf: AudioBuffer, spec: FeatureSpec = FeatureSpec()) -> MelMatrix:
    """STFT -> mel filterbank -> log10 with floor, at a fixed frame count."""
    if buf.sample_rate != DEFAULT_SAMPLE_RATE:
        raise ValueError(
            f"expected {DEFAULT_SAMPLE_RATE} Hz input, got {buf.sample_rate} "
            "(resample first)")
    rate = buf.sample_rate
    hop = round(spec.hop_ms / 1000.0 * rate)
    win = round(spec.window_ms / 1000.0 * rate)
    n_frames = round(spec.pad_to_s * 1000.0 / spec.hop_ms)
    pad_n = round(spec.pad_to_s * rate)

    x = np.zeros(pad_n + spec.fft_size)
    x[:min(len(buf), pad_n)] = buf.samples[:pad_n]

    frames = np.lib.stride_tricks.sliding_window_view(x, win)[::hop][:n_frames]
    spectrum = np.fft.rfft(frames * np.hanning(win), n=spec.fft_size, axis=1)
    power = np.abs(spectrum) ** 2
    energies = power @ mel_filterbank(spec.n_mels, spec.fft_size, rate).T
    values = np.log10(np.maximum(energies.T, LOG_FLOOR))
    return MelMatrix(values, spec.hop_ms / 1000.0)


def save_mel(mel: MelMatrix, path_base: Path) -> None:
    """Write <base>.mel (little-endian float32, row-major) + JSON sidecar."""
    path_base = Path(path_base)
    path_base.parent.mkdir(parents=True, exist_ok=True)
    with open(path_base.with_suffix(".mel"), "wb") as f:
        f.write(mel.values.astype("<f4").tobytes(order="C"))
    sidecar = {
        "n_mels": mel.n_mels,
        "n_frames": mel.n_frames,
        "hop_ms": mel.frame_hop_s * 1000.0,
    }
    with open(path_base.with_suffix(".json"), "w", encoding="utf-8") as f:
        json.dump(sidecar, f)


def load_mel(path_base: Path) -> MelMatrix:
    path_base = Path(path_base)
    with open(path_base.with_suffix(".json"), encoding="utf-8") as f:
        meta = json.load(f)
    raw = np.fromfile(path_base.with_suffix(".mel"), dtype="<f4")
    values = raw.reshape(meta["n_mels"], meta["n_frames"]).astype(np.float64)
    return MelMatrix(values, meta["hop_ms"] / 1000.0)
