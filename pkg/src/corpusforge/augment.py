"""White-noise augmentation: synthesize at a low rate, resample up, mix at SNR.

Noise is generated at its own sample rate (default 8000 Hz), band-limited to
that rate's Nyquist by the resampler on the way to the corpus rate, and mixed
so that 10*log10(P_signal / P_noise) hits the target SNR. A segment whose
resampled noise would come out longer than the segment itself is skipped
rather than trimmed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import rng
from .audio import AudioBuffer, resample

AUGMENT_SUFFIX = "#aug-wn"

SKIP_EMPTY = "empty"
SKIP_ZERO_SIGNAL = "zero-signal"
SKIP_EMPTY_NOISE = "empty-noise"
SKIP_NOISE_TOO_LONG = "noise-longer-than-signal"


@dataclass(frozen=True)
class NoiseSpec:
    noise_sample_rate: int = 8000
    target_snr_db: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.noise_sample_rate <= 0:
            raise ValueError(
                f"noise_sample_rate must be > 0, got {self.noise_sample_rate}")

    def with_seed(self, seed: int) -> "NoiseSpec":
        return dataclasses.replace(self, seed=seed)


@dataclass(frozen=True)
class AugmentOutcome:
    """Either an augmented buffer or a skip with a machine-readable reason."""

    audio: AudioBuffer | None
    skip_reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.audio is not None


def generate_white_noise(n_samples: int, spec: NoiseSpec) -> AudioBuffer:
    """Seeded i.i.d. uniform noise in [-1, 1] at the noise sample rate."""
    if n_samples < 0:
        raise ValueError(f"n_samples must be >= 0, got {n_samples}")
    u = rng.uniforms(spec.seed, n_samples) * 2.0 - 1.0
    return AudioBuffer(u, spec.noise_sample_rate)


def augment_with_noise(
    buf: AudioBuffer, spec: NoiseSpec, noise: AudioBuffer | None = None,
) -> AugmentOutcome:
    """Mix seeded white noise into buf at the target SNR.

    When `noise` is omitted, matching-duration noise is generated at
    spec.noise_sample_rate. Either way the noise is resampled to buf's rate
    first; if that leaves it longer than buf, the segment is skipped (the
    guard matters for pre-supplied noise and for rounding excess).
    """
    n = len(buf)
    if n == 0:
        return AugmentOutcome(None, SKIP_EMPTY)
    signal_power = float(np.mean(buf.samples ** 2))
    if signal_power == 0.0:
        return AugmentOutcome(None, SKIP_ZERO_SIGNAL)

    if noise is None:
        n_noise = n * spec.noise_sample_rate // buf.sample_rate
        noise = generate_white_noise(n_noise, spec)
    at_rate = resample(noise, buf.sample_rate)
    if len(at_rate) > n:
        return AugmentOutcome(None, SKIP_NOISE_TOO_LONG)
    if len(at_rate) == 0:
        return AugmentOutcome(None, SKIP_EMPTY_NOISE)

    reps = -(-n // len(at_rate))
    tiled = np.tile(at_rate.samples, reps)[:n]
    noise_power = float(np.mean(tiled ** 2))
    if noise_power == 0.0:
        return AugmentOutcome(None, SKIP_EMPTY_NOISE)
    gain = np.sqrt(signal_power / (noise_power * 10.0 ** (spec.target_snr_db / 10.0)))
    mixed = np.clip(buf.samples + gain * tiled, -1.0, 1.0)
    return AugmentOutcome(AudioBuffer(mixed, buf.sample_rate))


def utterance_seed(spec: NoiseSpec, utterance_id: str) -> int:
    """Per-segment seed so data-parallel augmentation stays deterministic."""
    return rng.derive_seed(spec.seed, utterance_id)
