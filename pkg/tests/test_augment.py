"""White-noise augmentation: SNR accuracy, determinism, skip guards."""

from __future__ import annotations

import numpy as np
import pytest

from corpusforge.audio import AudioBuffer, encode_wav, resample
from corpusforge.augment import (AUGMENT_SUFFIX, SKIP_EMPTY,
                                 SKIP_NOISE_TOO_LONG, SKIP_ZERO_SIGNAL,
                                 NoiseSpec, augment_with_noise,
                                 generate_white_noise, utterance_seed)

from .conftest import tone
from .oracles import measured_snr_db


class TestNoiseGeneration:
    def test_range_and_rate(self):
        noise = generate_white_noise(8000, NoiseSpec(seed=3))
        assert noise.sample_rate == 8000
        assert noise.samples.min() >= -1.0 and noise.samples.max() <= 1.0
        assert abs(noise.samples.mean()) < 0.05

    def test_seeded_determinism(self):
        a = generate_white_noise(4000, NoiseSpec(seed=11))
        b = generate_white_noise(4000, NoiseSpec(seed=11))
        c = generate_white_noise(4000, NoiseSpec(seed=12))
        np.testing.assert_array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_spectrally_flat_at_source_rate(self):
        noise = generate_white_noise(80000, NoiseSpec(seed=5))
        spectrum = np.abs(np.fft.rfft(noise.samples)) ** 2
        half = len(spectrum) // 2
        low, high = spectrum[1:half].mean(), spectrum[half:].mean()
        assert 0.8 < low / high < 1.25


class TestMixing:
    def test_snr_within_half_db_across_random_segments(self):
        rng = np.random.default_rng(202)
        for trial in range(20):
            duration = float(rng.uniform(0.5, 3.0))
            freq = float(rng.uniform(100, 2000))
            amp = float(rng.uniform(0.1, 0.6))
            sig = tone(duration, freq=freq, amp=amp)
            out = augment_with_noise(sig, NoiseSpec(seed=trial))
            assert out.ok, out.skip_reason
            got = measured_snr_db(sig.samples, out.audio.samples)
            assert abs(got - 20.0) <= 0.5, f"trial {trial}: {got}"

    def test_custom_target_snr(self):
        sig = tone(1.0, amp=0.4)
        out = augment_with_noise(sig, NoiseSpec(target_snr_db=6.0, seed=1))
        assert abs(measured_snr_db(sig.samples, out.audio.samples) - 6.0) <= 0.5

    def test_byte_identical_under_fixed_seed(self):
        sig = tone(1.3, freq=317.0)
        spec = NoiseSpec(seed=99)
        a = augment_with_noise(sig, spec).audio
        b = augment_with_noise(sig, spec).audio
        assert encode_wav(a) == encode_wav(b)

    def test_different_seeds_differ(self):
        sig = tone(1.0)
        a = augment_with_noise(sig, NoiseSpec(seed=1)).audio
        b = augment_with_noise(sig, NoiseSpec(seed=2)).audio
        assert not np.array_equal(a.samples, b.samples)

    def test_output_length_equals_input(self):
        for n in (15999, 16000, 16001, 24001):
            sig = AudioBuffer(0.2 * np.ones(n), 16000)
            out = augment_with_noise(sig, NoiseSpec(seed=4))
            assert out.ok and len(out.audio) == n

    def test_output_clamped(self):
        sig = AudioBuffer(np.full(16000, 0.999), 16000)
        out = augment_with_noise(sig, NoiseSpec(target_snr_db=0.0, seed=8))
        assert out.audio.samples.max() <= 1.0
        assert out.audio.samples.min() >= -1.0

    def test_noise_band_limited_by_source_rate(self):
        # noise born at 8 kHz then resampled to 16 kHz has almost no energy
        # above its original 4 kHz Nyquist
        sig = tone(2.0, freq=200.0, amp=0.01)
        out = augment_with_noise(sig, NoiseSpec(seed=21, target_snr_db=-20.0))
        noise = out.audio.samples - sig.samples
        spectrum = np.abs(np.fft.rfft(noise)) ** 2
        freqs = np.fft.rfftfreq(len(noise), 1 / 16000)
        above = spectrum[freqs > 4500].sum()
        below = spectrum[freqs <= 4500].sum()
        assert above / below < 0.01


class TestSkipGuards:
    def test_pre_supplied_over_length_noise_skips(self):
        sig = tone(1.0)  # 16000 samples at 16 kHz
        long_noise = generate_white_noise(8001, NoiseSpec(seed=2))  # > 1s at 8k
        out = augment_with_noise(sig, NoiseSpec(seed=2), noise=long_noise)
        assert not out.ok
        assert out.skip_reason == SKIP_NOISE_TOO_LONG
        assert out.audio is None

    def test_default_generation_never_trips_guard(self):
        # rounding must not make the generated noise longer than the signal
        for n in range(15990, 16011):
            sig = AudioBuffer(0.1 * np.ones(n), 16000)
            out = augment_with_noise(sig, NoiseSpec(seed=6))
            assert out.ok, f"n={n}: {out.skip_reason}"

    def test_empty_signal_skips(self):
        out = augment_with_noise(AudioBuffer(np.zeros(0), 16000), NoiseSpec())
        assert out.skip_reason == SKIP_EMPTY

    def test_all_zero_signal_skips(self):
        out = augment_with_noise(AudioBuffer(np.zeros(16000), 16000),
                                 NoiseSpec())
        assert out.skip_reason == SKIP_ZERO_SIGNAL

    def test_shorter_pre_supplied_noise_is_tiled(self):
        sig = tone(1.0)
        short = generate_white_noise(2000, NoiseSpec(seed=3))
        out = augment_with_noise(sig, NoiseSpec(seed=3), noise=short)
        assert out.ok and len(out.audio) == len(sig)
        got = measured_snr_db(sig.samples, out.audio.samples)
        assert abs(got - 20.0) <= 0.5


class TestSeeding:
    def test_utterance_seed_depends_on_id_and_base(self):
        spec = NoiseSpec(seed=5)
        s1 = utterance_seed(spec, "utt-a")
        s2 = utterance_seed(spec, "utt-b")
        s3 = utterance_seed(NoiseSpec(seed=6), "utt-a")
        assert len({s1, s2, s3}) == 3

    def test_suffix_constant(self):
        assert AUGMENT_SUFFIX == "#aug-wn"

    def test_with_seed_preserves_other_fields(self):
        spec = NoiseSpec(noise_sample_rate=4000, target_snr_db=12.0, seed=1)
        reseeded = spec.with_seed(77)
        assert reseeded.seed == 77
        assert reseeded.noise_sample_rate == 4000
        assert reseeded.target_snr_db == 12.0
