"""Shared fixtures: synthetic audio and small on-disk corpora."""

from __future__ import annotations

import numpy as np
import pytest

from corpusforge.audio import AudioBuffer, write_wav
from corpusforge.corpus import CorpusManifest, Utterance, write_metadata

DEV_WORDS = ["नेपाल", "भाषा", "पानी", "हिमाल", "काठमाडौं", "सुन्दर",
             "देश", "गीत", "आकाश", "नदी"]


def tone(duration_s: float, rate: int = 16000, freq: float = 440.0,
         amp: float = 0.5) -> AudioBuffer:
    t = np.arange(round(duration_s * rate)) / rate
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t), rate)


def dev_sentence(rng: np.random.Generator, n_words: int = 4) -> str:
    return " ".join(rng.choice(DEV_WORDS) for _ in range(n_words))


def make_corpus_dir(root, utts_spec, name="fixture"):
    """Write a corpus dir from (id, duration_s, transcript, extra-fields) specs.

    Every utterance gets a real 16 kHz WAV of the requested duration so
    header probes agree with the manifest.
    """
    (root / "wavs").mkdir(parents=True, exist_ok=True)
    utts = []
    for spec in utts_spec:
        uid, duration = spec[0], spec[1]
        transcript = spec[2] if len(spec) > 2 else "नेपाल राम्रो छ"
        fields = spec[3] if len(spec) > 3 else {}
        rel = f"wavs/{uid}.wav"
        buf = tone(duration, freq=220.0, amp=0.3)
        write_wav(root / rel, buf)
        utts.append(Utterance(
            id=uid, audio_path=rel, transcript=transcript,
            duration_s=buf.duration_seconds, **fields))
    manifest = CorpusManifest(name, tuple(utts), root=root)
    write_metadata(manifest, root)
    return manifest


@pytest.fixture
def corpus_factory(tmp_path):
    def _make(utts_spec, name="fixture", subdir="corpus"):
        return make_corpus_dir(tmp_path / subdir, utts_spec, name)
    return _make
