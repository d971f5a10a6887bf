"""Corpus manifests and the audiofolder on-disk layout.

A corpus on disk is a directory holding `metadata.csv` plus a `wavs/`
subdirectory with one WAV per utterance. The CSV is UTF-8, RFC-4180, with
header `file_name,transcription,gender,age,background,sentiment,source,
augmented`; loaders that only understand (file_name, transcription) can read
it unchanged, and columns we do not know about survive a round-trip.
"""

from __future__ import annotations

import csv
import shutil
import unicodedata
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import IntegrityError
from .metrics import NormalizationSpec, normalize, tokenize

GENDERS = ("male", "female", "unknown")
BACKGROUNDS = ("clean", "white_noise", "crowded", "unknown")
SENTIMENTS = ("happy", "sad", "normal", "angry", "unknown")

CSV_HEADER = ["file_name", "transcription", "gender", "age", "background",
              "sentiment", "source", "augmented"]

METADATA_NAME = "metadata.csv"
WAV_SUBDIR = "wavs"

# id separator used when merging corpora: "<source>__<original id>"
MERGE_SEP = "__"

_TRUTHY = {"true", "1", "yes", "y"}


@dataclass(frozen=True)
class Utterance:
    """One corpus row: an audio segment plus its transcript and metadata."""

    id: str
    audio_path: str
    transcript: str
    duration_s: float
    gender: str = "unknown"
    age: int | None = None
    background: str = "unknown"
    sentiment: str = "unknown"
    source: str = "unknown"
    augmented: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("utterance id must be non-empty")
        if self.duration_s <= 0:
            raise ValueError(
                f"utterance {self.id!r}: duration must be positive, "
                f"got {self.duration_s}")
        if self.gender not in GENDERS:
            raise ValueError(f"utterance {self.id!r}: unknown gender {self.gender!r}")
        if self.background not in BACKGROUNDS:
            raise ValueError(
                f"utterance {self.id!r}: unknown background {self.background!r}")
        if self.sentiment not in SENTIMENTS:
            raise ValueError(
                f"utterance {self.id!r}: unknown sentiment {self.sentiment!r}")


@dataclass(frozen=True)
class CorpusManifest:
    """Named, ordered collection of utterances, optionally rooted on disk."""

    name: str
    utterances: tuple[Utterance, ...]
    root: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        if self.root is not None:
            object.__setattr__(self, "root", Path(self.root))
        seen = set()
        for u in self.utterances:
            if u.id in seen:
                raise IntegrityError(f"duplicate utterance id {u.id!r}")
            seen.add(u.id)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)

    @property
    def total_duration_s(self) -> float:
        return sum(u.duration_s for u in self.utterances)

    @property
    def total_hours(self) -> float:
        return self.total_duration_s / 3600.0

    def by_id(self, utterance_id: str) -> Utterance:
        for u in self.utterances:
            if u.id == utterance_id:
                return u
        raise KeyError(utterance_id)

    def resolve_audio(self, u: Utterance) -> Path:
        p = Path(u.audio_path)
        if p.is_absolute() or self.root is None:
            return p
        return self.root / p


@dataclass(frozen=True)
class StopList:
    """Normalized function words excluded from vocabulary statistics."""

    words: frozenset[str]

    def __post_init__(self):
        object.__setattr__(
            self,
            "words",
            frozenset(unicodedata.normalize("NFC", w) for w in self.words if w))

    @classmethod
    def from_file(cls, path) -> "StopList":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(frozenset(w.strip() for w in lines if w.strip()))

    @classmethod
    def empty(cls) -> "StopList":
        return cls(frozenset())

    def __contains__(self, word: str) -> bool:
        return word in self.words


def _format_row(u: Utterance) -> dict:
    row = {
        "file_name": u.audio_path,
        "transcription": u.transcript,
        "gender": u.gender,
        "age": "" if u.age is None else str(u.age),
        "background": u.background,
        "sentiment": u.sentiment,
        "source": u.source,
        "augmented": "true" if u.augmented else "false",
    }
    row.update(u.extra)
    return row


def _parse_row(row: dict, line_no: int) -> Utterance:
    file_name = (row.get("file_name") or "").strip()
    if not file_name:
        raise IntegrityError(f"metadata.csv line {line_no}: empty file_name")
    known = set(CSV_HEADER)
    extra = {k: v for k, v in row.items() if k not in known and k is not None}
    age_text = (row.get("age") or "").strip()
    try:
        age = int(age_text) if age_text else None
    except ValueError:
        raise IntegrityError(
            f"metadata.csv line {line_no}: age {age_text!r} is not an integer")
    return Utterance(
        id=Path(file_name).stem,
        audio_path=file_name,
        transcript=row.get("transcription") or "",
        duration_s=1.0,  # placeholder, replaced by the header probe
        gender=(row.get("gender") or "unknown").strip() or "unknown",
        age=age,
        background=(row.get("background") or "unknown").strip() or "unknown",
        sentiment=(row.get("sentiment") or "unknown").strip() or "unknown",
        source=(row.get("source") or "unknown").strip() or "unknown",
        augmented=(row.get("augmented") or "").strip().lower() in _TRUTHY,
        extra=extra,
    )


def write_metadata(manifest: CorpusManifest, directory) -> Path:
    """Write metadata.csv for utterances whose WAVs are already in place."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    extra_cols: list[str] = []
    seen_names = set()
    for u in manifest:
        if u.audio_path in seen_names:
            raise IntegrityError(f"duplicate file_name {u.audio_path!r}")
        seen_names.add(u.audio_path)
        for k in u.extra:
            if k not in extra_cols:
                extra_cols.append(k)
    out = directory / METADATA_NAME
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER + extra_cols,
                                restval="")
        writer.writeheader()
        for u in manifest:
            writer.writerow(_format_row(u))
    return out


def write_audiofolder(manifest: CorpusManifest, directory) -> CorpusManifest:
    """Materialize a manifest on disk: copy audio, emit metadata.csv.

    Returns the re-rooted manifest describing what was written.
    """
    directory = Path(directory)
    wav_dir = directory / WAV_SUBDIR
    wav_dir.mkdir(parents=True, exist_ok=True)
    rewritten = []
    for u in manifest:
        src = manifest.resolve_audio(u)
        if not src.is_file():
            raise IntegrityError(
                f"utterance {u.id!r}: audio file {src} does not exist")
        rel = f"{WAV_SUBDIR}/{u.id}.wav"
        dst = directory / rel
        if src.resolve() != dst.resolve():
            shutil.copyfile(src, dst)
        rewritten.append(replace(u, audio_path=rel))
    out = CorpusManifest(manifest.name, tuple(rewritten), root=directory)
    write_metadata(out, directory)
    return out


def read_audiofolder(directory, name: str | None = None) -> CorpusManifest:
    """Load a corpus directory written by write_audiofolder (or compatible).

    Durations come from a header-only probe of each WAV. Rows pointing at
    missing audio are collected and reported together, not one at a time.
    """
    from .audio import wav_info

    directory = Path(directory)
    meta = directory / METADATA_NAME
    if not meta.is_file():
        raise IntegrityError(f"no {METADATA_NAME} in {directory}")
    utterances = []
    missing = []
    with open(meta, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "file_name" not in reader.fieldnames:
            raise IntegrityError(
                f"{meta}: header must contain a file_name column")
        for line_no, row in enumerate(reader, start=2):
            try:
                u = _parse_row(row, line_no)
                wav_path = directory / u.audio_path
                if not wav_path.is_file():
                    missing.append(f"line {line_no}: {u.audio_path}")
                    continue
                info = wav_info(wav_path.read_bytes())
                u = replace(u, duration_s=info.duration_seconds)
            except ValueError as exc:
                raise IntegrityError(
                    f"metadata.csv line {line_no}: {exc}") from exc
            utterances.append(u)
    if missing:
        raise IntegrityError(
            "metadata.csv rows reference missing audio: " + "; ".join(missing))
    return CorpusManifest(name or directory.name, tuple(utterances),
                          root=directory)


def merge(manifests: list[CorpusManifest], name: str) -> CorpusManifest:
    """Concatenate corpora, prefixing ids with the source corpus name.

    The separator is a double underscore so merged ids stay legal file stems.
    """
    merged = []
    for m in manifests:
        for u in m:
            merged.append(replace(
                u,
                id=f"{m.name}{MERGE_SEP}{u.id}",
                audio_path=str(m.resolve_audio(u)),
                source=u.source if u.source != "unknown" else m.name,
            ))
    return CorpusManifest(name, tuple(merged), root=None)


def duration_report(manifest: CorpusManifest) -> list[tuple[str, float]]:
    """Per-source duration sums in hours, exact; round only for display."""
    order: list[str] = []
    totals: dict[str, float] = {}
    for u in manifest:
        if u.source not in totals:
            order.append(u.source)
            totals[u.source] = 0.0
        totals[u.source] += u.duration_s / 3600.0
    return [(src, totals[src]) for src in order]


def unique_word_stats(
    manifest: CorpusManifest,
    stop: StopList = StopList(frozenset()),
    spec: NormalizationSpec = NormalizationSpec(),
) -> tuple[int, Counter]:
    """Distinct-token count and frequency table over all transcripts."""
    freq: Counter = Counter()
    for u in manifest:
        for tok in tokenize(normalize(u.transcript, spec)):
            if tok not in stop:
                freq[tok] += 1
    return len(freq), freq
