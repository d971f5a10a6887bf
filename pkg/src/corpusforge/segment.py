"""Silence detection/removal, fixed-ceiling chunking, and segment filtering.

Silence is an energy gate: a frame is quiet when its RMS level falls below a
dBFS threshold. Runs of quiet frames longer than a minimum gap are silences;
shorter dips are kept but reused by the chunker as preferred cut points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .audio import AudioBuffer

if TYPE_CHECKING:
    from .corpus import Utterance

DEVANAGARI_START = 0x0900
DEVANAGARI_END = 0x097F


@dataclass(frozen=True)
class SilenceSpan:
    """Half-open sample interval [start_sample, end_sample) of quiet audio."""

    start_sample: int
    end_sample: int

    def __post_init__(self):
        if self.start_sample >= self.end_sample:
            raise ValueError(
                f"empty span [{self.start_sample}, {self.end_sample})")


@dataclass(frozen=True)
class SegmentSpec:
    max_duration_s: float = 30.0
    min_duration_s: float = 5.0
    silence_threshold_dbfs: float = -40.0
    silence_min_gap_s: float = 1.0
    frame_ms: float = 20.0
    cut_search_window_s: float = 5.0
    devanagari_ratio: float = 0.5

    def __post_init__(self):
        if not 0 < self.min_duration_s < self.max_duration_s:
            raise ValueError(
                "need 0 < min_duration_s < max_duration_s, got "
                f"{self.min_duration_s}/{self.max_duration_s}")
        if self.frame_ms <= 0:
            raise ValueError(f"frame_ms must be > 0, got {self.frame_ms}")


def _frame_len(spec: SegmentSpec, rate: int) -> int:
    return max(1, round(spec.frame_ms / 1000.0 * rate))


def _quiet_frames(buf: AudioBuffer, spec: SegmentSpec) -> np.ndarray:
    """Boolean per frame: RMS below the silence threshold.

    Frames are non-overlapping; the trailing partial frame counts as one.
    """
    flen = _frame_len(spec, buf.sample_rate)
    n = len(buf)
    n_frames = -(-n // flen)
    padded = np.zeros(n_frames * flen)
    padded[:n] = buf.samples
    sq = padded.reshape(n_frames, flen) ** 2
    # tail frame RMS is over its real samples, not the zero padding
    counts = np.full(n_frames, flen, dtype=np.float64)
    if n % flen:
        counts[-1] = n % flen
    rms = np.sqrt(sq.sum(axis=1) / counts)
    threshold = 10.0 ** (spec.silence_threshold_dbfs / 20.0)
    return rms < threshold


def _quiet_runs(quiet: np.ndarray) -> list[tuple[int, int]]:
    """Maximal [start, end) frame runs where quiet is True."""
    if len(quiet) == 0:
        return []
    edges = np.flatnonzero(np.diff(quiet.astype(np.int8)))
    starts = list(edges[quiet[edges + 1]] + 1)
    ends = list(edges[~quiet[edges + 1]] + 1)
    if quiet[0]:
        starts.insert(0, 0)
    if quiet[-1]:
        ends.append(len(quiet))
    return list(zip(starts, ends))


def detect_silences(buf: AudioBuffer, spec: SegmentSpec) -> list[SilenceSpan]:
    """Maximal quiet spans strictly longer than silence_min_gap_s."""
    if len(buf) == 0:
        raise ValueError("buffer is empty")
    flen = _frame_len(spec, buf.sample_rate)
    n = len(buf)
    spans = []
    for f0, f1 in _quiet_runs(_quiet_frames(buf, spec)):
        start = f0 * flen
        end = min(f1 * flen, n)
        if (end - start) / buf.sample_rate > spec.silence_min_gap_s:
            spans.append(SilenceSpan(start, end))
    return spans


def strip_silences(buf: AudioBuffer, spans: Iterable[SilenceSpan]) -> AudioBuffer:
    """Remove the given spans; output is the concatenated complement."""
    spans = sorted(spans, key=lambda s: s.start_sample)
    n = len(buf)
    keep = []
    pos = 0
    for s in spans:
        if s.start_sample < pos:
            raise ValueError(
                f"span [{s.start_sample}, {s.end_sample}) overlaps a previous span")
        if s.end_sample > n:
            raise ValueError(
                f"span [{s.start_sample}, {s.end_sample}) exceeds buffer length {n}")
        keep.append(buf.samples[pos:s.start_sample])
        pos = s.end_sample
    keep.append(buf.samples[pos:])
    return AudioBuffer(np.concatenate(keep) if keep else np.zeros(0), buf.sample_rate)


def chunk(buf: AudioBuffer, spec: SegmentSpec) -> list[AudioBuffer]:
    """Split into pieces of at most max_duration_s.

    Cuts prefer the midpoint of a quiet dip inside the last
    cut_search_window_s of each full window; with no dip there, the cut is a
    hard one at the ceiling. Concatenating the chunks reproduces the input
    sample-for-sample.
    """
    if len(buf) == 0:
        raise ValueError("buffer is empty")
    rate = buf.sample_rate
    max_n = round(spec.max_duration_s * rate)
    search_n = round(spec.cut_search_window_s * rate)
    flen = _frame_len(spec, rate)
    runs = [(f0 * flen, min(f1 * flen, len(buf)))
            for f0, f1 in _quiet_runs(_quiet_frames(buf, spec))]

    chunks = []
    pos = 0
    n = len(buf)
    while n - pos > max_n:
        window_end = pos + max_n
        search_start = max(pos + 1, window_end - search_n)
        cut = window_end
        for r0, r1 in runs:  # latest dip in the search region wins
            lo = max(r0, search_start)
            hi = min(r1, window_end)
            if lo < hi:
                cut = max(pos + 1, (lo + hi) // 2)
        chunks.append(AudioBuffer(buf.samples[pos:cut], rate))
        pos = cut
    chunks.append(AudioBuffer(buf.samples[pos:n], rate))
    return chunks


def devanagari_fraction(text: str) -> float:
    """Share of non-space codepoints inside the Devanagari block."""
    glyphs = [c for c in text if not c.isspace()]
    if not glyphs:
        return 0.0
    hits = sum(1 for c in glyphs if DEVANAGARI_START <= ord(c) <= DEVANAGARI_END)
    return hits / len(glyphs)


REJECT_TOO_SHORT = "too-short"
REJECT_TOO_LONG = "too-long"
REJECT_EMPTY_TRANSCRIPT = "empty-transcript"
REJECT_LABEL_SCRIPT = "label-script"


def filter_segments(
    utts: Iterable["Utterance"], spec: SegmentSpec,
) -> tuple[list["Utterance"], list[tuple["Utterance", str]]]:
    """Partition utterances into (kept, rejected-with-reason).

    Kept means: duration within [min, max], a non-empty transcript, and a
    Devanagari codepoint share at or above the configured ratio.
    """
    kept = []
    rejected = []
    for u in utts:
        if u.duration_s < spec.min_duration_s:
            rejected.append((u, REJECT_TOO_SHORT))
        elif u.duration_s > spec.max_duration_s:
            rejected.append((u, REJECT_TOO_LONG))
        elif not u.transcript.strip():
            rejected.append((u, REJECT_EMPTY_TRANSCRIPT))
        elif devanagari_fraction(u.transcript) < spec.devanagari_ratio:
            rejected.append((u, REJECT_LABEL_SCRIPT))
        else:
            kept.append(u)
    return kept, rejected
