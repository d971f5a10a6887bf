"""Silence detection, de-silencing, chunking, and segment filtering."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusforge.audio import AudioBuffer
from corpusforge.corpus import Utterance
from corpusforge.segment import (REJECT_EMPTY_TRANSCRIPT, REJECT_LABEL_SCRIPT,
                                 REJECT_TOO_LONG, REJECT_TOO_SHORT,
                                 SegmentSpec, SilenceSpan, chunk,
                                 detect_silences, devanagari_fraction,
                                 filter_segments, strip_silences)

RATE = 16000
FRAME_S = 0.020  # detector frame, the resolution of every boundary


def voiced(duration_s: float, amp: float = 0.3) -> np.ndarray:
    t = np.arange(round(duration_s * RATE)) / RATE
    return amp * np.sin(2 * np.pi * 210.0 * t)


def with_gaps(voice_s: list[float], gap_s: list[float]) -> AudioBuffer:
    """Interleave voiced stretches with silent gaps: v0 g0 v1 g1 ... vN."""
    parts = []
    for i, v in enumerate(voice_s):
        parts.append(voiced(v))
        if i < len(gap_s):
            parts.append(np.zeros(round(gap_s[i] * RATE)))
    return AudioBuffer(np.concatenate(parts), RATE)


class TestDetect:
    def test_only_gaps_longer_than_one_second_count(self):
        buf = with_gaps([2.0, 2.0, 2.0, 2.0], [0.8, 1.5, 3.0])
        spans = detect_silences(buf, SegmentSpec())
        assert len(spans) == 2  # 0.8s gap survives, 1.5s and 3s are silences
        detected = [(s.end_sample - s.start_sample) / RATE for s in spans]
        for got, want in zip(detected, [1.5, 3.0]):
            assert abs(got - want) <= FRAME_S

    def test_exactly_threshold_gap_not_removed(self):
        # the rule is strictly greater than min_gap_s
        buf = with_gaps([2.0, 2.0], [1.0])
        assert detect_silences(buf, SegmentSpec()) == []

    def test_all_voiced_no_spans(self):
        assert detect_silences(with_gaps([3.0], []), SegmentSpec()) == []

    def test_threshold_follows_dbfs(self):
        quiet = np.full(RATE * 2, 10 ** (-50 / 20))  # -50 dBFS, under -40
        buf = AudioBuffer(np.concatenate([voiced(2.0), quiet, voiced(2.0)]),
                          RATE)
        spans = detect_silences(buf, SegmentSpec())
        assert len(spans) == 1
        loud_spec = SegmentSpec(silence_threshold_dbfs=-60.0)
        assert detect_silences(buf, loud_spec) == []

    def test_empty_buffer_rejected(self):
        with pytest.raises(ValueError):
            detect_silences(AudioBuffer(np.zeros(0), RATE), SegmentSpec())

    def test_leading_and_trailing_silence(self):
        buf = with_gaps([0.0, 2.0, 0.0], [1.6, 2.4])
        spans = detect_silences(buf, SegmentSpec())
        assert len(spans) == 2
        assert spans[0].start_sample == 0
        assert spans[-1].end_sample == len(buf)


class TestStrip:
    def test_durations_match_within_one_frame_per_span(self):
        gaps = [0.8, 1.5, 3.0]
        buf = with_gaps([2.0, 2.0, 2.0, 2.0], gaps)
        spans = detect_silences(buf, SegmentSpec())
        out = strip_silences(buf, spans)
        expected = 8.0 + 0.8  # the 0.8s gap stays
        assert abs(out.duration_seconds - expected) <= 2 * FRAME_S

    def test_removes_exact_spans(self):
        buf = AudioBuffer(np.arange(100, dtype=np.float64), RATE)
        out = strip_silences(buf, [SilenceSpan(10, 20), SilenceSpan(50, 60)])
        expected = np.concatenate([np.arange(0, 10), np.arange(20, 50),
                                   np.arange(60, 100)])
        np.testing.assert_array_equal(out.samples, expected)

    def test_overlapping_spans_rejected(self):
        buf = AudioBuffer(np.zeros(100), RATE)
        with pytest.raises(ValueError):
            strip_silences(buf, [SilenceSpan(10, 30), SilenceSpan(20, 40)])

    def test_out_of_bounds_span_rejected(self):
        buf = AudioBuffer(np.zeros(100), RATE)
        with pytest.raises(ValueError):
            strip_silences(buf, [SilenceSpan(90, 120)])

    def test_no_spans_is_identity(self):
        buf = voiced(1.0)
        out = strip_silences(AudioBuffer(buf, RATE), [])
        np.testing.assert_array_equal(out.samples, buf)


class TestChunk:
    def test_75s_hard_cut_gives_30_30_15(self):
        buf = AudioBuffer(voiced(75.0), RATE)
        pieces = chunk(buf, SegmentSpec())
        assert [p.duration_seconds for p in pieces] == [30.0, 30.0, 15.0]

    def test_concatenation_is_identity(self):
        buf = AudioBuffer(voiced(67.3), RATE)
        pieces = chunk(buf, SegmentSpec())
        np.testing.assert_array_equal(
            np.concatenate([p.samples for p in pieces]), buf.samples)

    def test_cut_prefers_quiet_dip_in_search_window(self):
        # a short dip at 27.5s sits inside the last-5s search window of the
        # first 30s chunk; the cut must land at the dip, not at 30s
        parts = [voiced(27.0), np.zeros(RATE // 2), voiced(40.0)]
        buf = AudioBuffer(np.concatenate(parts), RATE)
        pieces = chunk(buf, SegmentSpec())
        assert all(p.duration_seconds <= 30.0 for p in pieces)
        assert abs(pieces[0].duration_seconds - 27.25) <= 0.1  # dip midpoint

    def test_short_input_single_chunk(self):
        buf = AudioBuffer(voiced(4.0), RATE)
        pieces = chunk(buf, SegmentSpec())
        assert len(pieces) == 1
        assert pieces[0].duration_seconds == 4.0

    def test_exactly_max_is_one_chunk(self):
        buf = AudioBuffer(voiced(30.0), RATE)
        assert len(chunk(buf, SegmentSpec())) == 1

    @settings(deadline=None, max_examples=25)
    @given(st.floats(min_value=1.0, max_value=120.0))
    def test_random_durations_bounded_and_exhaustive(self, duration):
        buf = AudioBuffer(voiced(duration), RATE)
        pieces = chunk(buf, SegmentSpec())
        assert sum(len(p) for p in pieces) == len(buf)
        max_n = round(30.0 * RATE)
        assert all(0 < len(p) <= max_n for p in pieces)


class TestDevanagariFraction:
    def test_pure_devanagari(self):
        assert devanagari_fraction("नेपाल राम्रो") == 1.0

    def test_mixed_scripts(self):
        # 4 Devanagari codepoints of 8 non-space glyphs
        assert devanagari_fraction("नेपा nepa") == 0.5

    def test_empty_and_spaces(self):
        assert devanagari_fraction("") == 0.0
        assert devanagari_fraction("   ") == 0.0


class TestFilter:
    def _utt(self, uid, duration, transcript):
        return Utterance(id=uid, audio_path=f"wavs/{uid}.wav",
                         transcript=transcript, duration_s=duration)

    def test_all_four_reject_reasons(self):
        utts = [
            self._utt("ok", 10.0, "नेपाल राम्रो छ"),
            self._utt("short", 2.0, "नेपाल"),
            self._utt("long", 31.0, "नेपाल"),
            self._utt("blank", 10.0, "   "),
            self._utt("latin", 10.0, "hello world entirely latin"),
        ]
        kept, rejected = filter_segments(utts, SegmentSpec())
        assert [u.id for u in kept] == ["ok"]
        reasons = {u.id: reason for u, reason in rejected}
        assert reasons == {"short": REJECT_TOO_SHORT,
                           "long": REJECT_TOO_LONG,
                           "blank": REJECT_EMPTY_TRANSCRIPT,
                           "latin": REJECT_LABEL_SCRIPT}

    def test_boundary_durations_kept(self):
        utts = [self._utt("lo", 5.0, "नेपाल"), self._utt("hi", 30.0, "नेपाल")]
        kept, rejected = filter_segments(utts, SegmentSpec())
        assert len(kept) == 2 and not rejected

    def test_half_devanagari_kept_at_default_ratio(self):
        kept, _ = filter_segments(
            [self._utt("mixed", 10.0, "नेपा nepa")], SegmentSpec())
        assert len(kept) == 1  # ratio is >= 0.5, not > 0.5
