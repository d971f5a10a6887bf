"""Transcript normalization, edit alignment, and WER/CER.

WER here is the pooled ratio sum(S+D+I) / sum(ref words) over a whole test
set, so a hypothesis stream with heavy insertions (wrong-script output, for
one) can legitimately score above 100%.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .errors import UndefinedMetricError

DANDA = "।"
DOUBLE_DANDA = "॥"

_ASCII_DIGITS = "0123456789"
_DEVANAGARI_DIGITS = "०१२३४५६७८९"
_TO_DEVANAGARI = str.maketrans(_ASCII_DIGITS, _DEVANAGARI_DIGITS)
_TO_ASCII = str.maketrans(_DEVANAGARI_DIGITS, _ASCII_DIGITS)

DIGIT_POLICIES = ("keep", "to_devanagari", "to_ascii")


@dataclass(frozen=True)
class NormalizationSpec:
    strip_punctuation: bool = True
    digit_policy: str = "to_devanagari"
    collapse_whitespace: bool = True

    def __post_init__(self):
        if self.digit_policy not in DIGIT_POLICIES:
            raise ValueError(
                f"digit_policy must be one of {DIGIT_POLICIES}, "
                f"got {self.digit_policy!r}")


def _is_punctuation(ch: str) -> bool:
    return ch in (DANDA, DOUBLE_DANDA) or unicodedata.category(ch).startswith("P")


def normalize(text: str, spec: NormalizationSpec = NormalizationSpec()) -> str:
    """NFC, optional punctuation stripping, digit unification, space collapse.

    Idempotent: normalizing twice equals normalizing once.
    """
    out = unicodedata.normalize("NFC", text)
    if spec.digit_policy == "to_devanagari":
        out = out.translate(_TO_DEVANAGARI)
    elif spec.digit_policy == "to_ascii":
        out = out.translate(_TO_ASCII)
    if spec.strip_punctuation:
        # replaced with a space, not deleted: punctuation may be the only
        # thing separating two words
        out = "".join(" " if _is_punctuation(c) else c for c in out)
    if spec.collapse_whitespace:
        out = " ".join(out.split())
    return out


def tokenize(text: str) -> list[str]:
    """Whitespace tokens of already-normalized text; never empty strings."""
    return text.split()


OP_MATCH = "match"
OP_SUB = "sub"
OP_DEL = "del"
OP_INS = "ins"


@dataclass(frozen=True)
class AlignmentResult:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int
    alignment: tuple = ()

    @property
    def matches(self) -> int:
        return self.ref_len - self.substitutions - self.deletions

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        if self.ref_len == 0:
            raise UndefinedMetricError("WER undefined for an empty reference")
        return self.errors / self.ref_len


def align(ref: list[str], hyp: list[str]) -> AlignmentResult:
    """Minimal-cost edit alignment with unit costs.

    Tie-break is fixed so results are reproducible: among minimal-cost
    alignments the one with the most substitutions wins (a substitution
    beats a deletion+insertion pair), and in the backtrace deletion beats
    insertion. The DP state is (cost, -substitutions), minimized
    lexicographically; a cost-only table would leave the S/D/I triple
    underdetermined (e.g. ref=ab hyp=ba allows S=2 or D=1,I=1).
    """
    n, m = len(ref), len(hyp)
    dp = [[(0, 0)] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = (i, 0)
    for j in range(1, m + 1):
        dp[0][j] = (j, 0)
    for i in range(1, n + 1):
        row, prev = dp[i], dp[i - 1]
        ri = ref[i - 1]
        for j in range(1, m + 1):
            dc, ds = prev[j - 1]
            diag = (dc, ds) if ri == hyp[j - 1] else (dc + 1, ds - 1)
            uc, us = prev[j]
            lc, ls = row[j - 1]
            row[j] = min(diag, (uc + 1, us), (lc + 1, ls))

    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            dc, ds = dp[i - 1][j - 1]
            sub = ref[i - 1] != hyp[j - 1]
            if dp[i][j] == ((dc + 1, ds - 1) if sub else (dc, ds)):
                ops.append((OP_SUB if sub else OP_MATCH,
                            ref[i - 1], hyp[j - 1]))
                i -= 1
                j -= 1
                continue
        if i > 0:
            uc, us = dp[i - 1][j]
            if dp[i][j] == (uc + 1, us):
                ops.append((OP_DEL, ref[i - 1], None))
                i -= 1
                continue
        ops.append((OP_INS, None, hyp[j - 1]))
        j -= 1
    ops.reverse()

    subs = sum(1 for op, _, _ in ops if op == OP_SUB)
    dels = sum(1 for op, _, _ in ops if op == OP_DEL)
    ins = sum(1 for op, _, _ in ops if op == OP_INS)
    return AlignmentResult(subs, dels, ins, n, tuple(ops))


@dataclass
class CorpusWer:
    """Pooled WER over a pair set: sum(errors) / sum(reference lengths)."""

    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_len: int = 0
    per_pair: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        if self.ref_len == 0:
            raise UndefinedMetricError(
                "corpus WER undefined: no non-empty references")
        return self.errors / self.ref_len

    @property
    def wer_percent(self) -> float:
        return 100.0 * self.wer


def corpus_wer(
    pairs: list[tuple[str, str]],
    spec: NormalizationSpec = NormalizationSpec(),
) -> CorpusWer:
    """Score (reference, hypothesis) string pairs as one pooled corpus.

    Pairs whose reference normalizes to nothing are excluded and reported in
    .warnings rather than poisoning the pool.
    """
    result = CorpusWer()
    for idx, (ref_text, hyp_text) in enumerate(pairs):
        ref = tokenize(normalize(ref_text, spec))
        if not ref:
            result.warnings.append(
                f"pair {idx}: reference empty after normalization, excluded")
            result.per_pair.append(None)
            continue
        a = align(ref, tokenize(normalize(hyp_text, spec)))
        result.substitutions += a.substitutions
        result.deletions += a.deletions
        result.insertions += a.insertions
        result.ref_len += a.ref_len
        result.per_pair.append(a)
    return result


def edit_distance(a, b) -> int:
    """Plain Levenshtein distance over any two sequences."""
    if len(a) < len(b):
        a, b = b, a
    dist = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        prev = dist[0]
        dist[0] = i
        for j, cb in enumerate(b, 1):
            cur = dist[j]
            dist[j] = prev if ca == cb else 1 + min(prev, dist[j], dist[j - 1])
            prev = cur
    return dist[-1]


def cer(ref: str, hyp: str, spec: NormalizationSpec = NormalizationSpec()) -> float:
    """Character error rate over codepoints of the normalized strings."""
    ref_n = normalize(ref, spec)
    if not ref_n:
        raise UndefinedMetricError("CER undefined for an empty reference")
    return edit_distance(list(ref_n), list(normalize(hyp, spec))) / len(ref_n)
