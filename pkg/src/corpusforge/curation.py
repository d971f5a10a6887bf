"""Human review state: an append-only decision journal plus session logic.

Every accept/reject lands as one JSON line in the journal, fsynced before the
caller gets its sequence number back, so an acknowledged decision survives a
crash. Rebuilding a session from corpus + journal always reproduces the same
state; the latest decision per utterance wins.
"""

from __future__ import annotations

import base64
import binascii
import fcntl
import json
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .corpus import CorpusManifest, Utterance, write_audiofolder
from .errors import IntegrityError

VERDICTS = ("accept", "reject")


@dataclass(frozen=True)
class CurationDecision:
    sequence: int
    utterance_id: str
    verdict: str
    edited_transcript: str | None = None
    reason: str | None = None
    reviewer: str = "anonymous"
    timestamp: str = ""

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, "
                             f"got {self.verdict!r}")
        if self.sequence < 1:
            raise ValueError(f"sequence must be >= 1, got {self.sequence}")

    def to_json(self) -> str:
        return json.dumps({
            "sequence": self.sequence,
            "utterance_id": self.utterance_id,
            "verdict": self.verdict,
            "edited_transcript": self.edited_transcript,
            "reason": self.reason,
            "reviewer": self.reviewer,
            "timestamp": self.timestamp,
        }, ensure_ascii=False)


def _decision_from_line(line: str, line_no: int, path) -> CurationDecision:
    try:
        obj = json.loads(line)
        return CurationDecision(
            sequence=obj["sequence"],
            utterance_id=obj["utterance_id"],
            verdict=obj["verdict"],
            edited_transcript=obj.get("edited_transcript"),
            reason=obj.get("reason"),
            reviewer=obj.get("reviewer", "anonymous"),
            timestamp=obj.get("timestamp", ""),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise IntegrityError(f"{path} line {line_no}: bad journal entry: {exc}")


class DecisionJournal:
    """Append-only JSON-lines log with gap-free sequence numbers.

    One writer process at a time: an advisory lock is held on the file for
    the journal's lifetime. Appends within the process are serialized by a
    mutex and fsynced before the new decision is returned.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a+", encoding="utf-8")
        try:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            self._fh.close()
            raise IntegrityError(
                f"{self.path} is locked by another process")
        self._mutex = threading.Lock()
        self._decisions: list[CurationDecision] = []
        self._fh.seek(0)
        for line_no, line in enumerate(self._fh, start=1):
            if not line.strip():
                continue
            d = _decision_from_line(line, line_no, self.path)
            expected = len(self._decisions) + 1
            if d.sequence != expected:
                raise IntegrityError(
                    f"{self.path} line {line_no}: sequence {d.sequence}, "
                    f"expected {expected} (journal must be gap-free)")
            self._decisions.append(d)
        self._fh.seek(0, os.SEEK_END)

    def append(
        self,
        utterance_id: str,
        verdict: str,
        edited_transcript: str | None = None,
        reason: str | None = None,
        reviewer: str = "anonymous",
    ) -> CurationDecision:
        with self._mutex:
            d = CurationDecision(
                sequence=len(self._decisions) + 1,
                utterance_id=utterance_id,
                verdict=verdict,
                edited_transcript=edited_transcript,
                reason=reason,
                reviewer=reviewer,
                timestamp=datetime.now(timezone.utc).strftime(
                    "%Y-%m-%dT%H:%M:%SZ"),
            )
            self._fh.write(d.to_json() + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._decisions.append(d)
            return d

    def decisions(self) -> tuple[CurationDecision, ...]:
        with self._mutex:
            return tuple(self._decisions)

    def latest_by_id(self) -> dict[str, CurationDecision]:
        latest: dict[str, CurationDecision] = {}
        for d in self.decisions():
            latest[d.utterance_id] = d
        return latest

    def close(self) -> None:
        if not self._fh.closed:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_UN)
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def encode_cursor(offset: int) -> str:
    return base64.urlsafe_b64encode(
        json.dumps({"offset": offset}).encode()).decode("ascii")


def decode_cursor(cursor: str) -> int:
    try:
        obj = json.loads(base64.urlsafe_b64decode(cursor.encode("ascii")))
        offset = obj["offset"]
    except (binascii.Error, json.JSONDecodeError, KeyError, TypeError,
            UnicodeEncodeError, ValueError) as exc:
        raise ValueError(f"invalid cursor {cursor!r}") from exc
    if not isinstance(offset, int) or offset < 0:
        raise ValueError(f"invalid cursor {cursor!r}")
    return offset


class CurationSession:
    """One corpus under review, backed by a decision journal."""

    def __init__(self, manifest: CorpusManifest, journal: DecisionJournal):
        self.manifest = manifest
        self.journal = journal
        self._by_id = {u.id: u for u in manifest}

    def pending_page(
        self, limit: int = 50, cursor: str | None = None,
    ) -> tuple[list[Utterance], str | None]:
        """Utterances with no decision yet, in manifest order.

        Returns (items, next_cursor); the cursor is None once the scan has
        reached the end of the manifest.
        """
        if limit < 1:
            raise ValueError(f"limit must be >= 1, got {limit}")
        offset = decode_cursor(cursor) if cursor else 0
        if offset > len(self.manifest):
            raise ValueError(f"cursor offset {offset} beyond corpus end")
        decided = set(self.journal.latest_by_id())
        items: list[Utterance] = []
        for pos in range(offset, len(self.manifest)):
            u = self.manifest.utterances[pos]
            if u.id in decided:
                continue
            items.append(u)
            if len(items) == limit:
                break
        else:
            return items, None
        return items, encode_cursor(pos + 1)

    def decide(
        self,
        utterance_id: str,
        verdict: str,
        edited_transcript: str | None = None,
        reason: str | None = None,
        reviewer: str = "anonymous",
    ) -> CurationDecision:
        if utterance_id not in self._by_id:
            raise KeyError(utterance_id)
        return self.journal.append(
            utterance_id, verdict, edited_transcript, reason, reviewer)

    def audio_file(self, utterance_id: str) -> Path:
        u = self._by_id[utterance_id]
        return self.manifest.resolve_audio(u)

    def stats(self) -> dict:
        latest = self.journal.latest_by_id()
        accepted = rejected = edited = 0
        for u in self.manifest:
            d = latest.get(u.id)
            if d is None:
                continue
            if d.verdict == "accept":
                accepted += 1
                if d.edited_transcript is not None:
                    edited += 1
            else:
                rejected += 1
        total = len(self.manifest)
        return {
            "total": total,
            "accepted": accepted,
            "rejected": rejected,
            "edited": edited,
            "pending": total - accepted - rejected,
        }

    def curated_manifest(self) -> CorpusManifest:
        """Accepted utterances with their edits applied, in manifest order."""
        latest = self.journal.latest_by_id()
        kept = []
        for u in self.manifest:
            d = latest.get(u.id)
            if d is None or d.verdict != "accept":
                continue
            if d.edited_transcript is not None:
                u = replace(u, transcript=d.edited_transcript)
            kept.append(u)
        return CorpusManifest(f"{self.manifest.name}-curated", tuple(kept),
                              root=self.manifest.root)

    def export(self, out_dir) -> CorpusManifest:
        return write_audiofolder(self.curated_manifest(), out_dir)
