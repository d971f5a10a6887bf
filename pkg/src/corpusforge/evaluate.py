"""Drive an external transcriber over an eval set and render WER reports.

Transcription itself is delegated: either a shell command template invoked
once per utterance ({audio} is replaced with the WAV path), or a pre-computed
TSV of hypotheses. Scoring is pooled corpus WER from the metrics module, and
every run persists a JSON run-record with per-utterance S/D/I counts so a
report can be regenerated without re-running the model.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from io import StringIO
from pathlib import Path

from .corpus import CorpusManifest
from .errors import ExternalCommandError, IntegrityError, UndefinedMetricError
from .metrics import NormalizationSpec, align, normalize, tokenize

MODE_COMMAND = "external_command"
MODE_FILE = "hypothesis_file"

ABSENT_CELL = "–"  # en dash, marks dataset/model cells with no run

STATUS_SCORED = "scored"
STATUS_MISSING = "missing"
STATUS_FAILED = "failed"
STATUS_TIMEOUT = "timeout"
STATUS_EMPTY_REF = "empty-ref"


@dataclass(frozen=True)
class TranscriberSpec:
    mode: str
    command_template: str | None = None
    hypothesis_path: Path | None = None
    timeout_s: float = 120.0

    def __post_init__(self):
        if self.mode == MODE_COMMAND:
            if not self.command_template:
                raise ValueError("external_command mode needs command_template")
            if "{audio}" not in self.command_template:
                raise ValueError("command_template must contain {audio}")
            if self.hypothesis_path is not None:
                raise ValueError("hypothesis_path set in external_command mode")
        elif self.mode == MODE_FILE:
            if self.hypothesis_path is None:
                raise ValueError("hypothesis_file mode needs hypothesis_path")
            if self.command_template is not None:
                raise ValueError("command_template set in hypothesis_file mode")
        else:
            raise ValueError(f"unknown transcriber mode {self.mode!r}")
        if self.timeout_s <= 0:
            raise ValueError(f"timeout_s must be positive, got {self.timeout_s}")

    def default_model_name(self) -> str:
        if self.mode == MODE_COMMAND:
            return Path(shlex.split(self.command_template)[0]).name
        return Path(self.hypothesis_path).stem


@dataclass
class UtteranceResult:
    id: str
    status: str
    counted: bool
    ref_len: int = 0
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    hypothesis: str | None = None
    detail: str | None = None

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@dataclass
class EvalRun:
    dataset: str
    model: str
    transcriber: TranscriberSpec
    normalization: NormalizationSpec
    strict: bool
    timestamp: str
    results: list[UtteranceResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ref_len(self) -> int:
        return sum(r.ref_len for r in self.results if r.counted)

    @property
    def errors(self) -> int:
        return sum(r.errors for r in self.results if r.counted)

    @property
    def wer_percent(self) -> float:
        total = self.ref_len
        if total == 0:
            raise UndefinedMetricError(
                "corpus WER undefined: no scored reference words")
        return 100.0 * self.errors / total

    def row(self) -> tuple[str, str, float]:
        return (self.dataset, self.model, self.wer_percent)


def read_hypotheses(path) -> dict[str, str]:
    """Parse the TSV exchange format: one `id<TAB>text` line per utterance."""
    hyps: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        utt_id, _, text = line.partition("\t")
        hyps[utt_id] = text
    return hyps


def _invoke(template: str, audio: Path, timeout_s: float):
    """Run one transcriber invocation, returning (status, text, detail)."""
    args = [a.replace("{audio}", str(audio)) for a in shlex.split(template)]
    try:
        proc = subprocess.run(args, capture_output=True, timeout=timeout_s)
    except subprocess.TimeoutExpired:
        return STATUS_TIMEOUT, None, f"timed out after {timeout_s}s"
    except OSError as exc:
        return STATUS_FAILED, None, str(exc)
    if proc.returncode != 0:
        err = proc.stderr.decode("utf-8", errors="replace").strip()
        return STATUS_FAILED, None, f"exit {proc.returncode}: {err[:200]}"
    return STATUS_SCORED, proc.stdout.decode("utf-8", errors="replace").strip(), None


def run_eval(
    manifest: CorpusManifest,
    transcriber: TranscriberSpec,
    nspec: NormalizationSpec = NormalizationSpec(),
    strict: bool = False,
    workers: int = 1,
    dataset: str | None = None,
    model: str | None = None,
) -> EvalRun:
    """Transcribe and score a manifest, one hypothesis per utterance.

    Utterances without a hypothesis (uncovered, failed, or timed out) are
    excluded with a warning, or counted as full deletions when strict is set.
    Timeouts and nonzero exits never abort the run; zero coverage does.
    """
    run = EvalRun(
        dataset=dataset or manifest.name,
        model=model or transcriber.default_model_name(),
        transcriber=transcriber,
        normalization=nspec,
        strict=strict,
        timestamp=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    )

    if transcriber.mode == MODE_FILE:
        hyps = read_hypotheses(transcriber.hypothesis_path)
        fetched = [
            (hyps.get(u.id), None if u.id in hyps else "no hypothesis row")
            for u in manifest
        ]
        if not any(h is not None for h, _ in fetched):
            raise IntegrityError(
                f"{transcriber.hypothesis_path}: no row matches any of the "
                f"{len(manifest)} manifest ids")
        statuses = [
            (STATUS_SCORED, h, d) if h is not None else (STATUS_MISSING, None, d)
            for h, d in fetched
        ]
    else:
        paths = [manifest.resolve_audio(u) for u in manifest]
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            statuses = list(pool.map(
                lambda p: _invoke(transcriber.command_template, p,
                                  transcriber.timeout_s),
                paths))
        if not any(s == STATUS_SCORED for s, _, _ in statuses):
            raise ExternalCommandError(
                "transcriber produced no hypothesis for any utterance "
                f"(first failure: {statuses[0][2] if statuses else 'none'})")

    for u, (status, hyp_text, detail) in zip(manifest, statuses):
        ref = tokenize(normalize(u.transcript, nspec))
        if not ref:
            run.results.append(UtteranceResult(
                id=u.id, status=STATUS_EMPTY_REF, counted=False, detail=detail))
            run.warnings.append(
                f"{u.id}: reference empty after normalization, excluded")
            continue
        if status == STATUS_SCORED:
            a = align(ref, tokenize(normalize(hyp_text, nspec)))
            run.results.append(UtteranceResult(
                id=u.id, status=status, counted=True, ref_len=a.ref_len,
                substitutions=a.substitutions, deletions=a.deletions,
                insertions=a.insertions, hypothesis=hyp_text))
        else:
            # no hypothesis: punitive full-deletion read under strict,
            # excluded with a warning otherwise
            run.results.append(UtteranceResult(
                id=u.id, status=status, counted=strict, ref_len=len(ref),
                deletions=len(ref) if strict else 0, detail=detail))
            run.warnings.append(
                f"{u.id}: {status}"
                + (f" ({detail})" if detail else "")
                + (", counted as deletions" if strict else ", excluded"))
    return run


def save_run(run: EvalRun, path) -> None:
    t = run.transcriber
    record = {
        "dataset": run.dataset,
        "model": run.model,
        "wer_percent": run.wer_percent,
        "strict": run.strict,
        "timestamp": run.timestamp,
        "transcriber": {
            "mode": t.mode,
            "command_template": t.command_template,
            "hypothesis_path":
                None if t.hypothesis_path is None else str(t.hypothesis_path),
            "timeout_s": t.timeout_s,
        },
        "normalization": {
            "strip_punctuation": run.normalization.strip_punctuation,
            "digit_policy": run.normalization.digit_policy,
            "collapse_whitespace": run.normalization.collapse_whitespace,
        },
        "totals": {
            "substitutions": sum(r.substitutions for r in run.results if r.counted),
            "deletions": sum(r.deletions for r in run.results if r.counted),
            "insertions": sum(r.insertions for r in run.results if r.counted),
            "ref_len": run.ref_len,
            "errors": run.errors,
        },
        "utterances": [
            {
                "id": r.id,
                "status": r.status,
                "counted": r.counted,
                "ref_len": r.ref_len,
                "substitutions": r.substitutions,
                "deletions": r.deletions,
                "insertions": r.insertions,
                "hypothesis": r.hypothesis,
                "detail": r.detail,
            }
            for r in run.results
        ],
        "warnings": run.warnings,
    }
    Path(path).write_text(
        json.dumps(record, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8")


def load_run_row(path) -> tuple[str, str, float]:
    """Pull the (dataset, model, wer_percent) row out of a stored run-record."""
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return (record["dataset"], record["model"], float(record["wer_percent"]))
    except KeyError as exc:
        raise IntegrityError(f"{path}: run-record missing field {exc}") from exc


def format_wer_cell(value: float) -> str:
    """1-2 decimal places: 101.8 stays 101.8, 68.47 stays 68.47."""
    text = f"{value:.2f}"
    return text[:-1] if text.endswith("0") else text


def _grid(rows):
    """Collect (dataset, model, wer) rows into first-appearance-ordered axes."""
    datasets: list[str] = []
    models: list[str] = []
    cells: dict[tuple[str, str], float] = {}
    for dataset, model, wer in rows:
        if dataset not in datasets:
            datasets.append(dataset)
        if model not in models:
            models.append(model)
        cells[(dataset, model)] = wer
    return datasets, models, cells


def render_report(rows, fmt: str = "markdown_table") -> str:
    """Render (dataset, model, wer_percent) rows as a comparison table.

    Datasets become rows and models columns; cells with no run show an en
    dash, matching how missing comparisons are usually typeset.
    """
    datasets, models, cells = _grid(rows)

    if fmt in ("markdown_table", "md", "markdown"):
        lines = ["| Dataset | " + " | ".join(models) + " |"
                 if models else "| Dataset |"]
        lines.append("| --- |" + " --- |" * len(models))
        for d in datasets:
            vals = [
                format_wer_cell(cells[(d, m)]) if (d, m) in cells else ABSENT_CELL
                for m in models
            ]
            lines.append("| " + " | ".join([d] + vals) + " |")
        return "\n".join(lines) + "\n"

    if fmt == "csv":
        out = StringIO()
        import csv as _csv

        writer = _csv.writer(out, lineterminator="\n")
        writer.writerow(["dataset"] + models)
        for d in datasets:
            writer.writerow(
                [d] + [format_wer_cell(cells[(d, m)]) if (d, m) in cells
                       else ABSENT_CELL for m in models])
        return out.getvalue()

    if fmt == "json":
        doc = {
            "models": models,
            "rows": [
                {"dataset": d,
                 "cells": {m: cells.get((d, m)) for m in models}}
                for d in datasets
            ],
        }
        return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"

    raise ValueError(f"unknown report format {fmt!r}")
