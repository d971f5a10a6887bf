"""`forge`: one entry point for the whole pipeline.

Stages talk to each other only through corpus directories on disk, so any
prefix of ingest -> segment -> augment -> split -> features -> eval can be
re-run or inspected in isolation. All randomness hangs off explicit --seed
flags; identical inputs and seeds give identical outputs regardless of
--workers.

Exit codes: 0 ok, 2 usage or bad values, 3 data or format problems,
4 external transcriber failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import audio, augment, curation, evaluate, features, segment, server
from .config import DEFAULTS, load_config
from .corpus import (CorpusManifest, StopList, Utterance, duration_report,
                     read_audiofolder, unique_word_stats, write_audiofolder,
                     write_metadata)
from .errors import CorpusForgeError, ExternalCommandError
from .metrics import NormalizationSpec
from .split import SplitSpec, split

log = logging.getLogger("forge")


def _resolve(args, cfg: dict, name: str, cfg_key: str | None = None):
    """flags > config file > defaults."""
    value = getattr(args, name)
    if value is not None:
        return value
    key = cfg_key or name
    if key in cfg:
        return cfg[key]
    return DEFAULTS[key]


def _pmap(fn, items, workers: int) -> list:
    """Order-preserving map, optionally across a thread pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _wav_name(utterance_id: str) -> str:
    return f"wavs/{utterance_id}.wav"


def _scan_plain_dir(in_dir: Path) -> CorpusManifest:
    """Fallback ingest source: bare WAVs, one optional .txt sidecar each."""
    utts = []
    for wav in sorted(in_dir.glob("*.wav")):
        sidecar = wav.with_suffix(".txt")
        transcript = (sidecar.read_text(encoding="utf-8").strip()
                      if sidecar.is_file() else "")
        info = audio.wav_info(wav.read_bytes())
        utts.append(Utterance(
            id=wav.stem, audio_path=wav.name, transcript=transcript,
            duration_s=max(info.duration_seconds, 1e-9), source=in_dir.name))
    return CorpusManifest(in_dir.name, tuple(utts), root=in_dir)


def cmd_ingest(args, cfg) -> int:
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    rate = int(_resolve(args, cfg, "rate", "sample_rate"))
    workers = int(_resolve(args, cfg, "workers"))
    if not in_dir.is_dir():
        raise FileNotFoundError(f"input directory {in_dir} does not exist")
    if (in_dir / "metadata.csv").is_file():
        manifest = read_audiofolder(in_dir)
    else:
        manifest = _scan_plain_dir(in_dir)
    (out_dir / "wavs").mkdir(parents=True, exist_ok=True)

    def job(u: Utterance):
        buf = audio.read_wav(manifest.resolve_audio(u))
        if buf.sample_rate != rate:
            buf = audio.resample(buf, rate)
        return u, audio.encode_wav(buf), buf.duration_seconds

    rows = []
    for u, wav_bytes, duration in _pmap(job, manifest, workers):
        rel = _wav_name(u.id)
        (out_dir / rel).write_bytes(wav_bytes)
        rows.append(replace(u, audio_path=rel, duration_s=duration))
    write_metadata(CorpusManifest(manifest.name, tuple(rows), root=out_dir),
                   out_dir)
    print(f"ingested={len(rows)} rate={rate} out={out_dir}")
    return 0


def cmd_segment(args, cfg) -> int:
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    workers = int(_resolve(args, cfg, "workers"))
    spec = segment.SegmentSpec(
        max_duration_s=float(_resolve(args, cfg, "max_s", "max_chunk_s")),
        min_duration_s=float(_resolve(args, cfg, "min_s", "min_chunk_s")),
        silence_threshold_dbfs=float(_resolve(args, cfg, "silence_db")),
        silence_min_gap_s=float(_resolve(args, cfg, "gap_s")),
        devanagari_ratio=float(
            _resolve(args, cfg, "min_devanagari", "devanagari_min_fraction")),
    )
    manifest = read_audiofolder(in_dir)
    (out_dir / "wavs").mkdir(parents=True, exist_ok=True)

    def job(u: Utterance):
        buf = audio.read_wav(manifest.resolve_audio(u))
        if len(buf) == 0:
            return u, []
        spans = segment.detect_silences(buf, spec)
        stripped = segment.strip_silences(buf, spans)
        if len(stripped) == 0:
            return u, []
        return u, segment.chunk(stripped, spec)

    candidates: list[tuple[Utterance, "audio.AudioBuffer"]] = []
    empty = 0
    for u, pieces in _pmap(job, manifest, workers):
        if not pieces:
            empty += 1
            continue
        for i, piece in enumerate(pieces):
            cid = f"{u.id}-{i:03d}"
            candidates.append((replace(
                u, id=cid, audio_path=_wav_name(cid),
                duration_s=piece.duration_seconds), piece))

    kept_meta, rejected = segment.filter_segments(
        [c for c, _ in candidates], spec)
    kept_ids = {u.id for u in kept_meta}
    for u, piece in candidates:
        if u.id in kept_ids:
            audio.write_wav(out_dir / u.audio_path, piece)
    write_metadata(CorpusManifest(manifest.name, tuple(kept_meta),
                                  root=out_dir), out_dir)
    for u, reason in rejected:
        log.info("rejected %s: %s", u.id, reason)
    print(f"kept={len(kept_meta)} rejected={len(rejected) + empty}")
    return 0


def cmd_augment(args, cfg) -> int:
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    workers = int(_resolve(args, cfg, "workers"))
    base = augment.NoiseSpec(
        noise_sample_rate=int(_resolve(args, cfg, "noise_rate")),
        target_snr_db=float(_resolve(args, cfg, "snr_db")),
        seed=int(_resolve(args, cfg, "seed")),
    )
    manifest = read_audiofolder(in_dir)
    (out_dir / "wavs").mkdir(parents=True, exist_ok=True)

    def job(u: Utterance):
        buf = audio.read_wav(manifest.resolve_audio(u))
        spec = base.with_seed(augment.utterance_seed(base, u.id))
        outcome = augment.augment_with_noise(buf, spec)
        if not outcome.ok:
            return u, None, outcome.skip_reason
        return u, audio.encode_wav(outcome.audio), None

    rows = []
    skipped = 0
    for u, aug_bytes, skip_reason in _pmap(job, manifest, workers):
        rel = _wav_name(u.id)
        shutil.copyfile(manifest.resolve_audio(u), out_dir / rel)
        rows.append(replace(u, audio_path=rel))
        if aug_bytes is None:
            skipped += 1
            log.info("skipping %s: %s", u.id, skip_reason)
            continue
        aug_id = u.id + augment.AUGMENT_SUFFIX
        aug_rel = _wav_name(aug_id)
        (out_dir / aug_rel).write_bytes(aug_bytes)
        rows.append(replace(u, id=aug_id, audio_path=aug_rel,
                            background="white_noise", augmented=True))
    write_metadata(CorpusManifest(manifest.name, tuple(rows), root=out_dir),
                   out_dir)
    print(f"originals={len(manifest)} augmented={len(rows) - len(manifest)} "
          f"skipped={skipped}")
    return 0


def cmd_stats(args, cfg) -> int:
    manifest = read_audiofolder(Path(args.in_dir))
    stop = (StopList.from_file(args.stoplist) if args.stoplist
            else StopList.empty())
    rows = duration_report(manifest)
    unique_count, _ = unique_word_stats(manifest, stop)
    width = max([len("source")] + [len(src) for src, _ in rows]) + 2
    print(f"{'source':<{width}}{'hours':>8}")
    for src, hours in rows:
        print(f"{src:<{width}}{hours:>8.2f}")
    print(f"{'total':<{width}}{manifest.total_hours:>8.2f}")
    print(f"utterances={len(manifest)} unique_words={unique_count}")
    return 0


def cmd_split(args, cfg) -> int:
    out_dir = Path(args.out_dir)
    spec = SplitSpec(
        train_fraction=float(_resolve(args, cfg, "train", "train_fraction")),
        eval_cap_fraction_of_train=float(
            _resolve(args, cfg, "eval_cap")),
        seed=int(_resolve(args, cfg, "seed")),
    )
    manifest = read_audiofolder(Path(args.in_dir))
    result = split(manifest, spec)
    write_audiofolder(result.train, out_dir / "train")
    write_audiofolder(result.eval, out_dir / "eval")
    report_path = out_dir / "split.json"
    report_path.write_text(json.dumps(result.report(), indent=2) + "\n",
                           encoding="utf-8")
    print(f"train={len(result.train)} eval={len(result.eval)} "
          f"cap_applied={str(result.cap_applied).lower()} report={report_path}")
    return 0


def cmd_features(args, cfg) -> int:
    out_dir = Path(args.out_dir)
    workers = int(_resolve(args, cfg, "workers"))
    manifest = read_audiofolder(Path(args.in_dir))
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = features.FeatureSpec()

    def job(u: Utterance):
        buf = audio.read_wav(manifest.resolve_audio(u))
        mel = features.log_mel(buf, spec)
        features.save_mel(mel, out_dir / u.id)
        return u.id

    done = _pmap(job, manifest, workers)
    print(f"features={len(done)} shape={spec.n_mels}x"
          f"{features.expected_frames(spec)} out={out_dir}")
    return 0


def cmd_eval(args, cfg) -> int:
    manifest_dir = args.manifest or args.manifest_flag
    if not manifest_dir:
        raise ValueError("eval needs a manifest directory "
                         "(positional or --manifest)")
    if bool(args.command) == bool(args.hyp):
        raise ValueError("eval needs exactly one of --command or --hyp")
    manifest = read_audiofolder(Path(manifest_dir))
    timeout = float(_resolve(args, cfg, "timeout", "timeout_s"))
    workers = int(_resolve(args, cfg, "workers"))
    if args.command:
        tspec = evaluate.TranscriberSpec(
            mode=evaluate.MODE_COMMAND, command_template=args.command,
            timeout_s=timeout)
    else:
        tspec = evaluate.TranscriberSpec(
            mode=evaluate.MODE_FILE, hypothesis_path=Path(args.hyp),
            timeout_s=timeout)
    run = evaluate.run_eval(
        manifest, tspec, NormalizationSpec(), strict=args.strict,
        workers=workers, dataset=args.dataset, model=args.model)
    if args.out:
        evaluate.save_run(run, args.out)
        log.info("run-record written to %s", args.out)
    for w in run.warnings:
        log.warning("%s", w)
    scored = sum(1 for r in run.results if r.status == evaluate.STATUS_SCORED)
    print(f"dataset={run.dataset} model={run.model} "
          f"wer={run.wer_percent:.2f} scored={scored} "
          f"of={len(run.results)}")
    return 0


def cmd_report(args, cfg) -> int:
    fmt = {"md": "markdown_table", "csv": "csv", "json": "json"}[args.format]
    rows = [evaluate.load_run_row(p) for p in args.runs]
    sys.stdout.write(evaluate.render_report(rows, fmt))
    return 0


def cmd_serve(args, cfg) -> int:
    manifest = read_audiofolder(Path(args.manifest))
    journal = curation.DecisionJournal(Path(args.journal))
    session = curation.CurationSession(manifest, journal)
    export_dir = args.export_dir or str(Path(args.journal).parent / "export")
    app = server.create_app(session, ui_dir=args.ui, export_dir=export_dir)
    host = str(_resolve(args, cfg, "host"))
    port = int(_resolve(args, cfg, "port"))
    log.info("serving %d utterances on %s:%d", len(manifest), host, port)
    try:
        server.run_server(app, host=host, port=port)
    finally:
        journal.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="speech corpus pipeline: ingest, segment, augment, "
                    "split, extract features, evaluate, review")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--verbose", action="store_true",
                        help="debug logging on stderr")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", help="decode and resample into a corpus dir")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--rate", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("segment", help="remove silences, chunk, filter")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--max-s", dest="max_s", type=float, default=None)
    p.add_argument("--min-s", dest="min_s", type=float, default=None)
    p.add_argument("--silence-db", dest="silence_db", type=float, default=None)
    p.add_argument("--gap-s", dest="gap_s", type=float, default=None)
    p.add_argument("--min-devanagari", dest="min_devanagari", type=float,
                   default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("augment", help="add seeded white-noise copies")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--snr-db", dest="snr_db", type=float, default=None)
    p.add_argument("--noise-rate", dest="noise_rate", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("stats", help="duration table and vocabulary size")
    p.add_argument("in_dir")
    p.add_argument("--stoplist", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="seeded train/eval partition")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--train", type=float, default=None)
    p.add_argument("--eval-cap", dest="eval_cap", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("features", help="export log-mel matrices")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("eval", help="score a transcriber over a corpus")
    p.add_argument("manifest", nargs="?", default=None)
    p.add_argument("--manifest", dest="manifest_flag", default=None)
    p.add_argument("--command", default=None,
                   help="shell template with {audio}, prints hypothesis")
    p.add_argument("--hyp", default=None, help="TSV file: id<TAB>text")
    p.add_argument("--strict", action="store_true",
                   help="count missing hypotheses as full deletions")
    p.add_argument("--model", default=None)
    p.add_argument("--dataset", default=None)
    p.add_argument("--out", default=None, help="write run-record JSON here")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="render stored runs as a table")
    p.add_argument("runs", nargs="+")
    p.add_argument("--format", choices=("md", "csv", "json"), default="md")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="start the curation service")
    p.add_argument("manifest")
    p.add_argument("--journal", required=True)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    p.add_argument("--export-dir", dest="export_dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname).1s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else {}
        return args.func(args, cfg)
    except ExternalCommandError as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return 4
    except (CorpusForgeError, OSError, KeyError) as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return 2


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split()) or exc.__class__.__name__


if __name__ == "__main__":
    sys.exit(main())
