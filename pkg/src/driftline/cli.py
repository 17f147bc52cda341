"""Command-line front end: validate streams, train snapshots, run trackers,
summarize timelines, and score them against references.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

import argparse
import configparser
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__, bm25, evaluator, persist, randindex, skipgram, summarizer
from .corpus import (
    IngestReport,
    SlidingWindow,
    format_timestamp,
    ingest,
    lang_filter,
    load_stoplist,
    parse_timestamp,
    preprocess,
)
from .errors import ConfigError, DataError, DriftlineError
from .tracker import (
    HOUR_MS,
    MINUTE_MS,
    MODEL_KINDS,
    MODES,
    Query,
    TrackerSpec,
    load_event_spec,
    read_timeline_entries,
    timeline_records,
    track,
    write_timeline,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_config(path) -> dict:
    """Flat section.key -> value mapping from an INI-style config file."""
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
    return {
        f"{section}.{key}": value
        for section in parser.sections()
        for key, value in parser.items(section)
    }


def _setting(args, config, flag, key, default, cast):
    """Resolve one setting: CLI flag beats config file beats default."""
    value = getattr(args, flag, None)
    if value is not None:
        return value
    if key in config:
        try:
            return cast(config[key])
        except ValueError as exc:
            raise ConfigError(f"bad config value for {key}: {exc}") from exc
    return default


def build_tracker_spec(args, config) -> TrackerSpec:
    model = _setting(args, config, "model", "tracker.model", "sgns", str)
    mode = _setting(args, config, "mode", "tracker.mode", "adaptive", str)
    threshold = _setting(args, config, "threshold", "tracker.threshold", 0.5, float)
    window_h = _setting(args, config, "window_hours", "tracker.window_hours", 24.0, float)
    refresh_m = _setting(
        args, config, "refresh_minutes", "tracker.refresh_minutes", 15.0, float
    )
    seed = _setting(args, config, "seed", "tracker.seed", 1, int)
    dim = getattr(args, "dim", None)
    sgns_cfg = skipgram.SkipGramConfig(
        dim=int(dim) if dim else int(config.get("sgns.dim", 200)),
        max_context=int(config.get("sgns.max_context", 5)),
        epochs=int(
            _setting(args, config, "epochs", "sgns.epochs", 15, int)
        ),
        alpha=float(config.get("sgns.alpha", 0.025)),
        min_count=int(config.get("sgns.min_count", 2)),
        seed=seed,
    )
    ri_cfg = randindex.RandomIndexConfig(
        dim=int(dim) if dim and model.startswith("ri-") else int(config.get("ri.dim", 2500)),
        nonzeros=int(config.get("ri.nonzeros", 8)),
        context_radius=int(config.get("ri.context_radius", 5)),
        seed=seed,
    )
    bm25_params = bm25.Bm25Params(
        k1=float(config.get("bm25.k1", 1.2)),
        b=float(config.get("bm25.b", 0.75)),
        floor_negative_idf=config.get("bm25.floor_negative_idf", "no") in ("yes", "true", "1"),
    )
    try:
        return TrackerSpec(
            model_kind=model,
            mode=mode,
            threshold=threshold,
            window_length_ms=int(window_h * HOUR_MS),
            refresh_rate_ms=int(refresh_m * MINUTE_MS),
            sgns=sgns_cfg,
            ri=ri_cfg,
            bm25_params=bm25_params,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _stream_tweets(args, report=None):
    tweets = ingest(args.stream, report)
    lang = getattr(args, "lang", None)
    if lang:
        allowed = {code.strip().lower() for code in lang.split(",")}
        return (t for t in tweets if lang_filter(t, allowed))
    return tweets


def cmd_validate(args) -> int:
    report = IngestReport()
    for _ in ingest(args.stream, report):
        pass
    print(f"records: {report.records}")
    print(f"malformed: {report.malformed}")
    print(f"order_violations: {report.order_violations}")
    if report.first_ms is not None:
        print(f"first: {format_timestamp(report.first_ms)}")
        print(f"last: {format_timestamp(report.last_ms)}")
        print(f"span_hours: {(report.last_ms - report.first_ms) / HOUR_MS:.2f}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _read_config(args.config)
    spec = build_tracker_spec(args, config)
    stoplist = load_stoplist(args.stoplist)
    window = SlidingWindow(
        spec.window_length_ms,
        spec.refresh_rate_ms,
        preprocessor=lambda t: preprocess(t, stoplist, placeholder_mode=True),
    )
    at_ms = parse_timestamp(args.at) if args.at else None
    for tweet in _stream_tweets(args):
        if at_ms is not None and tweet.timestamp_ms > at_ms:
            break
        window.advance(tweet)
    if len(window) == 0:
        raise DataError("no tweets in the training window")
    from .tracker import train_model

    model = train_model(spec, window.snapshot(), window.now_ms)
    persist.save_model(model, args.out)
    print(f"trained {spec.model_kind} on {len(window)} tweets -> {args.out}")
    return EXIT_OK


def _summary_target(args, entries) -> int:
    if getattr(args, "target_length", None):
        return args.target_length
    refs = getattr(args, "reference", None) or []
    if refs:
        lengths = [len(read_timeline_entries(p)) for p in refs]
        return max(1, round(sum(lengths) / len(lengths)))
    return 20


def _write_summary(entries, selected, path, keep_rejected: bool) -> None:
    selected_ids = {id(e) for e in selected}
    with Path(path).open("w", encoding="utf-8") as fh:
        for e in entries:
            if not keep_rejected and id(e) not in selected_ids:
                continue
            record = {
                "id": e.tweet.id,
                "timestamp": format_timestamp(e.tweet.timestamp_ms),
                "author": e.tweet.author,
                "text": e.tweet.text,
                "score": round(float(e.score), 9),
                "raw_score": round(float(e.raw_score), 9),
                "model_trained_at": format_timestamp(e.model_trained_at_ms),
            }
            if keep_rejected:
                record["selected"] = id(e) in selected_ids
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def cmd_track(args) -> int:
    config = _read_config(args.config)
    spec = build_tracker_spec(args, config)
    stoplist = load_stoplist(args.stoplist)
    event = load_event_spec(args.event)
    query = Query.from_text(event.query_text, stoplist, event.start_ms)
    cache = persist.ModelCache(args.cache_dir) if args.cache_dir else None

    report = IngestReport()
    timeline, stats = track(
        _stream_tweets(args, report), query, spec, event, stoplist, model_cache=cache
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_timeline(timeline, out_dir / "timeline.jsonl")

    summary_cfg = summarizer.SummaryConfig(
        target_length=_summary_target(args, timeline.entries),
        dup_threshold=args.dup_threshold,
    )
    deduped = summarizer.dedupe(timeline.entries, summary_cfg, stoplist)
    summary = summarizer.sumbasic(deduped, summary_cfg, stoplist)
    _write_summary(timeline.entries, summary, out_dir / "summary.jsonl", False)

    spec_digest = persist.spec_hash(spec)
    manifest = {
        "version": __version__,
        "event": event.id,
        "query": event.query_text,
        "stream": Path(args.stream).name,
        "config": dataclasses.asdict(spec),
        "config_hash": spec_digest,
        "counts": {
            "records": report.records,
            "malformed": report.malformed,
            "seen": stats.seen,
            "in_period": stats.in_period,
            "scored": stats.scored,
            "included": stats.included,
            "skipped_no_vector": stats.skipped_no_vector,
            "refreshes": stats.refreshes,
            "training_failures": stats.training_failures,
            "dropped_late": stats.dropped_late,
            "summary_length": len(summary),
        },
        "models": [
            {"kind": spec.model_kind, "trained_at": format_timestamp(ms),
             "key": f"{spec.model_kind}-{ms}-{spec_digest}"}
            for ms in stats.trained_at
        ],
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    print(
        f"timeline: {len(timeline.entries)} entries, summary: {len(summary)}, "
        f"refreshes: {stats.refreshes} -> {out_dir}"
    )
    return EXIT_OK


def cmd_summarize(args) -> int:
    entries = read_timeline_entries(args.timeline)
    stoplist = load_stoplist(args.stoplist)
    if not entries:
        raise DataError(f"timeline {args.timeline} has no entries")
    cfg = summarizer.SummaryConfig(
        target_length=_summary_target(args, entries),
        dup_threshold=args.dup_threshold,
    )
    deduped = summarizer.dedupe(entries, cfg, stoplist)
    summary = summarizer.sumbasic(deduped, cfg, stoplist)
    _write_summary(entries, summary, args.out, args.keep_rejected)
    print(f"summary: {len(summary)} of {len(entries)} entries -> {args.out}")
    return EXIT_OK


def _entries_to_units(entries, config: evaluator.EvalConfig):
    return [evaluator.eval_tokens(e.tweet.text, config) for e in entries]


def _format_report(report: evaluator.RougeReport) -> str:
    lines = [f"{'variant':<12} {'precision':>10} {'recall':>10} {'f1':>10}"]
    for name in sorted(report.scores):
        s = report.scores[name]
        lines.append(
            f"{name:<12} {s.precision:>10.4f} {s.recall:>10.4f} {s.f1:>10.4f}"
        )
    if report.diversity is not None:
        lines.append(f"diversity_ratio: {report.diversity:.4f}")
    lines.append(f"references: {report.reference_count}")
    return "\n".join(lines)


def cmd_evaluate(args) -> int:
    system_entries = read_timeline_entries(args.system)
    references = [read_timeline_entries(p) for p in args.reference]
    if not references or any(not r for r in references):
        raise DataError("reference timelines must exist and be nonempty")
    try:
        config = evaluator.EvalConfig(
            rouge_n=tuple(int(n) for n in args.rouge_n.split(",")),
            su_skip_distance=args.skip_distance,
            su_include_unigrams=not args.no_su_unigrams,
            stemming=not args.no_stemming,
            stopword_removal=args.remove_stopwords,
        )
    except ValueError as exc:
        raise ConfigError(f"bad evaluation settings: {exc}") from exc
    system_units = _entries_to_units(system_entries, config)
    reference_units = [_entries_to_units(r, config) for r in references]
    report = evaluator.evaluate_timelines(system_units, reference_units, config)

    table = _format_report(report)
    print(table)
    if args.out:
        payload = {
            "scores": {
                name: dataclasses.asdict(score)
                for name, score in report.scores.items()
            },
            "per_reference": {
                name: [dataclasses.asdict(s) for s in scores]
                for name, scores in report.per_reference.items()
            },
            "diversity_ratio": report.diversity,
            "reference_count": report.reference_count,
            "system_tokens": report.system_tokens,
            "reference_tokens": report.reference_tokens,
        }
        Path(args.out).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return EXIT_OK


def cmd_replay_all(args) -> int:
    out_root = Path(args.out)
    rows = []
    for model in MODEL_KINDS:
        for mode in MODES:
            sub = argparse.Namespace(**vars(args))
            sub.model = model
            sub.mode = mode
            sub.out = str(out_root / f"{model}-{mode}")
            cmd_track(sub)
            manifest = json.loads(
                (Path(sub.out) / "manifest.json").read_text(encoding="utf-8")
            )
            rows.append((model, mode, manifest["counts"]["included"]))
    print(f"{'model':<10} {'mode':<10} {'included':>9}")
    for model, mode, included in rows:
        print(f"{model:<10} {mode:<10} {included:>9}")
    return EXIT_OK


def _add_tracker_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=MODEL_KINDS, default=None)
    p.add_argument("--mode", choices=MODES, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--window-hours", dest="window_hours", type=float, default=None)
    p.add_argument("--refresh-minutes", dest="refresh_minutes", type=float, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lang", default=None, help="comma-separated language allowlist")
    p.add_argument("--stoplist", default=None)
    p.add_argument("--config", default=None, help="INI config file; flags win")


def _add_summary_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target-length", dest="target_length", type=int, default=None)
    p.add_argument("--dup-threshold", dest="dup_threshold", type=float, default=0.9)
    p.add_argument(
        "--reference", action="append", default=None,
        help="reference timeline(s); sets the summary target length",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftline", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="scan a stream file and report its shape")
    p.add_argument("--stream", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("train", help="train one model snapshot from a stream window")
    p.add_argument("--stream", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--at", default=None, help="train on the window ending here")
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("track", help="replay a stream and build a timeline")
    p.add_argument("--stream", required=True)
    p.add_argument("--event", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cache-dir", dest="cache_dir", default=None)
    _add_tracker_flags(p)
    _add_summary_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("summarize", help="dedupe and select a timeline summary")
    p.add_argument("--timeline", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-rejected", action="store_true")
    p.add_argument("--stoplist", default=None)
    _add_summary_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="score a timeline against references")
    p.add_argument("--system", required=True)
    p.add_argument("--reference", action="append", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--rouge-n", dest="rouge_n", default="1,2")
    p.add_argument("--skip-distance", dest="skip_distance", type=int, default=4)
    p.add_argument("--no-su-unigrams", action="store_true")
    p.add_argument("--no-stemming", action="store_true")
    p.add_argument("--remove-stopwords", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("replay-all", help="track with every model in both modes")
    p.add_argument("--stream", required=True)
    p.add_argument("--event", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cache-dir", dest="cache_dir", default=None)
    _add_tracker_flags(p)
    _add_summary_flags(p)
    p.set_defaults(func=cmd_replay_all)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"driftline: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"driftline: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DriftlineError as exc:
        print(f"driftline: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        logger.exception("unhandled error")
        print(f"driftline: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
