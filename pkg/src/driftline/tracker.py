"""The timeline-generation loop: replay a stream, keep the chosen model fresh
(or frozen), score each arriving tweet against the seed query, and collect
those above threshold.

Replay runs on logical time taken from tweet timestamps; training is
instantaneous in logical time so a freshly scored tweet never sees a model
older than the refresh rate. The seed query text never changes during a
run, only the representation of its words does.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import bm25, randindex, skipgram
from .corpus import (
    SlidingWindow,
    Tweet,
    format_timestamp,
    parse_timestamp,
    preprocess,
    preprocess_text,
    load_stoplist,
)
from .errors import DataError
from .vecspace import compose, cosine

logger = logging.getLogger(__name__)

MODEL_KINDS = ("bm25", "sgns", "ri-ttri", "ri-trri")
MODES = ("adaptive", "static")

HOUR_MS = 3_600_000
MINUTE_MS = 60_000


@dataclass(frozen=True)
class Query:
    """Seed query; preprocessed once and never updated during tracking."""

    raw_text: str
    terms: tuple[str, ...]
    created_at_ms: int

    @classmethod
    def from_text(cls, text: str, stoplist, created_at_ms: int) -> "Query":
        terms = preprocess_text(text, stoplist, placeholder_mode=False).tokens
        if not terms:
            raise DataError(f"query {text!r} is empty after preprocessing")
        return cls(text, terms, created_at_ms)


@dataclass(frozen=True)
class EventSpec:
    id: str
    query_text: str
    start_ms: int
    end_ms: int

    def __post_init__(self):
        if self.end_ms < self.start_ms:
            raise ValueError("event end precedes start")


def load_event_spec(path) -> EventSpec:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read event spec {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid event spec {path}: {exc}") from exc
    try:
        return EventSpec(
            id=str(obj["id"]),
            query_text=str(obj["query"]),
            start_ms=parse_timestamp(obj["start"]),
            end_ms=parse_timestamp(obj["end"]),
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"invalid event spec {path}: {exc}") from exc


@dataclass(frozen=True)
class TrackerSpec:
    model_kind: str = "sgns"
    mode: str = "adaptive"
    threshold: float = 0.5
    window_length_ms: int = 24 * HOUR_MS
    refresh_rate_ms: int = 15 * MINUTE_MS
    static_train_span_ms: Optional[int] = None
    sgns: skipgram.SkipGramConfig = field(default_factory=skipgram.SkipGramConfig)
    ri: randindex.RandomIndexConfig = field(
        default_factory=randindex.RandomIndexConfig
    )
    bm25_params: bm25.Bm25Params = field(default_factory=bm25.Bm25Params)

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"model_kind must be one of {MODEL_KINDS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "adaptive" and self.refresh_rate_ms > self.window_length_ms:
            raise ValueError("adaptive mode requires refresh_rate <= window_length")
        if self.window_length_ms <= 0 or self.refresh_rate_ms <= 0:
            raise ValueError("durations must be positive")

    @property
    def train_window_ms(self) -> int:
        if self.mode == "static" and self.static_train_span_ms is not None:
            return self.static_train_span_ms
        return self.window_length_ms


@dataclass(frozen=True)
class TimelineEntry:
    tweet: Tweet
    score: float
    raw_score: float
    model_trained_at_ms: int


@dataclass
class Timeline:
    event_id: str
    query: Query
    model_kind: str
    mode: str
    start_ms: int
    end_ms: int
    entries: list[TimelineEntry] = field(default_factory=list)


@dataclass
class TrackStats:
    seen: int = 0
    in_period: int = 0
    scored: int = 0
    included: int = 0
    skipped_no_vector: int = 0
    refreshes: int = 0
    training_failures: int = 0
    dropped_late: int = 0
    max_staleness_ms: int = 0
    staleness_violations: int = 0
    containment_violations: int = 0
    trained_at: list[int] = field(default_factory=list)


def train_model(spec: TrackerSpec, snapshot, trained_at_ms: int):
    """Train one representation model of the requested kind from a snapshot."""
    kind = spec.model_kind
    if kind == "bm25":
        return bm25.build_stats(snapshot, built_at_ms=trained_at_ms)
    if kind == "sgns":
        return skipgram.train(snapshot, spec.sgns, trained_at_ms)
    variant = kind.split("-", 1)[1]
    cfg = dataclasses.replace(spec.ri, variant=variant)
    return randindex.train(snapshot, cfg, trained_at_ms)


def _model_trained_at(model) -> int:
    if isinstance(model, bm25.Bm25Stats):
        return model.built_at_ms
    return model.trained_at_ms


class _ModelSlot:
    """Holds the published model; swap is atomic (a single reference store)."""

    def __init__(self):
        self.model = None

    def publish(self, model) -> None:
        self.model = model


def track(
    stream: Iterable[Tweet],
    query: Query,
    spec: TrackerSpec,
    event: EventSpec,
    stoplist: Optional[frozenset] = None,
    pretrained=None,
    model_cache=None,
) -> tuple[Timeline, TrackStats]:
    """Replay a stream over an event period and build the timeline.

    Tweets before the event start only warm up the sliding window. The
    model is (re)trained from window snapshots: once at event start, then on
    every refresh signal in adaptive mode. A training failure keeps the
    previous model and retries on the next signal. Tweets whose vector is
    undefined under the current model are skipped.
    """
    if stoplist is None:
        stoplist = load_stoplist()
    timeline = Timeline(
        event_id=event.id,
        query=query,
        model_kind=spec.model_kind,
        mode=spec.mode,
        start_ms=event.start_ms,
        end_ms=event.end_ms,
    )
    stats = TrackStats()
    window = SlidingWindow(
        spec.train_window_ms,
        spec.refresh_rate_ms,
        preprocessor=lambda t: preprocess(t, stoplist, placeholder_mode=True),
    )
    slot = _ModelSlot()
    is_bm25 = spec.model_kind == "bm25"
    pending: list[tuple[Tweet, float, int]] = []

    def _train(trained_at_ms: int) -> None:
        snapshot = window.snapshot()
        if model_cache is not None:
            cached = model_cache.load(spec, trained_at_ms)
            if cached is not None:
                slot.publish(cached)
                stats.trained_at.append(trained_at_ms)
                return
        try:
            model = train_model(spec, snapshot, trained_at_ms)
        except Exception as exc:
            stats.training_failures += 1
            logger.warning(
                "training failed at %s; keeping previous model: %s",
                format_timestamp(trained_at_ms),
                exc,
            )
            return
        slot.publish(model)
        stats.trained_at.append(trained_at_ms)
        if model_cache is not None:
            model_cache.store(spec, model)

    def _flush_pending() -> None:
        if not pending:
            return
        raws = [raw for _, raw, _ in pending]
        lo, hi = min(raws), max(raws)
        for tweet, raw, trained_at_ms in pending:
            if hi == lo:
                norm = 1.0 if hi > 0.0 else 0.0
            else:
                norm = (raw - lo) / (hi - lo)
            if norm >= spec.threshold:
                timeline.entries.append(
                    TimelineEntry(tweet, norm, raw, trained_at_ms)
                )
                stats.included += 1
        pending.clear()

    if pretrained is not None:
        slot.publish(pretrained)
        stats.trained_at.append(_model_trained_at(pretrained))

    for tweet in stream:
        if tweet.timestamp_ms > event.end_ms:
            break
        stats.seen += 1
        refresh_due = window.advance(tweet)
        if not window.bounds_ok():
            stats.containment_violations += 1
        if tweet.timestamp_ms < event.start_ms:
            continue
        stats.in_period += 1

        if refresh_due:
            _flush_pending()
        if slot.model is None and pretrained is None:
            _train(window.now_ms)
        elif refresh_due and spec.mode == "adaptive":
            stats.refreshes += 1
            _train(window.now_ms)
        if slot.model is None:
            stats.skipped_no_vector += 1
            continue

        model = slot.model
        trained_at_ms = _model_trained_at(model)
        staleness = tweet.timestamp_ms - trained_at_ms
        if staleness > stats.max_staleness_ms:
            stats.max_staleness_ms = staleness
        if spec.mode == "adaptive" and staleness > spec.refresh_rate_ms:
            stats.staleness_violations += 1

        tokens = preprocess(tweet, stoplist, placeholder_mode=True)
        if is_bm25:
            raw = bm25.score(model, spec.bm25_params, query.terms, tokens)
            stats.scored += 1
            pending.append((tweet, raw, trained_at_ms))
            continue

        term_vectors = [
            v for v in (model.term_vector(t) for t in query.terms) if v is not None
        ]
        tweet_vec = model.tweet_vector(tokens)
        if not term_vectors or tweet_vec is None:
            stats.skipped_no_vector += 1
            continue
        sim = cosine(compose(term_vectors), tweet_vec)
        stats.scored += 1
        if sim >= spec.threshold:
            timeline.entries.append(
                TimelineEntry(tweet, sim, sim, trained_at_ms)
            )
            stats.included += 1

    _flush_pending()
    # slack-tolerated reordering may score a slightly older tweet late;
    # the timeline contract is nondecreasing timestamps
    timeline.entries.sort(key=lambda e: e.tweet.timestamp_ms)
    stats.dropped_late = window.dropped_late
    return timeline, stats


def timeline_records(timeline: Timeline) -> Iterable[dict]:
    for e in timeline.entries:
        yield {
            "id": e.tweet.id,
            "timestamp": format_timestamp(e.tweet.timestamp_ms),
            "author": e.tweet.author,
            "text": e.tweet.text,
            "score": round(float(e.score), 9),
            "raw_score": round(float(e.raw_score), 9),
            "model_trained_at": format_timestamp(e.model_trained_at_ms),
            "model": timeline.model_kind,
            "mode": timeline.mode,
        }


def write_timeline(timeline: Timeline, path) -> None:
    """Line-delimited JSON records, one per selected tweet."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in timeline_records(timeline):
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def read_timeline_entries(path) -> list[TimelineEntry]:
    """Entries from a timeline record file; score fields are optional so
    reference timelines in the same format load too."""
    entries = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read timeline {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            tweet = Tweet(
                id=str(obj.get("id", f"line{lineno}")),
                timestamp_ms=parse_timestamp(obj["timestamp"]),
                author=str(obj.get("author", "")),
                text=str(obj["text"]),
                lang=obj.get("lang"),
            )
            trained_raw = obj.get("model_trained_at")
            entries.append(
                TimelineEntry(
                    tweet=tweet,
                    score=float(obj.get("score", 0.0)),
                    raw_score=float(obj.get("raw_score", obj.get("score", 0.0))),
                    model_trained_at_ms=(
                        parse_timestamp(trained_raw) if trained_raw else 0
                    ),
                )
            )
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise DataError(f"invalid timeline record at {path}:{lineno}: {exc}")
    return entries
