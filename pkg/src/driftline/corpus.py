"""Tweet stream ingestion, preprocessing, and the sliding training window.

Streams are UTF-8 line-delimited JSON records with fields ``id``,
``timestamp`` (RFC 3339 or epoch milliseconds), ``author``, ``text`` and
optional ``lang``. Preprocessing lowercases, strips URLs and media links,
keeps mentions/hashtags verbatim, and either drops stopwords or replaces
them with a placeholder so surviving words keep their relative positions.
"""

import json
import logging
import re
from collections import Counter, deque
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Callable, Iterator, Optional

from .errors import DataError

logger = logging.getLogger(__name__)

# Placeholder for removed stopwords. Underscores make it a single \w token,
# so reprocessing already-preprocessed text is a fixed point.
STOP_TOKEN = "_stop_"

DEFAULT_REORDER_SLACK_MS = 60_000

_URL_RE = re.compile(
    r"(?:https?://\S+|www\.\S+|\bpic\.twitter\.com/\S+)", re.IGNORECASE
)
_TOKEN_RE = re.compile(r"[#@]?\w+(?:'\w+)*")
_INT_RE = re.compile(r"-?\d+")


def parse_timestamp(value) -> int:
    """Epoch milliseconds from an RFC 3339 string or epoch-ms number."""
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    s = str(value).strip()
    if _INT_RE.fullmatch(s):
        return int(s)
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(round(dt.timestamp() * 1000))


def format_timestamp(ms: int) -> str:
    """RFC 3339 text with millisecond precision, always UTC."""
    secs, millis = divmod(int(ms), 1000)
    dt = datetime.fromtimestamp(secs, tz=timezone.utc)
    return f"{dt.strftime('%Y-%m-%dT%H:%M:%S')}.{millis:03d}Z"


@dataclass(frozen=True)
class Tweet:
    id: str
    timestamp_ms: int
    author: str
    text: str
    lang: Optional[str] = None


@dataclass(frozen=True)
class TokenSequence:
    """Preprocessed token form of one tweet.

    Tokens are words, mentions, hashtags, or the stopword placeholder; URLs
    and media references never survive preprocessing.
    """

    tokens: tuple[str, ...]
    source_id: str

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def content_tokens(self) -> tuple[str, ...]:
        """Tokens without placeholder slots."""
        return tuple(t for t in self.tokens if t != STOP_TOKEN)


@dataclass
class IngestReport:
    records: int = 0
    malformed: int = 0
    order_violations: int = 0
    first_ms: Optional[int] = None
    last_ms: Optional[int] = None


def _parse_record(line: str) -> Tweet:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    if "id" not in obj or "text" not in obj:
        raise ValueError("record missing id or text")
    ts_raw = obj.get("timestamp", obj.get("ts"))
    if ts_raw is None:
        raise ValueError("record missing timestamp")
    tweet_id = str(obj["id"])
    if not tweet_id:
        raise ValueError("empty id")
    return Tweet(
        id=tweet_id,
        timestamp_ms=parse_timestamp(ts_raw),
        author=str(obj.get("author", "")),
        text=str(obj["text"]),
        lang=obj.get("lang"),
    )


def ingest(source, report: Optional[IngestReport] = None) -> Iterator[Tweet]:
    """Lazily yield tweets from a stream file or an iterable of lines.

    Malformed lines are counted on the report and skipped with a warning;
    an unreadable source raises DataError.
    """
    if report is None:
        report = IngestReport()

    def _lines():
        if isinstance(source, (str, Path)):
            try:
                fh = open(source, "r", encoding="utf-8")
            except OSError as exc:
                raise DataError(f"cannot read stream {source}: {exc}") from exc
            with fh:
                yield from fh
        else:
            yield from source

    prev_ms = None
    for lineno, line in enumerate(_lines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            tweet = _parse_record(line)
        except (ValueError, json.JSONDecodeError) as exc:
            report.malformed += 1
            logger.warning("skipping malformed line %d: %s", lineno, exc)
            continue
        report.records += 1
        if report.first_ms is None:
            report.first_ms = tweet.timestamp_ms
        report.last_ms = tweet.timestamp_ms
        if prev_ms is not None and tweet.timestamp_ms < prev_ms:
            report.order_violations += 1
        prev_ms = tweet.timestamp_ms
        yield tweet


def load_stoplist(path=None) -> frozenset[str]:
    """Stoplist from a one-term-per-line file; packaged default when no path."""
    if path is None:
        text = (
            resources.files("driftline").joinpath("data/stopwords.txt").read_text("utf-8")
        )
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read stoplist {path}: {exc}") from exc
    terms = set()
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            terms.add(line)
    return frozenset(terms)


def tokenize(text: str) -> list[str]:
    """Lowercased tokens with URLs removed and @/# sigils preserved."""
    text = _URL_RE.sub(" ", text)
    return [m.group(0) for m in _TOKEN_RE.finditer(text.lower())]


def preprocess_text(
    text: str,
    stoplist: frozenset[str],
    placeholder_mode: bool = True,
    source_id: str = "",
) -> TokenSequence:
    tokens = []
    for tok in tokenize(text):
        if tok == STOP_TOKEN:
            tokens.append(STOP_TOKEN)
        elif tok in stoplist:
            if placeholder_mode:
                tokens.append(STOP_TOKEN)
        else:
            tokens.append(tok)
    return TokenSequence(tuple(tokens), source_id)


def preprocess(
    tweet: Tweet, stoplist: frozenset[str], placeholder_mode: bool = True
) -> TokenSequence:
    """Token sequence for one tweet; see module docstring for the rules."""
    return preprocess_text(tweet.text, stoplist, placeholder_mode, tweet.id)


def lang_filter(tweet: Tweet, allowed: set[str]) -> bool:
    """True iff the tweet's language metadata is in the allowed set.

    Missing metadata never matches (conservative when filtering is active).
    """
    if tweet.lang is None:
        return False
    return tweet.lang.lower() in allowed


def phrase_score(count_ab: int, count_a: int, count_b: int, min_count: int) -> float:
    """Association score for a candidate bigram."""
    return (count_ab - min_count) / (count_a * count_b)


def concat_phrases(
    corpus: list[TokenSequence],
    min_count: int = 5,
    score_threshold: float = 1e-3,
) -> list[TokenSequence]:
    """Join strongly-associated adjacent token pairs into single terms.

    A bigram qualifies when phrase_score exceeds the threshold; qualifying
    pairs become ``a_b`` tokens in a greedy left-to-right pass. Disabled by
    default in the pipeline: joining phrases did not pay off on short texts.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    unigrams: Counter = Counter()
    bigrams: Counter = Counter()
    for seq in corpus:
        toks = seq.tokens
        for i, tok in enumerate(toks):
            if tok == STOP_TOKEN:
                continue
            unigrams[tok] += 1
            if i + 1 < len(toks) and toks[i + 1] != STOP_TOKEN:
                bigrams[(tok, toks[i + 1])] += 1
    phrases = {
        pair
        for pair, c_ab in bigrams.items()
        if phrase_score(c_ab, unigrams[pair[0]], unigrams[pair[1]], min_count)
        > score_threshold
    }
    if not phrases:
        return list(corpus)

    out = []
    for seq in corpus:
        toks = seq.tokens
        joined = []
        i = 0
        while i < len(toks):
            if i + 1 < len(toks) and (toks[i], toks[i + 1]) in phrases:
                joined.append(f"{toks[i]}_{toks[i + 1]}")
                i += 2
            else:
                joined.append(toks[i])
                i += 1
        out.append(TokenSequence(tuple(joined), seq.source_id))
    return out


class SlidingWindow:
    """Fixed-length rolling training corpus over stream time.

    Single-writer: advance() from one thread only. Snapshots are immutable
    tuples safe to hand to a concurrent trainer. Stream time moves with the
    newest tweet seen; tweets older than the reorder slack are dropped.
    """

    def __init__(
        self,
        window_length_ms: int,
        refresh_rate_ms: int,
        preprocessor: Callable[[Tweet], TokenSequence],
        reorder_slack_ms: int = DEFAULT_REORDER_SLACK_MS,
    ):
        if window_length_ms <= 0 or refresh_rate_ms <= 0:
            raise ValueError("window length and refresh rate must be positive")
        self.window_length_ms = int(window_length_ms)
        self.refresh_rate_ms = int(refresh_rate_ms)
        self.reorder_slack_ms = int(reorder_slack_ms)
        self._preprocessor = preprocessor
        self._buffer: deque[tuple[Tweet, TokenSequence]] = deque()
        self._now_ms: Optional[int] = None
        self._last_refresh_ms: Optional[int] = None
        self.dropped_late = 0

    @property
    def now_ms(self) -> Optional[int]:
        return self._now_ms

    @property
    def last_refresh_ms(self) -> Optional[int]:
        return self._last_refresh_ms

    def __len__(self) -> int:
        return len(self._buffer)

    def advance(self, tweet: Tweet) -> bool:
        """Add a tweet, evict expired ones; True when a refresh is due."""
        ts = tweet.timestamp_ms
        if self._now_ms is not None and ts < self._now_ms - self.reorder_slack_ms:
            self.dropped_late += 1
            logger.warning(
                "dropping late tweet %s (%.1f s behind stream time)",
                tweet.id,
                (self._now_ms - ts) / 1000.0,
            )
            return False

        item = (tweet, self._preprocessor(tweet))
        # keep the buffer timestamp-ordered despite slack-bounded reordering
        displaced = []
        while self._buffer and self._buffer[-1][0].timestamp_ms > ts:
            displaced.append(self._buffer.pop())
        self._buffer.append(item)
        while displaced:
            self._buffer.append(displaced.pop())

        if self._now_ms is None or ts > self._now_ms:
            self._now_ms = ts
        cutoff = self._now_ms - self.window_length_ms
        while self._buffer and self._buffer[0][0].timestamp_ms <= cutoff:
            self._buffer.popleft()

        if self._last_refresh_ms is None:
            self._last_refresh_ms = self._now_ms
            return False
        if self._now_ms - self._last_refresh_ms >= self.refresh_rate_ms:
            self._last_refresh_ms = self._now_ms
            return True
        return False

    def snapshot(self) -> tuple[TokenSequence, ...]:
        """Immutable view of the buffered training set in timestamp order."""
        return tuple(seq for _, seq in self._buffer)

    def bounds_ok(self) -> bool:
        """Containment check: all buffered timestamps in (now - length, now]."""
        if not self._buffer:
            return True
        oldest = self._buffer[0][0].timestamp_ms
        newest = self._buffer[-1][0].timestamp_ms
        return (
            oldest > self._now_ms - self.window_length_ms
            and newest <= self._now_ms
        )
