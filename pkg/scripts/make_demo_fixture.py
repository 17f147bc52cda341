#!/usr/bin/env python3
"""Regenerate the bundled demo stream, event spec and golden outputs.

The stream is a small synthetic drift stream with one malformed line and one
slack-tolerable out-of-order pair, so the validate/track fixtures exercise
the error paths. Run from the repository root:

    python scripts/make_demo_fixture.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from driftline import cli  # noqa: E402
from driftline.corpus import Tweet, format_timestamp  # noqa: E402
from driftline.experiment import DriftStreamConfig, generate_drift_stream  # noqa: E402

DATA = ROOT / "tests" / "data"

TRACK_FLAGS = [
    "--model", "sgns",
    "--mode", "adaptive",
    "--threshold", "0.5",
    "--window-hours", "2",
    "--refresh-minutes", "15",
    "--dim", "16",
    "--epochs", "3",
    "--seed", "7",
    "--target-length", "6",
]


def tweet_record(tweet: Tweet) -> str:
    return json.dumps(
        {
            "id": tweet.id,
            "timestamp": format_timestamp(tweet.timestamp_ms),
            "author": tweet.author,
            "text": tweet.text,
            "lang": tweet.lang,
        },
        sort_keys=True,
        ensure_ascii=False,
    )


def main() -> int:
    DATA.mkdir(parents=True, exist_ok=True)
    cfg = DriftStreamConfig(warmup_hours=2, event_hours=3, tweets_per_hour=12)
    stream = generate_drift_stream(1234, cfg)

    lines = [tweet_record(t) for t in stream.tweets]
    # two extra warmup tweets 30 s apart, written in swapped order: one
    # recoverable order violation inside the reorder slack
    base = stream.tweets[0].timestamp_ms
    early = Tweet("ooo1", base + 90_000, "swapper", "game0 game1 game2", "en")
    late = Tweet("ooo2", base + 120_000, "swapper", "game3 game4", "en")
    lines.insert(1, tweet_record(late))
    lines.insert(2, tweet_record(early))
    # one malformed record
    lines.insert(10, '{"id": "broken", "timestamp": ')

    (DATA / "demo_stream.jsonl").write_text("\n".join(lines) + "\n", "utf-8")
    (DATA / "demo_event.json").write_text(
        json.dumps(
            {
                "id": "demo-drift",
                "query": stream.query_text,
                "start": format_timestamp(stream.event.start_ms),
                "end": format_timestamp(stream.event.end_ms),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        "utf-8",
    )

    golden = DATA / "golden" / "demo"
    golden.mkdir(parents=True, exist_ok=True)
    rc = cli.main(
        [
            "track",
            "--stream", str(DATA / "demo_stream.jsonl"),
            "--event", str(DATA / "demo_event.json"),
            "--out", str(golden),
            *TRACK_FLAGS,
        ]
    )
    if rc != 0:
        print(f"track failed with exit code {rc}", file=sys.stderr)
        return rc
    print(f"fixture written under {DATA}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
