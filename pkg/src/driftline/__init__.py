"""Adaptive sliding-window term representations for tracking breaking-news
timelines in tweet streams."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    STOP_TOKEN,
    SlidingWindow,
    TokenSequence,
    Tweet,
    ingest,
    lang_filter,
    load_stoplist,
    preprocess,
)
from .tracker import EventSpec, Query, Timeline, TrackerSpec, track  # noqa: F401
from .vecspace import TernarySparseVector, compose, cosine  # noqa: F401
