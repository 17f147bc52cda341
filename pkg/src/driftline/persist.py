"""Model snapshot files and the on-disk training cache.

Snapshots are versioned UTF-8 text: a small key/value header, an
``end-header`` marker, then one ``term<TAB>values`` row per vocabulary term.
Floats are written with 17 significant digits so a loaded model scores
byte-identically to the freshly trained one.
"""

import dataclasses
import hashlib
import json
from pathlib import Path
import numpy as np

from . import bm25, randindex, skipgram
from .errors import DataError

FORMAT_NAME = "driftline-model"
FORMAT_VERSION = 1


def _write_header(fh, fields: dict) -> None:
    fh.write(f"{FORMAT_NAME} {FORMAT_VERSION}\n")
    for key, value in fields.items():
        fh.write(f"{key} {value}\n")
    fh.write("end-header\n")


def _fmt_floats(values) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def save_model(model, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        if isinstance(model, skipgram.SkipGramModel):
            _write_header(
                fh,
                {
                    "kind": "sgns",
                    "dim": model.dim,
                    "vocab": len(model.vocab),
                    "trained_at": model.trained_at_ms,
                    "config": json.dumps(
                        dataclasses.asdict(model.config), sort_keys=True
                    ),
                },
            )
            for term in model.vocab.terms:
                word = model.vocab[term]
                fh.write(
                    f"{term}\t{word.count}\t"
                    f"{_fmt_floats(model.embeddings[word.index])}\n"
                )
        elif isinstance(model, randindex.RiModel):
            _write_header(
                fh,
                {
                    "kind": model.kind,
                    "dim": model.dim,
                    "vocab": len(model.terms),
                    "trained_at": model.trained_at_ms,
                    "config": json.dumps(
                        dataclasses.asdict(model.config), sort_keys=True
                    ),
                },
            )
            for term in sorted(model.terms, key=model.terms.get):
                row = model.context[model.terms[term]]
                fh.write(f"{term}\t" + " ".join(str(int(v)) for v in row) + "\n")
        elif isinstance(model, bm25.Bm25Stats):
            _write_header(
                fh,
                {
                    "kind": "bm25",
                    "dim": 0,
                    "vocab": len(model.doc_freq),
                    "trained_at": model.built_at_ms,
                    "docs": model.n_docs,
                    "avgdl": format(model.avgdl, ".17g"),
                },
            )
            for term in sorted(model.doc_freq):
                fh.write(f"{term}\t{model.doc_freq[term]}\n")
        else:
            raise TypeError(f"cannot persist model of type {type(model)!r}")


def _read_header(lines) -> dict:
    magic = next(lines, None)
    if magic is None or not magic.startswith(FORMAT_NAME):
        raise DataError("not a model snapshot file")
    version = int(magic.split()[1])
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported snapshot version {version}")
    fields = {}
    for line in lines:
        line = line.rstrip("\n")
        if line == "end-header":
            return fields
        key, _, value = line.partition(" ")
        fields[key] = value
    raise DataError("truncated snapshot header")


def load_model(path):
    """Reconstruct a model from a snapshot file (scoring-capable only)."""
    path = Path(path)
    try:
        fh = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read model snapshot {path}: {exc}") from exc
    with fh:
        lines = iter(fh)
        header = _read_header(lines)
        kind = header.get("kind")
        trained_at = int(header.get("trained_at", 0))
        if kind == "sgns":
            config = skipgram.SkipGramConfig(**json.loads(header["config"]))
            counts = {}
            rows = {}
            for line in lines:
                term, count, values = line.rstrip("\n").split("\t")
                counts[term] = int(count)
                rows[term] = np.array([float(v) for v in values.split()])
            vocab = _rebuild_vocab(counts)
            emb = np.vstack([rows[t] for t in vocab.terms])
            return skipgram.SkipGramModel(vocab, emb, None, config, trained_at)
        if kind in ("ri-ttri", "ri-trri"):
            config = randindex.RandomIndexConfig(**json.loads(header["config"]))
            terms = {}
            rows = []
            for line in lines:
                term, values = line.rstrip("\n").split("\t")
                terms[term] = len(rows)
                rows.append(np.array([int(v) for v in values.split()], dtype=np.int64))
            context = (
                np.vstack(rows)
                if rows
                else np.zeros((0, config.dim), dtype=np.int64)
            )
            return randindex.RiModel(terms, context, config, trained_at)
        if kind == "bm25":
            df = {}
            for line in lines:
                term, count = line.rstrip("\n").split("\t")
                df[term] = int(count)
            return bm25.Bm25Stats(
                n_docs=int(header["docs"]),
                doc_freq=df,
                avgdl=float(header["avgdl"]),
                built_at_ms=trained_at,
            )
        raise DataError(f"unknown model kind {kind!r} in {path}")


def _rebuild_vocab(counts: dict[str, int]) -> skipgram.Vocabulary:
    ordered = sorted(counts.items(), key=lambda tc: (-tc[1], tc[0]))
    codes = skipgram._huffman([c for _, c in ordered])
    words = {
        term: skipgram.VocabWord(term, i, c, codes[i][0], codes[i][1])
        for i, (term, c) in enumerate(ordered)
    }
    return skipgram.Vocabulary(words, total_tokens=sum(counts.values()))


def spec_hash(spec) -> str:
    """Stable 16-hex-digit digest of a tracker (or any dataclass) config."""
    payload = json.dumps(dataclasses.asdict(spec), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class ModelCache:
    """Snapshot store keyed by (model kind, window end, config hash).

    Lets repeated replays of the same stream segment skip retraining.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def key(self, spec, window_end_ms: int) -> str:
        return f"{spec.model_kind}-{window_end_ms}-{spec_hash(spec)}"

    def _path(self, spec, window_end_ms: int) -> Path:
        return self.directory / f"{self.key(spec, window_end_ms)}.model"

    def load(self, spec, window_end_ms: int):
        path = self._path(spec, window_end_ms)
        if not path.exists():
            self.misses += 1
            return None
        self.hits += 1
        return load_model(path)

    def store(self, spec, model) -> None:
        trained_at = getattr(model, "trained_at_ms", None)
        if trained_at is None:
            trained_at = model.built_at_ms
        save_model(model, self._path(spec, trained_at))
