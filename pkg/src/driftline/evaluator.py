"""Timeline quality metrics: n-gram, LCS and skip-bigram overlap plus a
redundancy-relative diversity ratio.

Scoring text keeps hashtags and mentions, strips URLs and media links,
stems by default and removes no stopwords. Counts are clipped, so repeating
a system n-gram beyond its reference count never inflates recall.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import stemmer
from .corpus import tokenize
from .vecspace import binary_bow, cosine


@dataclass(frozen=True)
class EvalConfig:
    rouge_n: tuple[int, ...] = (1, 2)
    su_skip_distance: int = 4
    su_include_unigrams: bool = True
    stemming: bool = True
    stopword_removal: bool = False

    def __post_init__(self):
        if self.su_skip_distance < 0:
            raise ValueError("skip distance must be >= 0")
        if any(n < 1 for n in self.rouge_n):
            raise ValueError("n-gram sizes must be >= 1")


@dataclass(frozen=True)
class VariantScore:
    precision: float
    recall: float
    f1: float


@dataclass
class RougeReport:
    scores: dict[str, VariantScore] = field(default_factory=dict)
    per_reference: dict[str, list[VariantScore]] = field(default_factory=dict)
    reference_count: int = 0
    system_tokens: int = 0
    reference_tokens: int = 0
    diversity: Optional[float] = None


def eval_tokens(
    text: str, config: EvalConfig, stoplist: Optional[frozenset] = None
) -> list[str]:
    """Scoring tokens for one text unit under the evaluation settings."""
    toks = tokenize(text)
    if config.stopword_removal and stoplist:
        toks = [t for t in toks if t not in stoplist]
    if config.stemming:
        toks = stemmer.stem_tokens(toks)
    return toks


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _score(match: float, sys_total: float, ref_total: float) -> VariantScore:
    p = match / sys_total if sys_total > 0 else 0.0
    r = match / ref_total if ref_total > 0 else 0.0
    return VariantScore(p, r, _f1(p, r))


def ngram_counts(units: Iterable[Sequence[str]], n: int) -> Counter:
    """n-gram multiset over units; grams never cross unit boundaries."""
    counts: Counter = Counter()
    for unit in units:
        unit = tuple(unit)
        for i in range(len(unit) - n + 1):
            counts[unit[i : i + n]] += 1
    return counts


def skip_bigram_counts(
    units: Iterable[Sequence[str]], skip_distance: int, include_unigrams: bool
) -> Counter:
    """Ordered in-unit pairs with at most skip_distance words between them.

    With include_unigrams, single tokens join the multiset as 1-tuples so
    the measure degrades gracefully on very short texts.
    """
    counts: Counter = Counter()
    for unit in units:
        unit = tuple(unit)
        n = len(unit)
        for i in range(n):
            if include_unigrams:
                counts[(unit[i],)] += 1
            for j in range(i + 1, min(n, i + skip_distance + 2)):
                counts[(unit[i], unit[j])] += 1
    return counts


def _clipped(reference: Counter, system: Counter) -> int:
    return sum(min(c, system[g]) for g, c in reference.items())


def _pooled_ngram(
    reference_units: Sequence[Sequence[Sequence[str]]],
    system_units: Sequence[Sequence[str]],
    n: int,
) -> VariantScore:
    sys_counts = ngram_counts(system_units, n)
    sys_total = sum(sys_counts.values())
    match = 0
    ref_total = 0
    for ref in reference_units:
        ref_counts = ngram_counts(ref, n)
        ref_total += sum(ref_counts.values())
        match += _clipped(ref_counts, sys_counts)
    return _score(match, len(reference_units) * sys_total, ref_total)


def rouge_n(
    references: Sequence[Sequence[str]], system: Sequence[str], n: int
) -> VariantScore:
    """Clipped n-gram overlap pooled over all references.

    Recall divides by total reference n-grams; precision symmetrically by
    system n-grams (counted once per reference).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not references:
        raise ValueError("reference set must be nonempty")
    return _pooled_ngram([[ref] for ref in references], [system], n)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def rouge_l(reference: Sequence[str], system: Sequence[str]) -> VariantScore:
    """Longest-common-subsequence overlap against a single reference."""
    lcs = _lcs_length(reference, system)
    return _score(lcs, len(system), len(reference))


def rouge_su(
    reference: Sequence[str],
    system: Sequence[str],
    skip_distance: int = 4,
    include_unigrams: bool = True,
) -> VariantScore:
    """Skip-bigram overlap against a single reference."""
    if skip_distance < 0:
        raise ValueError("skip distance must be >= 0")
    ref_counts = skip_bigram_counts([reference], skip_distance, include_unigrams)
    sys_counts = skip_bigram_counts([system], skip_distance, include_unigrams)
    return _score(
        _clipped(ref_counts, sys_counts),
        sum(sys_counts.values()),
        sum(ref_counts.values()),
    )


def _mean_pairwise_cosine(units: Sequence[Sequence[str]]) -> float:
    vectors = binary_bow(units)
    n = len(vectors)
    total = 0.0
    pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += cosine(vectors[i], vectors[j])
            pairs += 1
    return total / pairs


def diversity_ratio(
    system_units: Sequence[Sequence[str]],
    reference_unit_lists: Sequence[Sequence[Sequence[str]]],
) -> float:
    """Reference redundancy over system redundancy; > 1 means the system
    timeline repeats itself less than the references do.

    Redundancy is the mean pairwise cosine of binary bag-of-words vectors;
    with several references their means are averaged.
    """
    if len(system_units) < 2:
        raise ValueError("system timeline needs at least 2 entries")
    if not reference_unit_lists:
        raise ValueError("reference set must be nonempty")
    for ref in reference_unit_lists:
        if len(ref) < 2:
            raise ValueError("each reference timeline needs at least 2 entries")
    ref_mean = sum(
        _mean_pairwise_cosine(ref) for ref in reference_unit_lists
    ) / len(reference_unit_lists)
    sys_mean = _mean_pairwise_cosine(system_units)
    if sys_mean == 0.0:
        return float("inf") if ref_mean > 0.0 else 1.0
    return ref_mean / sys_mean


def evaluate_timelines(
    system_units: Sequence[Sequence[str]],
    reference_unit_lists: Sequence[Sequence[Sequence[str]]],
    config: EvalConfig = EvalConfig(),
    with_diversity: bool = True,
) -> RougeReport:
    """Full metric sweep of a system timeline against reference timelines.

    Units are tweets (or updates); n-grams and skip-bigrams never cross unit
    boundaries, while the LCS variant runs over the concatenated sequences.
    The n-gram variants pool counts over references; LCS and skip-bigram
    variants report the best reference and keep the per-reference scores.
    """
    if not reference_unit_lists:
        raise ValueError("reference set must be nonempty")
    report = RougeReport(reference_count=len(reference_unit_lists))
    report.system_tokens = sum(len(u) for u in system_units)
    report.reference_tokens = sum(
        len(u) for ref in reference_unit_lists for u in ref
    )

    for n in config.rouge_n:
        report.scores[f"rouge-{n}"] = _pooled_ngram(
            reference_unit_lists, system_units, n
        )

    sys_flat = [t for unit in system_units for t in unit]
    lcs_scores = [
        rouge_l([t for unit in ref for t in unit], sys_flat)
        for ref in reference_unit_lists
    ]
    report.per_reference["rouge-l"] = lcs_scores
    report.scores["rouge-l"] = max(lcs_scores, key=lambda s: s.f1)

    su_name = f"rouge-su{config.su_skip_distance}"
    sys_su = skip_bigram_counts(
        system_units, config.su_skip_distance, config.su_include_unigrams
    )
    su_scores = []
    for ref in reference_unit_lists:
        ref_su = skip_bigram_counts(
            ref, config.su_skip_distance, config.su_include_unigrams
        )
        su_scores.append(
            _score(
                _clipped(ref_su, sys_su),
                sum(sys_su.values()),
                sum(ref_su.values()),
            )
        )
    report.per_reference[su_name] = su_scores
    report.scores[su_name] = max(su_scores, key=lambda s: s.f1)

    if with_diversity:
        try:
            report.diversity = diversity_ratio(system_units, reference_unit_lists)
        except ValueError:
            report.diversity = None
    return report
