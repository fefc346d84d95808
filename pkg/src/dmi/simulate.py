"""Symulator wyjść modelu z brakami pokrycia zdań.

Bierze referencyjne tłumaczenie z separatorami i z prawdopodobieństwem
``tail_drop_prob`` usuwa ostatnie 1-2 zdania jednostki (modele najczęściej
"gubią" końcówkę dokumentu). Opcjonalnie psuje tokeny (``noise``).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .corpus import Corpus
from .errors import InvalidRecord, UsageError
from .metrics import Hypothesis
from .rng import SplitMix64, derive_seed, shuffled
from .segment import SegmentationPlan

logger = logging.getLogger(__name__)

NOISE_TOKEN = "<unk>"


@dataclass(frozen=True)
class SimulatorConfig:
    tail_drop_prob: float = 0.05
    drop_count_dist: Mapping[int, float] = field(default_factory=lambda: {1: 0.5, 2: 0.5})
    noise: float = 0.0
    seed: int = 0
    drop_anywhere: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.tail_drop_prob <= 1.0:
            raise UsageError(f"--drop-prob: must be in [0, 1], got {self.tail_drop_prob}")
        if not 0.0 <= self.noise <= 1.0:
            raise UsageError(f"--noise: must be in [0, 1], got {self.noise}")
        if not self.drop_count_dist:
            raise UsageError("--drop-counts: distribution is empty")
        for count, weight in self.drop_count_dist.items():
            if int(count) < 1 or weight < 0:
                raise UsageError(f"--drop-counts: bad entry {count}:{weight}")
        if sum(self.drop_count_dist.values()) <= 0:
            raise UsageError("--drop-counts: weights sum to zero")


@dataclass(frozen=True)
class _Unit:
    doc_id: str
    start: int
    end: int
    L: Optional[int]


def _draw_count(rng: SplitMix64, dist: Mapping[int, float]) -> int:
    items = sorted(dist.items())
    total = sum(w for _, w in items)
    x = rng.random() * total
    acc = 0.0
    for count, weight in items:
        acc += weight
        if x < acc:
            return int(count)
    return int(items[-1][0])


def _noisy(sentence: str, rate: float, rng: SplitMix64) -> str:
    if rate <= 0.0:
        return sentence
    return " ".join(NOISE_TOKEN if rng.random() < rate else tok for tok in sentence.split())


def _simulate_unit(corpus: Corpus, unit: _Unit, index: int, cfg: SimulatorConfig) -> Tuple[Hypothesis, int]:
    rng = SplitMix64(derive_seed(cfg.seed, index))
    sentences = corpus.get(unit.doc_id).target[unit.start : unit.end]
    n = len(sentences)

    dropped: Set[int] = set()
    if rng.random() < cfg.tail_drop_prob:
        # co najmniej jedno zdanie musi zostać
        d = min(_draw_count(rng, cfg.drop_count_dist), n - 1)
        if d > 0:
            if cfg.drop_anywhere:
                dropped = set(shuffled(range(n), rng.next_u64())[:d])
            else:
                dropped = set(range(n - d, n))

    parts = [
        f"#{k} {_noisy(s, cfg.noise, rng)}" for k, s in enumerate(sentences, start=1) if k - 1 not in dropped
    ]
    hyp = Hypothesis(
        doc_id=unit.doc_id,
        generated=" ".join(parts),
        expected=n,
        L=unit.L,
        start=unit.start,
        end=unit.end,
    )
    return hyp, len(dropped)


def simulate_outputs(
    refs: Corpus,
    plans: Optional[Sequence[SegmentationPlan]],
    cfg: SimulatorConfig,
    doc_ids: Optional[Iterable[str]] = None,
    workers: int = 1,
) -> List[Hypothesis]:
    """Jedna hipoteza na segment planu (albo na cały dokument, gdy planów brak).

    Każda jednostka ma własny podstrumień losowy (seed, indeks), więc wynik
    nie zależy od liczby wątków.
    """

    if plans is not None:
        for plan in plans:
            if not plan.covers(refs.get(plan.doc_id)):
                raise InvalidRecord(f"{plan.doc_id}: plan does not cover the reference document")
        units = [_Unit(p.doc_id, s.start, s.end, p.budget_L) for p in plans for s in p.segments]
    else:
        ids = list(doc_ids) if doc_ids is not None else refs.doc_ids
        units = [_Unit(d, 0, len(refs.get(d)), None) for d in ids]

    jobs = list(enumerate(units))
    if workers <= 1:
        results = [_simulate_unit(refs, unit, i, cfg) for i, unit in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _simulate_unit(refs, job[1], job[0], cfg), jobs))

    n_dropped_units = sum(1 for _, d in results if d > 0)
    if units:
        lo, hi = binomial_interval(cfg.tail_drop_prob, len(units))
        logger.info(
            "Symulacja: %d jednostek, z brakami %d (%.2f%%), oczekiwane %.2f%% [%.2f%%, %.2f%%]",
            len(units),
            n_dropped_units,
            100.0 * n_dropped_units / len(units),
            100.0 * cfg.tail_drop_prob,
            100.0 * lo,
            100.0 * hi,
        )
    return [hyp for hyp, _ in results]


def binomial_interval(p: float, n: int, confidence: float = 0.99) -> Tuple[float, float]:
    """Przedział ufności (aproksymacja normalna) dla frakcji sukcesów przy n próbach."""

    if n <= 0:
        raise UsageError("binomial interval needs n > 0")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    half = z * math.sqrt(p * (1.0 - p) / n)
    return max(0.0, p - half), min(1.0, p + half)


def parse_drop_counts(value: str) -> Mapping[int, float]:
    """"1:0.5,2:0.5" -> {1: 0.5, 2: 0.5}; sama lista "1,2" oznacza rozkład jednostajny."""

    dist = {}
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            if ":" in item:
                count, weight = item.split(":", 1)
                dist[int(count)] = float(weight)
            else:
                dist[int(item)] = 1.0
        except ValueError:
            raise UsageError(f"--drop-counts: cannot parse {item!r}") from None
    if not dist:
        raise UsageError("--drop-counts: distribution is empty")
    return dist
