"""Zachłanne pakowanie kolejnych zdań dokumentu w pod-dokumenty o budżecie L tokenów."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .config import DEFAULT_LENGTHS, SegmentConfig
from .corpus import Corpus, ParallelDocument
from .errors import EmptyLengths, InvalidRecord, UsageError
from .io_utils import PathLike, iter_jsonl, load_json, save_json, write_jsonl
from .rng import shuffled
from .separators import render_separated
from .tokenize import WHITESPACE, TokenizerSpec, count_tokens

logger = logging.getLogger(__name__)

STRATEGIES = ("partition", "replicate")
BUDGET_SIDES = ("source", "max")


@dataclass(frozen=True)
class SubDocument:
    doc_id: str
    start: int
    end: int
    budget_L: int
    src_tokens: int
    tgt_tokens: int
    oversized: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise InvalidRecord(f"{self.doc_id}: bad segment range [{self.start}, {self.end})")
        if self.oversized and self.end != self.start + 1:
            raise InvalidRecord(f"{self.doc_id}: only single sentences may be oversized")
        if not self.oversized and self.src_tokens > self.budget_L:
            raise InvalidRecord(
                f"{self.doc_id}: segment has {self.src_tokens} tokens over budget {self.budget_L}"
            )

    def __len__(self) -> int:
        return self.end - self.start

    def to_dict(self) -> Dict[str, object]:
        return {
            "start": self.start,
            "end": self.end,
            "src_tokens": self.src_tokens,
            "tgt_tokens": self.tgt_tokens,
            "oversized": self.oversized,
        }


@dataclass(frozen=True)
class SegmentationPlan:
    doc_id: str
    budget_L: int
    segments: Tuple[SubDocument, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments or self.segments[0].start != 0:
            raise InvalidRecord(f"{self.doc_id}: plan must start at sentence 0")
        for prev, cur in zip(self.segments, self.segments[1:]):
            if cur.start != prev.end:
                raise InvalidRecord(f"{self.doc_id}: segments are not contiguous at {prev.end}")

    @property
    def end(self) -> int:
        return self.segments[-1].end

    def covers(self, doc: ParallelDocument) -> bool:
        return doc.doc_id == self.doc_id and self.end == len(doc)

    def to_dict(self) -> Dict[str, object]:
        return {"doc_id": self.doc_id, "L": self.budget_L, "segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "SegmentationPlan":
        try:
            doc_id = str(data["doc_id"])
            budget = int(data["L"])  # type: ignore[arg-type]
            segments = tuple(
                SubDocument(
                    doc_id=doc_id,
                    start=int(s["start"]),
                    end=int(s["end"]),
                    budget_L=budget,
                    src_tokens=int(s["src_tokens"]),
                    tgt_tokens=int(s["tgt_tokens"]),
                    oversized=bool(s["oversized"]),
                )
                for s in data["segments"]  # type: ignore[union-attr]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidRecord(f"malformed plan record: {exc}") from exc
        return cls(doc_id, budget, segments)


def _cost_function(sentences: Sequence[str], spec: TokenizerSpec) -> Callable[[int, int], int]:
    """Zwraca cost(start, end) = liczba tokenów "#1 s_start #2 ... s_end-1"."""

    if spec.additive:
        sep = count_tokens("#1", spec)
        prefix = [0]
        for s in sentences:
            prefix.append(prefix[-1] + sep + count_tokens(s, spec))
        return lambda start, end: prefix[end] - prefix[start]

    return lambda start, end: count_tokens(render_separated(sentences[start:end]), spec)


def segment_document(
    doc: ParallelDocument,
    L: int,
    spec: TokenizerSpec = WHITESPACE,
    budget_side: str = SegmentConfig.budget_side,
) -> SegmentationPlan:
    """Pakuje zdania od lewej: zdanie dołączamy, jeśli koszt po dołączeniu <= L.

    Koszt to liczba tokenów wyrenderowanego wejścia z separatorami ``#k``
    (po stronie źródłowej, albo max(src, tgt) dla ``budget_side="max"``).
    Pojedyncze zdanie ponad budżet staje się osobnym segmentem ``oversized``.
    """

    if L < 1:
        raise UsageError(f"--lengths: budget must be >= 1, got {L}")
    if budget_side not in BUDGET_SIDES:
        raise UsageError(f"--budget-side: unknown value {budget_side!r}")

    src_cost = _cost_function(doc.source, spec)
    tgt_cost = _cost_function(doc.target, spec)
    if budget_side == "max":
        cost = lambda a, b: max(src_cost(a, b), tgt_cost(a, b))  # noqa: E731
    else:
        cost = src_cost

    segments: List[SubDocument] = []

    def emit(start: int, end: int, oversized: bool) -> None:
        segments.append(
            SubDocument(
                doc_id=doc.doc_id,
                start=start,
                end=end,
                budget_L=L,
                src_tokens=src_cost(start, end),
                tgt_tokens=tgt_cost(start, end),
                oversized=oversized,
            )
        )

    n = len(doc)
    start = 0
    i = 0
    while i < n:
        if i == start:
            if cost(i, i + 1) > L:
                emit(i, i + 1, oversized=True)
                start = i + 1
            i += 1
            continue
        if cost(start, i + 1) <= L:
            i += 1
            continue
        emit(start, i, oversized=False)
        start = i
    if start < n:
        emit(start, n, oversized=False)

    return SegmentationPlan(doc.doc_id, L, tuple(segments))


def segment_corpus(
    corpus: Corpus,
    doc_ids: Iterable[str],
    lengths: Iterable[int],
    spec: TokenizerSpec = WHITESPACE,
    workers: int = 1,
    budget_side: str = SegmentConfig.budget_side,
) -> List[SegmentationPlan]:
    """Plany dla każdej pary (dokument, L), w kolejności dokumentów i rosnącego L."""

    jobs = [(corpus.get(d), L) for d in doc_ids for L in sorted(set(lengths))]
    if workers <= 1:
        return [segment_document(doc, L, spec, budget_side) for doc, L in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map zachowuje kolejność wejścia
        return list(pool.map(lambda job: segment_document(job[0], job[1], spec, budget_side), jobs))


def build_length_schedule(
    doc_ids: Sequence[str],
    lengths: Iterable[int] = DEFAULT_LENGTHS,
    strategy: str = SegmentConfig.strategy,
    seed: int = 0,
) -> Dict[str, List[int]]:
    """Przypisuje dokumentom budżety L.

    ``replicate``: każdy dokument dostaje każde L.
    ``partition``: dokumenty tasowane ziarnem i rozdawane po kolei (round-robin),
    więc każde L dostaje floor(N/|L|) albo ceil(N/|L|) dokumentów.
    """

    levels = sorted(set(lengths))
    if not levels:
        raise EmptyLengths("at least one length is required")
    if strategy not in STRATEGIES:
        raise UsageError(f"--strategy: unknown strategy {strategy!r}")

    if strategy == "replicate":
        return {d: list(levels) for d in doc_ids}

    assigned: Dict[str, int] = {}
    for i, doc_id in enumerate(shuffled(doc_ids, seed)):
        assigned[doc_id] = levels[i % len(levels)]
    return {d: [assigned[d]] for d in doc_ids}


def schedule_size(schedule: Dict[str, List[int]]) -> int:
    return sum(len(v) for v in schedule.values())


def save_plans_jsonl(plans: Iterable[SegmentationPlan], path: Optional[PathLike]) -> int:
    return write_jsonl((p.to_dict() for p in plans), path)


def load_plans_jsonl(path: PathLike) -> List[SegmentationPlan]:
    return [SegmentationPlan.from_dict(row) for row in iter_jsonl(path)]


def save_schedule(schedule: Dict[str, List[int]], path: Optional[PathLike]) -> None:
    save_json(schedule, path)


def load_schedule(path: PathLike) -> Dict[str, List[int]]:
    data = load_json(path)
    if not isinstance(data, dict):
        raise InvalidRecord(f"{path}: schedule must be a JSON object")
    try:
        return {str(k): [int(x) for x in v] for k, v in data.items()}
    except (TypeError, ValueError) as exc:
        raise InvalidRecord(f"{path}: malformed schedule: {exc}") from exc
