"""s-BLEU, d-BLEU, odzyskiwanie zdań po separatorach, pokrycie zdań i TCP.

BLEU liczone jest korpusowo, z jedną referencją na segment, z zachowaniem
wielkości liter. Domyślnie bez wygładzania: zerowa precyzja dowolnego rzędu
daje wynik 0. Jeżeli w żadnej hipotezie nie ma n-gramów danego rzędu, efektywny
maksymalny rząd jest obcinany do najdłuższej hipotezy. Liczniki n-gramów są
liczone tutaj, wynik końcowy składa ``sacrebleu.metrics.BLEU.compute_bleu``
(wygładzanie add-k dotyczy tylko rzędów n > 1).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from sacrebleu.metrics import BLEU

from .corpus import Corpus
from .errors import EmptyCorpus, EmptyInput, InvalidRecord, LengthMismatch, NonPositiveInput, UsageError
from .instruct import SENT
from .io_utils import PathLike, iter_jsonl, write_jsonl
from .separators import SEPARATOR_RE, strip_separators
from .tokenize import WHITESPACE, TokenizerSpec, tokenize

logger = logging.getLogger(__name__)

Tokens = Iterable[str]


@dataclass(frozen=True)
class Smoothing:
    kind: str = "none"  # "none" | "add_k"
    k: float = 1.0

    def __post_init__(self) -> None:
        kind = self.kind.replace("-", "_")
        if kind not in ("none", "add_k"):
            raise UsageError(f"--smoothing: unknown smoothing {self.kind!r}")
        object.__setattr__(self, "kind", kind)


NO_SMOOTHING = Smoothing()


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: Tuple[float, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    order: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "score": self.score,
            "precisions": list(self.precisions),
            "brevity_penalty": self.brevity_penalty,
            "hyp_len": self.hyp_len,
            "ref_len": self.ref_len,
            "order": self.order,
        }

    def __str__(self) -> str:
        prec = "/".join(f"{100 * p:.1f}" for p in self.precisions)
        return (
            f"BLEU = {self.score:.2f} {prec} "
            f"(BP = {self.brevity_penalty:.3f} hyp_len = {self.hyp_len} ref_len = {self.ref_len})"
        )


def _ngram_counts(tokens: Sequence[str], max_n: int) -> Counter:
    counts: Counter = Counter()
    for n in range(1, max_n + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def corpus_bleu(
    hyps: Sequence[Tokens],
    refs: Sequence[Tokens],
    max_n: int = 4,
    smoothing: Smoothing = NO_SMOOTHING,
) -> BleuScore:
    if len(hyps) != len(refs):
        raise LengthMismatch(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if not hyps:
        raise EmptyCorpus("BLEU needs at least one segment")

    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h = tuple(hyp)
        r = tuple(ref)
        hyp_len += len(h)
        ref_len += len(r)
        overlap = _ngram_counts(h, max_n) & _ngram_counts(r, max_n)
        for ngram, count in overlap.items():
            matches[len(ngram) - 1] += count
        for n in range(1, max_n + 1):
            totals[n - 1] += max(0, len(h) - n + 1)

    # rzędy bez żadnego n-gramu w hipotezach nie wchodzą do średniej
    order = max((n for n in range(1, max_n + 1) if totals[n - 1] > 0), default=0)
    if order == 0:
        return BleuScore(
            score=100.0 if ref_len == 0 else 0.0,
            precisions=(0.0,) * max_n,
            brevity_penalty=1.0 if ref_len == 0 else 0.0,
            hyp_len=hyp_len,
            ref_len=ref_len,
            order=0,
        )

    result = BLEU.compute_bleu(
        matches,
        totals,
        hyp_len,
        ref_len,
        smooth_method="add-k" if smoothing.kind == "add_k" else "none",
        smooth_value=smoothing.k if smoothing.kind == "add_k" else None,
        effective_order=True,
        max_ngram_order=max_n,
    )
    return BleuScore(
        # exp(log(100)) != 100.0 w arytmetyce float
        score=round(result.score, 10),
        precisions=tuple(p / 100.0 for p in result.precisions),
        brevity_penalty=result.bp,
        hyp_len=hyp_len,
        ref_len=ref_len,
        order=order,
    )


def sbleu(
    hyps: Sequence[str],
    refs: Sequence[str],
    spec: TokenizerSpec = WHITESPACE,
    max_n: int = 4,
    smoothing: Smoothing = NO_SMOOTHING,
) -> BleuScore:
    return corpus_bleu(
        [tokenize(h, spec) for h in hyps],
        [tokenize(r, spec) for r in refs],
        max_n=max_n,
        smoothing=smoothing,
    )


def dbleu(
    doc_hyps: Sequence[str],
    doc_refs: Sequence[str],
    spec: TokenizerSpec = WHITESPACE,
    max_n: int = 4,
    smoothing: Smoothing = NO_SMOOTHING,
) -> BleuScore:
    """BLEU po całych dokumentach, po usunięciu separatorów ``#k`` z obu stron."""

    if len(doc_hyps) != len(doc_refs):
        raise LengthMismatch(f"{len(doc_hyps)} hypothesis documents vs {len(doc_refs)} reference documents")
    return corpus_bleu(
        [tokenize(strip_separators(h), spec) for h in doc_hyps],
        [tokenize(strip_separators(r), spec) for r in doc_refs],
        max_n=max_n,
        smoothing=smoothing,
    )


# --- sentence recovery & coverage ------------------------------------------------


def recover_sentences(generated: str, expected: int) -> Dict[int, str]:
    """Wyciąga zdania z wygenerowanego dokumentu po separatorach ``#1 .. #expected``.

    Akceptujemy tylko separatory o rosnących indeksach z zakresu 1..expected;
    duplikaty, cofnięcia i indeksy > expected zostają zwykłym tekstem
    poprzedniego zdania. Brakujące indeksy nie trafiają do wyniku.
    """

    if expected < 1:
        raise InvalidRecord(f"expected sentence count must be >= 1, got {expected}")

    accepted = []
    last = 0
    for m in SEPARATOR_RE.finditer(generated):
        k = int(m.group(1))
        if last < k <= expected:
            accepted.append((k, m))
            last = k

    recovered: Dict[int, str] = {}
    for i, (k, m) in enumerate(accepted):
        stop = accepted[i + 1][1].start() if i + 1 < len(accepted) else len(generated)
        recovered[k] = generated[m.end() : stop].strip()
    return recovered


@dataclass(frozen=True)
class Hypothesis:
    """Jedna jednostka generacji: cały dokument, pod-dokument albo zdanie (L = "SENT")."""

    doc_id: str
    generated: str
    expected: Optional[int] = None
    L: Union[int, str, None] = None
    start: Optional[int] = None
    end: Optional[int] = None

    @property
    def is_sentence(self) -> bool:
        return self.L == SENT

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"doc_id": self.doc_id}
        for key in ("L", "start", "end", "expected"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        data["generated"] = self.generated
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Hypothesis":
        try:
            length = data.get("L")
            return cls(
                doc_id=str(data["doc_id"]),
                generated=str(data["generated"]),
                expected=None if data.get("expected") is None else int(data["expected"]),
                L=length if length in (None, SENT) else int(length),
                start=None if data.get("start") is None else int(data["start"]),
                end=None if data.get("end") is None else int(data["end"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidRecord(f"malformed hypothesis record: {exc}") from exc

    def resolved(self, corpus: Corpus) -> "Hypothesis":
        """Uzupełnia start/end/expected na podstawie dokumentu z korpusu."""

        n = len(corpus.get(self.doc_id))
        start = self.start if self.start is not None else 0
        end = self.end if self.end is not None else (start + 1 if self.is_sentence else n)
        if not 0 <= start < end <= n:
            raise InvalidRecord(f"{self.doc_id}: range [{start}, {end}) outside document of {n} sentences")
        expected = self.expected if self.expected is not None else end - start
        if expected != end - start:
            raise LengthMismatch(f"{self.doc_id}[{start}:{end}]: expected={expected} does not match range")
        return Hypothesis(self.doc_id, self.generated, expected, self.L, start, end)


def _recover_unit(hyp: Hypothesis, expected: int) -> Dict[int, str]:
    if hyp.is_sentence:
        text = hyp.generated.strip()
        return {1: text} if text else {}
    return recover_sentences(hyp.generated, expected)


@dataclass(frozen=True)
class CoverageEntry:
    doc_id: str
    expected: int
    recovered: Tuple[int, ...]
    missing: Tuple[int, ...]
    L: Union[int, str, None] = None
    start: Optional[int] = None

    @property
    def full(self) -> bool:
        return not self.missing

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "doc_id": self.doc_id,
            "expected": self.expected,
            "recovered": list(self.recovered),
            "missing": list(self.missing),
            "full": self.full,
        }
        if self.L is not None:
            data["L"] = self.L
        if self.start is not None:
            data["start"] = self.start
        return data


@dataclass(frozen=True)
class CoverageReport:
    per_doc: Tuple[CoverageEntry, ...]
    corpus_accuracy: float

    @property
    def full_count(self) -> int:
        return sum(1 for e in self.per_doc if e.full)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "corpus_accuracy": self.corpus_accuracy,
            "documents": len(self.per_doc),
            "full": self.full_count,
            "per_doc": [e.to_dict() for e in self.per_doc],
        }


def _as_hypothesis(item: Union[Hypothesis, Mapping[str, Any]]) -> Hypothesis:
    return item if isinstance(item, Hypothesis) else Hypothesis.from_dict(item)


def coverage(outputs: Sequence[Union[Hypothesis, Mapping[str, Any]]]) -> CoverageReport:
    if not outputs:
        raise EmptyInput("coverage needs at least one output")

    entries: List[CoverageEntry] = []
    for item in outputs:
        hyp = _as_hypothesis(item)
        if hyp.expected is None:
            raise InvalidRecord(f"{hyp.doc_id}: output lacks the expected sentence count")
        recovered = _recover_unit(hyp, hyp.expected)
        found = tuple(sorted(recovered))
        missing = tuple(k for k in range(1, hyp.expected + 1) if k not in recovered)
        entries.append(CoverageEntry(hyp.doc_id, hyp.expected, found, missing, hyp.L, hyp.start))

    full = np.array([e.full for e in entries], dtype=bool)
    accuracy = 100.0 * int(np.count_nonzero(full)) / len(entries)
    return CoverageReport(tuple(entries), accuracy)


def _length_key(value: Union[int, str, None]) -> Tuple[int, int]:
    if value == SENT:
        return (0, 0)
    if value is None:
        return (2, 0)
    return (1, int(value))


def coverage_by_length(outputs: Sequence[Union[Hypothesis, Mapping[str, Any]]]) -> Dict[Union[int, str, None], CoverageReport]:
    groups: Dict[Union[int, str, None], List[Hypothesis]] = {}
    for item in outputs:
        hyp = _as_hypothesis(item)
        groups.setdefault(hyp.L, []).append(hyp)
    return {key: coverage(groups[key]) for key in sorted(groups, key=_length_key)}


# --- composition with the corpus ---------------------------------------------------


def sbleu_from_documents(
    doc_outputs: Sequence[Union[Hypothesis, Mapping[str, Any]]],
    refs_per_sentence: Sequence[Sequence[str]],
    spec: TokenizerSpec = WHITESPACE,
    max_n: int = 4,
    smoothing: Smoothing = NO_SMOOTHING,
) -> BleuScore:
    """s-BLEU z wygenerowanych dokumentów: zdanie k parowane z referencją k,
    zdania nieodzyskane liczą się jako puste hipotezy."""

    if len(doc_outputs) != len(refs_per_sentence):
        raise LengthMismatch(f"{len(doc_outputs)} outputs vs {len(refs_per_sentence)} reference groups")

    hyps: List[str] = []
    refs: List[str] = []
    for item, sentences in zip(doc_outputs, refs_per_sentence):
        hyp = _as_hypothesis(item)
        n = len(sentences)
        if hyp.expected is not None and hyp.expected != n:
            raise LengthMismatch(f"{hyp.doc_id}: expected={hyp.expected} but {n} reference sentences")
        recovered = _recover_unit(hyp, n)
        for k in range(1, n + 1):
            hyps.append(recovered.get(k, ""))
            refs.append(sentences[k - 1])
    return sbleu(hyps, refs, spec, max_n=max_n, smoothing=smoothing)


def restore_documents(outputs: Iterable[Union[Hypothesis, Mapping[str, Any]]]) -> Dict[str, str]:
    """Składa wyniki pod-dokumentów (i zdań) z powrotem w pełne dokumenty, bez separatorów."""

    units: Dict[str, List[Hypothesis]] = {}
    for item in outputs:
        hyp = _as_hypothesis(item)
        units.setdefault(hyp.doc_id, []).append(hyp)

    restored: Dict[str, str] = {}
    for doc_id, parts in units.items():
        parts = sorted(parts, key=lambda h: h.start if h.start is not None else 0)
        # jednostki jednego dokumentu nie mogą się nakładać (np. wyniki dla dwóch różnych L)
        for prev, cur in zip(parts, parts[1:]):
            if prev.end is None or cur.start is None or cur.start < prev.end:
                raise InvalidRecord(f"{doc_id}: overlapping or unbounded generation units, restore one L at a time")
        texts = [strip_separators(h.generated) for h in parts]
        restored[doc_id] = " ".join(t for t in texts if t)
    return restored


def resolve_hypotheses(outputs: Iterable[Union[Hypothesis, Mapping[str, Any]]], corpus: Corpus) -> List[Hypothesis]:
    return [_as_hypothesis(item).resolved(corpus) for item in outputs]


def sbleu_for_corpus(
    outputs: Sequence[Union[Hypothesis, Mapping[str, Any]]],
    corpus: Corpus,
    spec: TokenizerSpec = WHITESPACE,
    max_n: int = 4,
    smoothing: Smoothing = NO_SMOOTHING,
) -> BleuScore:
    hyps = resolve_hypotheses(outputs, corpus)
    refs = [corpus.get(h.doc_id).target[h.start : h.end] for h in hyps]
    return sbleu_from_documents(hyps, refs, spec, max_n=max_n, smoothing=smoothing)


def dbleu_for_corpus(
    outputs: Sequence[Union[Hypothesis, Mapping[str, Any]]],
    corpus: Corpus,
    spec: TokenizerSpec = WHITESPACE,
    max_n: int = 4,
    smoothing: Smoothing = NO_SMOOTHING,
) -> BleuScore:
    restored = restore_documents(outputs)
    refs = [" ".join(corpus.get(doc_id).target) for doc_id in restored]
    return dbleu(list(restored.values()), refs, spec, max_n=max_n, smoothing=smoothing)


def save_hypotheses_jsonl(hyps: Iterable[Hypothesis], path: Optional[PathLike]) -> int:
    return write_jsonl((h.to_dict() for h in hyps), path)


def load_hypotheses_jsonl(path: PathLike) -> List[Hypothesis]:
    return [Hypothesis.from_dict(row) for row in iter_jsonl(path)]


# --- discourse ----------------------------------------------------------------


@dataclass(frozen=True)
class DiscourseScores:
    tc: float
    cp: float
    pt: float
    tcp: float

    def to_dict(self) -> Dict[str, float]:
        return {"tc": self.tc, "cp": self.cp, "pt": self.pt, "tcp": self.tcp}


def discourse_scores(tc: float, cp: float, pt: float) -> DiscourseScores:
    for name, value in (("tc", tc), ("cp", cp), ("pt", pt)):
        if not value > 0:
            raise NonPositiveInput(name, value)
    # sortowanie: wynik nie zależy od kolejności argumentów
    value = float(np.cbrt(np.prod(sorted((tc, cp, pt)))))
    return DiscourseScores(tc=tc, cp=cp, pt=pt, tcp=value)


def tcp(tc: float, cp: float, pt: float) -> float:
    """Średnia geometryczna TC, CP i PT, zaokrąglona do 0.1."""

    return round(discourse_scores(tc, cp, pt).tcp, 1)
