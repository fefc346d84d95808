"""Korpusy równoległe z granicami dokumentów, podział na zbiory i statystyki.

Format wejściowy: dwa pliki UTF-8 (źródło / cel), jedno zdanie na linię,
dokumenty rozdzielone dokładnie jedną pustą linią, puste linie w tych samych
miejscach w obu plikach.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from itertools import zip_longest
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .config import SplitConfig
from .errors import (
    BoundaryMismatch,
    CorpusTooSmall,
    DuplicateDocId,
    EmptySentence,
    InvalidRecord,
    LengthMismatch,
    ReservedPrefix,
    UnknownDocId,
)
from .io_utils import PathLike, iter_jsonl, load_json, render_aligned, rows_to_csv, save_json, write_jsonl
from .rng import shuffled

logger = logging.getLogger(__name__)

RESERVED_RE = re.compile(r"^#\d+")

# pula dev/test jest zawsze 10% korpusu
POOL_FRAC = 0.1


class LangPair(NamedTuple):
    source: str
    target: str

    def __str__(self) -> str:
        return f"{self.source}-{self.target}"


def _sentence_problem(sentence: str) -> Optional[str]:
    if not sentence:
        return "empty sentence"
    if "\n" in sentence or "\r" in sentence:
        return "sentence contains a newline"
    if RESERVED_RE.match(sentence):
        return "sentence starts with a reserved '#<digits>' separator"
    return None


@dataclass(frozen=True)
class ParallelDocument:
    doc_id: str
    lang_pair: LangPair
    source: Tuple[str, ...]
    target: Tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        object.__setattr__(self, "lang_pair", LangPair(*self.lang_pair))
        if not self.source:
            raise InvalidRecord(f"{self.doc_id}: document has no sentences")
        if len(self.source) != len(self.target):
            raise LengthMismatch(
                f"{self.doc_id}: {len(self.source)} source vs {len(self.target)} target sentences"
            )
        for side in (self.source, self.target):
            for i, sentence in enumerate(side):
                problem = _sentence_problem(sentence)
                if problem:
                    raise InvalidRecord(f"{self.doc_id}[{i}]: {problem}")

    def __len__(self) -> int:
        return len(self.source)

    def to_dict(self) -> Dict[str, object]:
        return {
            "doc_id": self.doc_id,
            "src_lang": self.lang_pair.source,
            "tgt_lang": self.lang_pair.target,
            "source": list(self.source),
            "target": list(self.target),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ParallelDocument":
        try:
            return cls(
                doc_id=str(data["doc_id"]),
                lang_pair=LangPair(str(data["src_lang"]), str(data["tgt_lang"])),
                source=tuple(data["source"]),  # type: ignore[arg-type]
                target=tuple(data["target"]),  # type: ignore[arg-type]
            )
        except KeyError as exc:
            raise InvalidRecord(f"document record is missing key {exc}") from exc


@dataclass(frozen=True)
class Corpus:
    documents: Tuple[ParallelDocument, ...]
    lang_pair: LangPair
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "documents", tuple(self.documents))
        object.__setattr__(self, "lang_pair", LangPair(*self.lang_pair))
        index: Dict[str, int] = {}
        for i, doc in enumerate(self.documents):
            if doc.doc_id in index:
                raise DuplicateDocId(doc.doc_id)
            if doc.lang_pair != self.lang_pair:
                raise InvalidRecord(
                    f"{doc.doc_id}: language pair {doc.lang_pair} differs from corpus {self.lang_pair}"
                )
            index[doc.doc_id] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[ParallelDocument]:
        return iter(self.documents)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._index

    @property
    def doc_ids(self) -> List[str]:
        return [d.doc_id for d in self.documents]

    def get(self, doc_id: str) -> ParallelDocument:
        try:
            return self.documents[self._index[doc_id]]
        except KeyError:
            raise UnknownDocId(doc_id) from None

    def subset(self, doc_ids: Iterable[str]) -> "Corpus":
        return Corpus(tuple(self.get(d) for d in doc_ids), self.lang_pair)

    @property
    def sentence_count(self) -> int:
        return sum(len(d) for d in self.documents)


@dataclass(frozen=True)
class DatasetSplit:
    train: Tuple[str, ...]
    dev: Tuple[str, ...]
    test: Tuple[str, ...]
    discarded: Tuple[str, ...]
    seed: int

    def __post_init__(self) -> None:
        for name in ("train", "dev", "test", "discarded"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def parts(self) -> Dict[str, Tuple[str, ...]]:
        return {"train": self.train, "dev": self.dev, "test": self.test, "discarded": self.discarded}

    def all_ids(self) -> List[str]:
        return [*self.train, *self.dev, *self.test, *self.discarded]

    def to_dict(self) -> Dict[str, object]:
        return {
            "seed": self.seed,
            "train": list(self.train),
            "dev": list(self.dev),
            "test": list(self.test),
            "discarded": list(self.discarded),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "DatasetSplit":
        try:
            return cls(
                train=tuple(data["train"]),  # type: ignore[arg-type]
                dev=tuple(data["dev"]),  # type: ignore[arg-type]
                test=tuple(data["test"]),  # type: ignore[arg-type]
                discarded=tuple(data["discarded"]),  # type: ignore[arg-type]
                seed=int(data["seed"]),  # type: ignore[arg-type]
            )
        except KeyError as exc:
            raise InvalidRecord(f"split file is missing key {exc}") from exc


# --- parsing ------------------------------------------------------------------


def _read_lines(path: PathLike) -> List[str]:
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    lines = [line.rstrip() for line in text.split("\n")]
    # końcowe puste linie (np. "\n" na końcu pliku) nie tworzą dokumentu
    while lines and lines[-1] == "":
        lines.pop()
    return lines


def _check_sentence(sentence: str, line_no: int) -> None:
    if RESERVED_RE.match(sentence):
        raise ReservedPrefix(line_no)


def parse_parallel_corpus(
    source_path: PathLike,
    target_path: PathLike,
    lang_pair: Tuple[str, str],
) -> Corpus:
    src_lines = _read_lines(source_path)
    tgt_lines = _read_lines(target_path)
    pair = LangPair(*lang_pair)

    documents: List[ParallelDocument] = []
    cur_src: List[str] = []
    cur_tgt: List[str] = []

    def close_document() -> None:
        doc_index = len(documents)
        if len(cur_src) != len(cur_tgt):
            raise LengthMismatch(
                f"document {doc_index}: {len(cur_src)} source vs {len(cur_tgt)} target sentences",
                index=doc_index,
            )
        documents.append(
            ParallelDocument(
                doc_id=f"d{doc_index:06d}",
                lang_pair=pair,
                source=tuple(cur_src),
                target=tuple(cur_tgt),
            )
        )
        cur_src.clear()
        cur_tgt.clear()

    prev_blank = True  # pusta linia na samym początku to też pusty dokument
    for line_no, (src, tgt) in enumerate(zip_longest(src_lines, tgt_lines), start=1):
        src_blank = src == ""
        tgt_blank = tgt == ""
        if src_blank != tgt_blank:
            raise BoundaryMismatch(line_no)
        if src_blank:
            if prev_blank:
                raise EmptySentence(line_no)
            close_document()
            prev_blank = True
            continue
        prev_blank = False
        if src is not None:
            _check_sentence(src, line_no)
            cur_src.append(src)
        if tgt is not None:
            _check_sentence(tgt, line_no)
            cur_tgt.append(tgt)

    if cur_src or cur_tgt:
        close_document()
    if not documents:
        raise EmptySentence(1)

    corpus = Corpus(tuple(documents), pair)
    logger.debug("Wczytano %d dokumentów (%d zdań) z %s", len(corpus), corpus.sentence_count, source_path)
    return corpus


def serialize_parallel_text(corpus: Corpus) -> Tuple[str, str]:
    """Odwrotność ``parse_parallel_corpus``: (tekst źródłowy, tekst docelowy)."""

    src = "\n\n".join("\n".join(d.source) for d in corpus) + "\n"
    tgt = "\n\n".join("\n".join(d.target) for d in corpus) + "\n"
    return src, tgt


def save_corpus_jsonl(corpus: Corpus, path: Optional[PathLike]) -> int:
    return write_jsonl((d.to_dict() for d in corpus), path)


def load_corpus_jsonl(path: PathLike) -> Corpus:
    documents = [ParallelDocument.from_dict(row) for row in iter_jsonl(path)]
    if not documents:
        raise InvalidRecord(f"{path}: corpus file has no documents")
    return Corpus(tuple(documents), documents[0].lang_pair)


# --- split --------------------------------------------------------------------


def _floor_frac(frac: float, n: int) -> int:
    return int(math.floor(frac * n + 1e-9))


def split_dataset(
    corpus: Corpus,
    seed: int,
    train_frac: float = SplitConfig.train_frac,
    dev_docs: int = SplitConfig.dev_docs,
    test_docs: int = SplitConfig.test_docs,
) -> DatasetSplit:
    """Tasuje dokumenty (splitmix64 + Fisher-Yates) i dzieli je na train/dev/test.

    80% trafia do train, dwie kolejne pule po 10% dają dev i test
    (po co najwyżej ``dev_docs`` / ``test_docs`` dokumentów), reszta
    ląduje w ``discarded``.
    """

    n = len(corpus)
    if n < 3:
        raise CorpusTooSmall(f"corpus has {n} documents, at least 3 are required")

    ids = shuffled(corpus.doc_ids, seed)
    n_train = _floor_frac(train_frac, n)
    n_pool = _floor_frac(POOL_FRAC, n)

    train = ids[:n_train]
    dev_pool = ids[n_train : n_train + n_pool]
    test_pool = ids[n_train + n_pool : n_train + 2 * n_pool]
    rest = ids[n_train + 2 * n_pool :]

    dev = dev_pool[: min(dev_docs, len(dev_pool))]
    test = test_pool[: min(test_docs, len(test_pool))]
    discarded = dev_pool[len(dev) :] + test_pool[len(test) :] + rest

    split = DatasetSplit(tuple(train), tuple(dev), tuple(test), tuple(discarded), seed)
    logger.debug(
        "Split seed=%d: train=%d dev=%d test=%d discarded=%d",
        seed, len(split.train), len(split.dev), len(split.test), len(split.discarded),
    )
    return split


def save_split(split: DatasetSplit, path: Optional[PathLike]) -> None:
    save_json(split.to_dict(), path)


def load_split(path: PathLike) -> DatasetSplit:
    return DatasetSplit.from_dict(load_json(path))


# --- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class StatsRow:
    split: str
    docs: int
    sentences: int


STATS_NAMES = (("train", "train"), ("dev", "valid"), ("test", "test"), ("discarded", "discarded"))


def corpus_stats(corpus: Corpus, split: DatasetSplit) -> List[StatsRow]:
    parts = split.parts()
    rows = []
    for key, label in STATS_NAMES:
        ids = parts[key]
        sentences = sum(len(corpus.get(d)) for d in ids)
        rows.append(StatsRow(split=label, docs=len(ids), sentences=sentences))
    return rows


def human_count(n: int) -> str:
    """342000 -> '342K', 6000 -> '6.0K', 150 -> '150'."""

    if n < 1000:
        return str(n)
    if n < 10000:
        return f"{n / 1000:.1f}K"
    return f"{round(n / 1000)}K"


def render_stats(rows: Sequence[StatsRow], lang_pair: Optional[LangPair] = None) -> str:
    header = ["split", "#DOC", "#SENT", "docs", "sentences"]
    body = [[r.split, human_count(r.docs), human_count(r.sentences), str(r.docs), str(r.sentences)] for r in rows]
    text = render_aligned(body, header)
    if lang_pair is not None:
        text = f"{lang_pair}\n{text}"
    return text


def stats_to_csv(rows: Sequence[StatsRow]) -> str:
    return rows_to_csv(
        [{"split": r.split, "docs": r.docs, "sentences": r.sentences} for r in rows],
        ["split", "docs", "sentences"],
    )
