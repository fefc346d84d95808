"""Instrukcje tłumaczeniowe: zdaniowe, dokumentowe (z separatorami ``#k``) i ich mieszanka.

Rekord JSONL ma klucze ``instruction`` / ``input`` / ``output`` / ``meta``
(jak w zbiorach typu Alpaca), a prompt renderowany jest w układzie
``### Instruction:`` / ``### Input:`` / ``### Response:`` z prefiksem ``text:``.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .config import MixConfig, SegmentConfig
from .corpus import Corpus, DatasetSplit, LangPair, ParallelDocument
from .errors import InvalidRecord, ScheduleReferencesNonTrainDoc, UnknownLanguageCode
from .io_utils import PathLike, iter_jsonl, load_json, write_jsonl
from .rng import derive_seed, shuffled
from .segment import SubDocument, segment_document
from .separators import SEPARATOR_RE, render_separated
from .tokenize import WHITESPACE, TokenizerSpec

logger = logging.getLogger(__name__)

SENT = "SENT"

LANGUAGE_NAMES: Dict[str, str] = {
    "ar": "Arabic",
    "cs": "Czech",
    "de": "German",
    "en": "English",
    "es": "Spanish",
    "fi": "Finnish",
    "fr": "French",
    "it": "Italian",
    "ja": "Japanese",
    "ko": "Korean",
    "nl": "Dutch",
    "pl": "Polish",
    "pt": "Portuguese",
    "ru": "Russian",
    "tr": "Turkish",
    "uk": "Ukrainian",
    "zh": "Chinese",
}

DEFAULT_HEADER = "Translate the following text from {src_lang} to {tgt_lang}."
DEFAULT_BODY = "### Instruction:\n{instruction}\n\n### Input:\n{input}\n\n### Response:\n{response_prefix}"
DEFAULT_RESPONSE_PREFIX = "text:"

_BODY_FIELD_RE = re.compile(r"\{(instruction|input|response_prefix)\}")


@dataclass(frozen=True)
class PromptTemplate:
    header: str = DEFAULT_HEADER
    response_prefix: str = DEFAULT_RESPONSE_PREFIX
    language_names: Mapping[str, str] = field(default_factory=lambda: dict(LANGUAGE_NAMES))
    body: str = DEFAULT_BODY

    def __post_init__(self) -> None:
        for placeholder in ("{src_lang}", "{tgt_lang}"):
            if placeholder not in self.header:
                raise InvalidRecord(f"template header lacks {placeholder}")
        if "{input}" not in self.body and "{input}" not in self.header:
            raise InvalidRecord("template lacks the {input} placeholder")

    def language_name(self, code: str) -> str:
        try:
            return self.language_names[code]
        except KeyError:
            raise UnknownLanguageCode(code) from None

    def instruction_for(self, lang_pair: Tuple[str, str]) -> str:
        src, tgt = lang_pair
        return self.header.replace("{src_lang}", self.language_name(src)).replace(
            "{tgt_lang}", self.language_name(tgt)
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "PromptTemplate":
        names = dict(LANGUAGE_NAMES)
        names.update(data.get("language_names", {}) or {})  # type: ignore[arg-type]
        return cls(
            header=str(data.get("header", DEFAULT_HEADER)),
            response_prefix=str(data.get("response_prefix", DEFAULT_RESPONSE_PREFIX)),
            language_names=names,
            body=str(data.get("body", DEFAULT_BODY)),
        )

    @classmethod
    def load(cls, path: PathLike) -> "PromptTemplate":
        data = load_json(path)
        if not isinstance(data, dict):
            raise InvalidRecord(f"{path}: template must be a JSON object")
        return cls.from_dict(data)


DEFAULT_TEMPLATE = PromptTemplate()


@dataclass(frozen=True)
class RecordMeta:
    doc_id: str
    L: Union[int, str]
    start: int
    end: int

    @property
    def is_sentence(self) -> bool:
        return self.L == SENT

    def to_dict(self) -> Dict[str, object]:
        return {"doc_id": self.doc_id, "L": self.L, "start": self.start, "end": self.end}


def separator_indices(text: str) -> List[int]:
    return [int(m.group(1)) for m in SEPARATOR_RE.finditer(text)]


@dataclass(frozen=True)
class InstructionRecord:
    instruction: str
    input: str
    output: str
    meta: RecordMeta

    def __post_init__(self) -> None:
        for name in ("instruction", "input", "output"):
            if not getattr(self, name):
                raise InvalidRecord(f"{self.meta.doc_id}: record field {name!r} is empty")
        if not self.meta.is_sentence:
            expected = list(range(1, self.meta.end - self.meta.start + 1))
            if separator_indices(self.input) != expected or separator_indices(self.output) != expected:
                raise InvalidRecord(
                    f"{self.meta.doc_id}[{self.meta.start}:{self.meta.end}]: "
                    "separator sequence is not #1..#n on both sides"
                )

    def to_dict(self) -> Dict[str, object]:
        return {
            "instruction": self.instruction,
            "input": self.input,
            "output": self.output,
            "meta": self.meta.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "InstructionRecord":
        try:
            meta = data["meta"]
            length = meta["L"]  # type: ignore[index]
            return cls(
                instruction=str(data["instruction"]),
                input=str(data["input"]),
                output=str(data["output"]),
                meta=RecordMeta(
                    doc_id=str(meta["doc_id"]),  # type: ignore[index]
                    L=SENT if length == SENT else int(length),  # type: ignore[arg-type]
                    start=int(meta["start"]),  # type: ignore[index]
                    end=int(meta["end"]),  # type: ignore[index]
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidRecord(f"malformed instruction record: {exc}") from exc


def render_sentence_instruction(
    src: str,
    tgt: str,
    lang_pair: Tuple[str, str],
    template: PromptTemplate = DEFAULT_TEMPLATE,
    *,
    doc_id: str = "",
    index: int = 0,
) -> InstructionRecord:
    return InstructionRecord(
        instruction=template.instruction_for(lang_pair),
        input=src,
        output=tgt,
        meta=RecordMeta(doc_id=doc_id, L=SENT, start=index, end=index + 1),
    )


def render_document_instruction(
    doc: ParallelDocument,
    seg: SubDocument,
    lang_pair: Optional[Tuple[str, str]] = None,
    template: PromptTemplate = DEFAULT_TEMPLATE,
) -> InstructionRecord:
    """Pod-dokument -> "#1 s1 #2 s2 ... #n sn" po obu stronach."""

    if seg.doc_id != doc.doc_id or seg.end > len(doc):
        raise InvalidRecord(f"segment {seg.doc_id}[{seg.start}:{seg.end}] does not fit document {doc.doc_id}")
    return InstructionRecord(
        instruction=template.instruction_for(lang_pair or doc.lang_pair),
        input=render_separated(doc.source[seg.start : seg.end]),
        output=render_separated(doc.target[seg.start : seg.end]),
        meta=RecordMeta(doc_id=doc.doc_id, L=seg.budget_L, start=seg.start, end=seg.end),
    )


def render_prompt(record: InstructionRecord, template: PromptTemplate = DEFAULT_TEMPLATE) -> str:
    values = {
        "instruction": record.instruction,
        "input": record.input,
        "response_prefix": template.response_prefix,
    }
    return _BODY_FIELD_RE.sub(lambda m: values[m.group(1)], template.body)


def _has_separator_token(sentences: Sequence[str]) -> bool:
    return any(SEPARATOR_RE.search(s) for s in sentences)


def _clashes(doc: ParallelDocument, start: int, end: int) -> bool:
    """Zdanie z tokenem ``#<liczba>`` w środku psuje numerację ``#1..#n`` rekordu."""

    return _has_separator_token(doc.source[start:end]) or _has_separator_token(doc.target[start:end])


def _render_plan(
    doc: ParallelDocument, segments: Iterable[SubDocument], lang_pair: LangPair, template: PromptTemplate
) -> Tuple[List[InstructionRecord], int]:
    records: List[InstructionRecord] = []
    skipped = 0
    for seg in segments:
        if _clashes(doc, seg.start, seg.end):
            logger.debug("Pominięto %s[%d:%d]: token '#<liczba>' wewnątrz zdania", doc.doc_id, seg.start, seg.end)
            skipped += 1
            continue
        records.append(render_document_instruction(doc, seg, lang_pair, template))
    return records, skipped


def _sentence_records(
    doc: ParallelDocument, lang_pair: LangPair, template: PromptTemplate
) -> List[InstructionRecord]:
    return [
        render_sentence_instruction(s, t, lang_pair, template, doc_id=doc.doc_id, index=i)
        for i, (s, t) in enumerate(zip(doc.source, doc.target))
    ]


def _document_records(
    corpus: Corpus,
    jobs: Sequence[Tuple[str, int]],
    spec: TokenizerSpec,
    template: PromptTemplate,
    budget_side: str,
    workers: int,
) -> List[InstructionRecord]:
    def render(job: Tuple[str, int]) -> Tuple[List[InstructionRecord], int]:
        doc = corpus.get(job[0])
        plan = segment_document(doc, job[1], spec, budget_side)
        return _render_plan(doc, plan.segments, corpus.lang_pair, template)

    if workers <= 1:
        chunks = [render(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(render, jobs))
    skipped = sum(n for _, n in chunks)
    if skipped:
        logger.warning("Pominięto %d pod-dokumentów z tokenem '#<liczba>' wewnątrz zdania", skipped)
    return [record for chunk, _ in chunks for record in chunk]


def assemble_mixed(
    corpus: Corpus,
    split: DatasetSplit,
    schedule: Mapping[str, Sequence[int]],
    *,
    spec: TokenizerSpec = WHITESPACE,
    template: PromptTemplate = DEFAULT_TEMPLATE,
    include_sentence_level: bool = MixConfig.include_sentence_level,
    sentence_budget: Optional[int] = MixConfig.sentence_budget,
    sentence_docs: Optional[int] = MixConfig.sentence_docs,
    doc_budget: Optional[int] = MixConfig.doc_budget,
    seed: int = 0,
    budget_side: str = SegmentConfig.budget_side,
    workers: int = 1,
) -> List[InstructionRecord]:
    """Mieszanka instrukcji: dokumentowe dla każdej pary (dokument, L) z harmonogramu
    plus zdaniowe z dokumentów treningowych, całość przetasowana ziarnem.

    ``sentence_budget`` ogranicza liczbę rekordów zdaniowych, ``sentence_docs`` liczbę
    dokumentów zamienianych na rekordy zdaniowe, ``doc_budget`` liczbę dokumentów
    dających rekordy dokumentowe (``None`` = bez limitu).
    """

    train = set(split.train)
    for doc_id in schedule:
        if doc_id not in train:
            raise ScheduleReferencesNonTrainDoc(doc_id)

    doc_ids = list(schedule)
    if doc_budget is not None:
        keep = set(shuffled(doc_ids, derive_seed(seed, 1))[:doc_budget])
        doc_ids = [d for d in doc_ids if d in keep]
    jobs = [(d, L) for d in doc_ids for L in schedule[d]]
    records = _document_records(corpus, jobs, spec, template, budget_side, workers)
    n_doc = len(records)

    n_sent = 0
    if include_sentence_level and sentence_budget != 0:
        sent_ids = list(split.train)
        if sentence_docs is not None:
            keep = set(shuffled(sent_ids, derive_seed(seed, 2))[:sentence_docs])
            sent_ids = [d for d in sent_ids if d in keep]
        sentence_records = [
            r for d in sent_ids for r in _sentence_records(corpus.get(d), corpus.lang_pair, template)
        ]
        if sentence_budget is not None:
            sentence_records = shuffled(sentence_records, derive_seed(seed, 3))[:sentence_budget]
        records.extend(sentence_records)
        n_sent = len(sentence_records)

    logger.info("Instrukcje: %d dokumentowych, %d zdaniowych", n_doc, n_sent)
    return shuffled(records, seed)


def build_eval_inputs(
    corpus: Corpus,
    doc_ids: Iterable[str],
    length: Union[int, str],
    spec: TokenizerSpec = WHITESPACE,
    template: PromptTemplate = DEFAULT_TEMPLATE,
    budget_side: str = SegmentConfig.budget_side,
) -> List[InstructionRecord]:
    """Wejścia do ewaluacji: dokumenty testowe pocięte na pod-dokumenty o budżecie
    ``length`` albo na pojedyncze zdania (``"SENT"``); ``output`` to referencja."""

    records: List[InstructionRecord] = []
    skipped: List[str] = []
    for doc_id in doc_ids:
        doc = corpus.get(doc_id)
        if length == SENT:
            records.extend(_sentence_records(doc, corpus.lang_pair, template))
            continue
        # pomijany cały dokument, nie pojedyncze segmenty
        if _clashes(doc, 0, len(doc)):
            skipped.append(doc_id)
            continue
        plan = segment_document(doc, int(length), spec, budget_side)
        records.extend(render_document_instruction(doc, seg, corpus.lang_pair, template) for seg in plan.segments)
    if skipped:
        logger.warning(
            "Pominięto %d dokumentów z tokenem '#<liczba>' wewnątrz zdania: %s", len(skipped), ", ".join(skipped)
        )
    return records


def save_records_jsonl(records: Iterable[InstructionRecord], path: Optional[PathLike]) -> int:
    return write_jsonl((r.to_dict() for r in records), path)


def load_records_jsonl(path: PathLike) -> List[InstructionRecord]:
    return [InstructionRecord.from_dict(row) for row in iter_jsonl(path)]
