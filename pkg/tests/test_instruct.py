from __future__ import annotations

import json
import random

import pytest

from conftest import build_corpus
from dmi.corpus import Corpus, DatasetSplit, LangPair, ParallelDocument, split_dataset
from dmi.errors import InvalidRecord, ScheduleReferencesNonTrainDoc, UnknownLanguageCode
from dmi.instruct import (
    DEFAULT_TEMPLATE,
    SENT,
    InstructionRecord,
    PromptTemplate,
    RecordMeta,
    assemble_mixed,
    build_eval_inputs,
    load_records_jsonl,
    render_document_instruction,
    render_prompt,
    render_sentence_instruction,
    save_records_jsonl,
)
from dmi.metrics import recover_sentences
from dmi.segment import SubDocument, build_length_schedule, segment_document


def _dump(records):
    return "\n".join(json.dumps(r.to_dict(), ensure_ascii=False) for r in records)


def test_sentence_instruction_en_fr():
    record = render_sentence_instruction(
        "I am happy to meet you.", "Je suis heureux de te rencontrer.", ("en", "fr")
    )
    assert record.instruction == "Translate the following text from English to French."
    assert record.input == "I am happy to meet you."
    assert record.output == "Je suis heureux de te rencontrer."
    assert record.meta.L == SENT


def test_sentence_instruction_rejects_empty_source():
    with pytest.raises(InvalidRecord):
        render_sentence_instruction("", "x", ("en", "fr"))


def test_unknown_language_code():
    with pytest.raises(UnknownLanguageCode):
        render_sentence_instruction("a", "b", ("en", "xx"))


def test_custom_language_names():
    template = PromptTemplate.from_dict({"language_names": {"xx": "Klingon"}})
    record = render_sentence_instruction("a", "b", ("en", "xx"), template)
    assert record.instruction.endswith("from English to Klingon.")


def test_record_serialization_round_trip():
    record = render_sentence_instruction("a", "b", ("de", "en"), doc_id="d000004", index=2)
    assert InstructionRecord.from_dict(json.loads(json.dumps(record.to_dict()))) == record
    assert record.to_dict()["meta"] == {"doc_id": "d000004", "L": "SENT", "start": 2, "end": 3}


def test_document_instruction_separators():
    doc = ParallelDocument("d", LangPair("en", "de"), ("a", "b", "c"), ("A", "B", "C"))
    seg = SubDocument("d", start=1, end=3, budget_L=512, src_tokens=4, tgt_tokens=4)
    record = render_document_instruction(doc, seg)
    assert record.input == "#1 b #2 c"
    assert record.output == "#1 B #2 C"
    assert record.meta == RecordMeta("d", 512, 1, 3)


def test_single_sentence_segment_keeps_separator():
    doc = ParallelDocument("d", LangPair("en", "de"), ("a",), ("A",))
    seg = SubDocument("d", 0, 1, 512, 2, 2)
    doc_record = render_document_instruction(doc, seg)
    sent_record = render_sentence_instruction("a", "A", ("en", "de"))
    assert doc_record.input == "#1 a"
    assert doc_record.input == "#1 " + sent_record.input
    assert doc_record.output == "#1 " + sent_record.output
    assert doc_record.instruction == sent_record.instruction


def test_segment_must_fit_document():
    doc = ParallelDocument("d", LangPair("en", "de"), ("a",), ("A",))
    with pytest.raises(InvalidRecord):
        render_document_instruction(doc, SubDocument("other", 0, 1, 512, 2, 2))


def test_document_record_checks_separator_sequence():
    meta = RecordMeta("d", 512, 0, 2)
    with pytest.raises(InvalidRecord):
        InstructionRecord("t", "#1 a #3 b", "#1 A #2 B", meta)
    with pytest.raises(InvalidRecord):
        InstructionRecord("t", "#1 a #2 b", "#1 A", meta)


def test_separator_round_trip_random_segments():
    rng = random.Random(0)
    for i in range(10000):
        n = rng.randint(1, 8)
        src, tgt = [], []
        for _ in range(n):
            words = ["".join(rng.choice("xyz") for _ in range(rng.randint(1, 4))) for _ in range(rng.randint(1, 5))]
            src.append(" ".join(words))
            extra = " C#5" if rng.random() < 0.2 else ""
            tgt.append(" ".join(w.upper() for w in words) + extra)
        doc = ParallelDocument(f"d{i}", LangPair("en", "de"), tuple(src), tuple(tgt))
        record = render_document_instruction(doc, SubDocument(doc.doc_id, 0, n, 10**6, 1, 1))
        recovered = recover_sentences(record.output, n)
        assert recovered == {k: t for k, t in enumerate(tgt, start=1)}


# --- prompt -------------------------------------------------------------------


def test_render_prompt_default_layout():
    record = render_sentence_instruction("x", "y", ("en", "de"))
    prompt = render_prompt(record)
    assert prompt == (
        "### Instruction:\nTranslate the following text from English to German.\n\n"
        "### Input:\nx\n\n### Response:\ntext:"
    )
    assert prompt.count("### Instruction:") == 1
    assert prompt.endswith(DEFAULT_TEMPLATE.response_prefix)


def test_render_prompt_empty_prefix():
    template = PromptTemplate(response_prefix="")
    record = render_sentence_instruction("x", "y", ("en", "de"), template)
    assert render_prompt(record, template).endswith("### Response:\n")


def test_render_prompt_does_not_expand_braces_in_input():
    record = render_sentence_instruction("{instruction} {input}", "y", ("en", "de"))
    prompt = render_prompt(record)
    assert "### Input:\n{instruction} {input}\n" in prompt


def test_template_validation(tmp_path):
    with pytest.raises(InvalidRecord):
        PromptTemplate(header="Translate to {tgt_lang}.")
    with pytest.raises(InvalidRecord):
        PromptTemplate(body="### Instruction:\n{instruction}")
    path = tmp_path / "template.json"
    path.write_text(json.dumps({"header": "From {src_lang} into {tgt_lang}:", "response_prefix": ""}), encoding="utf-8")
    template = PromptTemplate.load(path)
    assert template.instruction_for(("pl", "en")) == "From Polish into English:"


# --- assembly -----------------------------------------------------------------


def _one_doc_setup():
    corpus = build_corpus(1, sentences=2)
    split = DatasetSplit(train=("d000000",), dev=(), test=(), discarded=(), seed=0)
    return corpus, split


def test_assemble_counts_one_doc():
    corpus, split = _one_doc_setup()
    records = assemble_mixed(corpus, split, {"d000000": [512]})
    assert len(records) == 3
    assert sorted(str(r.meta.L) for r in records) == ["512", SENT, SENT]


def test_assemble_sentence_budget_zero():
    corpus, split = _one_doc_setup()
    records = assemble_mixed(corpus, split, {"d000000": [512]}, include_sentence_level=True, sentence_budget=0)
    assert [r.meta.L for r in records] == [512]


def test_assemble_without_sentence_level():
    corpus, split = _one_doc_setup()
    records = assemble_mixed(corpus, split, {"d000000": [512]}, include_sentence_level=False)
    assert len(records) == 1


def test_assemble_rejects_non_train_schedule():
    corpus = build_corpus(20)
    split = split_dataset(corpus, seed=0)
    with pytest.raises(ScheduleReferencesNonTrainDoc):
        assemble_mixed(corpus, split, {split.test[0]: [512]})


def test_assemble_seed_stability():
    corpus = build_corpus(40, sentences=(1, 3, 6), seed=1)
    split = split_dataset(corpus, seed=0)
    schedule = build_length_schedule(list(split.train), [8, 16, 32], "replicate")
    a = _dump(assemble_mixed(corpus, split, schedule, seed=3))
    b = _dump(assemble_mixed(corpus, split, schedule, seed=3, workers=3))
    c = _dump(assemble_mixed(corpus, split, schedule, seed=4))
    assert a == b
    assert a != c
    assert sorted(a.splitlines()) == sorted(c.splitlines())


def test_assemble_count_matches_plans():
    corpus = build_corpus(30, sentences=(1, 2, 7), seed=6)
    split = split_dataset(corpus, seed=2)
    schedule = build_length_schedule(list(split.train), [8, 24], "partition", seed=5)
    records = assemble_mixed(corpus, split, schedule, seed=1)
    n_segments = sum(len(segment_document(corpus.get(d), L).segments) for d, Ls in schedule.items() for L in Ls)
    n_sentences = sum(len(corpus.get(d)) for d in split.train)
    assert len(records) == n_segments + n_sentences


def test_assemble_budgets():
    corpus = build_corpus(30, sentences=3, seed=6)
    split = split_dataset(corpus, seed=2)
    schedule = build_length_schedule(list(split.train), [1000], "replicate")

    capped = assemble_mixed(corpus, split, schedule, sentence_budget=5)
    assert sum(1 for r in capped if r.meta.L == SENT) == 5

    by_docs = assemble_mixed(corpus, split, schedule, sentence_docs=4)
    assert len({r.meta.doc_id for r in by_docs if r.meta.L == SENT}) == 4

    sentence_only = assemble_mixed(corpus, split, schedule, doc_budget=0)
    assert all(r.meta.L == SENT for r in sentence_only)

    few_docs = assemble_mixed(corpus, split, schedule, doc_budget=2, include_sentence_level=False)
    assert len({r.meta.doc_id for r in few_docs}) == 2


def _room_number_corpus():
    pair = LangPair("en", "de")
    docs = (
        ParallelDocument("d0", pair, ("Meet in room #2 today", "ok"), ("Treffen in Raum #2 heute", "ok")),
        ParallelDocument("d1", pair, ("a b", "c d"), ("A B", "C D")),
    )
    return Corpus(docs, pair)


def test_assemble_skips_segments_with_inner_separator_token():
    corpus = _room_number_corpus()
    split = DatasetSplit(train=("d0", "d1"), dev=(), test=(), discarded=(), seed=0)

    whole = assemble_mixed(corpus, split, {"d0": [1000], "d1": [1000]}, include_sentence_level=False)
    assert [(r.meta.doc_id, r.meta.start, r.meta.end) for r in whole] == [("d1", 0, 2)]

    # "#1 Meet in room #2 today" ma 6 tokenów, "ok" trafia do osobnego segmentu
    split_up = assemble_mixed(corpus, split, {"d0": [6]}, include_sentence_level=False)
    assert [(r.meta.doc_id, r.meta.start, r.meta.end) for r in split_up] == [("d0", 1, 2)]

    with_sentences = assemble_mixed(corpus, split, {"d0": [1000]})
    assert sum(1 for r in with_sentences if r.meta.L == SENT) == 4


# --- evaluation inputs ------------------------------------------------------------


def test_build_eval_inputs_segments_and_sentences():
    corpus = build_corpus(3, sentences=(2, 5), seed=8)
    by_length = build_eval_inputs(corpus, corpus.doc_ids, 12)
    for record in by_length:
        doc = corpus.get(record.meta.doc_id)
        n = record.meta.end - record.meta.start
        assert recover_sentences(record.output, n) == {
            k: s for k, s in enumerate(doc.target[record.meta.start : record.meta.end], start=1)
        }
    sentences = build_eval_inputs(corpus, corpus.doc_ids, SENT)
    assert len(sentences) == corpus.sentence_count
    assert all(r.meta.L == SENT for r in sentences)


def test_records_jsonl_round_trip(tmp_path):
    corpus = build_corpus(4, sentences=(1, 3), seed=2)
    records = build_eval_inputs(corpus, corpus.doc_ids, 10) + build_eval_inputs(corpus, corpus.doc_ids, SENT)
    path = tmp_path / "records.jsonl"
    assert save_records_jsonl(records, path) == len(records)
    assert load_records_jsonl(path) == records
    line = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
    assert set(line) == {"instruction", "input", "output", "meta"}


def test_build_eval_inputs_skips_documents_with_inner_separator_token():
    corpus = _room_number_corpus()
    records = build_eval_inputs(corpus, ["d0", "d1"], 1000)
    assert [r.meta.doc_id for r in records] == ["d1"]
    assert len(build_eval_inputs(corpus, ["d0", "d1"], SENT)) == 4
