from __future__ import annotations

import json

import pytest
import requests

from conftest import build_corpus, tool_command
from dmi.errors import CountMismatch, EmptyInput, EndpointFailure, InvalidRecord, MalformedResponse
from dmi.metrics import Hypothesis
from dmi.scorer import ScorerRequest, document_requests, load_requests_jsonl, score_external
from dmi.separators import render_separated

PAIRS = [
    ScorerRequest("Hallo Welt", "hello world", "hello world"),
    ScorerRequest("Guten Tag", "good day", "good morning"),
    ScorerRequest("Danke", "thanks", "thank you"),
]


def test_echo_stub_constant_score():
    result = score_external(PAIRS, tool_command("echo_scorer.py", "--score", "0.5"))
    assert [r.score for r in result.responses] == [0.5, 0.5, 0.5]
    assert result.system_score == 0.5


def test_echo_stub_overlap_mean():
    result = score_external(PAIRS, tool_command("echo_scorer.py", "--overlap"))
    assert [r.score for r in result.responses] == [1.0, 0.5, 0.0]
    assert result.system_score == pytest.approx(0.5)
    assert result.to_dict() == {"system_score": result.system_score, "scores": [1.0, 0.5, 0.0]}


def test_missing_response_is_count_mismatch():
    with pytest.raises(CountMismatch) as info:
        score_external(PAIRS, tool_command("echo_scorer.py", "--drop", "1"))
    assert (info.value.expected, info.value.got) == (3, 2)


def test_non_json_line_reports_line_number():
    with pytest.raises(MalformedResponse) as info:
        score_external(PAIRS, tool_command("echo_scorer.py", "--malformed-line", "2"))
    assert info.value.line_no == 2


def test_failing_command_is_endpoint_failure():
    with pytest.raises(EndpointFailure, match="forced failure"):
        score_external(PAIRS, tool_command("echo_scorer.py", "--exit-code", "4"))
    with pytest.raises(EndpointFailure):
        score_external(PAIRS, "no-such-scorer-binary-xyz")


def test_empty_request_list():
    with pytest.raises(EmptyInput):
        score_external([], tool_command("echo_scorer.py"))


class _FakeResponse:
    def __init__(self, status_code, payload):
        self.status_code = status_code
        self._payload = payload

    def json(self):
        if isinstance(self._payload, str):
            raise ValueError("not json")
        return self._payload

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"{self.status_code} error", response=self)


def _patch_post(monkeypatch, response, seen=None):
    def fake_post(self, url, json=None, timeout=None):
        if seen is not None:
            seen.append((url, json, timeout))
        if isinstance(response, Exception):
            raise response
        return response

    monkeypatch.setattr(requests.Session, "post", fake_post)


def test_http_mode_posts_array(monkeypatch):
    seen = []
    _patch_post(monkeypatch, _FakeResponse(200, [{"score": 0.2}, {"score": 0.4}, {"score": 0.9}]), seen)
    result = score_external(PAIRS, "http://scorer.local/score", timeout=5)
    assert result.system_score == pytest.approx(0.5)
    url, payload, timeout = seen[0]
    assert url == "http://scorer.local/score"
    assert payload[0] == {"src": "Hallo Welt", "mt": "hello world", "ref": "hello world"}
    assert timeout == 5


@pytest.mark.parametrize(
    "response, error",
    [
        (_FakeResponse(500, []), EndpointFailure),
        (_FakeResponse(200, "oops"), MalformedResponse),
        (_FakeResponse(200, {"score": 1}), MalformedResponse),
        (_FakeResponse(200, [{"score": 1}, {"value": 2}, {"score": 3}]), MalformedResponse),
        (_FakeResponse(200, [{"score": 1}, {"score": float("nan")}, {"score": 3}]), MalformedResponse),
        (_FakeResponse(200, [{"score": 1}]), CountMismatch),
        (requests.ConnectionError("refused"), EndpointFailure),
    ],
)
def test_http_mode_errors(monkeypatch, response, error):
    _patch_post(monkeypatch, response)
    with pytest.raises(error):
        score_external(PAIRS, "https://scorer.local/score")


def test_http_status_goes_through_raise_for_status(monkeypatch):
    response = requests.Response()
    response.status_code = 503
    response._content = b"[]"
    response.url = "https://scorer.local/score"
    _patch_post(monkeypatch, response)
    with pytest.raises(EndpointFailure, match="HTTP 503"):
        score_external(PAIRS, "https://scorer.local/score")


def test_document_requests_restore_documents():
    corpus = build_corpus(2, sentences=4, seed=3)
    outputs = []
    for doc in corpus:
        outputs.append(Hypothesis(doc.doc_id, render_separated(doc.target[:2]), L=512, start=0, end=2))
        outputs.append(Hypothesis(doc.doc_id, render_separated(doc.target[2:]), L=512, start=2, end=4))
    reqs = document_requests(outputs, corpus)
    assert len(reqs) == 2
    doc = corpus.documents[0]
    assert reqs[0] == ScorerRequest(" ".join(doc.source), " ".join(doc.target), " ".join(doc.target))


def test_load_requests_jsonl(tmp_path):
    path = tmp_path / "pairs.jsonl"
    path.write_text("\n".join(json.dumps(p.to_dict()) for p in PAIRS) + "\n", encoding="utf-8")
    assert load_requests_jsonl(path) == PAIRS
    path.write_text('{"src": "a", "mt": "b"}\n', encoding="utf-8")
    with pytest.raises(InvalidRecord):
        load_requests_jsonl(path)
