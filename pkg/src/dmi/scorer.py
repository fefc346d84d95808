"""Klient zewnętrznego scorera (np. COMET uruchomionego poza tym pakietem).

Dwa tryby:

* proces: jeden obiekt JSON ``{"src", "mt", "ref"}`` na linię na stdin,
  jeden ``{"score": x}`` na linię na stdout, w tej samej kolejności,
* HTTP: POST tablicy JSON z żądaniami, odpowiedź to tablica ``{"score": x}``.

Wynik systemowy to średnia arytmetyczna wyników segmentów.
"""

from __future__ import annotations

import json
import logging
import math
import shlex
import subprocess
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
import requests

from .corpus import Corpus
from .errors import CountMismatch, EmptyInput, EndpointFailure, InvalidRecord, MalformedResponse
from .io_utils import PathLike, iter_jsonl
from .metrics import Hypothesis, restore_documents

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 600.0


@dataclass(frozen=True)
class ScorerRequest:
    src: str
    mt: str
    ref: str

    def to_dict(self) -> Dict[str, str]:
        return {"src": self.src, "mt": self.mt, "ref": self.ref}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScorerRequest":
        try:
            return cls(src=str(data["src"]), mt=str(data["mt"]), ref=str(data["ref"]))
        except KeyError as exc:
            raise InvalidRecord(f"scorer request is missing key {exc}") from exc


@dataclass(frozen=True)
class ScorerResponse:
    score: float


@dataclass(frozen=True)
class ScorerResult:
    responses: Tuple[ScorerResponse, ...]
    system_score: float

    def to_dict(self) -> Dict[str, Any]:
        return {"system_score": self.system_score, "scores": [r.score for r in self.responses]}


def _parse_response(item: Any, line_no: int) -> ScorerResponse:
    if not isinstance(item, dict) or "score" not in item:
        raise MalformedResponse(line_no, "expected an object with a 'score' key")
    score = item["score"]
    if isinstance(score, bool) or not isinstance(score, (int, float)) or not math.isfinite(score):
        raise MalformedResponse(line_no, f"score is not a finite number: {score!r}")
    return ScorerResponse(float(score))


def _score_subprocess(pairs: Sequence[ScorerRequest], command: str, timeout: float) -> List[ScorerResponse]:
    payload = "".join(json.dumps(p.to_dict(), ensure_ascii=False) + "\n" for p in pairs)
    try:
        proc = subprocess.run(
            shlex.split(command),
            input=payload,
            capture_output=True,
            text=True,
            encoding="utf-8",
            timeout=timeout,
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise EndpointFailure(f"scorer command {command!r} failed: {exc}") from exc
    if proc.returncode != 0:
        tail = " | ".join(proc.stderr.strip().splitlines()[-5:]) or "<no stderr>"
        raise EndpointFailure(f"scorer command exited with code {proc.returncode}: {tail}")

    responses = []
    for line_no, line in enumerate(proc.stdout.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            item = json.loads(line)
        except json.JSONDecodeError:
            raise MalformedResponse(line_no, "not valid JSON") from None
        responses.append(_parse_response(item, line_no))
    return responses


def _score_http(pairs: Sequence[ScorerRequest], url: str, timeout: float) -> List[ScorerResponse]:
    with requests.Session() as session:
        try:
            resp = session.post(url, json=[p.to_dict() for p in pairs], timeout=timeout)
            resp.raise_for_status()
        except requests.HTTPError as exc:
            raise EndpointFailure(f"scorer endpoint {url} returned HTTP {exc.response.status_code}") from exc
        except requests.RequestException as exc:
            raise EndpointFailure(f"scorer endpoint {url} failed: {exc}") from exc
    try:
        data = resp.json()
    except ValueError:
        raise MalformedResponse(1, "response body is not JSON") from None
    if not isinstance(data, list):
        raise MalformedResponse(1, "response body is not a JSON array")
    return [_parse_response(item, i) for i, item in enumerate(data, start=1)]


def score_external(
    pairs: Sequence[ScorerRequest],
    endpoint: str,
    timeout: float = DEFAULT_TIMEOUT,
) -> ScorerResult:
    if not pairs:
        raise EmptyInput("no scorer requests")
    if endpoint.startswith(("http://", "https://")):
        responses = _score_http(pairs, endpoint, timeout)
    else:
        responses = _score_subprocess(pairs, endpoint, timeout)
    if len(responses) != len(pairs):
        raise CountMismatch(len(pairs), len(responses))

    system = float(np.mean([r.score for r in responses]))
    logger.info("Scorer: %d segmentów, wynik systemowy %.4f", len(responses), system)
    return ScorerResult(tuple(responses), system)


def document_requests(outputs: Iterable[Hypothesis], corpus: Corpus) -> List[ScorerRequest]:
    """Żądania na poziomie dokumentu: źródło, złożone tłumaczenie i referencja."""

    restored = restore_documents(outputs)
    requests_ = []
    for doc_id, mt in restored.items():
        doc = corpus.get(doc_id)
        requests_.append(ScorerRequest(src=" ".join(doc.source), mt=mt, ref=" ".join(doc.target)))
    return requests_


def load_requests_jsonl(path: PathLike) -> List[ScorerRequest]:
    return [ScorerRequest.from_dict(row) for row in iter_jsonl(path)]
