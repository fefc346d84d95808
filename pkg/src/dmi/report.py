"""Zbiorczy raport z wyników ``eval`` / ``score-external`` (jeden wiersz na etykietę, np. SENT, 512, ...)."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional

from .errors import InvalidRecord
from .io_utils import parse_csv, render_aligned, rows_to_csv

METRIC_COLUMNS = ("s_bleu", "d_bleu", "comet", "coverage", "tc", "cp", "pt", "tcp")

# liczba miejsc po przecinku w tabeli tekstowej
_TEXT_DIGITS = {"s_bleu": 2, "d_bleu": 2, "comet": 4, "coverage": 2, "tc": 1, "cp": 1, "pt": 1, "tcp": 1}


@dataclass
class ReportRow:
    label: str
    s_bleu: Optional[float] = None
    d_bleu: Optional[float] = None
    comet: Optional[float] = None
    coverage: Optional[float] = None
    tc: Optional[float] = None
    cp: Optional[float] = None
    pt: Optional[float] = None
    tcp: Optional[float] = None


def _metric_values(result: Mapping[str, Any]) -> Dict[str, float]:
    metric = result.get("metric")
    if metric == "sbleu":
        return {"s_bleu": float(result["bleu"]["score"])}
    if metric == "dbleu":
        return {"d_bleu": float(result["bleu"]["score"])}
    if metric == "coverage":
        return {"coverage": float(result["corpus_accuracy"])}
    if metric == "tcp":
        return {k: float(result[k]) for k in ("tc", "cp", "pt", "tcp")}
    if metric == "comet":
        return {"comet": float(result["system_score"])}
    raise InvalidRecord(f"unknown metric in result file: {metric!r}")


def build_report(results: Iterable[Mapping[str, Any]]) -> List[ReportRow]:
    rows: Dict[str, ReportRow] = {}
    for result in results:
        try:
            label = str(result.get("label") or "all")
            values = _metric_values(result)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidRecord(f"malformed result file: {exc}") from exc
        row = rows.setdefault(label, ReportRow(label))
        for key, value in values.items():
            setattr(row, key, value)
    return list(rows.values())


def report_to_dicts(rows: Iterable[ReportRow]) -> List[Dict[str, Any]]:
    return [asdict(r) for r in rows]


def report_to_csv(rows: Iterable[ReportRow]) -> str:
    # repr(float) odtwarza dokładnie tę samą wartość przy float(...)
    out = []
    for row in rows:
        record: Dict[str, str] = {"label": row.label}
        for key in METRIC_COLUMNS:
            value = getattr(row, key)
            record[key] = "" if value is None else repr(value)
        out.append(record)
    return rows_to_csv(out, ["label", *METRIC_COLUMNS])


def parse_report_csv(text: str) -> List[ReportRow]:
    rows = []
    for record in parse_csv(text):
        row = ReportRow(label=record["label"])
        for key in METRIC_COLUMNS:
            cell = record.get(key, "")
            setattr(row, key, float(cell) if cell else None)
        rows.append(row)
    return rows


def render_report(rows: Iterable[ReportRow]) -> str:
    rows = list(rows)
    columns = [c for c in METRIC_COLUMNS if any(getattr(r, c) is not None for r in rows)]
    body = []
    for row in rows:
        cells = [row.label]
        for c in columns:
            value = getattr(row, c)
            cells.append("-" if value is None else f"{value:.{_TEXT_DIGITS[c]}f}")
        body.append(cells)
    return render_aligned(body, ["input", *columns])
