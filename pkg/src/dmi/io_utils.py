from __future__ import annotations

import contextlib
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, TextIO, Union

from .errors import InvalidRecord

PathLike = Union[str, Path]


@contextlib.contextmanager
def open_output(path: Optional[PathLike]) -> Iterator[TextIO]:
    """Plik wyjściowy albo stdout, gdy ``path`` jest puste lub równe ``-``."""

    if path is None or str(path) == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


def write_jsonl(rows: Iterable[Dict[str, Any]], path: Optional[PathLike]) -> int:
    count = 0
    with open_output(path) as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False))
            f.write("\n")
            count += 1
    return count


def iter_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvalidRecord(f"{path}:{line_no}: invalid JSON ({exc.msg})") from exc
            if not isinstance(row, dict):
                raise InvalidRecord(f"{path}:{line_no}: expected a JSON object")
            yield row


def read_jsonl(path: PathLike) -> List[Dict[str, Any]]:
    return list(iter_jsonl(path))


def save_json(data: Any, path: Optional[PathLike]) -> None:
    with open_output(path) as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")


def load_json(path: PathLike) -> Any:
    with open(path, encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as exc:
            raise InvalidRecord(f"{path}: invalid JSON ({exc.msg})") from exc


def rows_to_csv(rows: Sequence[Dict[str, Any]], fieldnames: Sequence[str]) -> str:
    # RFC-4180: przecinki, cudzysłowy tylko gdy potrzebne, CRLF na końcu wiersza
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def parse_csv(text: str) -> List[Dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text, newline="")))


def render_aligned(rows: Sequence[Sequence[str]], header: Sequence[str]) -> str:
    """Tabela tekstowa z kolumnami wyrównanymi do najszerszej komórki."""

    table = [list(header)] + [list(r) for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for n, row in enumerate(table):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
