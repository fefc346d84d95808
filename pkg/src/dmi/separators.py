"""Separatory zdań ``#k`` (1-indeksowane w obrębie pod-dokumentu)."""

from __future__ import annotations

import re
from typing import Iterable

# '#' na początku tokenu, potem tylko cyfry, ograniczone białymi znakami ("C#5" to nie separator)
SEPARATOR_RE = re.compile(r"(?<!\S)#(\d+)(?!\S)")


def render_separated(sentences: Iterable[str]) -> str:
    """["a", "b"] -> "#1 a #2 b"."""

    return " ".join(f"#{k} {s}" for k, s in enumerate(sentences, start=1))


def strip_separators(text: str) -> str:
    return " ".join(SEPARATOR_RE.sub(" ", text).split())
