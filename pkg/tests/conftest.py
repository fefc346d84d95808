from __future__ import annotations

import random
import shlex
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import pytest

from dmi.corpus import Corpus, LangPair, ParallelDocument

TOOLS_DIR = Path(__file__).resolve().parents[1] / "tools"

WORDS = ("the", "a", "cat", "dog", "sat", "on", "mat", "house", "red", "blue", "runs", "fast", "slowly", "and")


def tool_command(name: str, *args: str) -> str:
    """Komenda powłoki uruchamiająca skrypt z ``tools/`` bieżącym interpreterem."""

    parts = [sys.executable, str(TOOLS_DIR / name), *args]
    return " ".join(shlex.quote(p) for p in parts)


def random_sentence(rng: random.Random, min_words: int = 1, max_words: int = 12) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(min_words, max_words)))


def build_corpus(
    n_docs: int,
    sentences: int | Sequence[int] = 3,
    seed: int = 0,
    lang_pair: tuple = ("en", "de"),
    max_words: int = 12,
) -> Corpus:
    rng = random.Random(seed)
    docs: List[ParallelDocument] = []
    for i in range(n_docs):
        n = sentences if isinstance(sentences, int) else rng.choice(list(sentences))
        src = [random_sentence(rng, max_words=max_words) for _ in range(n)]
        tgt = [s.upper() for s in src]
        docs.append(ParallelDocument(f"d{i:06d}", LangPair(*lang_pair), tuple(src), tuple(tgt)))
    return Corpus(tuple(docs), LangPair(*lang_pair))


@pytest.fixture
def make_corpus() -> Callable[..., Corpus]:
    return build_corpus


@pytest.fixture
def write_pair(tmp_path: Path) -> Callable[[str, str], tuple]:
    def _write(src_text: str, tgt_text: str, name: Optional[str] = None) -> tuple:
        stem = name or "corpus"
        src = tmp_path / f"{stem}.src"
        tgt = tmp_path / f"{stem}.tgt"
        src.write_text(src_text, encoding="utf-8")
        tgt.write_text(tgt_text, encoding="utf-8")
        return src, tgt

    return _write


@pytest.fixture(autouse=True)
def _close_tokenizers():
    yield
    from dmi.tokenize import close_external_tokenizers

    close_external_tokenizers()
