"""Tokenizacja do liczenia budżetów L i do BLEU.

Dostępne rodzaje:

* ``whitespace``: podział na ciągi białych znaków Unicode,
* ``intl``: jak wyżej + interpunkcja jako osobne tokeny (tokenizer 13a z sacrebleu),
* ``char_cjk``: każdy znak CJK to osobny token, reszta jak ``whitespace``,
* ``external``: zewnętrzny proces, protokół liniowy na stdin/stdout.

Budżety L są zależne od tokenizera: 512 tokenów ``whitespace`` to nie to samo
co 512 tokenów tokenizera modelu.

Zakresy znaków traktowanych jako CJK (``CJK_RANGES``):

* U+3001-U+303F  CJK Symbols and Punctuation (bez U+3000, to spacja ideograficzna)
* U+3400-U+4DBF  CJK Unified Ideographs Extension A
* U+4E00-U+9FFF  CJK Unified Ideographs
* U+F900-U+FAFF  CJK Compatibility Ideographs
* U+FF01-U+FF60  Fullwidth ASCII variants and fullwidth brackets
* U+FFE0-U+FFE6  Fullwidth signs
* U+20000-U+2A6DF, U+2A700-U+2EBEF  Extensions B-F
* U+2F800-U+2FA1F  CJK Compatibility Ideographs Supplement
* U+30000-U+3134F  Extension G
"""

from __future__ import annotations

import enum
import logging
import re
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a

from .errors import ExternalTokenizerFailure, UsageError

logger = logging.getLogger(__name__)

CJK_RANGES: Tuple[Tuple[int, int], ...] = (
    (0x3001, 0x303F),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0xFF01, 0xFF60),
    (0xFFE0, 0xFFE6),
    (0x20000, 0x2A6DF),
    (0x2A700, 0x2EBEF),
    (0x2F800, 0x2FA1F),
    (0x30000, 0x3134F),
)

_CJK_CLASS = "".join(f"\\U{lo:08x}-\\U{hi:08x}" for lo, hi in CJK_RANGES)
_CJK_TOKEN_RE = re.compile(f"[{_CJK_CLASS}]|[^\\s{_CJK_CLASS}]+")

_TOKENIZER_13A = Tokenizer13a()


class TokenizerKind(str, enum.Enum):
    WHITESPACE = "whitespace"
    INTL = "intl"
    CHAR_CJK = "char_cjk"
    EXTERNAL = "external"


@dataclass(frozen=True)
class TokenizerSpec:
    kind: TokenizerKind = TokenizerKind.WHITESPACE
    command: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TokenizerKind(self.kind))
        if self.kind is TokenizerKind.EXTERNAL and not (self.command or "").strip():
            raise UsageError("--tokenizer: external tokenizer needs a nonempty command")

    @property
    def additive(self) -> bool:
        """Liczba tokenów ``a + " " + b`` równa sumie liczb dla ``a`` i ``b``."""

        return self.kind is not TokenizerKind.EXTERNAL

    def __str__(self) -> str:
        if self.kind is TokenizerKind.EXTERNAL:
            return f"external:{self.command}"
        return self.kind.value.replace("_", "-")


WHITESPACE = TokenizerSpec(TokenizerKind.WHITESPACE)


@dataclass(frozen=True)
class TokenSequence:
    tokens: Tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __getitem__(self, index):  # type: ignore[no-untyped-def]
        return self.tokens[index]

    def joined(self) -> str:
        return " ".join(self.tokens)


def parse_tokenizer_arg(value: str) -> TokenizerSpec:
    """``whitespace | intl | char-cjk | external:<cmd>`` -> TokenizerSpec."""

    if value.startswith("external:"):
        return TokenizerSpec(TokenizerKind.EXTERNAL, value[len("external:") :])
    name = value.replace("-", "_")
    try:
        return TokenizerSpec(TokenizerKind(name))
    except ValueError:
        raise UsageError(f"--tokenizer: unknown tokenizer {value!r}") from None


# --- external adapter -----------------------------------------------------------


def escape_request(text: str) -> str:
    return text.replace("\r\n", "\\n").replace("\n", "\\n").replace("\r", "\\n")


class ExternalTokenizer:
    """Długożyjący proces tokenizera: jedna linia żądania -> jedna linia odpowiedzi.

    Każdy wątek dostaje własny proces; blokada chroni pojedynczy proces.
    """

    def __init__(self, command: str) -> None:
        self.command = command
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ExternalTokenizerFailure(f"cannot start {command!r}: {exc}") from exc
        logger.debug("Uruchomiono zewnętrzny tokenizer: %s", command)

    def _fail(self) -> ExternalTokenizerFailure:
        code = self._proc.poll()
        if code is not None and code != 0:
            return ExternalTokenizerFailure(code)
        return ExternalTokenizerFailure("no reply line (process closed its stdout)")

    def tokenize(self, text: str) -> List[str]:
        assert self._proc.stdin is not None and self._proc.stdout is not None
        with self._lock:
            try:
                self._proc.stdin.write(escape_request(text) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise self._fail() from exc
            reply = self._proc.stdout.readline()
        if not reply.endswith("\n"):
            raise self._fail()
        reply = reply[:-1]
        if reply.endswith("\r"):
            reply = reply[:-1]
        if reply == "":
            return []
        tokens = reply.split(" ")
        if any(t == "" for t in tokens):
            raise ExternalTokenizerFailure(f"reply is not single-space separated: {reply!r}")
        return tokens

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                if self._proc.stdin is not None:
                    self._proc.stdin.close()
                self._proc.wait(timeout=3)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()


# klucz: (komenda, identyfikator wątku)
_EXTERNAL: Dict[Tuple[str, int], ExternalTokenizer] = {}
_EXTERNAL_LOCK = threading.Lock()


def _external(command: str) -> ExternalTokenizer:
    key = (command, threading.get_ident())
    with _EXTERNAL_LOCK:
        tok = _EXTERNAL.get(key)
        if tok is None:
            tok = ExternalTokenizer(command)
            _EXTERNAL[key] = tok
        return tok


def close_external_tokenizers() -> None:
    with _EXTERNAL_LOCK:
        for tok in _EXTERNAL.values():
            tok.close()
        _EXTERNAL.clear()


# --- built-in tokenizers --------------------------------------------------------


def _intl(text: str) -> List[str]:
    return _TOKENIZER_13A(text).split()


def tokenize(text: str, spec: TokenizerSpec = WHITESPACE) -> TokenSequence:
    kind = spec.kind
    if kind is TokenizerKind.WHITESPACE:
        tokens = text.split()
    elif kind is TokenizerKind.INTL:
        tokens = _intl(text)
    elif kind is TokenizerKind.CHAR_CJK:
        tokens = _CJK_TOKEN_RE.findall(text)
    else:
        tokens = _external(spec.command or "").tokenize(text)
    return TokenSequence(tuple(tokens))


def count_tokens(text: str, spec: TokenizerSpec = WHITESPACE) -> int:
    return len(tokenize(text, spec))
