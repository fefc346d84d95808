from __future__ import annotations

import random
import string
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest

import dmi.tokenize as tokenize_module
from conftest import tool_command
from dmi.errors import ExternalTokenizerFailure, UsageError
from dmi.tokenize import (
    WHITESPACE,
    TokenizerKind,
    TokenizerSpec,
    count_tokens,
    escape_request,
    parse_tokenizer_arg,
    tokenize,
)

INTL = TokenizerSpec(TokenizerKind.INTL)
CJK = TokenizerSpec(TokenizerKind.CHAR_CJK)


def _scan_whitespace(text: str) -> list:
    """Niezależny podział: przejście znak po znaku."""

    tokens, cur = [], []
    for ch in text:
        if ch.isspace():
            if cur:
                tokens.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        tokens.append("".join(cur))
    return tokens


def test_intl_splits_punctuation():
    assert list(tokenize("I am happy.", INTL)) == ["I", "am", "happy", "."]


def test_intl_keeps_decimal_numbers():
    assert list(tokenize("It costs 3.50, ok?", INTL)) == ["It", "costs", "3.50", ",", "ok", "?"]


def test_char_cjk_mode():
    assert list(tokenize("你好 world", CJK)) == ["你", "好", "world"]
    assert list(tokenize("我爱abc。", CJK)) == ["我", "爱", "abc", "。"]


def test_ideographic_space_is_whitespace_in_cjk_mode():
    assert list(tokenize("你　好", CJK)) == ["你", "好"]


@pytest.mark.parametrize("spec", [WHITESPACE, INTL, CJK])
def test_empty_text(spec):
    assert list(tokenize("", spec)) == []
    assert count_tokens("   ", spec) == 0


def test_count_tokens_examples():
    assert count_tokens("a b c") == 3
    assert count_tokens("#1 Hello #2 World") == 4


def test_whitespace_matches_scanner_oracle():
    rng = random.Random(0)
    alphabet = string.ascii_letters + string.digits + string.punctuation + " \t\n\r\x0b\x0c"
    for _ in range(500):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        assert list(tokenize(text)) == _scan_whitespace(text)


@pytest.mark.parametrize("spec", [WHITESPACE, CJK])
def test_tokenize_is_idempotent(spec):
    rng = random.Random(1)
    alphabet = "ab c一丁 x\t"
    for _ in range(200):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 30)))
        tokens = tokenize(text, spec)
        assert tokenize(tokens.joined(), spec) == tokens


def test_whitespace_count_is_additive():
    rng = random.Random(2)
    for _ in range(200):
        a = " ".join(rng.choice("xyz") * rng.randint(1, 3) for _ in range(rng.randint(1, 8)))
        b = " ".join(rng.choice("pq") for _ in range(rng.randint(1, 8)))
        assert count_tokens(a + " " + b) == count_tokens(a) + count_tokens(b)


@pytest.mark.parametrize(
    "value, kind",
    [("whitespace", TokenizerKind.WHITESPACE), ("intl", TokenizerKind.INTL), ("char-cjk", TokenizerKind.CHAR_CJK)],
)
def test_parse_tokenizer_arg(value, kind):
    spec = parse_tokenizer_arg(value)
    assert spec.kind is kind
    assert str(spec) == value


def test_parse_tokenizer_arg_external_and_errors():
    spec = parse_tokenizer_arg("external:spm --model x")
    assert spec.kind is TokenizerKind.EXTERNAL
    assert spec.command == "spm --model x"
    assert not spec.additive
    with pytest.raises(UsageError):
        parse_tokenizer_arg("external:")
    with pytest.raises(UsageError):
        parse_tokenizer_arg("bpe")


def test_escape_request():
    assert escape_request("a\nb\r\nc") == "a\\nb\\nc"


def test_external_matches_builtin():
    spec = TokenizerSpec(TokenizerKind.EXTERNAL, tool_command("whitespace_tokenizer.py"))
    rng = random.Random(3)
    for _ in range(50):
        text = " ".join("".join(rng.choice("abc") for _ in range(rng.randint(1, 4))) for _ in range(rng.randint(0, 6)))
        assert list(tokenize(text, spec)) == list(tokenize(text))
    assert list(tokenize("a\nb", spec)) == ["a", "b"]
    assert count_tokens("", spec) == 0


def test_external_process_per_thread():
    command = tool_command("whitespace_tokenizer.py")
    spec = TokenizerSpec(TokenizerKind.EXTERNAL, command)
    barrier = threading.Barrier(2)

    def work(text):
        barrier.wait(timeout=30)
        return list(tokenize(text, spec))

    with ThreadPoolExecutor(max_workers=2) as pool:
        results = list(pool.map(work, ["a b", "c d e"]))
    assert results == [["a", "b"], ["c", "d", "e"]]
    assert len([key for key in tokenize_module._EXTERNAL if key[0] == command]) == 2


def test_external_process_exit_is_reported():
    spec = TokenizerSpec(TokenizerKind.EXTERNAL, tool_command("whitespace_tokenizer.py", "--fail-after", "0"))
    with pytest.raises(ExternalTokenizerFailure):
        tokenize("hello", spec)


def test_external_protocol_violation():
    spec = TokenizerSpec(TokenizerKind.EXTERNAL, tool_command("whitespace_tokenizer.py", "--bad-reply"))
    with pytest.raises(ExternalTokenizerFailure, match="single-space"):
        tokenize("two words", spec)


def test_external_missing_command():
    spec = TokenizerSpec(TokenizerKind.EXTERNAL, "definitely-not-a-tokenizer-binary-xyz")
    with pytest.raises(ExternalTokenizerFailure):
        tokenize("x", spec)
