"""Deterministyczny generator liczb losowych używany do splitów, harmonogramów i symulacji.

Algorytm (żeby splity były odtwarzalne także poza Pythonem):

* stan 64-bit, krok splitmix64::

      state += 0x9E3779B97F4A7C15
      z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
      z = (z ^ (z >> 27)) * 0x94D049BB133111EB
      return z ^ (z >> 31)            (wszystko modulo 2**64)

* ``below(n)``: losowanie bez obciążenia metodą odrzucania
  (odrzucamy wartości >= floor(2**64 / n) * n, wynik = wartość % n),
* ``shuffle``: Fisher-Yates od końca, ``j = below(i + 1)`` dla i = n-1 .. 1,
* ``random()``: 53 najstarsze bity / 2**53.
"""

from __future__ import annotations

from typing import List, Sequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        limit = ((1 << 64) // n) * n
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def derive_seed(seed: int, *parts: int) -> int:
    """Niezależny podstrumień dla (seed, parts...), np. jeden na dokument."""

    value = seed & MASK64
    for part in parts:
        value = SplitMix64(value ^ ((part * _GOLDEN) & MASK64)).next_u64()
    return value


def shuffled(items: Sequence[T], seed: int) -> List[T]:
    out = list(items)
    rng = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
