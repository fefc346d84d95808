"""Minimalny zewnętrzny tokenizer dla `--tokenizer external:...`.

Czyta jedną linię żądania, zwraca tokeny oddzielone pojedynczą spacją.
``--fail-after N`` kończy proces z kodem 3 po N żądaniach (testy błędów).
"""

from __future__ import annotations

import argparse
import sys


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Line-protocol whitespace tokenizer stub.")
    parser.add_argument("--fail-after", type=int, default=None, help="Zakończ z kodem 3 po N liniach.")
    parser.add_argument("--bad-reply", action="store_true", help="Odpowiadaj podwójnymi spacjami.")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    served = 0
    for line in sys.stdin:
        if args.fail_after is not None and served >= args.fail_after:
            sys.exit(3)
        text = line.rstrip("\n").replace("\\n", "\n")
        sep = "  " if args.bad_reply else " "
        sys.stdout.write(sep.join(text.split()) + "\n")
        sys.stdout.flush()
        served += 1


if __name__ == "__main__":
    main()
