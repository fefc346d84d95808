"""Atrapa zewnętrznego scorera: ``{"src","mt","ref"}`` na linię -> ``{"score": x}``.

Domyślnie wynik to stała ``--score``; z ``--overlap`` to odsetek tokenów
referencji obecnych w ``mt``.
"""

from __future__ import annotations

import argparse
import json
import sys


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Line-delimited JSON scorer stub.")
    parser.add_argument("--score", type=float, default=0.5, help="Stały wynik segmentu (domyślnie 0.5).")
    parser.add_argument("--overlap", action="store_true", help="Wynik = pokrycie tokenów referencji.")
    parser.add_argument("--drop", type=int, default=0, help="Pomiń tyle ostatnich odpowiedzi.")
    parser.add_argument("--malformed-line", type=int, default=None, help="Zepsuj odpowiedź nr N (od 1).")
    parser.add_argument("--exit-code", type=int, default=0, help="Kod wyjścia po zakończeniu.")
    return parser.parse_args()


def _overlap(mt: str, ref: str) -> float:
    ref_tokens = ref.split()
    if not ref_tokens:
        return 0.0
    mt_tokens = set(mt.split())
    return sum(1 for t in ref_tokens if t in mt_tokens) / len(ref_tokens)


def main() -> None:
    args = parse_args()
    requests = [json.loads(line) for line in sys.stdin if line.strip()]
    if args.drop:
        requests = requests[: max(len(requests) - args.drop, 0)]

    for i, req in enumerate(requests, start=1):
        if args.malformed_line == i:
            sys.stdout.write("not json\n")
            continue
        score = _overlap(req["mt"], req["ref"]) if args.overlap else args.score
        sys.stdout.write(json.dumps({"score": score}) + "\n")

    if args.exit_code:
        sys.stderr.write("echo_scorer: forced failure\n")
    sys.exit(args.exit_code)


if __name__ == "__main__":
    main()
