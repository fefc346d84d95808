from __future__ import annotations

import argparse
import json
from collections import defaultdict
from typing import Dict, List


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Simple analysis of a DMI instruction JSONL file (per-L counts and lengths)."
    )
    parser.add_argument(
        "instructions_jsonl",
        nargs="?",
        default="instructions.jsonl",
        help="Ścieżka do pliku instrukcji (domyślnie instructions.jsonl)",
    )
    return parser.parse_args()


def _order(key: str) -> tuple:
    return (0, 0) if key == "SENT" else (1, int(key)) if key.isdigit() else (2, 0)


def main() -> None:
    args = parse_args()
    path = args.instructions_jsonl

    try:
        with open(path, encoding="utf-8") as f:
            rows = [json.loads(line) for line in f if line.strip()]
    except FileNotFoundError:
        print(f"[DMI][ERROR] Nie znaleziono pliku instrukcji: {path}")
        return
    except json.JSONDecodeError as exc:
        print(f"[DMI][ERROR] Niepoprawny JSON w {path}: {exc}")
        return

    if not rows:
        print(f"[DMI][WARN] Plik {path} jest pusty.")
        return

    print(f"[DMI][INFO] Wczytano {len(rows)} rekordów z {path}.")
    print()
    print("L; count; docs; sentences; mean_src_tok; max_src_tok; mean_tgt_tok; max_tgt_tok")
    print("-; -----; ----; ---------; ------------; -----------; ------------; -----------")

    src_len: Dict[str, List[int]] = defaultdict(list)
    tgt_len: Dict[str, List[int]] = defaultdict(list)
    docs: Dict[str, set] = defaultdict(set)
    sentences: Dict[str, int] = defaultdict(int)

    for r in rows:
        meta = r.get("meta", {})
        key = str(meta.get("L", "?"))
        src_len[key].append(len(r.get("input", "").split()))
        tgt_len[key].append(len(r.get("output", "").split()))
        docs[key].add(meta.get("doc_id"))
        sentences[key] += int(meta.get("end", 0)) - int(meta.get("start", 0))

    for key in sorted(src_len, key=_order):
        s, t = src_len[key], tgt_len[key]
        print(
            f"{key}; {len(s)}; {len(docs[key])}; {sentences[key]}; "
            f"{sum(s) / len(s):12.1f}; {max(s):11d}; {sum(t) / len(t):12.1f}; {max(t):11d}"
        )

    print()
    print("[DMI] Analiza zakończona.")


if __name__ == "__main__":
    main()
