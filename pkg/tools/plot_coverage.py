from __future__ import annotations

import argparse
import json
from typing import Dict, List, Tuple

import matplotlib.pyplot as plt


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Bar chart of sentence coverage per input length (from `dmi eval coverage` JSON files)."
    )
    parser.add_argument(
        "coverage_json",
        nargs="+",
        help="Pliki JSON z `dmi eval coverage` (po jednym na system); etykieta z pola 'label'.",
    )
    parser.add_argument(
        "--out",
        default=None,
        help="Zapis wykresu do pliku (PNG/PDF) zamiast okna.",
    )
    return parser.parse_args()


def _length_order(key: str) -> Tuple[int, int]:
    if key == "SENT":
        return (0, 0)
    if key.isdigit():
        return (1, int(key))
    return (2, 0)


def load_series(path: str) -> Tuple[str, Dict[str, float]]:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    label = data.get("label") or path
    by_length = data.get("by_length") or {"all": data["corpus_accuracy"]}
    return label, {str(k): float(v) for k, v in by_length.items()}


def plot_coverage(series: List[Tuple[str, Dict[str, float]]]) -> None:
    keys = sorted({k for _, values in series for k in values}, key=_length_order)
    width = 0.8 / max(len(series), 1)

    plt.figure(figsize=(8, 4))
    for i, (label, values) in enumerate(series):
        xs = [j + i * width for j in range(len(keys))]
        plt.bar(xs, [values.get(k, 0.0) for k in keys], width=width, label=label)
    plt.xticks([j + width * (len(series) - 1) / 2 for j in range(len(keys))], keys)
    plt.xlabel("Długość wejścia L")
    plt.ylabel("Pokrycie zdań [%]")
    plt.ylim(0, 100)
    plt.title("Dokumenty z pełnym pokryciem zdań")
    plt.grid(True, axis="y", linestyle=":", alpha=0.5)
    if len(series) > 1:
        plt.legend()
    plt.tight_layout()


def main() -> None:
    args = parse_args()

    series = []
    for path in args.coverage_json:
        try:
            series.append(load_series(path))
        except FileNotFoundError:
            print(f"[DMI][ERROR] Nie znaleziono pliku: {path}")
            return
        except (KeyError, ValueError) as exc:
            print(f"[DMI][ERROR] Niepoprawny plik pokrycia {path}: {exc}")
            return

    for label, values in series:
        print(f"[DMI][INFO] {label}: " + ", ".join(f"{k}={v:.2f}%" for k, v in values.items()))

    plot_coverage(series)

    if args.out:
        plt.savefig(args.out)
        print(f"[DMI][INFO] Zapisano wykres do: {args.out}")
    else:
        print("[DMI] Wyświetlam wykres (zamknij okno, aby zakończyć).")
        plt.show()


if __name__ == "__main__":
    main()
