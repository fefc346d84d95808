from __future__ import annotations

import argparse
import csv
from typing import Dict, List, Optional, Tuple

import matplotlib.pyplot as plt


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Plot a metric against input length from a `dmi report --csv` file."
    )
    parser.add_argument(
        "report_csv",
        nargs="?",
        default="report.csv",
        help="Ścieżka do pliku CSV raportu (domyślnie report.csv)",
    )
    parser.add_argument(
        "--metric",
        default="d_bleu",
        help="Kolumna na osi Y (domyślnie d_bleu).",
    )
    parser.add_argument("--out", default=None, help="Zapis wykresu do pliku zamiast okna.")
    return parser.parse_args()


def load_points(path: str, metric: str) -> Tuple[List[Tuple[int, float]], Optional[float]]:
    """Wiersze z etykietą liczbową to punkty krzywej, wiersz SENT to linia odniesienia."""

    points: List[Tuple[int, float]] = []
    sentence: Optional[float] = None
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            cell = row.get(metric, "")
            if not cell:
                continue
            label = row.get("label", "")
            if label.isdigit():
                points.append((int(label), float(cell)))
            elif label.upper() == "SENT":
                sentence = float(cell)
    return sorted(points), sentence


def plot_curve(points: List[Tuple[int, float]], sentence: Optional[float], metric: str) -> None:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]

    plt.figure(figsize=(8, 4))
    plt.plot(xs, ys, marker="o", label="dokumenty (L)")
    if sentence is not None:
        plt.axhline(sentence, color="gray", linestyle="--", label="SENT")
    plt.xlabel("Długość wejścia L [tokeny]")
    plt.ylabel(metric)
    plt.title(f"{metric} w funkcji długości wejścia")
    plt.grid(True, linestyle=":", alpha=0.5)
    plt.legend()
    plt.tight_layout()


def main() -> None:
    args = parse_args()
    path = args.report_csv

    try:
        points, sentence = load_points(path, args.metric)
    except FileNotFoundError:
        print(f"[DMI][ERROR] Nie znaleziono pliku: {path}")
        return

    if not points:
        print(f"[DMI][WARN] Brak wierszy z liczbową etykietą L i kolumną {args.metric} w {path}.")
        return

    print(f"[DMI][INFO] Wczytano {len(points)} punktów z {path}.")
    print()
    print(f"L; {args.metric}")
    print("-; " + "-" * len(args.metric))
    for L, value in points:
        print(f"{L}; {value:.2f}")
    if sentence is not None:
        print(f"SENT; {sentence:.2f}")
    print()

    plot_curve(points, sentence, args.metric)

    if args.out:
        plt.savefig(args.out)
        print(f"[DMI][INFO] Zapisano wykres do: {args.out}")
    else:
        print("[DMI] Wyświetlam wykres (zamknij okno, aby zakończyć).")
        plt.show()


if __name__ == "__main__":
    main()
