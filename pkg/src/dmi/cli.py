from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .config import DATA_PATH, DEFAULT_LENGTHS, BleuConfig, MixConfig, RuntimeConfig, SegmentConfig, SplitConfig
from .corpus import (
    corpus_stats,
    load_corpus_jsonl,
    load_split,
    parse_parallel_corpus,
    render_stats,
    save_corpus_jsonl,
    save_split,
    serialize_parallel_text,
    split_dataset,
    stats_to_csv,
)
from .errors import DmiError, UsageError
from .instruct import (
    SENT,
    DEFAULT_TEMPLATE,
    PromptTemplate,
    assemble_mixed,
    build_eval_inputs,
    load_records_jsonl,
    render_prompt,
    save_records_jsonl,
)
from .io_utils import load_json, open_output, save_json, write_jsonl
from .metrics import (
    Smoothing,
    coverage,
    coverage_by_length,
    dbleu_for_corpus,
    discourse_scores,
    load_hypotheses_jsonl,
    resolve_hypotheses,
    save_hypotheses_jsonl,
    sbleu_for_corpus,
)
from .report import build_report, render_report, report_to_csv, report_to_dicts
from .scorer import document_requests, load_requests_jsonl, score_external
from .segment import (
    BUDGET_SIDES,
    STRATEGIES,
    build_length_schedule,
    load_plans_jsonl,
    load_schedule,
    save_plans_jsonl,
    save_schedule,
    segment_corpus,
)
from .simulate import SimulatorConfig, parse_drop_counts, simulate_outputs
from .tokenize import TokenizerSpec, close_external_tokenizers, parse_tokenizer_arg

logger = logging.getLogger("dmi")

SUBSETS = ("train", "dev", "test", "all")


class _Parser(argparse.ArgumentParser):
    """argparse, który zamiast kończyć proces zgłasza UsageError (kod wyjścia 1)."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


def setup_logging(verbose: int = 0, quiet: bool = False) -> None:
    level = logging.WARNING if quiet else (logging.DEBUG if verbose else logging.INFO)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[DMI][%(levelname)s] %(message)s"))
    root = logging.getLogger("dmi")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def parse_lengths(value: str) -> Tuple[int, ...]:
    try:
        lengths = tuple(int(x) for x in value.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--lengths: expected comma-separated integers, got {value!r}") from None
    if not lengths or any(L < 1 for L in lengths):
        raise UsageError(f"--lengths: expected positive integers, got {value!r}")
    return lengths


def parse_length(value: str) -> Union[int, str]:
    if value.upper() == SENT:
        return SENT
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"--length: expected an integer or SENT, got {value!r}") from None


def _common_parser(with_defaults: bool = True) -> argparse.ArgumentParser:
    """Flagi wspólne. Kopia dla podkomend ma domyślne SUPPRESS: flaga podana przed
    podkomendą (``dmi --seed 7 split``) zostaje w wyniku."""

    def default(value: object) -> object:
        return value if with_defaults else argparse.SUPPRESS

    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=default(RuntimeConfig.seed), help="Ziarno generatora (splitmix64).")
    common.add_argument(
        "--tokenizer",
        default=default("whitespace"),
        help="Tokenizer: whitespace | intl | char-cjk | external:<cmd> (domyślnie whitespace).",
    )
    common.add_argument(
        "--lengths",
        default=default(",".join(str(L) for L in DEFAULT_LENGTHS)),
        help="Budżety L oddzielone przecinkami (domyślnie 512,1024,1536,2048).",
    )
    common.add_argument(
        "--strategy",
        choices=STRATEGIES,
        default=default(SegmentConfig.strategy),
        help="Mieszanie długości: partition (domyślnie) albo replicate.",
    )
    common.add_argument("--workers", type=int, default=default(RuntimeConfig.workers), help="Liczba wątków roboczych.")
    common.add_argument("--out", default=default(None), help="Plik wyjściowy (domyślnie stdout).")
    common.add_argument(
        "--from-data",
        action="store_true",
        default=default(False),
        help=f"Ścieżki wejściowe względem katalogu danych ({DATA_PATH}).",
    )
    common.add_argument("-v", "--verbose", action="count", default=default(0), help="Więcej logów (DEBUG).")
    common.add_argument("-q", "--quiet", action="store_true", default=default(False), help="Tylko ostrzeżenia i błędy.")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser(with_defaults=False)
    parser = _Parser(
        prog="dmi",
        description="Mieszane instrukcje tłumaczeniowe (zdania + dokumenty) i ewaluacja tłumaczenia dokumentów.",
        parents=[_common_parser()],
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common], help="Pliki zdanie-na-linię -> korpus JSONL.")
    p.add_argument("--src", required=True, help="Plik źródłowy (jedno zdanie na linię, pusta linia = granica).")
    p.add_argument("--tgt", required=True, help="Plik docelowy, granice w tych samych liniach.")
    p.add_argument("--src-lang", required=True, help="Kod ISO języka źródłowego.")
    p.add_argument("--tgt-lang", required=True, help="Kod ISO języka docelowego.")
    p.add_argument("--export-text", default=None, help="Prefiks ścieżki: zapisuje też <prefiks>.src / <prefiks>.tgt.")

    p = sub.add_parser("split", parents=[common], help="Podział train/dev/test (80%% / 150 / 150).")
    p.add_argument("--corpus", required=True)
    p.add_argument("--train-frac", type=float, default=SplitConfig.train_frac)
    p.add_argument("--dev-docs", type=int, default=SplitConfig.dev_docs)
    p.add_argument("--test-docs", type=int, default=SplitConfig.test_docs)

    p = sub.add_parser("stats", parents=[common], help="Statystyki #DOC / #SENT na zbiór.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--csv", default=None, help="Dodatkowy zapis CSV.")

    p = sub.add_parser("segment", parents=[common], help="Plany pod-dokumentów dla każdego L.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--subset", choices=SUBSETS, default="all")
    p.add_argument("--budget-side", choices=BUDGET_SIDES, default=SegmentConfig.budget_side)

    p = sub.add_parser("build-instructions", parents=[common], help="Mieszane instrukcje treningowe (JSONL).")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--schedule", default=None, help="Gotowy harmonogram doc_id -> [L] (JSON).")
    p.add_argument("--schedule-out", default=None, help="Zapis użytego harmonogramu (JSON).")
    p.add_argument("--no-sentence-level", action="store_true", help="Bez instrukcji zdaniowych.")
    p.add_argument("--sentence-budget", type=int, default=MixConfig.sentence_budget, help="Maks. liczba rekordów zdaniowych.")
    p.add_argument("--sentence-docs", type=int, default=MixConfig.sentence_docs, help="Maks. liczba dokumentów na rekordy zdaniowe.")
    p.add_argument("--doc-budget", type=int, default=MixConfig.doc_budget, help="Maks. liczba dokumentów na rekordy dokumentowe.")
    p.add_argument("--budget-side", choices=BUDGET_SIDES, default=SegmentConfig.budget_side)
    p.add_argument("--template", default=None, help="Szablon promptu (JSON).")

    p = sub.add_parser("build-eval-inputs", parents=[common], help="Wejścia testowe pocięte na L albo zdania.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--subset", choices=SUBSETS, default="test")
    p.add_argument("--length", required=True, help="Budżet L albo SENT.")
    p.add_argument("--budget-side", choices=BUDGET_SIDES, default=SegmentConfig.budget_side)
    p.add_argument("--template", default=None)

    p = sub.add_parser("render-prompts", parents=[common], help="Rekordy instrukcji -> prompty tekstowe.")
    p.add_argument("--instructions", required=True)
    p.add_argument("--template", default=None)

    p = sub.add_parser("simulate", parents=[common], help="Symulowane wyjścia z gubieniem końcowych zdań.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--plans", default=None, help="Plany z 'segment' (bez nich jednostką jest cały dokument).")
    p.add_argument("--split", default=None)
    p.add_argument("--subset", choices=SUBSETS, default="all")
    p.add_argument("--drop-prob", type=float, default=SimulatorConfig.tail_drop_prob)
    p.add_argument("--drop-counts", default="1,2", help="Rozkład liczby gubionych zdań, np. 1:0.7,2:0.3.")
    p.add_argument("--noise", type=float, default=0.0, help="Częstość podmiany tokenów na <unk>.")
    p.add_argument("--drop-anywhere", action="store_true", help="Gubienie zdań w dowolnym miejscu, nie tylko na końcu.")

    p = sub.add_parser("eval", parents=[common], help="Metryki: sbleu | dbleu | coverage | tcp.")
    ev = p.add_subparsers(dest="metric", required=True, parser_class=_Parser)
    for name in ("sbleu", "dbleu"):
        q = ev.add_parser(name, parents=[common])
        q.add_argument("--hyps", required=True)
        q.add_argument("--corpus", required=True)
        q.add_argument("--label", default=None)
        q.add_argument("--max-n", type=int, default=BleuConfig.max_n)
        q.add_argument("--smoothing", choices=("none", "add-k"), default=BleuConfig.smoothing)
        q.add_argument("--k", type=float, default=BleuConfig.k)
    q = ev.add_parser("coverage", parents=[common])
    q.add_argument("--hyps", required=True)
    q.add_argument("--corpus", default=None, help="Korpus do uzupełnienia liczby oczekiwanych zdań.")
    q.add_argument("--label", default=None)
    q = ev.add_parser("tcp", parents=[common])
    q.add_argument("--tc", type=float, required=True)
    q.add_argument("--cp", type=float, required=True)
    q.add_argument("--pt", type=float, required=True)
    q.add_argument("--label", default=None)

    p = sub.add_parser("score-external", parents=[common], help="Zewnętrzny scorer (proces albo HTTP).")
    p.add_argument("--endpoint", required=True, help="Komenda albo URL http(s)://.")
    p.add_argument("--pairs", default=None, help="JSONL z obiektami {src, mt, ref}.")
    p.add_argument("--hyps", default=None)
    p.add_argument("--corpus", default=None)
    p.add_argument("--label", default=None)
    p.add_argument("--timeout", type=float, default=600.0)

    p = sub.add_parser("report", parents=[common], help="Tabela zbiorcza z plików wyników JSON.")
    p.add_argument("inputs", nargs="+", help="Pliki JSON z 'eval' / 'score-external'.")
    p.add_argument("--csv", default=None)
    p.add_argument("--json", default=None)

    return parser


# --- helpers ------------------------------------------------------------------


def _path(args: argparse.Namespace, value: Optional[str]) -> Optional[str]:
    if value is None or not args.from_data:
        return value
    return str(DATA_PATH / value)


def _spec(args: argparse.Namespace) -> TokenizerSpec:
    return parse_tokenizer_arg(args.tokenizer)


def _template(args: argparse.Namespace) -> PromptTemplate:
    if getattr(args, "template", None):
        return PromptTemplate.load(_path(args, args.template))  # type: ignore[arg-type]
    return DEFAULT_TEMPLATE


def _subset_ids(args: argparse.Namespace, corpus_ids: List[str]) -> List[str]:
    if args.subset == "all" or not args.split:
        if args.subset != "all":
            raise UsageError(f"--subset {args.subset} requires --split")
        return corpus_ids
    split = load_split(_path(args, args.split))  # type: ignore[arg-type]
    return list(split.parts()[args.subset])


def _smoothing(args: argparse.Namespace) -> Smoothing:
    return Smoothing(args.smoothing, args.k)


def _result(args: argparse.Namespace, metric: str, payload: Dict[str, object]) -> Dict[str, object]:
    return {"metric": metric, "label": args.label, **payload}


# --- commands -----------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> None:
    corpus = parse_parallel_corpus(_path(args, args.src), _path(args, args.tgt), (args.src_lang, args.tgt_lang))  # type: ignore[arg-type]
    logger.info("Wczytano %d dokumentów, %d par zdań (%s)", len(corpus), corpus.sentence_count, corpus.lang_pair)
    save_corpus_jsonl(corpus, args.out)
    if args.export_text:
        src, tgt = serialize_parallel_text(corpus)
        Path(f"{args.export_text}.src").write_text(src, encoding="utf-8")
        Path(f"{args.export_text}.tgt").write_text(tgt, encoding="utf-8")


def cmd_split(args: argparse.Namespace) -> None:
    corpus = load_corpus_jsonl(_path(args, args.corpus))  # type: ignore[arg-type]
    split = split_dataset(corpus, args.seed, args.train_frac, args.dev_docs, args.test_docs)
    logger.info(
        "Split seed=%d: train=%d dev=%d test=%d odrzucone=%d",
        split.seed, len(split.train), len(split.dev), len(split.test), len(split.discarded),
    )
    save_split(split, args.out)


def cmd_stats(args: argparse.Namespace) -> None:
    corpus = load_corpus_jsonl(_path(args, args.corpus))  # type: ignore[arg-type]
    split = load_split(_path(args, args.split))  # type: ignore[arg-type]
    rows = corpus_stats(corpus, split)
    with open_output(args.out) as f:
        f.write(render_stats(rows, corpus.lang_pair))
    if args.csv:
        Path(args.csv).write_text(stats_to_csv(rows), encoding="utf-8", newline="")
        logger.info("Zapisano CSV: %s", args.csv)


def cmd_segment(args: argparse.Namespace) -> None:
    corpus = load_corpus_jsonl(_path(args, args.corpus))  # type: ignore[arg-type]
    ids = _subset_ids(args, corpus.doc_ids)
    lengths = parse_lengths(args.lengths)
    plans = segment_corpus(corpus, ids, lengths, _spec(args), args.workers, args.budget_side)
    oversized = sum(1 for p in plans for s in p.segments if s.oversized)
    logger.info("Plany: %d (dokumenty=%d, L=%s), segmenty ponad budżet: %d", len(plans), len(ids), lengths, oversized)
    save_plans_jsonl(plans, args.out)


def cmd_build_instructions(args: argparse.Namespace) -> None:
    corpus = load_corpus_jsonl(_path(args, args.corpus))  # type: ignore[arg-type]
    split = load_split(_path(args, args.split))  # type: ignore[arg-type]
    if args.schedule:
        schedule = load_schedule(_path(args, args.schedule))  # type: ignore[arg-type]
    else:
        schedule = build_length_schedule(list(split.train), parse_lengths(args.lengths), args.strategy, args.seed)
    if args.schedule_out:
        save_schedule(schedule, args.schedule_out)
    records = assemble_mixed(
        corpus,
        split,
        schedule,
        spec=_spec(args),
        template=_template(args),
        include_sentence_level=not args.no_sentence_level,
        sentence_budget=args.sentence_budget,
        sentence_docs=args.sentence_docs,
        doc_budget=args.doc_budget,
        seed=args.seed,
        budget_side=args.budget_side,
        workers=args.workers,
    )
    save_records_jsonl(records, args.out)


def cmd_build_eval_inputs(args: argparse.Namespace) -> None:
    corpus = load_corpus_jsonl(_path(args, args.corpus))  # type: ignore[arg-type]
    ids = _subset_ids(args, corpus.doc_ids)
    records = build_eval_inputs(corpus, ids, parse_length(args.length), _spec(args), _template(args), args.budget_side)
    logger.info("Wejścia ewaluacyjne: %d rekordów z %d dokumentów", len(records), len(ids))
    save_records_jsonl(records, args.out)


def cmd_render_prompts(args: argparse.Namespace) -> None:
    template = _template(args)
    records = load_records_jsonl(_path(args, args.instructions))  # type: ignore[arg-type]
    write_jsonl(
        ({"prompt": render_prompt(r, template), "output": r.output, "meta": r.meta.to_dict()} for r in records),
        args.out,
    )


def cmd_simulate(args: argparse.Namespace) -> None:
    corpus = load_corpus_jsonl(_path(args, args.corpus))  # type: ignore[arg-type]
    cfg = SimulatorConfig(
        tail_drop_prob=args.drop_prob,
        drop_count_dist=parse_drop_counts(args.drop_counts),
        noise=args.noise,
        seed=args.seed,
        drop_anywhere=args.drop_anywhere,
    )
    plans = load_plans_jsonl(_path(args, args.plans)) if args.plans else None  # type: ignore[arg-type]
    ids = None if plans is not None else _subset_ids(args, corpus.doc_ids)
    hyps = simulate_outputs(corpus, plans, cfg, ids, workers=args.workers)
    save_hypotheses_jsonl(hyps, args.out)


def cmd_eval(args: argparse.Namespace) -> None:
    if args.metric == "tcp":
        scores = discourse_scores(args.tc, args.cp, args.pt)
        value = round(scores.tcp, 1)
        if args.out:
            save_json(_result(args, "tcp", {**scores.to_dict(), "tcp": value}), args.out)
        print(f"{value:.1f}")
        return

    hyps = load_hypotheses_jsonl(_path(args, args.hyps))  # type: ignore[arg-type]
    if args.metric == "coverage":
        if args.corpus:
            hyps = resolve_hypotheses(hyps, load_corpus_jsonl(_path(args, args.corpus)))  # type: ignore[arg-type]
        report = coverage(hyps)
        by_length = coverage_by_length(hyps)
        logger.info("Pokrycie: %d/%d jednostek (%.2f%%)", report.full_count, len(report.per_doc), report.corpus_accuracy)
        payload = report.to_dict()
        payload["by_length"] = {str(k): r.corpus_accuracy for k, r in by_length.items()}
        save_json(_result(args, "coverage", payload), args.out)
        return

    corpus = load_corpus_jsonl(_path(args, args.corpus))  # type: ignore[arg-type]
    scorer = sbleu_for_corpus if args.metric == "sbleu" else dbleu_for_corpus
    bleu = scorer(hyps, corpus, _spec(args), max_n=args.max_n, smoothing=_smoothing(args))
    logger.info("%s: %s", args.metric, bleu)
    save_json(_result(args, args.metric, {"tokenizer": args.tokenizer, "bleu": bleu.to_dict()}), args.out)


def cmd_score_external(args: argparse.Namespace) -> None:
    if args.pairs:
        pairs = load_requests_jsonl(_path(args, args.pairs))  # type: ignore[arg-type]
    elif args.hyps and args.corpus:
        corpus = load_corpus_jsonl(_path(args, args.corpus))  # type: ignore[arg-type]
        pairs = document_requests(load_hypotheses_jsonl(_path(args, args.hyps)), corpus)  # type: ignore[arg-type]
    else:
        raise UsageError("--pairs or both --hyps and --corpus are required")
    result = score_external(pairs, args.endpoint, timeout=args.timeout)
    save_json(_result(args, "comet", result.to_dict()), args.out)


def cmd_report(args: argparse.Namespace) -> None:
    rows = build_report(load_json(_path(args, p)) for p in args.inputs)  # type: ignore[arg-type]
    with open_output(args.out) as f:
        f.write(render_report(rows))
    if args.csv:
        Path(args.csv).write_text(report_to_csv(rows), encoding="utf-8", newline="")
        logger.info("Zapisano CSV: %s", args.csv)
    if args.json:
        save_json(report_to_dicts(rows), args.json)


COMMANDS: Dict[str, Callable[[argparse.Namespace], None]] = {
    "ingest": cmd_ingest,
    "split": cmd_split,
    "stats": cmd_stats,
    "segment": cmd_segment,
    "build-instructions": cmd_build_instructions,
    "build-eval-inputs": cmd_build_eval_inputs,
    "render-prompts": cmd_render_prompts,
    "simulate": cmd_simulate,
    "eval": cmd_eval,
    "score-external": cmd_score_external,
    "report": cmd_report,
}


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """Zwraca kod wyjścia: 0 sukces, 1 błąd walidacji, 2 błąd I/O."""

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        setup_logging()
        logger.error("%s", exc)
        return exc.exit_code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    setup_logging(args.verbose, args.quiet)
    try:
        COMMANDS[args.command](args)
    except DmiError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("Błąd I/O: %s", exc)
        return 2
    finally:
        close_external_tokenizers()
    return 0


def main() -> None:  # entry point for setuptools console_scripts or `python -m dmi`
    sys.exit(cli())


if __name__ == "__main__":  # entry when called as `python -m dmi.cli`
    main()
