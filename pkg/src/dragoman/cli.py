"""Command-line entry point wiring the pipeline stages together.

One subcommand per phase: filter / select / eval / oracle / prompt / lm /
langid / version. All randomness is seeded from the run config (or --seed),
never from the clock, and --workers only parallelizes record scoring, so
outputs are byte-identical across runs and worker counts. Errors print a
machine-readable JSON object on stderr and exit non-zero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, charlm, langid, nbest, pipeline, prompts
from .corpus import read_corpus
from .errors import DragomanError

FORMAT_VERSIONS = {
    "langprofile": "LANGPROFILE v1",
    "char_lm": "CLM1 v1",
    "score_sidecar": "jsonl id/scores v1",
    "nbest": "jsonl id/source/hypotheses v1",
}


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=1,
                        help="record-parallel workers (default 1)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    _strict_flag(parser)


def _strict_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True,
                        help="abort on malformed corpus lines (default); "
                             "--no-strict skips and counts them")


def _read_texts(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _cmd_filter(args) -> int:
    cfg = pipeline.FilterRunConfig.from_file(args.config)
    report = pipeline.cmd_filter(cfg, workers=args.workers, strict=args.strict)
    print(report.to_text())
    return 0


def _cmd_select(args) -> int:
    cfg = pipeline.SelectRunConfig.from_file(args.config)
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, seed=args.seed)
    result = pipeline.cmd_select(cfg, workers=args.workers, strict=args.strict)
    print(result.to_tsv(), end="")
    return 0


def _cmd_eval(args) -> int:
    metrics_list = [m.strip() for m in args.metrics.split(",") if m.strip()]
    out = pipeline.cmd_eval(args.hyp, args.ref, metrics_list)
    if args.json:
        print(json.dumps(out, ensure_ascii=False, indent=2))
        return 0
    if "bleu" in out:
        b = out["bleu"]
        precisions = "/".join(f"{p:.1f}" for p in b["precisions"])
        print(f"BLEU = {b['score']:.2f} {precisions} (BP = {b['brevity_penalty']:.3f} "
              f"hyp_len = {b['hyp_len']} ref_len = {b['ref_len']})")
    if "chrf" in out:
        print(f"chrF = {out['chrf']['score']:.2f}")
    if "chrf++" in out:
        print(f"chrF++ = {out['chrf++']['score']:.2f}")
    return 0


def _cmd_oracle(args) -> int:
    lists = nbest.read_nbest(args.nbest)
    ref_lines = _read_texts(args.refs)
    if len(ref_lines) != len(lists):
        from .errors import LineCountMismatch
        raise LineCountMismatch(
            f"{args.refs} has {len(ref_lines)} lines for {len(lists)} n-best lists")
    references = {nb.id: ref for nb, ref in zip(lists, ref_lines)}
    widths = [int(w) for w in args.widths.split(",") if w.strip()]
    rows = nbest.beam_width_sweep(lists, references, widths)
    table = nbest.sweep_to_tsv(rows)
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "oracle_sweep.tsv").write_text(table, encoding="utf-8")
        selection = nbest.oracle_select(lists, references)
        with open(out_dir / "oracle_picks.jsonl", "w", encoding="utf-8") as fh:
            for nb in lists:
                fh.write(json.dumps({
                    "id": nb.id,
                    "picked_index": selection.picks[nb.id],
                    "baseline_index": selection.baseline_picks[nb.id],
                    "oracle_sentence_bleu": round(selection.sentence_scores[nb.id], 2),
                }, ensure_ascii=False) + "\n")
    print(table, end="")
    return 0


def _load_demo_pool(path: str, strict: bool) -> list[prompts.Demonstration]:
    corpus, _ = read_corpus(path, format="tsv", strict=strict)
    return [prompts.Demonstration(p.source, p.target) for p in corpus]


def _emit_prompts(rows, as_json: bool) -> None:
    if as_json:
        for row in rows:
            print(json.dumps(row, ensure_ascii=False))
    else:
        if len(rows) > 1:
            raise DragomanError("plain-text output holds exactly one prompt; use --json "
                                "for multiple queries")
        print(rows[0]["prompt"], end="")


def _cmd_prompt(args) -> int:
    if args.prompt_cmd == "format":
        corpus, _ = read_corpus(args.corpus, format="tsv", strict=args.strict)
        for p in corpus:
            example = prompts.format_pair(p.source, p.target)
            print(json.dumps({"id": p.id, "prompt": example.text,
                              "mask_spans": [list(s) for s in example.mask_spans]},
                             ensure_ascii=False))
        return 0

    if args.prompt_cmd == "fewshot":
        pool = _load_demo_pool(args.pool, args.strict)
        queries = [args.query] if args.query else _read_texts(args.queries)
        rows = []
        for i, query in enumerate(queries):
            if args.select == "similarity":
                demos = prompts.select_demos(pool, query, args.shots)
            else:
                demos = pool[:args.shots]
            text = prompts.build_fewshot(demos, query)
            rows.append({"id": i, "prompt": text, "mask_spans": [[0, len(text)]]})
        _emit_prompts(rows, args.json)
        return 0

    # contextual
    history_corpus, _ = read_corpus(args.history, format="tsv", strict=args.strict)
    history = [(p.source, p.target) for p in history_corpus]
    queries = [args.query] if args.query else _read_texts(args.queries)
    rows = []
    for i, query in enumerate(queries):
        text = prompts.contextual_prompt(history, args.window, query)
        rows.append({"id": i, "prompt": text, "mask_spans": [[0, len(text)]]})
    _emit_prompts(rows, args.json)
    return 0


def _cmd_lm(args) -> int:
    if args.lm_cmd == "train":
        texts = _read_texts(args.input)
        model = charlm.train_lm(texts, order=args.order, smoothing=args.smoothing,
                                add_k=args.add_k)
        charlm.save_lm(model, args.out)
        print(f"trained order-{model.order} {model.smoothing} model on "
              f"{len(texts)} lines -> {args.out}")
        return 0
    model = charlm.load_lm(args.model)
    for line in _read_texts(args.input):
        if not line:
            print("")
            continue
        if args.bpc:
            print(f"{charlm.bits_per_char(model, line)!r}")
        else:
            print(f"{charlm.log_prob(model, line)!r}")
    return 0


def _cmd_langid(args) -> int:
    if args.langid_cmd == "train":
        texts = _read_texts(args.input)
        profile = langid.train_profile(texts, args.label, order=args.order)
        langid.save_profile(profile, args.out)
        print(f"trained {profile.language} profile (order {profile.ngram_order}, "
              f"{len(profile.log_freqs)} ngrams) -> {args.out}")
        return 0
    profiles = [langid.load_profile(p) for p in args.profiles]
    for line in _read_texts(args.input):
        if not line.strip():
            print("")
            continue
        label, conf, _ = langid.classify(line, profiles)
        print(f"{label}\t{conf:.4f}")
    return 0


def _cmd_version(_args) -> int:
    print(f"dragoman {__version__}")
    for name, version in FORMAT_VERSIONS.items():
        print(f"format {name}: {version}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dragoman",
                                     description="parallel-corpus cleaning, selection, "
                                                 "evaluation and prompt toolkit")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("filter", help="phase-1 heuristic filtering")
    p.add_argument("--config", required=True)
    _common_flags(p)
    p.set_defaults(fn=_cmd_filter)

    p = sub.add_parser("select", help="phase-2 k-fold perplexity selection")
    p.add_argument("--config", required=True)
    _common_flags(p)
    p.set_defaults(fn=_cmd_select)

    p = sub.add_parser("eval", help="BLEU / chrF / chrF++ on line-aligned files")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True, action="append")
    p.add_argument("--metrics", default="bleu,chrf,chrf++")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("oracle", help="oracle rescoring of n-best lists")
    p.add_argument("--nbest", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--widths", default="1,3,5,10")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("prompt", help="prompt construction")
    prompt_sub = p.add_subparsers(dest="prompt_cmd", required=True)
    pf = prompt_sub.add_parser("format", help="training strings with mask spans")
    pf.add_argument("--corpus", required=True)
    _strict_flag(pf)
    pf.set_defaults(fn=_cmd_prompt)
    pw = prompt_sub.add_parser("fewshot", help="few-shot prompt for a query")
    pw.add_argument("--pool", required=True, help="demonstration pool (corpus TSV)")
    group = pw.add_mutually_exclusive_group(required=True)
    group.add_argument("--query")
    group.add_argument("--queries", help="file with one query per line")
    pw.add_argument("--shots", type=int, default=2)
    pw.add_argument("--select", choices=["head", "similarity"], default="head")
    pw.add_argument("--json", action="store_true")
    _strict_flag(pw)
    pw.set_defaults(fn=_cmd_prompt)
    pc = prompt_sub.add_parser("contextual", help="window of prior translations as demos")
    pc.add_argument("--history", required=True, help="prior (source, hypothesis) TSV")
    pc.add_argument("--window", type=int, default=2)
    group = pc.add_mutually_exclusive_group(required=True)
    group.add_argument("--query")
    group.add_argument("--queries")
    pc.add_argument("--json", action="store_true")
    _strict_flag(pc)
    pc.set_defaults(fn=_cmd_prompt)

    p = sub.add_parser("lm", help="character LM training and scoring")
    lm_sub = p.add_subparsers(dest="lm_cmd", required=True)
    lt = lm_sub.add_parser("train")
    lt.add_argument("--input", required=True, help="one training text per line")
    lt.add_argument("--order", type=int, default=5)
    lt.add_argument("--smoothing", choices=["witten_bell", "add_k"], default="witten_bell")
    lt.add_argument("--add-k", type=float, default=1.0, dest="add_k")
    lt.add_argument("--out", required=True)
    lt.set_defaults(fn=_cmd_lm)
    ls = lm_sub.add_parser("score")
    ls.add_argument("--model", required=True)
    ls.add_argument("--input", required=True)
    ls.add_argument("--bpc", action="store_true", help="bits per character instead of log2 prob")
    ls.set_defaults(fn=_cmd_lm)

    p = sub.add_parser("langid", help="language profile training and classification")
    li_sub = p.add_subparsers(dest="langid_cmd", required=True)
    lit = li_sub.add_parser("train")
    lit.add_argument("--input", required=True)
    lit.add_argument("--label", required=True)
    lit.add_argument("--order", type=int, default=langid.DEFAULT_ORDER)
    lit.add_argument("--out", required=True)
    lit.set_defaults(fn=_cmd_langid)
    lic = li_sub.add_parser("classify")
    lic.add_argument("--profiles", required=True, nargs="+")
    lic.add_argument("--input", required=True)
    lic.set_defaults(fn=_cmd_langid)

    p = sub.add_parser("version", help="tool and file-format versions")
    p.set_defaults(fn=_cmd_version)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DragomanError as err:
        print(json.dumps(err.payload(), ensure_ascii=False), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
