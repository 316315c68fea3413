"""Command-line interface.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from saltkit.align import align_nw
from saltkit.figures import render_metric_report
from saltkit.metrics import GroupCounts, SageReport, aggregate_sage, sage_concept, sage_ratio_report, sage_word
from saltkit.model import DivergedError
from saltkit.pipeline import (
    ConfigError,
    DataError,
    ExperimentConfig,
    ReplayConfig,
    export_masks,
    gen_synthetic,
    load_dataset,
    mix_replay,
    run_eval,
    run_training,
)
from saltkit.textproc import ConceptLexicon, DEFAULT_STOPWORDS, Vocab, load_stopwords, tokenize


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write_jsonl(path, records):
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def cmd_align(args) -> int:
    vocab = Vocab()
    examples, _ = load_dataset(args.data, vocab, smoothing="off")
    records = []
    for ex in examples:
        alignment = align_nw(ex.s_ai, ex.s_edit)
        records.append(
            {
                "id": ex.id,
                "ai_tokens": ex.s_ai.surfaces(),
                "edit_tokens": ex.s_edit.surfaces(),
                "ops": alignment.op_string(),
                "score": alignment.score,
            }
        )
    _write_jsonl(args.out, records)
    return 0


def cmd_mask(args) -> int:
    records = export_masks(
        args.data,
        args.out,
        smoothing=args.smoothing,
        discard_threshold=args.threshold,
    )
    if args.out is None:
        _write_jsonl(None, records)
    return 0


def cmd_mix(args) -> int:
    vocab = Vocab()
    unseen, _ = load_dataset(args.data, vocab)
    seen, _ = load_dataset(args.seen_pool, vocab)
    mixed = mix_replay(unseen, seen, ReplayConfig(seed=args.seed or 0))
    _write_jsonl(args.out, [{"id": ex.id, "origin": ex.origin} for ex in mixed])
    return 0


def cmd_gen_synth(args) -> int:
    info = gen_synthetic(
        seed=args.seed or 0,
        size=args.size,
        vocab_size=args.vocab_size,
        error_rate=args.error_rate,
        out_dir=args.out,
    )
    sys.stdout.write(json.dumps(info["counts"], sort_keys=True) + "\n")
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    summary = run_training(
        cfg,
        args.data,
        args.out,
        seen_path=args.seen_pool,
        init_checkpoint=args.init,
    )
    sys.stdout.write(json.dumps({k: summary[k] for k in ("checkpoint", "steps")}, sort_keys=True) + "\n")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args) if args.config else None
    lexicon = ConceptLexicon.from_file(args.lexicon) if args.lexicon else None
    stopwords = load_stopwords(args.stopwords) if args.stopwords else None
    report = run_eval(
        args.checkpoint,
        args.data,
        args.out,
        baseline_report_path=args.baseline_report,
        ref_checkpoint_path=args.ref,
        decode_cfg=cfg.decode if cfg else None,
        stopwords=stopwords,
        lexicon=lexicon,
    )
    sys.stdout.write(json.dumps({"rouge1": report["rouge1"], "report": report["paths"]["report"]}) + "\n")
    return 0


def cmd_sage(args) -> int:
    """Score pre-generated summaries: records need new_summary, ai_summary,
    edit_summary (and id)."""
    vocab = Vocab()
    stopwords = load_stopwords(args.stopwords) if args.stopwords else DEFAULT_STOPWORDS
    lexicon = ConceptLexicon.from_file(args.lexicon) if args.lexicon else ConceptLexicon([])
    reports = []
    path = Path(args.data)
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        for fieldname in ("new_summary", "ai_summary", "edit_summary"):
            if fieldname not in record:
                raise DataError(f"{path}:{lineno}: missing field {fieldname!r}")
        s_new = tokenize(record["new_summary"], vocab, grow=True, source_role="generated")
        s_ai = tokenize(record["ai_summary"], vocab, grow=True, source_role="ai_summary")
        s_edit = tokenize(record["edit_summary"], vocab, grow=True, source_role="edit_summary")
        reports.append(
            SageReport(
                word=sage_word(s_new, s_ai, s_edit, stopwords),
                concept=sage_concept(s_new, s_ai, s_edit, lexicon),
            )
        )
    if not reports:
        raise DataError(f"{path}: no records")
    corpus = aggregate_sage(reports)
    out = {"examples": len(reports), "sage": corpus.as_dict(), "ratios_vs_baseline": None}
    if args.baseline_report:
        baseline = json.loads(Path(args.baseline_report).read_text(encoding="utf-8"))
        baseline_sage = SageReport(
            word=GroupCounts(**baseline["sage"]["word"]),
            concept=GroupCounts(**baseline["sage"]["concept"]),
        )
        out["ratios_vs_baseline"] = sage_ratio_report(corpus, baseline_sage)
    text = json.dumps(out, sort_keys=True, indent=2) + "\n"
    if args.out:
        out_path = Path(args.out)
        out_path.mkdir(parents=True, exist_ok=True) if out_path.suffix == "" else None
        target = out_path / "sage_report.json" if out_path.suffix == "" else out_path
        target.write_text(text, encoding="utf-8")
        fig = {"variant": "sage", "rouge1": 0.0, "rouge2": 0.0, "rougeL": 0.0, **out}
        render_metric_report(fig, target.with_suffix(".png"))
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="saltkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="emit alignment ops per dataset record")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("mask", help="emit mask export records")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.add_argument("--smoothing", default="imitation", choices=("imitation", "all", "off"))
    p.add_argument("--threshold", type=float, default=0.60)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("mix", help="sample a replay mix from a seen pool")
    p.add_argument("--data", required=True)
    p.add_argument("--seen-pool", required=True, dest="seen_pool")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("gen-synth", help="generate a synthetic edit corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--size", type=int, default=500)
    p.add_argument("--vocab-size", type=int, default=30, dest="vocab_size")
    p.add_argument("--error-rate", type=float, default=0.3, dest="error_rate")
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="train a variant")
    p.add_argument("--config")
    p.add_argument("--data", required=True)
    p.add_argument("--seen-pool", dest="seen_pool")
    p.add_argument("--init", help="initial checkpoint")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="decode and score an eval set")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--config")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--baseline-report", dest="baseline_report")
    p.add_argument("--ref", help="reference checkpoint for reward accuracy")
    p.add_argument("--stopwords")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sage", help="SAGE counts for pre-generated summaries")
    p.add_argument("--data", required=True)
    p.add_argument("--stopwords")
    p.add_argument("--lexicon")
    p.add_argument("--baseline-report", dest="baseline_report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sage)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args) or 0
    except ConfigError as exc:
        print(f"saltkit: config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"saltkit: data error: {exc}", file=sys.stderr)
        return 2
    except DivergedError as exc:
        print(f"saltkit: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
