"""Dataset ingestion, replay mixing, synthetic corpus generation, and the
training/evaluation drivers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from saltkit.align import (
    NwScoring,
    align_nw,
    change_fraction,
    derive_masks,
    filter_by_change_ratio,
    mask_export_record,
    smooth_ai_mask,
)
from saltkit.figures import render_loss_curve, render_metric_report
from saltkit.loss import DpoConfig, LossWeights, rewards_and_accuracy
from saltkit.metrics import (
    GroupCounts,
    SageReport,
    aggregate_sage,
    rouge_l,
    rouge_n,
    sage_concept,
    sage_ratio_report,
    sage_word,
)
from saltkit.model import (
    AdamState,
    DecodeConfig,
    DivergedError,
    TinyLMParams,
    decode,
    dpo_gradients,
    load_checkpoint,
    opt_step,
    salt_gradients,
    save_checkpoint,
    sequence_logprob,
)
from saltkit.textproc import ConceptLexicon, DEFAULT_STOPWORDS, TokenSeq, Vocab, tokenize

VARIANTS = (
    "salt_l",
    "salt_ld",
    "salt_li",
    "salt_u",
    "salt_lu",
    "salt_l_rsalt_l",
    "salt_lu_rsalt_l",
    "salt_l_rsalt_lu",
    "salt_lu_rsalt_lu",
    "dpo",
)

SMOOTHING_MODES = ("imitation", "all", "off")

DATASET_FIELDS = ("id", "input", "ai_summary", "edit_summary", "origin")


class DataError(ValueError):
    """Malformed dataset input; CLI exit code 2."""


class ConfigError(ValueError):
    """Bad experiment configuration; CLI exit code 1."""


@dataclass
class TrainingExample:
    id: str
    input_seq: TokenSeq
    s_ai: TokenSeq
    s_edit: TokenSeq
    masks: object
    origin: str
    kept: bool
    op_string: str = ""

    def change_frac(self) -> float | None:
        if len(self.s_ai) == 0:
            return None
        return change_fraction(self.masks, "ai")


@dataclass
class ReplayConfig:
    ratio_unseen_to_seen: tuple[int, int] = (2, 1)
    seed: int = 0

    def __post_init__(self) -> None:
        unseen, seen = self.ratio_unseen_to_seen
        if unseen < 1 or seen < 1:
            raise ValueError("ratio components must be >= 1")


@dataclass
class ExperimentConfig:
    variant: str = "salt_lu"
    weights: LossWeights | None = None
    dpo: DpoConfig = field(default_factory=DpoConfig)
    steps: int = 100
    batch_size: int = 8
    lr: float = 0.05
    seed: int = 0
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    smoothing: str = "imitation"
    discard_threshold: float = 0.60

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.steps <= 0:
            raise ConfigError("steps must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.smoothing not in SMOOTHING_MODES:
            raise ConfigError(f"smoothing must be one of {SMOOTHING_MODES}")
        if not 0.0 <= self.discard_threshold <= 1.0:
            raise ConfigError("discard_threshold must lie in [0, 1]")

    @property
    def salt_variant(self) -> str:
        if self.variant == "dpo":
            return "salt_lu"
        return self.variant.split("_rsalt_")[0]

    @property
    def replay_variant(self) -> str | None:
        if "_rsalt_" in self.variant:
            return "rsalt_" + self.variant.split("_rsalt_")[1]
        return None

    @property
    def is_dpo(self) -> bool:
        return self.variant == "dpo"

    def resolved_weights(self) -> LossWeights:
        """Variant presets apply unless weights were given explicitly."""
        if self.weights is not None:
            return self.weights
        return LossWeights.for_variant(self.salt_variant)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {
            "variant",
            "weights",
            "dpo",
            "steps",
            "batch_size",
            "lr",
            "seed",
            "decode",
            "smoothing",
            "discard_threshold",
        }
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = dict(raw)
        try:
            if "weights" in kwargs and kwargs["weights"] is not None:
                kwargs["weights"] = _sub_config(LossWeights, kwargs["weights"], "weights")
            if "dpo" in kwargs:
                kwargs["dpo"] = _sub_config(DpoConfig, kwargs["dpo"], "dpo")
            if "decode" in kwargs:
                kwargs["decode"] = _sub_config(DecodeConfig, kwargs["decode"], "decode")
            return cls(**kwargs)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(raw)


def _sub_config(cls, raw, name: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name} must be a JSON object")
    fields = {f for f in cls.__dataclass_fields__}
    unknown = sorted(set(raw) - fields)
    if unknown:
        raise ConfigError(f"unknown {name} keys: {', '.join(unknown)}")
    return cls(**raw)


def align_example(
    example: TrainingExample,
    scoring: NwScoring,
    smooth: bool,
    discard_threshold: float,
) -> None:
    """Align s_ai against s_edit and attach masks / kept flag in place."""
    alignment = align_nw(example.s_ai, example.s_edit, scoring)
    masks = derive_masks(alignment)
    kept = True
    if smooth:
        masks = smooth_ai_mask(masks)
        kept = filter_by_change_ratio(masks, discard_threshold)
    example.masks = masks
    example.kept = kept
    example.op_string = alignment.op_string()


def load_dataset(
    path: str | Path,
    vocab: Vocab,
    *,
    scoring: NwScoring | None = None,
    smoothing: str = "imitation",
    discard_threshold: float = 0.60,
    grow: bool = True,
) -> tuple[list[TrainingExample], dict]:
    """Read line-delimited JSON records, tokenize, align, and derive masks.

    Smoothing plus the discard filter apply to seen-origin records under the
    default 'imitation' mode, to everything under 'all', never under 'off'.
    """
    if smoothing not in SMOOTHING_MODES:
        raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}")
    scoring = scoring or NwScoring()
    path = Path(path)
    examples: list[TrainingExample] = []
    kept_count = 0
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise DataError(f"{path}:{lineno}: record must be a JSON object")
        for fieldname in DATASET_FIELDS:
            if fieldname not in record:
                raise DataError(f"{path}:{lineno}: missing field {fieldname!r}")
            if not isinstance(record[fieldname], str):
                raise DataError(f"{path}:{lineno}: field {fieldname!r} must be a string")
        if record["origin"] not in ("seen", "unseen"):
            raise DataError(f"{path}:{lineno}: origin must be 'seen' or 'unseen'")

        edit_role = "imitation_summary" if record["origin"] == "seen" else "edit_summary"
        example = TrainingExample(
            id=record["id"],
            input_seq=tokenize(record["input"], vocab, grow=grow, source_role="input_U"),
            s_ai=tokenize(record["ai_summary"], vocab, grow=grow, source_role="ai_summary"),
            s_edit=tokenize(record["edit_summary"], vocab, grow=grow, source_role=edit_role),
            masks=None,
            origin=record["origin"],
            kept=True,
        )
        smooth = smoothing == "all" or (smoothing == "imitation" and example.origin == "seen")
        align_example(example, scoring, smooth, discard_threshold)
        kept_count += int(example.kept)
        examples.append(example)
    stats = {"total": len(examples), "kept": kept_count, "discarded": len(examples) - kept_count}
    return examples, stats


def mix_replay(
    unseen: list[TrainingExample],
    seen_pool: list[TrainingExample],
    cfg: ReplayConfig,
) -> list[TrainingExample]:
    """Sample floor(n * seen/unseen) kept seen examples and shuffle them in
    with the kept unseen ones, deterministically by seed."""
    kept_unseen = [ex for ex in unseen if ex.kept]
    unseen_part, seen_part = cfg.ratio_unseen_to_seen
    want = (len(kept_unseen) * seen_part) // unseen_part
    pool = [ex for ex in seen_pool if ex.kept]
    if len(pool) < want:
        raise DataError(f"replay needs {want} seen examples but the pool has only {len(pool)}")
    rng = np.random.default_rng(cfg.seed)
    chosen = [pool[i] for i in rng.choice(len(pool), size=want, replace=False)]
    mixed = kept_unseen + chosen
    order = rng.permutation(len(mixed))
    return [mixed[i] for i in order]


def gen_synthetic(
    seed: int,
    size: int,
    vocab_size: int,
    error_rate: float,
    out_dir: str | Path,
    *,
    insert_rate: float | None = None,
    eval_size: int | None = None,
    seen_size: int | None = None,
) -> dict:
    """Write a synthetic edit corpus with systematic error tokens.

    Inputs are content-word bags; the gold summary is the summary-worthy
    subset in input order; the AI summary corrupts gold positions with each
    word's designated error partner and occasionally injects one. The edit
    fixes every corruption, so true changed positions are known and saved to
    a truth sidecar.
    """
    if size <= 0 or vocab_size < 4 or not 0.0 <= error_rate <= 1.0:
        raise ValueError("size must be positive, vocab_size >= 4, error_rate in [0, 1]")
    insert_rate = error_rate / 2.0 if insert_rate is None else insert_rate
    eval_size = max(60, size // 4) if eval_size is None else eval_size
    seen_size = max(40, size // 2) if seen_size is None else seen_size
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    content = [f"c{i:02d}" for i in range(vocab_size)]
    error_of = {w: f"z{i:02d}" for i, w in enumerate(content)}
    worthy = set(content[: max(2, (vocab_size * 3) // 5)])

    def make_record(idx: int, origin: str) -> tuple[dict, dict]:
        while True:
            u_len = int(rng.integers(6, 10))
            u = [content[i] for i in rng.choice(vocab_size, size=min(u_len, vocab_size), replace=False)]
            gold = [w for w in u if w in worthy][:4]
            if len(gold) >= 2:
                break
        ai: list[str] = []
        error_positions: list[int] = []
        for w in gold:
            if rng.random() < error_rate:
                error_positions.append(len(ai))
                ai.append(error_of[w])
            else:
                ai.append(w)
            if rng.random() < insert_rate:
                extra = content[int(rng.integers(vocab_size))]
                error_positions.append(len(ai))
                ai.append(error_of[extra])
        record = {
            "id": f"{origin}-{idx:05d}",
            "input": " ".join(u),
            "ai_summary": " ".join(ai),
            "edit_summary": " ".join(gold),
            "origin": origin,
        }
        truth = {"id": record["id"], "ai_error_positions": error_positions}
        return record, truth

    def write_jsonl(path: Path, records: list[dict]) -> None:
        path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records), encoding="utf-8")

    train, truths = [], []
    for i in range(size):
        record, truth = make_record(i, "unseen")
        train.append(record)
        truths.append(truth)
    evals = []
    for i in range(eval_size):
        record, truth = make_record(i, "unseen")
        record["id"] = f"eval-{i:05d}"
        truth["id"] = record["id"]
        evals.append(record)
        truths.append(truth)
    seen = []
    for i in range(seen_size):
        record, truth = make_record(i, "seen")
        seen.append(record)
        truths.append(truth)
    pretrain = [
        {**r, "id": f"pre-{i:05d}", "edit_summary": r["ai_summary"]} for i, r in enumerate(train)
    ]

    paths = {
        "train": out / "train.jsonl",
        "eval": out / "eval.jsonl",
        "seen": out / "seen.jsonl",
        "pretrain": out / "pretrain.jsonl",
        "truth": out / "truth.jsonl",
        "lexicon": out / "lexicon.tsv",
    }
    write_jsonl(paths["train"], train)
    write_jsonl(paths["eval"], evals)
    write_jsonl(paths["seen"], seen)
    write_jsonl(paths["pretrain"], pretrain)
    write_jsonl(paths["truth"], truths)
    lexicon_lines = [f"{w}\tK{i:02d}" for i, w in enumerate(content)]
    lexicon_lines += [f"{content[0]} {content[1]}\tKB00", f"{content[2]} {content[3]}\tKB01"]
    paths["lexicon"].write_text("\n".join(lexicon_lines) + "\n", encoding="utf-8")

    return {
        "paths": {k: str(v) for k, v in paths.items()},
        "counts": {"train": len(train), "eval": len(evals), "seen": len(seen)},
        "content_words": content,
        "error_words": [error_of[w] for w in content],
    }


def _regenerate_seen_ai(
    params: TinyLMParams,
    vocab: Vocab,
    seen: list[TrainingExample],
    decode_cfg: DecodeConfig,
    scoring: NwScoring,
    discard_threshold: float,
) -> list[TrainingExample]:
    """Replace each seen example's AI summary by decoding the current
    checkpoint over its input, then re-derive imitation masks.

    Done once at mixing time, not per step.
    """
    refreshed = []
    for ex in seen:
        regenerated = decode(params, ex.input_seq, decode_cfg, vocab)
        regenerated.source_role = "ai_summary"
        updated = TrainingExample(
            id=ex.id,
            input_seq=ex.input_seq,
            s_ai=regenerated,
            s_edit=ex.s_edit,
            masks=None,
            origin="seen",
            kept=True,
        )
        align_example(updated, scoring, smooth=True, discard_threshold=discard_threshold)
        refreshed.append(updated)
    return refreshed


def _batches(indices: np.ndarray, batch_size: int):
    for start in range(0, len(indices), batch_size):
        yield indices[start : start + batch_size]


def run_training(
    cfg: ExperimentConfig,
    data_path: str | Path,
    out_dir: str | Path,
    *,
    seen_path: str | Path | None = None,
    init_checkpoint: str | Path | None = None,
    scoring: NwScoring | None = None,
) -> dict:
    """Train the configured variant and write checkpoint, loss log, and loss
    figure into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scoring = scoring or NwScoring()

    if init_checkpoint is not None:
        params, vocab, _, _ = load_checkpoint(init_checkpoint)
        grow = False
    else:
        params, vocab, grow = None, Vocab(), True

    examples, stats = load_dataset(
        data_path,
        vocab,
        scoring=scoring,
        smoothing=cfg.smoothing,
        discard_threshold=cfg.discard_threshold,
        grow=grow,
    )

    seen_examples: list[TrainingExample] = []
    if cfg.replay_variant is not None:
        if seen_path is None:
            raise ConfigError(f"variant {cfg.variant!r} needs a seen pool (--seen-pool)")
        seen_examples, _ = load_dataset(
            seen_path,
            vocab,
            scoring=scoring,
            smoothing=cfg.smoothing,
            discard_threshold=cfg.discard_threshold,
            grow=grow,
        )
    if grow:
        vocab.freeze()
    if params is None:
        params = TinyLMParams.zeros(len(vocab))

    if cfg.replay_variant is not None:
        seen_examples = _regenerate_seen_ai(
            params, vocab, [ex for ex in seen_examples if ex.kept], cfg.decode, scoring, cfg.discard_threshold
        )
        stream = mix_replay(examples, seen_examples, ReplayConfig(seed=cfg.seed))
    else:
        stream = [ex for ex in examples if ex.kept]
    if not stream:
        raise DataError("no trainable examples after filtering")

    ref_params = params.copy() if cfg.is_dpo else None
    state = AdamState.for_params(params, lr=cfg.lr)
    weights = cfg.resolved_weights()
    rng = np.random.default_rng(cfg.seed)
    dpo_cfg = cfg.dpo

    log_records: list[dict] = []
    step = 0
    try:
        while step < cfg.steps:
            order = rng.permutation(len(stream))
            for batch_idx in _batches(order, cfg.batch_size):
                batch = [stream[i] for i in batch_idx]
                grads = TinyLMParams.zeros(params.vocab_size)
                record: dict = {"step": step + 1, "variant": cfg.variant}
                if cfg.is_dpo:
                    loss_sum, logps = dpo_gradients(
                        params,
                        ref_params,
                        [(ex.input_seq.ids(), ex.s_edit.ids(), ex.s_ai.ids()) for ex in batch],
                        dpo_cfg,
                        grads,
                    )
                    _, _, acc = rewards_and_accuracy(logps, dpo_cfg)
                    total = loss_sum / len(batch)
                    record.update(total=total, ai_side=0.0, edit_side=0.0, dpo={"loss": total, "reward_acc": acc})
                else:
                    total = ai_side = edit_side = 0.0
                    for ex in batch:
                        variant = cfg.salt_variant
                        if ex.origin == "seen" and cfg.replay_variant is not None:
                            variant = {"rsalt_l": "salt_l", "rsalt_lu": "salt_lu"}[cfg.replay_variant]
                        t, a, e = salt_gradients(
                            params,
                            [(ex.input_seq.ids(), ex.s_ai.ids(), ex.s_edit.ids(), ex.masks)],
                            weights,
                            variant,
                            grads,
                            append_eos=True,
                        )
                        total += t
                        ai_side += a
                        edit_side += e
                    total /= len(batch)
                    ai_side /= len(batch)
                    edit_side /= len(batch)
                    record.update(total=total, ai_side=ai_side, edit_side=edit_side)
                if not np.isfinite(record["total"]):
                    raise DivergedError(f"diverged at step {step + 1}: non-finite loss")
                for arr in grads.arrays():
                    arr /= len(batch)
                opt_step(params, grads, state)
                step += 1
                log_records.append(record)
                if step >= cfg.steps:
                    break
    except DivergedError as exc:
        if "at step" in str(exc):
            raise
        raise DivergedError(f"diverged at step {step + 1}") from exc

    meta = {
        "variant": cfg.variant,
        "seed": cfg.seed,
        "lr": cfg.lr,
        "steps": step,
        "dpo_beta": dpo_cfg.beta,
        "decode": {
            "beam_size": cfg.decode.beam_size,
            "no_repeat_ngram": cfg.decode.no_repeat_ngram,
            "min_len": cfg.decode.min_len,
            "max_len": cfg.decode.max_len,
        },
        "replay_ai_source": "mixing_time_checkpoint" if cfg.replay_variant else None,
    }
    ckpt_path = save_checkpoint(out / "checkpoint.json", params, vocab, step, meta)
    log_path = out / "loss_log.jsonl"
    log_path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in log_records), encoding="utf-8")
    fig_path = render_loss_curve(log_records, out / "loss_curve.png")
    return {
        "checkpoint": str(ckpt_path),
        "loss_log": str(log_path),
        "figure": str(fig_path),
        "steps": step,
        "data_stats": stats,
    }


def run_eval(
    checkpoint_path: str | Path,
    data_path: str | Path,
    out_dir: str | Path,
    *,
    baseline_report_path: str | Path | None = None,
    ref_checkpoint_path: str | Path | None = None,
    decode_cfg: DecodeConfig | None = None,
    stopwords=None,
    lexicon: ConceptLexicon | None = None,
) -> dict:
    """Decode the eval set, score ROUGE and SAGE, and write the report, the
    per-example predictions, and a figure into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params, vocab, _, meta = load_checkpoint(checkpoint_path)
    if decode_cfg is None:
        d = meta.get("decode")
        decode_cfg = DecodeConfig(**d) if d else DecodeConfig()
    stopwords = DEFAULT_STOPWORDS if stopwords is None else stopwords
    lexicon = lexicon or ConceptLexicon([])

    ref_params = None
    if ref_checkpoint_path is not None:
        ref_params, ref_vocab, _, _ = load_checkpoint(ref_checkpoint_path)
        if ref_vocab.content_hash() != vocab.content_hash():
            raise DataError("reference checkpoint vocab does not match the eval checkpoint vocab")

    examples, _ = load_dataset(data_path, vocab, smoothing="off", grow=False)
    if not examples:
        raise DataError(f"{data_path}: no evaluation examples")

    rouge1s, rouge2s, rougels = [], [], []
    sage_reports = []
    predictions = []
    logp_pairs = []
    beta = meta.get("dpo_beta") or 0.1
    for ex in examples:
        s_new = decode(params, ex.input_seq, decode_cfg, vocab)
        r1 = rouge_n(s_new, ex.s_edit, 1)
        r2 = rouge_n(s_new, ex.s_edit, 2)
        rl = rouge_l(s_new, ex.s_edit)
        rouge1s.append(r1.f1)
        rouge2s.append(r2.f1)
        rougels.append(rl.f1)
        sage_reports.append(
            SageReport(
                word=sage_word(s_new, ex.s_ai, ex.s_edit, stopwords),
                concept=sage_concept(s_new, ex.s_ai, ex.s_edit, lexicon),
            )
        )
        predictions.append({"id": ex.id, "prediction": s_new.text(), "rouge1_f1": r1.f1})
        if ref_params is not None:
            logp_pairs.append(
                (
                    sequence_logprob(params, ex.input_seq, ex.s_edit),
                    sequence_logprob(params, ex.input_seq, ex.s_ai),
                    sequence_logprob(ref_params, ex.input_seq, ex.s_edit),
                    sequence_logprob(ref_params, ex.input_seq, ex.s_ai),
                )
            )

    corpus_sage = aggregate_sage(sage_reports)
    report = {
        "variant": meta.get("variant"),
        "examples": len(examples),
        "rouge1": float(np.mean(rouge1s)),
        "rouge2": float(np.mean(rouge2s)),
        "rougeL": float(np.mean(rougels)),
        "sage": corpus_sage.as_dict(),
        "ratios_vs_baseline": None,
        "reward_accuracy": None,
    }
    if baseline_report_path is not None:
        baseline = json.loads(Path(baseline_report_path).read_text(encoding="utf-8"))
        baseline_sage = SageReport(
            word=GroupCounts(**baseline["sage"]["word"]),
            concept=GroupCounts(**baseline["sage"]["concept"]),
        )
        report["ratios_vs_baseline"] = sage_ratio_report(corpus_sage, baseline_sage)
    if logp_pairs:
        _, _, accuracy = rewards_and_accuracy(logp_pairs, DpoConfig(beta=beta))
        report["reward_accuracy"] = accuracy

    report_path = out / "report.json"
    report_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    pred_path = out / "predictions.jsonl"
    pred_path.write_text(
        "".join(json.dumps(p, sort_keys=True) + "\n" for p in predictions), encoding="utf-8"
    )
    render_metric_report(report, out / "report.png")
    report["paths"] = {
        "report": str(report_path),
        "predictions": str(pred_path),
        "figure": str(out / "report.png"),
    }
    return report


def export_masks(
    data_path: str | Path,
    out_path: str | Path | None,
    *,
    smoothing: str = "imitation",
    discard_threshold: float = 0.60,
    scoring: NwScoring | None = None,
) -> list[dict]:
    """Mask export records for every dataset record (kept or not)."""
    vocab = Vocab()
    scoring = scoring or NwScoring()
    examples, _ = load_dataset(
        data_path, vocab, scoring=scoring, smoothing=smoothing, discard_threshold=discard_threshold
    )
    records = []
    for ex in examples:
        alignment = align_nw(ex.s_ai, ex.s_edit, scoring)
        records.append(mask_export_record(ex.id, ex.s_ai, ex.s_edit, alignment, ex.masks, ex.kept))
    if out_path is not None:
        Path(out_path).write_text(
            "".join(json.dumps(r, sort_keys=True) + "\n" for r in records), encoding="utf-8"
        )
    return records
