"""Tiny conditional next-token model with closed-form gradients, an Adam
optimizer, and constrained beam decoding."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from saltkit.align import EditMasks
from saltkit.loss import (
    EPS,
    REPLAY_TO_SALT,
    DpoConfig,
    LossWeights,
    SALT_VARIANTS,
)
from saltkit.textproc import BOS, EOS, PAD, Token, TokenSeq, Vocab

CHECKPOINT_FORMAT = "tinylm-v1"


class DivergedError(RuntimeError):
    """Raised when a gradient or loss stops being finite."""


@dataclass
class TinyLMParams:
    """Log-linear next-token model: logits are a previous-token row plus a
    bag-of-input sum plus a bias."""

    e_prev: np.ndarray  # [V, V]
    e_in: np.ndarray  # [V, V]
    b: np.ndarray  # [V]

    def __post_init__(self) -> None:
        self.e_prev = np.asarray(self.e_prev, dtype=np.float64)
        self.e_in = np.asarray(self.e_in, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        v = self.b.shape[0]
        if self.e_prev.shape != (v, v) or self.e_in.shape != (v, v):
            raise ValueError("parameter shapes are inconsistent")
        for arr in (self.e_prev, self.e_in, self.b):
            if not np.isfinite(arr).all():
                raise ValueError("parameters must be finite")

    @property
    def vocab_size(self) -> int:
        return self.b.shape[0]

    @classmethod
    def zeros(cls, vocab_size: int) -> "TinyLMParams":
        return cls(
            e_prev=np.zeros((vocab_size, vocab_size)),
            e_in=np.zeros((vocab_size, vocab_size)),
            b=np.zeros(vocab_size),
        )

    @classmethod
    def random(cls, vocab_size: int, rng: np.random.Generator, scale: float = 0.1) -> "TinyLMParams":
        return cls(
            e_prev=scale * rng.standard_normal((vocab_size, vocab_size)),
            e_in=scale * rng.standard_normal((vocab_size, vocab_size)),
            b=scale * rng.standard_normal(vocab_size),
        )

    def copy(self) -> "TinyLMParams":
        return TinyLMParams(self.e_prev.copy(), self.e_in.copy(), self.b.copy())

    def arrays(self):
        return (self.e_prev, self.e_in, self.b)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def _check_ids(ids, vocab_size: int) -> None:
    for i in ids:
        if not 0 <= i < vocab_size:
            raise ValueError(f"token id {i} out of range for vocab size {vocab_size}")


def _bag_logits(params: TinyLMParams, input_ids) -> np.ndarray:
    if len(input_ids) == 0:
        return np.zeros(params.vocab_size)
    return params.e_in[np.asarray(input_ids)].sum(axis=0)


def next_token_dist(params: TinyLMParams, input_bag, prev: int) -> np.ndarray:
    """Distribution over the next token given the previous token and the
    input bag."""
    input_ids = list(input_bag)
    _check_ids(input_ids + [prev], params.vocab_size)
    logits = params.e_prev[prev] + _bag_logits(params, input_ids) + params.b
    return _softmax(logits)


def _target_rows(params: TinyLMParams, input_ids, target_ids):
    """Per-position previous tokens and full next-token distributions."""
    prev = np.concatenate(([BOS], np.asarray(target_ids[:-1], dtype=np.int64)))
    logits = params.e_prev[prev] + _bag_logits(params, input_ids) + params.b
    return prev, _softmax(logits)


def sequence_probs(params: TinyLMParams, u: TokenSeq, target: TokenSeq) -> np.ndarray:
    """Probability of each realized target token given its predecessor and the
    input bag, clamped away from 0 and 1."""
    target_ids = target.ids()
    if not target_ids:
        return np.zeros(0)
    input_ids = u.ids()
    _check_ids(input_ids + target_ids, params.vocab_size)
    _, probs = _target_rows(params, input_ids, target_ids)
    p = probs[np.arange(len(target_ids)), target_ids]
    return np.clip(p, EPS, 1.0 - EPS)


def sequence_logprob(params: TinyLMParams, u: TokenSeq, target: TokenSeq) -> float:
    """Sequence log-probability: the sum of per-position token log-probs."""
    p = sequence_probs(params, u, target)
    return float(np.log(p).sum()) if len(p) else 0.0


def sequence_loss_grad(
    params: TinyLMParams,
    input_ids,
    target_ids,
    w_lik,
    w_unl,
    grads: TinyLMParams,
) -> float:
    """Weighted likelihood/unlikelihood loss over one target sequence and its
    exact parameter gradient, accumulated into `grads`.

    Per position t: w_lik[t] * -log p(y_t) + w_unl[t] * -log(1 - p(y_t)).
    """
    t_len = len(target_ids)
    if t_len == 0:
        return 0.0
    target = np.asarray(target_ids, dtype=np.int64)
    prev, probs = _target_rows(params, input_ids, target)
    p_y = np.clip(probs[np.arange(t_len), target], EPS, 1.0 - EPS)
    w_lik = np.asarray(w_lik, dtype=np.float64)
    w_unl = np.asarray(w_unl, dtype=np.float64)
    loss = float(np.sum(-w_lik * np.log(p_y) - w_unl * np.log(1.0 - p_y)))

    # d/dz of the likelihood term is w*(p - onehot); for the unlikelihood term
    # it is w*p_y/(1-p_y)*(onehot - p).
    coef_u = w_unl * p_y / (1.0 - p_y)
    dz = (w_lik - coef_u)[:, None] * probs
    dz[np.arange(t_len), target] += coef_u - w_lik

    np.add.at(grads.e_prev, prev, dz)
    col = dz.sum(axis=0)
    if len(input_ids):
        np.add.at(grads.e_in, np.asarray(input_ids), col)
    grads.b += col
    return loss


def sequence_logprob_grad(
    params: TinyLMParams,
    input_ids,
    target_ids,
) -> tuple[float, TinyLMParams]:
    """Sequence log-prob and its gradient (d log pi / d params)."""
    grads = TinyLMParams.zeros(params.vocab_size)
    t_len = len(target_ids)
    if t_len == 0:
        return 0.0, grads
    target = np.asarray(target_ids, dtype=np.int64)
    prev, probs = _target_rows(params, input_ids, target)
    p_y = np.clip(probs[np.arange(t_len), target], EPS, 1.0 - EPS)
    logp = float(np.log(p_y).sum())

    dz = -probs
    dz[np.arange(t_len), target] += 1.0
    np.add.at(grads.e_prev, prev, dz)
    col = dz.sum(axis=0)
    if len(input_ids):
        np.add.at(grads.e_in, np.asarray(input_ids), col)
    grads.b += col
    return logp, grads


def _salt_weight_vectors(masks: EditMasks, weights: LossWeights, side: str, literal: bool):
    if side == "ai":
        w_unl = masks.ai_changed * weights.w_ai_c
        w_lik = masks.ai_unchanged * weights.w_ai_nc
    else:
        if literal:
            w_unl = masks.e_changed * weights.w_e_c
            w_lik = masks.e_unchanged * weights.w_e_nc
        else:
            w_unl = np.zeros(len(masks.e_changed))
            w_lik = masks.e_changed * weights.w_e_c + masks.e_unchanged * weights.w_e_nc
    return w_lik.astype(np.float64), w_unl.astype(np.float64)


def salt_gradients(
    params: TinyLMParams,
    examples,
    weights: LossWeights,
    variant: str,
    grads: TinyLMParams,
    *,
    literal_changed_unlikelihood: bool = False,
    append_eos: bool = False,
) -> tuple[float, float, float]:
    """Summed SALT loss over `examples` with gradients accumulated in place.

    Examples are (input_ids, ai_ids, edit_ids, masks) tuples. With
    `append_eos`, targets are scored through their terminator as an extra
    unchanged (likelihood-weighted) position, mirroring sequences that carry
    an end marker; the terminator never receives the unlikelihood term.
    Returns (total, ai_side, edit_side).
    """
    if variant not in SALT_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    ai_total = 0.0
    edit_total = 0.0
    for input_ids, ai_ids, edit_ids, masks in examples:
        if masks is None:
            raise ValueError("masks are required")
        if variant in ("salt_u", "salt_lu"):
            w_lik, w_unl = _salt_weight_vectors(masks, weights, "ai", literal_changed_unlikelihood)
            target = list(ai_ids)
            if append_eos:
                target = target + [EOS]
                w_lik = np.concatenate((w_lik, [weights.w_ai_nc]))
                w_unl = np.concatenate((w_unl, [0.0]))
            ai_total += sequence_loss_grad(params, input_ids, target, w_lik, w_unl, grads)
        if variant in ("salt_l", "salt_ld", "salt_li", "salt_lu"):
            w_lik, w_unl = _salt_weight_vectors(masks, weights, "edit", literal_changed_unlikelihood)
            target = list(edit_ids)
            if append_eos:
                target = target + [EOS]
                w_lik = np.concatenate((w_lik, [weights.w_e_nc]))
                w_unl = np.concatenate((w_unl, [0.0]))
            edit_total += sequence_loss_grad(params, input_ids, target, w_lik, w_unl, grads)
    return ai_total + edit_total, ai_total, edit_total


def rsalt_gradients(
    params: TinyLMParams,
    unseen,
    seen,
    weights: LossWeights,
    variant: str,
    replay_variant: str,
    grads: TinyLMParams,
    *,
    append_eos: bool = False,
) -> tuple[float, float, float]:
    """Replay objective gradient: SALT on unseen plus SALT on seen examples."""
    unseen = list(unseen)
    if not unseen:
        raise ValueError("replay without new data is undefined: unseen batch is empty")
    total, ai_side, edit_side = salt_gradients(
        params, unseen, weights, variant, grads, append_eos=append_eos
    )
    seen_total, seen_ai, seen_edit = salt_gradients(
        params, list(seen), weights, REPLAY_TO_SALT[replay_variant], grads, append_eos=append_eos
    )
    return total + seen_total, ai_side + seen_ai, edit_side + seen_edit


def dpo_gradients(
    params: TinyLMParams,
    ref_params: TinyLMParams,
    examples,
    cfg: DpoConfig,
    grads: TinyLMParams,
    *,
    append_eos: bool = False,
) -> tuple[float, list[tuple[float, float, float, float]]]:
    """Summed DPO loss over (input_ids, chosen_ids, rejected_ids) examples.

    Returns the loss sum and the four per-example log-probs needed for the
    implicit rewards. With `append_eos` both sequences are scored through
    their terminator.
    """
    total = 0.0
    logps = []
    for input_ids, chosen_ids, rejected_ids in examples:
        if append_eos:
            chosen_ids = list(chosen_ids) + [EOS]
            rejected_ids = list(rejected_ids) + [EOS]
        lp_c, g_c = sequence_logprob_grad(params, input_ids, chosen_ids)
        lp_r, g_r = sequence_logprob_grad(params, input_ids, rejected_ids)
        lp_c_ref = _plain_logprob(ref_params, input_ids, chosen_ids)
        lp_r_ref = _plain_logprob(ref_params, input_ids, rejected_ids)
        x = cfg.beta * ((lp_c - lp_r) - (lp_c_ref - lp_r_ref))
        total += float(np.logaddexp(0.0, -x))
        # d/dx of -log sigmoid(x) is sigmoid(x) - 1
        coef = cfg.beta * (_sigmoid(x) - 1.0)
        for g_arr, gc_arr, gr_arr in zip(grads.arrays(), g_c.arrays(), g_r.arrays()):
            g_arr += coef * (gc_arr - gr_arr)
        logps.append((lp_c, lp_r, lp_c_ref, lp_r_ref))
    return total, logps


def _sigmoid(x: float) -> float:
    return float(1.0 / (1.0 + np.exp(-x))) if x >= 0 else float(np.exp(x) / (1.0 + np.exp(x)))


def _plain_logprob(params: TinyLMParams, input_ids, target_ids) -> float:
    if len(target_ids) == 0:
        return 0.0
    target = np.asarray(target_ids, dtype=np.int64)
    _, probs = _target_rows(params, input_ids, target)
    p_y = np.clip(probs[np.arange(len(target)), target], EPS, 1.0 - EPS)
    return float(np.log(p_y).sum())


@dataclass
class AdamState:
    """Adaptive-moment optimizer state; betas (0.9, 0.999), eps 1e-8."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: TinyLMParams | None = None
    v: TinyLMParams | None = None

    @classmethod
    def for_params(cls, params: TinyLMParams, lr: float = 0.05) -> "AdamState":
        return cls(lr=lr, m=TinyLMParams.zeros(params.vocab_size), v=TinyLMParams.zeros(params.vocab_size))


def opt_step(params: TinyLMParams, grads: TinyLMParams, state: AdamState) -> None:
    """One bias-corrected adaptive-moment update, in place."""
    for g in grads.arrays():
        if not np.isfinite(g).all():
            raise DivergedError("diverged")
    state.step += 1
    b1c = 1.0 - state.beta1**state.step
    b2c = 1.0 - state.beta2**state.step
    for p, g, m, v in zip(params.arrays(), grads.arrays(), state.m.arrays(), state.v.arrays()):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / b1c) / (np.sqrt(v / b2c) + state.eps)


@dataclass
class DecodeConfig:
    beam_size: int = 4
    no_repeat_ngram: int = 2
    min_len: int = 10
    max_len: int = 100

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.no_repeat_ngram < 0:
            raise ValueError("no_repeat_ngram must be >= 0")
        if self.min_len > self.max_len:
            raise ValueError("min_len must not exceed max_len")


def _creates_repeat(ids: list[int], candidate: int, n: int) -> bool:
    if n < 1 or len(ids) < n - 1:
        return False
    gram = tuple(ids[len(ids) - (n - 1) :]) + (candidate,)
    for i in range(len(ids) - n + 1):
        if tuple(ids[i : i + n]) == gram:
            return True
    return False


def decode(params: TinyLMParams, u: TokenSeq, cfg: DecodeConfig, vocab: Vocab) -> TokenSeq:
    """Beam search maximizing sequence log-probability.

    The terminator is forbidden before min_len, sequences truncate at max_len,
    continuations that would repeat an n-gram are pruned, and ties break by
    token id.
    """
    input_ids = u.ids()
    _check_ids(input_ids, params.vocab_size)
    bag = _bag_logits(params, input_ids)
    v = params.vocab_size

    live: list[tuple[list[int], float]] = [([], 0.0)]
    finished: list[tuple[float, list[int]]] = []
    for _ in range(cfg.max_len):
        candidates: list[tuple[float, list[int]]] = []
        for ids, score in live:
            prev = ids[-1] if ids else BOS
            logits = params.e_prev[prev] + bag + params.b
            logp = logits - logits.max()
            logp = logp - np.log(np.exp(logp).sum())
            for tok in range(v):
                if tok in (PAD, BOS):
                    continue
                if tok == EOS:
                    if len(ids) >= cfg.min_len:
                        finished.append((score + float(logp[tok]), ids))
                    continue
                if _creates_repeat(ids, tok, cfg.no_repeat_ngram):
                    continue
                candidates.append((score + float(logp[tok]), ids + [tok]))
        if not candidates:
            break
        candidates.sort(key=lambda c: (-c[0], tuple(c[1])))
        live = [(ids, score) for score, ids in candidates[: cfg.beam_size]]

    pool = finished + [(score, ids) for ids, score in live]
    if not pool:
        return TokenSeq([], "generated")
    _, best = min(pool, key=lambda c: (-c[0], tuple(c[1])))
    return TokenSeq([Token(vocab.surface_of(i), i) for i in best], "generated")


def save_checkpoint(
    path: str | Path,
    params: TinyLMParams,
    vocab: Vocab,
    step: int,
    meta: dict | None = None,
) -> Path:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "vocab_hash": vocab.content_hash(),
        "vocab": vocab.surfaces(),
        "V": params.vocab_size,
        "E_prev": params.e_prev.tolist(),
        "E_in": params.e_in.tolist(),
        "b": params.b.tolist(),
        "step": int(step),
        "meta": meta or {},
    }
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
    return path


def load_checkpoint(path: str | Path) -> tuple[TinyLMParams, Vocab, int, dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format {payload.get('format')!r}")
    vocab = Vocab.from_surfaces(payload["vocab"]).freeze()
    if vocab.content_hash() != payload["vocab_hash"]:
        raise ValueError("vocab hash mismatch: checkpoint is inconsistent")
    if payload["V"] != len(vocab):
        raise ValueError("checkpoint V does not match its vocab")
    params = TinyLMParams(
        e_prev=np.array(payload["E_prev"]),
        e_in=np.array(payload["E_in"]),
        b=np.array(payload["b"]),
    )
    if params.vocab_size != payload["V"]:
        raise ValueError("parameter shapes do not match V")
    return params, vocab, int(payload["step"]), payload.get("meta", {})
