"""Training objectives: alignment-weighted likelihood/unlikelihood sums, replay
composition, and the preference (DPO) loss."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from saltkit.align import EditMasks

EPS = 1e-7

SALT_VARIANTS = ("salt_l", "salt_ld", "salt_li", "salt_u", "salt_lu")
RSALT_VARIANTS = ("rsalt_l", "rsalt_lu")

# Replay terms reuse the per-example objective with the replay variant's sides.
REPLAY_TO_SALT = {"rsalt_l": "salt_l", "rsalt_lu": "salt_lu"}


@dataclass
class LossWeights:
    """Non-negative magnitudes for the four token classes.

    The term kind (likelihood vs unlikelihood) carries the direction; weights
    only scale. Variant presets adjust the changed-edit-token weight.
    """

    w_ai_c: float = 1.0
    w_ai_nc: float = 1.0
    w_e_c: float = 1.0
    w_e_nc: float = 1.0

    def __post_init__(self) -> None:
        for name in ("w_ai_c", "w_ai_nc", "w_e_c", "w_e_nc"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def for_variant(cls, variant: str) -> "LossWeights":
        if variant == "salt_li":
            return cls(w_e_c=1.2)
        if variant == "salt_ld":
            return cls(w_e_c=0.5)
        return cls()


@dataclass
class DpoConfig:
    beta: float = 0.1

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError("beta must be positive")


@dataclass
class LossBreakdown:
    """Objective value split by side, with a per-token term ledger."""

    total: float = 0.0
    ai_side: float = 0.0
    edit_side: float = 0.0
    per_token: list[tuple[int, str, str, float]] = field(default_factory=list)

    def merge(self, other: "LossBreakdown") -> "LossBreakdown":
        return LossBreakdown(
            total=self.total + other.total,
            ai_side=self.ai_side + other.ai_side,
            edit_side=self.edit_side + other.edit_side,
            per_token=self.per_token + other.per_token,
        )


def clamp_probs(probs) -> np.ndarray:
    return np.clip(np.asarray(probs, dtype=np.float64), EPS, 1.0 - EPS)


def term_likelihood(p: float) -> float:
    """-log p: small when the realized token is probable."""
    return float(-np.log(clamp_probs(p)))


def term_unlikelihood(p: float) -> float:
    """-log(1 - p): small when the realized token is already improbable."""
    return float(-np.log(1.0 - clamp_probs(p)))


def _check_lengths(probs: np.ndarray, mask: np.ndarray, side: str) -> None:
    if len(probs) != len(mask):
        raise ValueError(f"{side} probs length {len(probs)} != mask length {len(mask)}")


def loss_ai_side(probs, masks: EditMasks, weights: LossWeights) -> LossBreakdown:
    """Unlikelihood on changed AI tokens, likelihood on unchanged ones."""
    p = clamp_probs(probs)
    _check_lengths(p, masks.ai_changed, "ai")
    per_token = []
    for t in range(len(p)):
        if masks.ai_changed[t]:
            per_token.append((t, "ai", "unlikelihood", weights.w_ai_c * term_unlikelihood(p[t])))
        else:
            per_token.append((t, "ai", "likelihood", weights.w_ai_nc * term_likelihood(p[t])))
    total = float(sum(v for *_, v in per_token))
    return LossBreakdown(total=total, ai_side=total, edit_side=0.0, per_token=per_token)


def loss_edit_side(
    probs,
    masks: EditMasks,
    weights: LossWeights,
    literal_changed_unlikelihood: bool = False,
) -> LossBreakdown:
    """Likelihood on the edit summary, with class-specific weights.

    Both classes use the likelihood term so that newly added tokens are pulled
    up, not penalized; `literal_changed_unlikelihood` switches the changed
    class to the unlikelihood form for comparison.
    """
    p = clamp_probs(probs)
    _check_lengths(p, masks.e_changed, "edit")
    per_token = []
    for t in range(len(p)):
        if masks.e_changed[t]:
            if literal_changed_unlikelihood:
                per_token.append((t, "edit", "unlikelihood", weights.w_e_c * term_unlikelihood(p[t])))
            else:
                per_token.append((t, "edit", "likelihood", weights.w_e_c * term_likelihood(p[t])))
        else:
            per_token.append((t, "edit", "likelihood", weights.w_e_nc * term_likelihood(p[t])))
    total = float(sum(v for *_, v in per_token))
    return LossBreakdown(total=total, ai_side=0.0, edit_side=total, per_token=per_token)


def loss_salt(
    probs_ai,
    probs_edit,
    masks: EditMasks,
    weights: LossWeights,
    variant: str = "salt_lu",
    literal_changed_unlikelihood: bool = False,
) -> LossBreakdown:
    """Per-example objective for one SALT variant.

    salt_l / salt_ld / salt_li use only the edit side, salt_u only the AI
    side, salt_lu both.
    """
    if variant not in SALT_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if masks is None:
        raise ValueError("masks are required")
    out = LossBreakdown()
    if variant in ("salt_u", "salt_lu"):
        out = out.merge(loss_ai_side(probs_ai, masks, weights))
    if variant in ("salt_l", "salt_ld", "salt_li", "salt_lu"):
        out = out.merge(loss_edit_side(probs_edit, masks, weights, literal_changed_unlikelihood))
    return out


def loss_rsalt(
    batch_unseen,
    batch_seen,
    weights: LossWeights,
    variant: str = "salt_lu",
    replay_variant: str = "rsalt_lu",
) -> LossBreakdown:
    """Replay objective: SALT over the unseen batch plus SALT over the sampled
    seen batch (imitation masks), with the replay variant choosing the sides
    applied to seen examples.

    Batches are sequences of (probs_ai, probs_edit, masks) triples.
    """
    if replay_variant not in RSALT_VARIANTS:
        raise ValueError(f"unknown replay variant {replay_variant!r}")
    if not batch_unseen:
        raise ValueError("replay without new data is undefined: unseen batch is empty")
    out = LossBreakdown()
    for probs_ai, probs_edit, masks in batch_unseen:
        out = out.merge(loss_salt(probs_ai, probs_edit, masks, weights, variant))
    for probs_ai, probs_edit, masks in batch_seen:
        out = out.merge(loss_salt(probs_ai, probs_edit, masks, weights, REPLAY_TO_SALT[replay_variant]))
    return out


def _log_sigmoid(x: float) -> float:
    # -log(sigmoid(x)) computed as logaddexp for stability at large |x|
    return float(np.logaddexp(0.0, -x))


def dpo_loss(
    logp_chosen_theta: float,
    logp_rejected_theta: float,
    logp_chosen_ref: float,
    logp_rejected_ref: float,
    cfg: DpoConfig,
) -> float:
    """-log sigmoid(beta * (log-ratio under theta - log-ratio under ref))."""
    lratio_theta = logp_chosen_theta - logp_rejected_theta
    lratio_ref = logp_chosen_ref - logp_rejected_ref
    return _log_sigmoid(cfg.beta * (lratio_theta - lratio_ref))


def rewards_and_accuracy(pairs, cfg: DpoConfig):
    """Implicit rewards and the fraction of strict chosen-over-rejected wins.

    `pairs` holds (logp_chosen_theta, logp_rejected_theta, logp_chosen_ref,
    logp_rejected_ref) per example. Ties are not wins.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty pair list")
    chosen = np.array([cfg.beta * (ct - cr) for ct, _, cr, _ in pairs])
    rejected = np.array([cfg.beta * (rt - rr) for _, rt, _, rr in pairs])
    accuracy = float(np.mean(chosen > rejected))
    return chosen, rejected, accuracy
