import math

import numpy as np
import pytest

from saltkit.align import EditMasks
from saltkit.loss import (
    EPS,
    DpoConfig,
    LossWeights,
    dpo_loss,
    loss_ai_side,
    loss_edit_side,
    loss_rsalt,
    loss_salt,
    rewards_and_accuracy,
    term_likelihood,
    term_unlikelihood,
)


def masks_of(ai_changed, e_changed):
    ai = np.asarray(ai_changed, dtype=np.int64)
    e = np.asarray(e_changed, dtype=np.int64)
    return EditMasks(ai, 1 - ai, e, 1 - e)


def test_term_fixtures():
    assert term_unlikelihood(0.5) == pytest.approx(0.693147, abs=1e-6)
    assert term_unlikelihood(EPS) == pytest.approx(0.0, abs=1e-6)
    assert term_unlikelihood(0.9) == pytest.approx(2.302585, abs=1e-6)
    assert term_likelihood(1 - EPS) == pytest.approx(0.0, abs=1e-6)
    assert term_likelihood(0.5) == pytest.approx(0.693147, abs=1e-6)
    assert term_likelihood(0.25) == pytest.approx(1.386294, abs=1e-6)


def test_term_monotonicity():
    ps = np.linspace(0.01, 0.99, 50)
    unl = [term_unlikelihood(p) for p in ps]
    lik = [term_likelihood(p) for p in ps]
    assert all(a < b for a, b in zip(unl, unl[1:]))
    assert all(a > b for a, b in zip(lik, lik[1:]))


def test_loss_ai_side_worked_example():
    masks = masks_of([0, 1], [0])
    out = loss_ai_side([0.8, 0.6], masks, LossWeights())
    assert out.total == pytest.approx(0.22314 + 0.91629, abs=1e-4)
    assert out.ai_side == out.total
    assert out.edit_side == 0.0


def test_loss_ai_side_degenerate_cases():
    masks = masks_of([0, 0], [0])
    assert loss_ai_side([1 - EPS, 1 - EPS], masks, LossWeights()).total == pytest.approx(0.0, abs=1e-5)
    masks = masks_of([1, 1], [0])
    assert loss_ai_side([EPS, EPS], masks, LossWeights()).total == pytest.approx(0.0, abs=1e-5)


def test_loss_ai_side_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        loss_ai_side([0.5], masks_of([0, 1], [0]), LossWeights())


def test_loss_edit_side_worked_example():
    masks = masks_of([0], [0, 1])
    out = loss_edit_side([0.5, 0.5], masks, LossWeights(w_e_c=1.2))
    assert out.total == pytest.approx(1.524924, abs=1e-6)
    assert out.edit_side == out.total


def test_loss_edit_side_is_nll_at_unit_weights():
    masks = masks_of([0], [0, 1, 1, 0])
    probs = [0.9, 0.4, 0.7, 0.2]
    out = loss_edit_side(probs, masks, LossWeights())
    assert out.total == pytest.approx(-sum(math.log(p) for p in probs), abs=1e-9)


def test_loss_edit_side_empty():
    masks = masks_of([0], [])
    assert loss_edit_side([], masks, LossWeights()).total == 0.0


def test_loss_edit_side_literal_mode():
    masks = masks_of([0], [1, 0])
    out = loss_edit_side([0.3, 0.5], masks, LossWeights(), literal_changed_unlikelihood=True)
    expected = term_unlikelihood(0.3) + term_likelihood(0.5)
    assert out.total == pytest.approx(expected, abs=1e-9)


def test_salt_variant_selectors():
    masks = masks_of([0, 1], [0, 1])
    probs_ai = [0.8, 0.6]
    probs_edit = [0.5, 0.5]
    w = LossWeights(w_e_c=1.2)
    edit_only = loss_salt(probs_ai, probs_edit, masks, w, "salt_l")
    assert edit_only.total == pytest.approx(loss_edit_side(probs_edit, masks, w).total)
    assert edit_only.ai_side == 0.0
    ai_only = loss_salt(probs_ai, probs_edit, masks, w, "salt_u")
    assert ai_only.total == pytest.approx(loss_ai_side(probs_ai, masks, w).total)
    assert ai_only.edit_side == 0.0
    both = loss_salt(probs_ai, probs_edit, masks, w, "salt_lu")
    assert both.total == pytest.approx(1.1394342831883648 + 1.5249237972318796, abs=1e-9)


def test_salt_degenerate_weight_identities():
    masks = masks_of([1, 0], [0, 1])
    probs_ai = [0.4, 0.7]
    probs_edit = [0.6, 0.3]
    no_ai = LossWeights(w_ai_c=0.0, w_ai_nc=0.0)
    full = loss_salt(probs_ai, probs_edit, masks, no_ai, "salt_lu")
    assert full.total == pytest.approx(loss_edit_side(probs_edit, masks, no_ai).total, abs=1e-12)
    no_edit = LossWeights(w_e_c=0.0, w_e_nc=0.0)
    full = loss_salt(probs_ai, probs_edit, masks, no_edit, "salt_lu")
    assert full.total == pytest.approx(loss_ai_side(probs_ai, masks, no_edit).total, abs=1e-12)


def test_salt_requires_masks():
    with pytest.raises(ValueError, match="masks"):
        loss_salt([0.5], [0.5], None, LossWeights(), "salt_lu")
    with pytest.raises(ValueError, match="variant"):
        loss_salt([0.5], [0.5], masks_of([0], [0]), LossWeights(), "salt_z")


def test_breakdown_additivity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n_ai = rng.integers(1, 6)
        n_e = rng.integers(1, 6)
        masks = masks_of(rng.integers(0, 2, n_ai), rng.integers(0, 2, n_e))
        out = loss_salt(rng.uniform(0.05, 0.95, n_ai), rng.uniform(0.05, 0.95, n_e),
                        masks, LossWeights(0.3, 1.4, 0.8, 1.1), "salt_lu")
        assert out.total == pytest.approx(out.ai_side + out.edit_side, abs=1e-9)
        assert out.total == pytest.approx(sum(v for *_, v in out.per_token), abs=1e-9)


def test_rsalt_composition():
    masks = masks_of([0, 1], [0, 1])
    item = ([0.8, 0.6], [0.5, 0.5], masks)
    w = LossWeights()
    alone = loss_rsalt([item], [], w, "salt_lu", "rsalt_lu")
    assert alone.total == pytest.approx(loss_salt(*item, w, "salt_lu").total, abs=1e-12)
    both = loss_rsalt([item], [item], w, "salt_lu", "rsalt_lu")
    assert both.total == pytest.approx(2 * alone.total, abs=1e-9)


def test_rsalt_replay_l_is_mle_on_seen():
    masks = masks_of([1, 0], [1, 0, 1])
    probs_edit = [0.4, 0.9, 0.2]
    item_unseen = ([0.5, 0.5], [0.5, 0.5, 0.5], masks_of([0, 0], [0, 0, 0]))
    item_seen = ([0.8, 0.1], probs_edit, masks)
    w = LossWeights()
    out = loss_rsalt([item_unseen], [item_seen], w, "salt_l", "rsalt_l")
    seen_part = out.total - loss_salt(*item_unseen, w, "salt_l").total
    assert seen_part == pytest.approx(-sum(math.log(p) for p in probs_edit), abs=1e-9)


def test_rsalt_empty_unseen_errors():
    with pytest.raises(ValueError, match="unseen"):
        loss_rsalt([], [([0.5], [0.5], masks_of([0], [0]))], LossWeights())


def test_dpo_fixtures():
    cfg = DpoConfig(beta=0.5)
    assert dpo_loss(0.0, 0.0, 0.0, 0.0, cfg) == pytest.approx(0.693147, abs=1e-6)
    # theta ratio exceeds ref ratio by 1.0
    assert dpo_loss(-1.0, -3.0, -2.0, -3.0, cfg) == pytest.approx(0.474077, abs=1e-6)
    assert dpo_loss(100.0, -100.0, 0.0, 0.0, cfg) == pytest.approx(0.0, abs=1e-6)


def test_dpo_constant_shift_invariance():
    cfg = DpoConfig(beta=0.1)
    base = dpo_loss(-1.2, -3.4, -2.0, -2.5, cfg)
    shifted = dpo_loss(-1.2 + 7.0, -3.4 + 7.0, -2.0 + 7.0, -2.5 + 7.0, cfg)
    assert shifted == pytest.approx(base, abs=1e-9)


def test_rewards_and_accuracy():
    cfg = DpoConfig(beta=0.1)
    chosen, rejected, acc = rewards_and_accuracy([(-2.0, -3.0, -2.0, -3.0)], cfg)
    assert chosen[0] == 0.0 and rejected[0] == 0.0
    assert acc == 0.0  # ties are not wins
    _, _, acc = rewards_and_accuracy([(0.0, -1.0, -2.0, 0.0)], cfg)
    assert acc == 1.0


def test_rewards_two_path_oracle():
    rng = np.random.default_rng(7)
    cfg = DpoConfig(beta=0.3)
    token_logps = rng.uniform(-3, -0.1, size=(20, 4, 5))  # per-token logs
    pairs = [tuple(token_logps[i, j].sum() for j in range(4)) for i in range(20)]
    chosen, rejected, _ = rewards_and_accuracy(pairs, cfg)
    for i in range(20):
        manual_c = cfg.beta * (sum(token_logps[i, 0]) - sum(token_logps[i, 2]))
        manual_r = cfg.beta * (sum(token_logps[i, 1]) - sum(token_logps[i, 3]))
        assert chosen[i] == pytest.approx(manual_c, abs=1e-9)
        assert rejected[i] == pytest.approx(manual_r, abs=1e-9)


def test_rewards_empty_errors():
    with pytest.raises(ValueError):
        rewards_and_accuracy([], DpoConfig())


def test_weights_validation_and_presets():
    with pytest.raises(ValueError):
        LossWeights(w_ai_c=-0.1)
    assert LossWeights.for_variant("salt_li").w_e_c == pytest.approx(1.2)
    assert LossWeights.for_variant("salt_ld").w_e_c == pytest.approx(0.5)
    assert LossWeights.for_variant("salt_lu") == LossWeights()


def test_dpo_config_validation():
    with pytest.raises(ValueError):
        DpoConfig(beta=0.0)
