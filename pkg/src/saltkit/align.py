"""Global token alignment and the changed/unchanged indicator masks."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from saltkit.textproc import TokenSeq

OP_KINDS = ("C", "S", "I", "D")


@dataclass(frozen=True)
class NwScoring:
    """Match/mismatch/gap scores for global alignment.

    A mismatch costs exactly two gaps, so substituting a token ties with
    deleting it and inserting its replacement; the traceback preference
    decides such ties deterministically.
    """

    match: int = 1
    mismatch: int = -2
    gap: int = -1

    def __post_init__(self) -> None:
        if self.match <= self.mismatch:
            raise ValueError("match score must exceed mismatch score")
        if self.gap >= 0:
            raise ValueError("gap score must be negative")


@dataclass(frozen=True)
class AlignOp:
    """One alignment step: C/S carry both indices, D only ai, I only edit."""

    kind: str
    ai_index: int | None = None
    edit_index: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in OP_KINDS:
            raise ValueError(f"unknown op kind {self.kind!r}")
        if self.kind in ("C", "S") and (self.ai_index is None or self.edit_index is None):
            raise ValueError(f"{self.kind} ops carry both indices")
        if self.kind == "D" and (self.ai_index is None or self.edit_index is not None):
            raise ValueError("D ops carry only an ai index")
        if self.kind == "I" and (self.edit_index is None or self.ai_index is not None):
            raise ValueError("I ops carry only an edit index")


@dataclass
class Alignment:
    ops: list[AlignOp]
    score: int

    def op_string(self) -> str:
        return "".join(op.kind for op in self.ops)

    def ai_length(self) -> int:
        return sum(1 for op in self.ops if op.ai_index is not None)

    def edit_length(self) -> int:
        return sum(1 for op in self.ops if op.edit_index is not None)


@dataclass
class EditMasks:
    """Changed / unchanged indicators for both sides of an alignment.

    On each side the two vectors are elementwise complements.
    """

    ai_changed: np.ndarray
    ai_unchanged: np.ndarray
    e_changed: np.ndarray
    e_unchanged: np.ndarray

    def copy(self) -> "EditMasks":
        return EditMasks(
            self.ai_changed.copy(),
            self.ai_unchanged.copy(),
            self.e_changed.copy(),
            self.e_unchanged.copy(),
        )


def _prefix_similar(a: str, b: str) -> bool:
    # Surface-level cue for ties only: an inflection pair like take/takes
    # should substitute rather than split into a delete plus an insert.
    if a == b or min(len(a), len(b)) < 2:
        return False
    return a.startswith(b) or b.startswith(a)


def align_nw(ai: TokenSeq, edit: TokenSeq, scoring: NwScoring = NwScoring()) -> Alignment:
    """Maximum-score global alignment of the AI summary against the edit.

    Traceback ties are broken deterministically: matching diagonal (C) first,
    then a substitution whose surfaces are prefix-related, then delete (up),
    then insert (left), then any other substitution.
    """
    a_ids = ai.ids()
    b_ids = edit.ids()
    a_surf = ai.surfaces()
    b_surf = edit.surfaces()
    n, m = len(a_ids), len(b_ids)

    dp = np.zeros((n + 1, m + 1), dtype=np.int64)
    dp[:, 0] = scoring.gap * np.arange(n + 1)
    dp[0, :] = scoring.gap * np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = scoring.match if a_ids[i - 1] == b_ids[j - 1] else scoring.mismatch
            dp[i, j] = max(dp[i - 1, j - 1] + sub, dp[i - 1, j] + scoring.gap, dp[i, j - 1] + scoring.gap)

    ops_rev: list[AlignOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        choices: list[tuple[int, AlignOp, tuple[int, int]]] = []
        if i > 0 and j > 0:
            eq = a_ids[i - 1] == b_ids[j - 1]
            sub = scoring.match if eq else scoring.mismatch
            if dp[i, j] == dp[i - 1, j - 1] + sub:
                if eq:
                    rank, kind = 0, "C"
                elif _prefix_similar(a_surf[i - 1], b_surf[j - 1]):
                    rank, kind = 1, "S"
                else:
                    rank, kind = 4, "S"
                choices.append((rank, AlignOp(kind, i - 1, j - 1), (i - 1, j - 1)))
        if i > 0 and dp[i, j] == dp[i - 1, j] + scoring.gap:
            choices.append((2, AlignOp("D", ai_index=i - 1), (i - 1, j)))
        if j > 0 and dp[i, j] == dp[i, j - 1] + scoring.gap:
            choices.append((3, AlignOp("I", edit_index=j - 1), (i, j - 1)))
        _, op, (i, j) = min(choices, key=lambda c: c[0])
        ops_rev.append(op)

    return Alignment(ops=ops_rev[::-1], score=int(dp[n, m]))


def score_of_ops(alignment: Alignment, ai: TokenSeq, edit: TokenSeq, scoring: NwScoring) -> int:
    """Recompute an alignment's score from its op list."""
    a_ids = ai.ids()
    b_ids = edit.ids()
    total = 0
    for op in alignment.ops:
        if op.kind == "C":
            total += scoring.match if a_ids[op.ai_index] == b_ids[op.edit_index] else scoring.mismatch
        elif op.kind == "S":
            total += scoring.mismatch
        else:
            total += scoring.gap
    return total


def derive_masks(alignment: Alignment) -> EditMasks:
    """Indicator vectors: a position is unchanged iff covered by a C op."""
    ai_len = alignment.ai_length()
    e_len = alignment.edit_length()
    ai_changed = np.ones(ai_len, dtype=np.int64)
    e_changed = np.ones(e_len, dtype=np.int64)
    for op in alignment.ops:
        if op.kind == "C":
            ai_changed[op.ai_index] = 0
            e_changed[op.edit_index] = 0
    return EditMasks(
        ai_changed=ai_changed,
        ai_unchanged=1 - ai_changed,
        e_changed=e_changed,
        e_unchanged=1 - e_changed,
    )


def smooth_ai_mask(masks: EditMasks) -> EditMasks:
    """Flip isolated single changed positions on the AI side to unchanged.

    Runs of two or more changed positions are kept; the edit side is never
    touched. Reduces the weight of incidental one-token differences
    (punctuation, plural forms) relative to contiguous changed spans.
    """
    changed = masks.ai_changed.copy()
    i = 0
    while i < len(changed):
        if changed[i]:
            j = i
            while j < len(changed) and changed[j]:
                j += 1
            if j - i == 1:
                changed[i] = 0
            i = j
        else:
            i += 1
    return EditMasks(
        ai_changed=changed,
        ai_unchanged=1 - changed,
        e_changed=masks.e_changed.copy(),
        e_unchanged=masks.e_unchanged.copy(),
    )


def change_fraction(masks: EditMasks, side: str) -> float:
    """Fraction of changed positions on one side of the alignment."""
    if side == "ai":
        vec = masks.ai_changed
    elif side == "edit":
        vec = masks.e_changed
    else:
        raise ValueError(f"side must be 'ai' or 'edit', got {side!r}")
    if len(vec) == 0:
        raise ValueError("empty sequence has no change fraction")
    return float(vec.sum()) / len(vec)


def filter_by_change_ratio(masks: EditMasks, threshold: float = 0.60) -> bool:
    """Keep the example unless strictly more than `threshold` of the AI-side
    unchanged mask is zero."""
    if len(masks.ai_unchanged) == 0:
        return True
    zeros = float((masks.ai_unchanged == 0).sum()) / len(masks.ai_unchanged)
    return not zeros > threshold


def mask_export_record(
    example_id: str,
    ai: TokenSeq,
    edit: TokenSeq,
    alignment: Alignment,
    masks: EditMasks,
    kept: bool,
) -> dict:
    """Line-delimited JSON record describing one aligned pair."""
    return {
        "id": example_id,
        "ai_tokens": ai.surfaces(),
        "edit_tokens": edit.surfaces(),
        "ops": alignment.op_string(),
        "ai_changed": [int(v) for v in masks.ai_changed],
        "e_changed": [int(v) for v in masks.e_changed],
        "kept": bool(kept),
        "change_fraction": change_fraction(masks, "ai") if len(ai) else None,
    }
