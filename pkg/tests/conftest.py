"""Shared fixtures and independent oracles used across the test suite."""

from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from saltkit.align import NwScoring
from saltkit.textproc import Token, TokenSeq, Vocab


def seq_from_surfaces(surfaces, vocab, role="ai_summary"):
    return TokenSeq([Token(s, vocab.add(s)) for s in surfaces], role)


def make_vocab(*word_lists) -> Vocab:
    vocab = Vocab()
    for words in word_lists:
        for w in words:
            vocab.add(w)
    return vocab


def brute_force_align_score(a_ids, b_ids, scoring: NwScoring) -> int:
    """Best global-alignment score by exhaustive enumeration of all monotone
    alignments (plain recursion, no DP reuse)."""

    def best(i: int, j: int) -> int:
        if i == len(a_ids) and j == len(b_ids):
            return 0
        options = []
        if i < len(a_ids) and j < len(b_ids):
            sub = scoring.match if a_ids[i] == b_ids[j] else scoring.mismatch
            options.append(sub + best(i + 1, j + 1))
        if i < len(a_ids):
            options.append(scoring.gap + best(i + 1, j))
        if j < len(b_ids):
            options.append(scoring.gap + best(i, j + 1))
        return max(options)

    return best(0, 0)


def brute_force_lcs(a, b) -> int:
    """LCS length by enumerating every subsequence of the shorter side."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)

    def is_subseq(cand, seq):
        it = iter(seq)
        return all(x in it for x in cand)

    for length in range(len(short), 0, -1):
        for idxs in combinations(range(len(short)), length):
            cand = [short[i] for i in idxs]
            if is_subseq(cand, long_):
                return length
    return 0


def fd_relative_error(objective, params, analytic, h=1e-5) -> float:
    """Relative L2 error between central finite differences of `objective`
    and the analytic gradient, over every parameter entry."""
    fd_entries = []
    an_entries = []
    for arr_p, arr_a in zip(params.arrays(), analytic.arrays()):
        flat_p = arr_p.reshape(-1)
        flat_a = arr_a.reshape(-1)
        for k in range(flat_p.size):
            orig = flat_p[k]
            flat_p[k] = orig + h
            f_plus = objective()
            flat_p[k] = orig - h
            f_minus = objective()
            flat_p[k] = orig
            fd_entries.append((f_plus - f_minus) / (2.0 * h))
            an_entries.append(flat_a[k])
    fd_vec = np.asarray(fd_entries)
    an_vec = np.asarray(an_entries)
    denom = max(np.linalg.norm(fd_vec), np.linalg.norm(an_vec), 1e-10)
    return float(np.linalg.norm(fd_vec - an_vec) / denom)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
