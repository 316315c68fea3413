import numpy as np
import pytest

from conftest import brute_force_lcs, make_vocab, seq_from_surfaces

from saltkit.metrics import (
    GroupCounts,
    SageReport,
    aggregate_sage,
    lcs_length,
    rouge_l,
    rouge_n,
    sage_concept,
    sage_ratio_report,
    sage_word,
)
from saltkit.textproc import ConceptLexicon, TokenSeq, Vocab, tokenize


def seqs(*surface_lists):
    vocab = make_vocab(*surface_lists)
    return [seq_from_surfaces(s, vocab, "generated") for s in surface_lists]


def test_rouge_n_fixtures():
    a, b = seqs(["a", "b", "c"], ["a", "b", "d"])
    score = rouge_n(a, b, 1)
    assert score.precision == pytest.approx(2 / 3)
    assert score.recall == pytest.approx(2 / 3)
    assert score.f1 == pytest.approx(2 / 3, abs=1e-9)
    same = rouge_n(a, a, 1)
    assert same.f1 == 1.0
    c, d = seqs(["x", "y"], ["p", "q"])
    assert rouge_n(c, d, 1).f1 == 0.0


def test_rouge_n_clipping():
    a, b = seqs(["a", "a", "a"], ["a"])
    score = rouge_n(a, b, 1)
    assert score.precision == pytest.approx(1 / 3)
    assert score.recall == 1.0


def test_rouge_n_empty_and_validation():
    a, _ = seqs(["a"], ["b"])
    empty = TokenSeq([], "generated")
    assert rouge_n(empty, a, 1).f1 == 0.0
    assert rouge_n(a, a, 2).f1 == 0.0  # no bigrams in a 1-token sequence
    with pytest.raises(ValueError):
        rouge_n(a, a, 0)


def test_rouge_l_fixtures():
    a, b = seqs(["a", "b", "c"], ["a", "b", "d"])
    assert rouge_l(a, b).f1 == pytest.approx(2 / 3, abs=1e-9)
    assert rouge_l(a, a).f1 == 1.0


def test_rouge_l_matches_bruteforce(rng):
    words = ["u", "v", "w", "x"]
    for _ in range(200):
        a_surf = [words[i] for i in rng.integers(0, 4, size=rng.integers(1, 7))]
        b_surf = [words[i] for i in rng.integers(0, 4, size=rng.integers(1, 7))]
        assert lcs_length(a_surf, b_surf) == brute_force_lcs(a_surf, b_surf)


def test_rouge_symmetry_swaps_p_and_r(rng):
    words = ["u", "v", "w"]
    for _ in range(50):
        a_surf = [words[i] for i in rng.integers(0, 3, size=rng.integers(1, 6))]
        b_surf = [words[i] for i in rng.integers(0, 3, size=rng.integers(1, 6))]
        a, b = seqs(a_surf, b_surf)
        fwd, rev = rouge_n(a, b, 1), rouge_n(b, a, 1)
        assert fwd.precision == pytest.approx(rev.recall)
        assert fwd.f1 == pytest.approx(rev.f1)
        lf, lr = rouge_l(a, b), rouge_l(b, a)
        assert lf.f1 == pytest.approx(lr.f1)


def test_rouge_l_equals_rouge_1_on_identical_ordered():
    a, = seqs(["p", "q", "r"])
    assert rouge_l(a, a).f1 == rouge_n(a, a, 1).f1 == 1.0


def test_sage_word_fixture():
    s_ai, s_edit, s_new = seqs(["a", "b", "c"], ["a", "b", "d"], ["a", "d"])
    counts = sage_word(s_new, s_ai, s_edit, stopwords=set())
    assert (counts.g1, counts.g2, counts.g3) == (0.0, 1.0, 1.0)


def test_sage_word_boundary_cases():
    s_ai, s_edit = seqs(["a", "b", "c"], ["a", "b", "d"])
    counts = sage_word(s_edit, s_ai, s_edit, stopwords=set())
    assert counts.g1 == 0.0
    assert counts.g2 + counts.g3 == 3.0  # distinct stripped words of the edit
    counts = sage_word(s_ai, s_ai, s_edit, stopwords=set())
    assert counts.g2 == 0.0


def test_sage_word_duplicates_and_stopwords():
    vocab = Vocab()
    s_ai = tokenize("the chest pain", vocab, grow=True)
    s_edit = tokenize("the chest ache", vocab, grow=True)
    s_new = tokenize("the ache ache ache .", vocab, grow=True)
    counts = sage_word(s_new, s_ai, s_edit, stopwords={"the"})
    assert (counts.g1, counts.g2, counts.g3) == (0.0, 1.0, 0.0)
    token_counts = sage_word(s_new, s_ai, s_edit, stopwords={"the"}, count_types=False)
    assert token_counts.g2 == 3.0


def test_sage_groups_disjoint(rng):
    words = ["u", "v", "w", "x", "y"]
    for _ in range(50):
        pick = lambda: [words[i] for i in rng.integers(0, 5, size=rng.integers(1, 6))]
        s_ai, s_edit, s_new = seqs(pick(), pick(), pick())
        counts = sage_word(s_new, s_ai, s_edit, stopwords=set())
        distinct_new = len(set(s_new.surfaces()))
        assert counts.g1 + counts.g2 + counts.g3 <= distinct_new


def test_sage_concept_fixture():
    lex = ConceptLexicon.from_pairs([("alpha", "C1"), ("beta", "C2")])
    vocab = Vocab()
    s_ai = tokenize("alpha", vocab, grow=True)
    s_edit = tokenize("alpha beta", vocab, grow=True)
    s_new = tokenize("beta", vocab, grow=True)
    counts = sage_concept(s_new, s_ai, s_edit, lex)
    assert (counts.g1, counts.g2, counts.g3) == (0.0, 1.0, 0.0)


def test_sage_concept_empty_lexicon_and_perfect_edit():
    lex = ConceptLexicon([])
    vocab = Vocab()
    s_ai = tokenize("alpha", vocab, grow=True)
    s_edit = tokenize("beta", vocab, grow=True)
    assert sage_concept(s_edit, s_ai, s_edit, lex) == GroupCounts(0.0, 0.0, 0.0)
    lex = ConceptLexicon.from_pairs([("alpha", "C1"), ("beta", "C2")])
    counts = sage_concept(s_edit, s_ai, s_edit, lex)
    assert counts.g1 == 0.0


def test_aggregate_and_ratios():
    r1 = SageReport(GroupCounts(1, 2, 3), GroupCounts(0, 1, 0))
    r2 = SageReport(GroupCounts(0, 3, 1), GroupCounts(2, 0, 1))
    total = aggregate_sage([r1, r2])
    assert total.word == GroupCounts(1, 5, 4)
    mean = aggregate_sage([r1, r2], mode="mean")
    assert mean.word.g2 == pytest.approx(2.5)

    ratios = sage_ratio_report(total, total)
    assert all(v == 1.0 for v in ratios["word"].values())

    baseline = SageReport(GroupCounts(2, 40, 4), GroupCounts(0, 1, 1))
    system = SageReport(GroupCounts(1, 50, 4), GroupCounts(1, 1, 1))
    ratios = sage_ratio_report(system, baseline)
    assert ratios["word"]["g2"] == pytest.approx(1.25)
    assert ratios["concept"]["g1"] is None  # undefined, not zero


def test_aggregate_empty_and_bad_mode():
    assert aggregate_sage([]).word == GroupCounts()
    with pytest.raises(ValueError):
        aggregate_sage([SageReport(GroupCounts(), GroupCounts())], mode="median")
