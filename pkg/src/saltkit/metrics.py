"""ROUGE and the edit-aware SAGE metric over token sequences."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from saltkit.textproc import ConceptLexicon, TokenSeq, extract_concepts, strip_stop_punct


@dataclass
class RougeScore:
    precision: float
    recall: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ngrams(surfaces: list[str], n: int) -> Counter:
    if len(surfaces) < n:
        return Counter()
    return Counter(tuple(surfaces[i : i + n]) for i in range(len(surfaces) - n + 1))


def rouge_n(candidate: TokenSeq, reference: TokenSeq, n: int) -> RougeScore:
    """Clipped n-gram overlap precision/recall/F1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = _ngrams(candidate.surfaces(), n)
    ref = _ngrams(reference.surfaces(), n)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    overlap = sum((cand & ref).values())
    precision = overlap / sum(cand.values())
    recall = overlap / sum(ref.values())
    return RougeScore(precision, recall, _f1(precision, recall))


def lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: TokenSeq, reference: TokenSeq) -> RougeScore:
    """Longest-common-subsequence precision/recall/F1."""
    cand = candidate.surfaces()
    ref = reference.surfaces()
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = lcs_length(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return RougeScore(precision, recall, _f1(precision, recall))


@dataclass
class GroupCounts:
    """How much of a new summary falls in the AI-only / edit-only / shared sets."""

    g1: float = 0.0
    g2: float = 0.0
    g3: float = 0.0

    def __add__(self, other: "GroupCounts") -> "GroupCounts":
        return GroupCounts(self.g1 + other.g1, self.g2 + other.g2, self.g3 + other.g3)

    def scaled(self, factor: float) -> "GroupCounts":
        return GroupCounts(self.g1 * factor, self.g2 * factor, self.g3 * factor)

    def as_dict(self) -> dict:
        return {"g1": self.g1, "g2": self.g2, "g3": self.g3}


@dataclass
class SageReport:
    word: GroupCounts
    concept: GroupCounts

    def __add__(self, other: "SageReport") -> "SageReport":
        return SageReport(self.word + other.word, self.concept + other.concept)

    def as_dict(self) -> dict:
        return {"word": self.word.as_dict(), "concept": self.concept.as_dict()}


def _group_sets(ai_items: set, edit_items: set) -> tuple[set, set, set]:
    # G1: in the AI summary but edited away (bad); G2: newly added by the edit
    # (desired); G3: present in both (verified).
    return ai_items - edit_items, edit_items - ai_items, edit_items & ai_items


def sage_word(
    s_new: TokenSeq,
    s_ai: TokenSeq,
    s_edit: TokenSeq,
    stopwords,
    count_types: bool = True,
) -> GroupCounts:
    """Word-level group counts for a newly generated summary.

    All three summaries are stripped of stopwords and punctuation first. By
    default distinct word types of the new summary are counted; with
    count_types=False every token occurrence counts.
    """
    ai_words = set(strip_stop_punct(s_ai, stopwords).surfaces())
    edit_words = set(strip_stop_punct(s_edit, stopwords).surfaces())
    g1, g2, g3 = _group_sets(ai_words, edit_words)
    new_surfaces = strip_stop_punct(s_new, stopwords).surfaces()
    items = set(new_surfaces) if count_types else new_surfaces
    return GroupCounts(
        g1=float(sum(1 for w in items if w in g1)),
        g2=float(sum(1 for w in items if w in g2)),
        g3=float(sum(1 for w in items if w in g3)),
    )


def sage_concept(
    s_new: TokenSeq,
    s_ai: TokenSeq,
    s_edit: TokenSeq,
    lexicon: ConceptLexicon,
) -> GroupCounts:
    """Concept-level group counts via lexicon extraction (set semantics)."""
    ai_concepts = extract_concepts(s_ai, lexicon)
    edit_concepts = extract_concepts(s_edit, lexicon)
    g1, g2, g3 = _group_sets(ai_concepts, edit_concepts)
    new_concepts = extract_concepts(s_new, lexicon)
    return GroupCounts(
        g1=float(len(new_concepts & g1)),
        g2=float(len(new_concepts & g2)),
        g3=float(len(new_concepts & g3)),
    )


def aggregate_sage(reports, mode: str = "sum") -> SageReport:
    """Corpus aggregation: summed counts by default, per-example means with
    mode='mean'."""
    reports = list(reports)
    if not reports:
        return SageReport(GroupCounts(), GroupCounts())
    total = reports[0]
    for r in reports[1:]:
        total = total + r
    if mode == "mean":
        return SageReport(total.word.scaled(1.0 / len(reports)), total.concept.scaled(1.0 / len(reports)))
    if mode != "sum":
        raise ValueError(f"unknown aggregation mode {mode!r}")
    return total


def _ratio(system: float, baseline: float) -> float | None:
    # A zero baseline count makes the ratio undefined, not zero.
    if baseline == 0:
        return None
    return system / baseline


def sage_ratio_report(system: SageReport, baseline: SageReport) -> dict:
    """Elementwise system/baseline ratios on corpus-aggregated counts."""
    return {
        "word": {
            "g1": _ratio(system.word.g1, baseline.word.g1),
            "g2": _ratio(system.word.g2, baseline.word.g2),
            "g3": _ratio(system.word.g3, baseline.word.g3),
        },
        "concept": {
            "g1": _ratio(system.concept.g1, baseline.concept.g1),
            "g2": _ratio(system.concept.g2, baseline.concept.g2),
            "g3": _ratio(system.concept.g3, baseline.concept.g3),
        },
    }
