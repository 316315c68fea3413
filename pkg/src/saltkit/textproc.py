"""Tokenization, vocabulary management, stopword stripping, and lexicon concept matching."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

PAD, BOS, EOS, UNK = 0, 1, 2, 3
RESERVED_SURFACES = ("<pad>", "<bos>", "<eos>", "<unk>")

SOURCE_ROLES = ("input_U", "ai_summary", "edit_summary", "imitation_summary", "generated")

# Words and single punctuation marks; intra-word apostrophes stay attached so
# contractions ("doesn't") remain one token.
_TOKEN_RE = re.compile(r"\w+(?:'\w+)*|[^\w\s]")
_WORD_CHAR_RE = re.compile(r"\w")

DEFAULT_STOPWORDS = frozenset(
    """
    a about after all an and any are as at be been but by can did do does
    for from had has have he her his i if in is it its me my no not of on
    or our she so that the their them they this to was we were what when
    will with you your
    """.split()
)


def split_text(text: str) -> list[str]:
    """Lowercase text and split it into word / single-punctuation surfaces."""
    return _TOKEN_RE.findall(text.lower())


def is_punct(surface: str) -> bool:
    """True when a surface contains no word characters at all."""
    return _WORD_CHAR_RE.search(surface) is None


class Vocab:
    """Bijective surface<->id map with reserved entries fixed at ids 0..3."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {s: i for i, s in enumerate(RESERVED_SURFACES)}
        self._surfaces: list[str] = list(RESERVED_SURFACES)
        self._frozen = False

    @classmethod
    def from_surfaces(cls, surfaces: list[str]) -> "Vocab":
        if tuple(surfaces[:4]) != RESERVED_SURFACES:
            raise ValueError("surface list must start with the reserved entries")
        vocab = cls()
        for surface in surfaces[4:]:
            vocab.add(surface)
        return vocab

    def __len__(self) -> int:
        return len(self._surfaces)

    def __contains__(self, surface: str) -> bool:
        return surface in self._ids

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "Vocab":
        self._frozen = True
        return self

    def add(self, surface: str) -> int:
        if not surface:
            raise ValueError("empty surface")
        existing = self._ids.get(surface)
        if existing is not None:
            return existing
        if self._frozen:
            raise RuntimeError("cannot grow a frozen vocab")
        idx = len(self._surfaces)
        self._ids[surface] = idx
        self._surfaces.append(surface)
        return idx

    def id_of(self, surface: str) -> int:
        return self._ids.get(surface, UNK)

    def surface_of(self, token_id: int) -> str:
        return self._surfaces[token_id]

    def surfaces(self) -> list[str]:
        return list(self._surfaces)

    def content_hash(self) -> str:
        return hashlib.sha256("\n".join(self._surfaces).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Token:
    surface: str
    id: int

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if self.id < 0:
            raise ValueError("token id must be non-negative")


@dataclass
class TokenSeq:
    """Ordered token list tagged with where it came from."""

    tokens: list[Token] = field(default_factory=list)
    source_role: str = "input_U"

    def __post_init__(self) -> None:
        if self.source_role not in SOURCE_ROLES:
            raise ValueError(f"unknown source role {self.source_role!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, idx: int) -> Token:
        return self.tokens[idx]

    def ids(self) -> list[int]:
        return [t.id for t in self.tokens]

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def text(self) -> str:
        return " ".join(self.surfaces())


def tokenize(text: str, vocab: Vocab, grow: bool = False, source_role: str = "input_U") -> TokenSeq:
    """Lowercase/split text and map each surface through the vocab.

    Unknown surfaces map to UNK unless grow=True, in which case they are added
    in first-seen order. Either way the original surface is kept on the token,
    so metrics can operate on surfaces while the model operates on ids.
    """
    tokens = []
    for surface in split_text(text):
        token_id = vocab.add(surface) if grow else vocab.id_of(surface)
        tokens.append(Token(surface, token_id))
    return TokenSeq(tokens, source_role)


def strip_stop_punct(seq: TokenSeq, stopwords: frozenset[str] | set[str]) -> TokenSeq:
    """Drop stopword and punctuation-only tokens, preserving order."""
    kept = [t for t in seq.tokens if t.surface not in stopwords and not is_punct(t.surface)]
    return TokenSeq(kept, seq.source_role)


@dataclass
class ConceptLexicon:
    """Phrase -> concept-id entries, matched greedily against token sequences."""

    entries: list[tuple[tuple[str, ...], str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: dict[tuple[str, ...], str] = {}
        for phrase, concept_id in self.entries:
            if not phrase:
                raise ValueError("lexicon phrases must be non-empty")
            if phrase in seen and seen[phrase] != concept_id:
                raise ValueError(f"phrase {' '.join(phrase)!r} mapped to two concept ids")
            seen[phrase] = concept_id
        # first-token index, longest phrase first, for the greedy scan
        self._by_first: dict[str, list[tuple[tuple[str, ...], str]]] = {}
        for phrase, concept_id in self.entries:
            self._by_first.setdefault(phrase[0], []).append((phrase, concept_id))
        for bucket in self._by_first.values():
            bucket.sort(key=lambda e: (-len(e[0]), e[0]))

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_pairs(cls, pairs) -> "ConceptLexicon":
        entries = [(tuple(split_text(phrase)), concept_id) for phrase, concept_id in pairs]
        return cls(entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "ConceptLexicon":
        """One entry per line: phrase<TAB>concept_id."""
        pairs = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'phrase<TAB>concept_id'")
            phrase, concept_id = line.split("\t", 1)
            pairs.append((phrase.strip(), concept_id.strip()))
        return cls.from_pairs(pairs)

    def candidates(self, first_surface: str):
        return self._by_first.get(first_surface, ())


def extract_concepts(seq: TokenSeq, lexicon: ConceptLexicon) -> set[str]:
    """Greedy longest-match left-to-right scan; matched spans consume their tokens."""
    surfaces = seq.surfaces()
    found: set[str] = set()
    i = 0
    while i < len(surfaces):
        matched = False
        for phrase, concept_id in lexicon.candidates(surfaces[i]):
            if tuple(surfaces[i : i + len(phrase)]) == phrase:
                found.add(concept_id)
                i += len(phrase)
                matched = True
                break
        if not matched:
            i += 1
    return found


def load_stopwords(path: str | Path) -> set[str]:
    """One surface per line, UTF-8; blank lines ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word:
            words.add(word)
    return words
