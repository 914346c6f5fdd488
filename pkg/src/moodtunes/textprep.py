"""Lyrics preprocessing: tokenization, stop-word removal, vocabulary
construction, and fixed-length integer encoding."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

PAD_ID = 0
UNK_ID = 1
FIRST_VOCAB_ID = 2

DEFAULT_SEQUENCE_LENGTH = 64
DEFAULT_VOCAB_SIZE = 5000

# Versioned 30-word stop list. Tests pin its contents; change the version
# string if the list ever changes.
STOPWORDS_VERSION = "en30-v1"
DEFAULT_STOPWORDS = frozenset(
    """
    the a an and or of to in on is it i you my me so that this
    be at for with was are as we all no not your
    """.split()
)

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")


class EmptyCorpus(ValueError):
    """Vocabulary construction needs at least one token."""


def tokenize(text: str) -> list[str]:
    """Split text into lowercase ASCII-alphanumeric tokens.

    Every maximal run of characters outside [A-Za-z0-9] is a delimiter
    (non-ASCII letters included); empty fragments are dropped. Stop words
    are NOT removed here.
    """
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def remove_stopwords(tokens: list[str], stoplist=DEFAULT_STOPWORDS) -> list[str]:
    """Order-preserving filter dropping tokens present in ``stoplist``."""
    stoplist = set(stoplist)
    return [t for t in tokens if t not in stoplist]


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stop list from a plain-text file, one token per line."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word:
            words.add(word)
    return frozenset(words)


@dataclass(frozen=True)
class Vocabulary:
    """Token-to-id map with reserved PAD=0 and UNK=1.

    Ids are dense in [2, 2+len(entries)), assigned by descending corpus
    frequency with ties broken by ascending lexicographic order.
    """

    entries: dict[str, int]
    max_size: int

    def __len__(self) -> int:
        return len(self.entries)

    def id_of(self, token: str) -> int:
        return self.entries.get(token, UNK_ID)

    @property
    def total_ids(self) -> int:
        # PAD + UNK + vocabulary entries
        return FIRST_VOCAB_ID + len(self.entries)

    def save(self, path: str | Path) -> None:
        """Write entries as ``token<TAB>id`` lines sorted by id."""
        lines = [
            f"{token}\t{idx}"
            for token, idx in sorted(self.entries.items(), key=lambda kv: kv[1])
        ]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        entries: dict[str, int] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            token, _, idx = line.partition("\t")
            entries[token] = int(idx)
        ids = sorted(entries.values())
        if ids != list(range(FIRST_VOCAB_ID, FIRST_VOCAB_ID + len(ids))):
            raise ValueError(f"vocabulary ids in {path} are not dense from 2")
        return cls(entries=entries, max_size=len(entries))


def build_vocabulary(corpus: list[list[str]], max_size: int = DEFAULT_VOCAB_SIZE) -> Vocabulary:
    """Build the vocabulary of the ``max_size`` most frequent tokens."""
    if max_size < 1:
        raise ValueError(f"max_size must be >= 1, got {max_size}")
    counts: Counter[str] = Counter()
    for tokens in corpus:
        counts.update(tokens)
    if not counts:
        raise EmptyCorpus("corpus contains no tokens")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:max_size]
    entries = {token: FIRST_VOCAB_ID + i for i, (token, _) in enumerate(ranked)}
    return Vocabulary(entries=entries, max_size=max_size)


def encode(tokens: list[str], vocab: Vocabulary, length: int = DEFAULT_SEQUENCE_LENGTH) -> list[int]:
    """Map tokens to ids, truncated or PAD-padded to exactly ``length``."""
    if length < 1:
        raise ValueError(f"sequence length must be >= 1, got {length}")
    ids = [vocab.id_of(t) for t in tokens[:length]]
    ids.extend([PAD_ID] * (length - len(ids)))
    return ids


def prepare(text: str, vocab: Vocabulary, length: int = DEFAULT_SEQUENCE_LENGTH,
            stoplist=DEFAULT_STOPWORDS) -> list[int]:
    """Full pipeline: tokenize, drop stop words, encode to fixed length."""
    return encode(remove_stopwords(tokenize(text), stoplist), vocab, length)
