"""Load, validate, persist, and query word embedding sets.

Text interchange format: a header line ``<vocab_size> <dim>`` followed by one
``<word> <v1> ... <vd>`` line per word, single-space separated, UTF-8, LF line
endings.  Values are stored at single precision; lookups return float64 so all
downstream statistics run in double precision.

Metadata is not part of the text format.  The trainer CLI names its output
files ``<language>.<raw|lemmatized>.seed<k>.vec`` and the loader recovers
language, corpus version, and seed from that pattern when no explicit
metadata is given.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, FormatError, MissingWordsError

CORPUS_VERSIONS = ("raw", "lemmatized")

_FILENAME_RE = re.compile(
    r"^(?P<language>[A-Za-z]{2,3})\.(?P<version>raw|lemmatized)\.seed(?P<seed>\d+)\.vec$"
)


@dataclass(frozen=True)
class EmbeddingMeta:
    """Provenance of an embedding set: language, corpus version, seed, source."""

    language: str | None = None
    corpus_version: str | None = None
    seed: int | None = None
    source: str = ""

    def __post_init__(self):
        if self.corpus_version is not None and self.corpus_version not in CORPUS_VERSIONS:
            raise DataError(
                f"corpus_version must be one of {CORPUS_VERSIONS}, got {self.corpus_version!r}"
            )

    def to_dict(self) -> dict:
        return {
            "language": self.language,
            "corpus_version": self.corpus_version,
            "seed": self.seed,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EmbeddingMeta":
        return cls(
            language=d.get("language"),
            corpus_version=d.get("corpus_version"),
            seed=d.get("seed"),
            source=d.get("source", ""),
        )


def meta_from_filename(path) -> EmbeddingMeta:
    """Infer metadata from the ``<lang>.<version>.seed<k>.vec`` naming scheme.

    Unmatched names yield metadata with only ``source`` set.
    """
    p = Path(path)
    m = _FILENAME_RE.match(p.name)
    if m is None:
        return EmbeddingMeta(source=str(p))
    return EmbeddingMeta(
        language=m.group("language"),
        corpus_version=m.group("version"),
        seed=int(m.group("seed")),
        source=str(p),
    )


@dataclass
class EmbeddingSet:
    """Vocabulary-indexed dense vectors plus provenance metadata.

    ``vocab`` maps each word to its row in ``matrix`` (float32, |V| x dim).
    Immutable after construction; safe for concurrent reads.
    """

    vocab: dict[str, int]
    matrix: np.ndarray
    meta: EmbeddingMeta = field(default_factory=EmbeddingMeta)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float32)
        if self.matrix.ndim != 2:
            raise DataError(f"embedding matrix must be 2-D, got ndim={self.matrix.ndim}")
        n, d = self.matrix.shape
        if d < 1:
            raise DataError("embedding dimension must be >= 1")
        if len(self.vocab) != n:
            raise DataError(
                f"vocabulary size {len(self.vocab)} does not match matrix rows {n}"
            )
        if sorted(self.vocab.values()) != list(range(n)):
            raise DataError("vocabulary indices must be a bijection onto matrix rows")
        if not np.isfinite(self.matrix).all():
            raise DataError("embedding matrix contains non-finite values")
        self.matrix.setflags(write=False)

    @classmethod
    def from_words(cls, words: Sequence[str], matrix, meta: EmbeddingMeta | None = None) -> "EmbeddingSet":
        """Build from a word sequence and aligned matrix; rejects duplicates."""
        vocab: dict[str, int] = {}
        for i, w in enumerate(words):
            if not w:
                raise DataError(f"empty word at position {i}")
            if w in vocab:
                raise DataError(f"duplicate word {w!r}")
            vocab[w] = i
        return cls(vocab=vocab, matrix=matrix, meta=meta or EmbeddingMeta())

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def words(self) -> list[str]:
        """Vocabulary in row order."""
        out = [""] * len(self.vocab)
        for w, i in self.vocab.items():
            out[i] = w
        return out

    def vector(self, word: str) -> np.ndarray:
        """The word's vector as float64; raises MissingWordsError if absent."""
        try:
            row = self.vocab[word]
        except KeyError:
            raise MissingWordsError([word], source=self.meta.source) from None
        return self.matrix[row].astype(np.float64)

    def with_meta(self, meta: EmbeddingMeta) -> "EmbeddingSet":
        return EmbeddingSet(vocab=self.vocab, matrix=self.matrix, meta=meta)


def _format_value(v: np.float32) -> str:
    # Shortest decimal string that parses back to the same float32.
    return np.format_float_positional(v, unique=True, trim="0")


def load_text_format(path, meta: EmbeddingMeta | None = None) -> EmbeddingSet:
    """Parse an embedding text file into an EmbeddingSet.

    Errors (malformed header, row arity mismatch, duplicate word, non-finite
    value) are reported with the offending line number.
    """
    path = Path(path)
    if meta is None:
        meta = meta_from_filename(path)
    elif not meta.source:
        meta = replace(meta, source=str(path))

    with open(path, "r", encoding="utf-8", newline=None) as fh:
        header = fh.readline()
        parts = header.rstrip("\n").split(" ")
        if len(parts) != 2:
            raise FormatError(
                f"malformed header: expected '<vocab_size> <dim>', got {header.rstrip()!r}",
                path=path, line=1,
            )
        try:
            vocab_size, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(
                f"malformed header: expected two integers, got {header.rstrip()!r}",
                path=path, line=1,
            ) from None
        if vocab_size < 1 or dim < 1:
            raise FormatError(
                f"malformed header: vocab_size and dim must be >= 1, got {vocab_size} {dim}",
                path=path, line=1,
            )

        vocab: dict[str, int] = {}
        matrix = np.empty((vocab_size, dim), dtype=np.float32)
        lineno = 1
        for raw in fh:
            lineno += 1
            line = raw.rstrip("\n")
            if not line:
                # Tolerate a trailing blank line only.
                if fh.read(1):
                    raise FormatError("unexpected blank line", path=path, line=lineno)
                break
            row = len(vocab)
            if row >= vocab_size:
                raise FormatError(
                    f"more rows than the declared vocab_size {vocab_size}",
                    path=path, line=lineno,
                )
            parts = line.split(" ")
            word = parts[0]
            if not word:
                raise FormatError("empty word field", path=path, line=lineno)
            if len(parts) != dim + 1:
                raise FormatError(
                    f"row arity mismatch: expected {dim} values, got {len(parts) - 1}",
                    path=path, line=lineno,
                )
            if word in vocab:
                raise FormatError(f"duplicate word {word!r}", path=path, line=lineno)
            try:
                values = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise FormatError("unparseable vector value", path=path, line=lineno) from None
            if not np.isfinite(values).all():
                raise FormatError("non-finite vector value", path=path, line=lineno)
            vocab[word] = row
            matrix[row] = values  # correctly rounded float64 -> float32

        if len(vocab) != vocab_size:
            raise FormatError(
                f"expected {vocab_size} rows per header, found {len(vocab)}",
                path=path, line=lineno,
            )

    return EmbeddingSet(vocab=vocab, matrix=matrix, meta=meta)


def save_text_format(embeddings: EmbeddingSet, path) -> None:
    """Write an EmbeddingSet in the text format; load(save(x)) is the identity
    on vocabulary order and single-precision values."""
    if len(embeddings) == 0:
        raise DataError("refusing to write an empty embedding set")
    path = Path(path)
    words = embeddings.words()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(words)} {embeddings.dim}\n")
        for i, word in enumerate(words):
            row = " ".join(_format_value(v) for v in embeddings.matrix[i])
            fh.write(f"{word} {row}\n")


def lookup_all(
    embeddings: EmbeddingSet,
    words: Iterable[str],
    policy: str = "strict",
) -> tuple[np.ndarray, list[str]]:
    """Resolve words to their vectors.

    strict: raise MissingWordsError listing every missing word.
    skip:   return vectors for the present words (input order) plus the
            missing-word list so reports can surface the drops.

    Returns (float64 matrix of shape (n_present, dim), missing words).
    """
    words = list(words)
    if not words:
        raise DataError("empty word list")
    if policy not in ("strict", "skip"):
        raise DataError(f"unknown OOV policy {policy!r}; use 'strict' or 'skip'")
    missing = [w for w in words if w not in embeddings.vocab]
    if missing and policy == "strict":
        raise MissingWordsError(missing, source=embeddings.meta.source)
    present = [w for w in words if w in embeddings.vocab]
    if present:
        rows = np.array([embeddings.vocab[w] for w in present], dtype=np.intp)
        vectors = embeddings.matrix[rows].astype(np.float64)
    else:
        vectors = np.empty((0, embeddings.dim), dtype=np.float64)
    return vectors, missing
