"""Corpus preparation: parallel document selection, tokenization, and the
lemmatized gender-scrubbed corpus variant built from external tagger output.

The raw variant lowercases text, strips punctuation, and writes one sentence
per line.  The lemmatized variant consumes the tagger's three-column TSV
(surface TAB pos TAB lemma, one token per line), replaces each token by its
lemma, and then applies per-language scrub rules that rewrite residual
gendered forms to a common form.  Punctuation-only records act as sentence
boundaries and never appear as output tokens; every word record maps to
exactly one output token.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError, FormatError

UNKNOWN_LEMMA = "<unknown>"

_SENTENCE_FINAL = ".!?…"
_SENTENCE_SPLIT = re.compile(r"[.!?…]+")
_TOKEN = re.compile(r"\w+(?:'\w+)*")


@dataclass
class CorpusManifest:
    """Which documents make up the parallel corpus, and how big it came out.

    ``documents`` is the sorted identifier intersection shared by every
    language; ``counts`` holds emitted token counts per language (filled in
    once the corpus files are written).
    """

    languages: list[str]
    documents: list[str]
    counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "languages": list(self.languages),
            "documents": list(self.documents),
            "counts": dict(self.counts),
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CorpusManifest":
        with open(path, "r", encoding="utf-8") as fh:
            d = json.load(fh)
        for key in ("languages", "documents", "counts"):
            if key not in d:
                raise FormatError(f"manifest missing field {key!r}", path=path)
        return cls(
            languages=list(d["languages"]),
            documents=list(d["documents"]),
            counts={k: int(v) for k, v in d["counts"].items()},
        )


def intersect_documents(documents_per_language: dict[str, Iterable[str]]) -> CorpusManifest:
    """Keep only document identifiers present in every language.

    Order-independent: any permutation of the input mapping produces the
    same manifest (languages and documents come out sorted).
    """
    if len(documents_per_language) < 2:
        raise DataError("need document lists for at least two languages")
    sets = {}
    for lang, docs in documents_per_language.items():
        ids = set(docs)
        if not ids:
            raise DataError(f"language {lang!r} has no documents")
        sets[lang] = ids
    shared = set.intersection(*sets.values())
    if not shared:
        raise DataError("empty intersection: no document is present in every language")
    return CorpusManifest(languages=sorted(sets), documents=sorted(shared))


def tokenize(text: str) -> list[list[str]]:
    """Lowercase and split text into sentences of word tokens.

    Sentences end at runs of sentence-final punctuation (. ! ? and the
    ellipsis); all other punctuation is dropped.  Apostrophes inside a word
    stick to it (curly apostrophes are straightened first).
    """
    text = text.lower().replace("’", "'")
    sentences = []
    for chunk in _SENTENCE_SPLIT.split(text):
        tokens = _TOKEN.findall(chunk)
        if tokens:
            sentences.append(tokens)
    return sentences


@dataclass(frozen=True)
class TokenRecord:
    """One row of tagger output."""

    surface: str
    pos: str
    lemma: str

    def __post_init__(self):
        if not self.surface:
            raise DataError("token record has an empty surface form")

    @property
    def is_word(self) -> bool:
        """True when the surface carries any letter or digit; punctuation-only
        records are sentence-boundary markers, not tokens."""
        return any(ch.isalnum() for ch in self.surface)

    @property
    def ends_sentence(self) -> bool:
        return not self.is_word and any(ch in _SENTENCE_FINAL for ch in self.surface)


def parse_tagger_output(path) -> Iterator[TokenRecord]:
    """Stream TokenRecords from a tagger TSV file; the lemma column may hold
    the unknown marker, which is preserved for the fallback rule downstream."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(
                    f"expected 3 tab-separated columns, got {len(parts)}",
                    path=path, line=lineno,
                )
            yield TokenRecord(surface=parts[0], pos=parts[1], lemma=parts[2])


@dataclass
class ScrubRules:
    """Per-language rewrite rules that remove residual gender marking.

    Keys match either the lemmatized form (level "lemma") or the raw surface
    form (level "surface"); either way the mapping is applied once more to
    the final form, so no rule key can survive into the output.  Chains are
    rejected: no replacement may itself be a rule key.
    """

    language: str
    mapping: dict[str, str]
    match_level: str = "lemma"

    def __post_init__(self):
        if self.match_level not in ("lemma", "surface"):
            raise DataError(
                f"match_level must be 'lemma' or 'surface', got {self.match_level!r}"
            )
        for key, value in self.mapping.items():
            if not key or not value:
                raise DataError("scrub rule keys and replacements must be non-empty")
            if value in self.mapping:
                raise DataError(
                    f"rule chain: {key!r} -> {value!r} but {value!r} is itself a rule key"
                )

    @classmethod
    def empty(cls, language: str = "") -> "ScrubRules":
        return cls(language=language, mapping={})


def load_scrub_rules(path, language: str = "", match_level: str = "lemma") -> ScrubRules:
    """Read a rule file: one ``key<TAB>replacement`` per line, '#' comments."""
    path = Path(path)
    if not language:
        language = path.stem
    mapping: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(
                    "expected 'key<TAB>replacement'", path=path, line=lineno
                )
            key, value = parts[0].strip().lower(), parts[1].strip().lower()
            if not key or not value:
                raise FormatError("empty rule key or replacement", path=path, line=lineno)
            if key in mapping and mapping[key] != value:
                raise FormatError(
                    f"conflicting rules for {key!r}", path=path, line=lineno
                )
            mapping[key] = value
    return ScrubRules(language=language, mapping=mapping, match_level=match_level)


def lemmatize_corpus(
    records: Iterable[TokenRecord], rules: ScrubRules | None = None
) -> list[list[str]]:
    """Turn a tagger record stream into scrubbed lemma sentences.

    Each word record becomes exactly one output token: its lemma (or its
    surface form when the lemma is the unknown marker), lowercased, then
    rewritten through the scrub rules.  Punctuation-only records end the
    current sentence when they contain sentence-final punctuation and are
    dropped otherwise.
    """
    rules = rules or ScrubRules.empty()
    mapping = rules.mapping
    sentences: list[list[str]] = []
    current: list[str] = []
    for rec in records:
        if not rec.is_word:
            if rec.ends_sentence and current:
                sentences.append(current)
                current = []
            continue
        surface = rec.surface.lower()
        if rules.match_level == "surface" and surface in mapping:
            token = mapping[surface]
        else:
            token = surface if rec.lemma == UNKNOWN_LEMMA else rec.lemma.lower()
            token = mapping.get(token, token)
        current.append(token)
    if current:
        sentences.append(current)
    return sentences


def write_sentences(sentences: Iterable[list[str]], path) -> int:
    """Write one space-joined sentence per line; returns the token count."""
    total = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sent in sentences:
            if not sent:
                continue
            fh.write(" ".join(sent))
            fh.write("\n")
            total += len(sent)
    return total


def build_raw_corpora(
    document_dirs: dict[str, Path | str], out_dir: Path | str
) -> CorpusManifest:
    """Build one raw corpus file per language from parallel document
    directories (documents are files named by a shared identifier).

    Emits ``<lang>.raw.txt`` per language plus ``manifest.json``; only
    documents present in every language are used, in sorted identifier
    order for every language.
    """
    doc_ids = {}
    for lang, directory in document_dirs.items():
        directory = Path(directory)
        if not directory.is_dir():
            raise DataError(f"document directory for {lang!r} not found: {directory}")
        doc_ids[lang] = [p.name for p in directory.iterdir() if p.is_file()]
    manifest = intersect_documents(doc_ids)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for lang in manifest.languages:
        directory = Path(document_dirs[lang])

        def sentences() -> Iterator[list[str]]:
            for doc_id in manifest.documents:
                text = (directory / doc_id).read_text(encoding="utf-8")
                yield from tokenize(text)

        manifest.counts[lang] = write_sentences(sentences(), out_dir / f"{lang}.raw.txt")
    manifest.save(out_dir / "manifest.json")
    return manifest


def bundled_scrub_dir() -> Path:
    """Directory of the scrub-rule files shipped with the package."""
    return Path(resources.files("embias").joinpath("data", "scrub"))
