"""Stimulus word sets: validated target/attribute lists and the balanced
gender-by-topic design that expands into a family of comparisons.

Stimulus files are JSON documents with fields {language, name, type, sets,
...}; ``type`` is either "weat" (four sets X/Y/A/B) or "balanced" (male and
female attributes plus gender-by-topic noun cells and optional object-noun
lists).  The schema ships in docs/stimulus_schema.json.  Word lists are data,
not code; each set carries a free-text provenance field naming its source.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DataError, FormatError

log = logging.getLogger(__name__)

STIMULUS_TYPES = ("weat", "balanced")


def _find_duplicates(words) -> list[str]:
    seen = set()
    dups = []
    for w in words:
        if w in seen and w not in dups:
            dups.append(w)
        seen.add(w)
    return dups


@dataclass(frozen=True)
class LabeledWords:
    """A named word list with a provenance note."""

    label: str
    words: tuple[str, ...]
    provenance: str = ""

    def __post_init__(self):
        if not self.label:
            raise DataError("word set label must be non-empty")
        object.__setattr__(self, "words", tuple(self.words))
        for w in self.words:
            if not isinstance(w, str) or not w.strip():
                raise DataError(f"set {self.label!r} contains an empty or non-string word")
        dups = _find_duplicates(self.words)
        if dups:
            raise DataError(
                f"set {self.label!r} contains duplicate words: " + ", ".join(repr(w) for w in dups)
            )

    def __len__(self) -> int:
        return len(self.words)


def _check_disjoint(a: LabeledWords, b: LabeledWords) -> None:
    shared = [w for w in a.words if w in set(b.words)]
    if shared:
        raise DataError(
            f"sets {a.label!r} and {b.label!r} share words: "
            + ", ".join(repr(w) for w in shared)
        )


@dataclass(frozen=True)
class StimulusSpec:
    """One four-set comparison: targets X vs Y, attributes A vs B.

    Targets must be equal-size (the permutation test repartitions their
    union); targets and attributes must each be internally disjoint pairs.
    """

    language: str
    name: str
    X: LabeledWords
    Y: LabeledWords
    A: LabeledWords
    B: LabeledWords

    def __post_init__(self):
        if not self.language:
            raise DataError("stimulus language must be non-empty")
        if not self.name:
            raise DataError("stimulus name must be non-empty")
        for s in (self.X, self.Y, self.A, self.B):
            if len(s) == 0:
                raise DataError(f"set {s.label!r} is empty")
        if len(self.X) != len(self.Y):
            raise DataError(
                f"unequal target sets: |{self.X.label}| = {len(self.X)} "
                f"but |{self.Y.label}| = {len(self.Y)}"
            )
        _check_disjoint(self.X, self.Y)
        _check_disjoint(self.A, self.B)


@dataclass(frozen=True)
class BalancedDesign:
    """Gender-by-topic noun design: equal-size masculine/feminine cells for
    the topics career and family, male/female attribute lists, and optional
    equal-size masculine/feminine object-noun lists."""

    language: str
    name: str
    male: LabeledWords
    female: LabeledWords
    masculine_career: LabeledWords
    feminine_career: LabeledWords
    masculine_family: LabeledWords
    feminine_family: LabeledWords
    masculine_objects: LabeledWords
    feminine_objects: LabeledWords

    def __post_init__(self):
        if not self.language:
            raise DataError("design language must be non-empty")
        if len(self.male) == 0 or len(self.female) == 0:
            raise DataError("attribute lists must be non-empty")
        _check_disjoint(self.male, self.female)
        cells = (
            self.masculine_career,
            self.feminine_career,
            self.masculine_family,
            self.feminine_family,
        )
        sizes = {len(c) for c in cells}
        if 0 in sizes:
            empty = [c.label for c in cells if len(c) == 0]
            raise DataError("empty design cells: " + ", ".join(empty))
        if len(sizes) != 1:
            detail = ", ".join(f"{c.label}={len(c)}" for c in cells)
            raise DataError(f"gender-by-topic cells must be equal size, got {detail}")
        if len(self.masculine_objects) != len(self.feminine_objects):
            raise DataError(
                f"object lists must be equal size, got "
                f"{len(self.masculine_objects)} and {len(self.feminine_objects)}"
            )
        groups = [*cells, self.masculine_objects, self.feminine_objects]
        for i, a in enumerate(groups):
            for b in groups[i + 1:]:
                _check_disjoint(a, b)

    @property
    def cell_size(self) -> int:
        return len(self.masculine_career)


def _combined(label: str, first: LabeledWords, second: LabeledWords) -> LabeledWords:
    prov = "; ".join(p for p in (first.provenance, second.provenance) if p)
    return LabeledWords(label, first.words + second.words, provenance=prov)


def expand_balanced_design(design: BalancedDesign) -> list[StimulusSpec]:
    """Expand a design into its six comparisons (five when there are no
    object nouns): career vs family over all nouns, within the masculine
    cells, and within the feminine cells; then masculine vs feminine over
    objects, over career nouns, and over family nouns.  Attributes are the
    design's male/female lists throughout.  Deterministic and order-stable.
    """
    lang = design.language
    male, female = design.male, design.female
    specs = [
        StimulusSpec(
            language=lang, name="career-family.all",
            X=_combined("career", design.masculine_career, design.feminine_career),
            Y=_combined("family", design.masculine_family, design.feminine_family),
            A=male, B=female,
        ),
        StimulusSpec(
            language=lang, name="career-family.masculine",
            X=design.masculine_career, Y=design.masculine_family, A=male, B=female,
        ),
        StimulusSpec(
            language=lang, name="career-family.feminine",
            X=design.feminine_career, Y=design.feminine_family, A=male, B=female,
        ),
    ]
    if len(design.masculine_objects) > 0:
        specs.append(StimulusSpec(
            language=lang, name="masculine-feminine.objects",
            X=design.masculine_objects, Y=design.feminine_objects, A=male, B=female,
        ))
    else:
        log.info("design %r (%s) has no object nouns; omitting the objects comparison",
                 design.name, lang)
    specs.append(StimulusSpec(
        language=lang, name="masculine-feminine.career",
        X=design.masculine_career, Y=design.feminine_career, A=male, B=female,
    ))
    specs.append(StimulusSpec(
        language=lang, name="masculine-feminine.family",
        X=design.masculine_family, Y=design.feminine_family, A=male, B=female,
    ))
    return specs


def _parse_set(sets: dict, key: str, path, required: bool = True) -> LabeledWords:
    if key not in sets:
        if required:
            raise FormatError(f"missing set {key!r}", path=path)
        return LabeledWords(label=key.replace("_", " "), words=())
    entry = sets[key]
    if not isinstance(entry, dict) or "words" not in entry:
        raise FormatError(f"set {key!r} must be an object with a 'words' list", path=path)
    words = entry["words"]
    if not isinstance(words, list):
        raise FormatError(f"set {key!r}: 'words' must be a list", path=path)
    label = entry.get("label", key.replace("_", " "))
    return LabeledWords(label=label, words=tuple(words), provenance=entry.get("provenance", ""))


def load_stimuli(path) -> StimulusSpec | BalancedDesign:
    """Load and validate one stimulus file; the returned type follows the
    file's ``type`` field."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}", path=path) from None
    if not isinstance(doc, dict):
        raise FormatError("stimulus file must contain a JSON object", path=path)
    for field_name in ("language", "name", "type", "sets"):
        if field_name not in doc:
            raise FormatError(f"missing field {field_name!r}", path=path)
    kind = doc["type"]
    if kind not in STIMULUS_TYPES:
        raise FormatError(
            f"unknown type {kind!r}; expected one of {STIMULUS_TYPES}", path=path
        )
    sets = doc["sets"]
    if not isinstance(sets, dict):
        raise FormatError("'sets' must be an object", path=path)
    language, name = doc["language"], doc["name"]

    if kind == "weat":
        return StimulusSpec(
            language=language, name=name,
            X=_parse_set(sets, "X", path),
            Y=_parse_set(sets, "Y", path),
            A=_parse_set(sets, "A", path),
            B=_parse_set(sets, "B", path),
        )
    return BalancedDesign(
        language=language, name=name,
        male=_parse_set(sets, "male", path),
        female=_parse_set(sets, "female", path),
        masculine_career=_parse_set(sets, "masculine_career", path),
        feminine_career=_parse_set(sets, "feminine_career", path),
        masculine_family=_parse_set(sets, "masculine_family", path),
        feminine_family=_parse_set(sets, "feminine_family", path),
        masculine_objects=_parse_set(sets, "masculine_objects", path, required=False),
        feminine_objects=_parse_set(sets, "feminine_objects", path, required=False),
    )


def bundled_stimulus_dir() -> Path:
    """Directory of the stimulus files shipped with the package."""
    return Path(resources.files("embias").joinpath("data", "stimuli"))


def bundled_stimulus_paths() -> list[Path]:
    return sorted(bundled_stimulus_dir().glob("*.json"))
