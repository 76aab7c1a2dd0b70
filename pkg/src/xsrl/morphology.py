"""Single-stem extraction from labeled morph segmentations.

Known words take the stem read off their segmentation.  Anything else goes
through a fixed-affix matcher: strip the longest known prefix, then the
longest known suffix, never consuming the whole word.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from xsrl.errors import FormatError, XsrlError

logger = logging.getLogger(__name__)

TAGS = ("PRE", "STM", "SUF")


@dataclass(frozen=True)
class StemLexicon:
    prefixes: frozenset[str] = frozenset()
    suffixes: frozenset[str] = frozenset()
    known_stems: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "prefixes", frozenset(self.prefixes))
        object.__setattr__(self, "suffixes", frozenset(self.suffixes))
        if "" in self.prefixes or "" in self.suffixes:
            raise XsrlError("affix sets must not contain the empty string")
        for word, st in self.known_stems.items():
            if not st or st not in word:
                raise XsrlError(f"stem {st!r} is not a substring of {word!r}")
        # longest first; ties broken lexicographically for determinism
        object.__setattr__(self, "_pre", sorted(self.prefixes, key=lambda a: (-len(a), a)))
        object.__setattr__(self, "_suf", sorted(self.suffixes, key=lambda a: (-len(a), a)))

    def stem(self, word: str) -> str:
        return stem(self, word)

    def to_json(self) -> dict:
        return {
            "kind": "stem",
            "prefixes": sorted(self.prefixes),
            "suffixes": sorted(self.suffixes),
            "known_stems": dict(sorted(self.known_stems.items())),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StemLexicon":
        return cls(frozenset(obj["prefixes"]), frozenset(obj["suffixes"]), dict(obj["known_stems"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True, indent=1) + "\n"


def stem(lexicon: StemLexicon, word: str) -> str:
    if not word:
        raise XsrlError("cannot stem an empty word")
    known = lexicon.known_stems.get(word)
    if known is not None:
        return known
    rest = word
    for p in lexicon._pre:
        if len(p) < len(rest) and rest.startswith(p):
            rest = rest[len(p):]
            break
    for s in lexicon._suf:
        if len(s) < len(rest) and rest.endswith(s):
            rest = rest[:-len(s)]
            break
    return rest


def _stream(stream):
    return io.StringIO(stream) if isinstance(stream, str) else stream


def compile_lexicon(stream: TextIO | str | Iterable[str]) -> StemLexicon:
    """Build a lexicon from ``word<TAB>morph/TAG morph/TAG ...`` lines."""
    prefixes, suffixes, known = set(), set(), {}
    for lineno, raw in enumerate(_stream(stream), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        word, sep, analysis = line.partition("\t")
        if not sep or not word:
            raise FormatError(f"line {lineno}: expected 'word<TAB>segmentation'")
        morphs = []
        for item in analysis.split():
            morph, slash, tag = item.rpartition("/")
            if not slash or not morph or tag not in TAGS:
                raise FormatError(f"line {lineno}: malformed morph {item!r}")
            morphs.append((morph, tag))
        for morph, tag in morphs:
            if tag == "PRE":
                prefixes.add(morph)
            elif tag == "SUF":
                suffixes.add(morph)
        run = _first_stem_run(morphs)
        if run is None:
            logger.warning("line %d: %r has no STM morph; using the word as its stem", lineno, word)
            run = word
        elif run not in word:
            logger.warning("line %d: stem %r is not a substring of %r; using the word", lineno, run, word)
            run = word
        known[word] = run
    return StemLexicon(frozenset(prefixes), frozenset(suffixes), known)


def _first_stem_run(morphs: list[tuple[str, str]]) -> str | None:
    run = []
    for morph, tag in morphs:
        if tag == "STM":
            run.append(morph)
        elif run:
            break
    return "".join(run) if run else None


def load_lemma_lexicon(stream: TextIO | str | Iterable[str]) -> StemLexicon:
    """Supervised lemmas from ``word<TAB>lemma`` lines; OOV words map to themselves.

    Lemmas that are not substrings of their word (``went`` -> ``go``) are
    kept as the lemma slot's key, so this lexicon skips the substring check.
    """
    known = {}
    for lineno, raw in enumerate(_stream(stream), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise FormatError(f"line {lineno}: expected 'word<TAB>lemma'")
        known[parts[0]] = parts[1]
    return LemmaLexicon(known_stems=known)


class LemmaLexicon(StemLexicon):
    def __post_init__(self):
        object.__setattr__(self, "prefixes", frozenset())
        object.__setattr__(self, "suffixes", frozenset())
        object.__setattr__(self, "_pre", [])
        object.__setattr__(self, "_suf", [])

    def to_json(self) -> dict:
        return {**super().to_json(), "kind": "lemma"}


def lexicon_from_json(obj: dict) -> StemLexicon:
    if obj.get("kind") == "lemma":
        return LemmaLexicon(known_stems=dict(obj["known_stems"]))
    return StemLexicon.from_json(obj)
