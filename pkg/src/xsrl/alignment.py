"""Directional word alignments, their one-to-one intersection, and density.

Alignment files use the aligner convention: one line per sentence pair,
whitespace-separated ``i-j`` pairs with 0-based indices, source first.  In
memory every index is 1-based and ``0`` never occurs; an unaligned target
position is simply absent from the mapping.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from xsrl.errors import FormatError, XsrlError


@dataclass(frozen=True)
class DirectionalAlignment:
    links: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "links", frozenset(self.links))
        for s, t in self.links:
            if s < 1 or t < 1:
                raise XsrlError(f"alignment indices are 1-based; got ({s}, {t})")

    def flipped(self) -> "DirectionalAlignment":
        return DirectionalAlignment(frozenset((t, s) for s, t in self.links))

    def __len__(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class OneToOneAlignment:
    """Injective partial map from target positions to source positions."""

    a: Mapping[int, int]
    src_len: int
    tgt_len: int

    def __post_init__(self):
        object.__setattr__(self, "a", dict(sorted(self.a.items())))
        if len(set(self.a.values())) != len(self.a):
            raise XsrlError("one-to-one alignment maps two target words to the same source word")
        for t, s in self.a.items():
            if not (1 <= s <= self.src_len and 1 <= t <= self.tgt_len):
                raise XsrlError(f"link ({s}, {t}) outside {self.src_len}x{self.tgt_len}")

    def source_of(self, tgt_index: int) -> int:
        """Aligned source index, 0 for a missing alignment."""
        return self.a.get(tgt_index, 0)

    @property
    def links(self) -> frozenset[tuple[int, int]]:
        return frozenset((s, t) for t, s in self.a.items())

    def __len__(self) -> int:
        return len(self.a)


def parse_pharaoh(line: str, src_len: int | None = None, tgt_len: int | None = None) -> DirectionalAlignment:
    """Read one line of 0-based ``i-j`` pairs into 1-based links.

    Lengths of ``None`` disable the range check on that side.
    """
    links = set()
    for tok in line.split():
        i, sep, j = tok.partition("-")
        if not sep or not i.isdigit() or not j.isdigit():
            raise FormatError(f"malformed alignment pair {tok!r}")
        s, t = int(i), int(j)
        if src_len is not None and s >= src_len:
            raise FormatError(f"alignment pair {tok!r}: source index {s} >= length {src_len}")
        if tgt_len is not None and t >= tgt_len:
            raise FormatError(f"alignment pair {tok!r}: target index {t} >= length {tgt_len}")
        links.add((s + 1, t + 1))
    return DirectionalAlignment(frozenset(links))


def format_pharaoh(links: Iterable[tuple[int, int]]) -> str:
    return " ".join(f"{s - 1}-{t - 1}" for s, t in sorted(links))


def intersect(fwd: DirectionalAlignment, rev: DirectionalAlignment,
              src_len: int | None = None, tgt_len: int | None = None) -> OneToOneAlignment:
    """One-to-one alignment from the links both directions agree on.

    ``rev`` must already be in (source, target) orientation.  Links of the
    intersection that share a source or a target word with another surviving
    link are all dropped.
    """
    common = fwd.links & rev.links
    src_count = Counter(s for s, _ in common)
    tgt_count = Counter(t for _, t in common)
    kept = {t: s for s, t in common if src_count[s] == 1 and tgt_count[t] == 1}
    if src_len is None:
        src_len = max((s for s, _ in common), default=0)
    if tgt_len is None:
        tgt_len = max((t for _, t in common), default=0)
    return OneToOneAlignment(kept, src_len, tgt_len)


def density(alignment: OneToOneAlignment) -> Fraction:
    """Fraction of target words with a non-missing alignment, exactly."""
    if alignment.tgt_len < 1:
        raise XsrlError("density of an empty target sentence is undefined")
    aligned = sum(1 for j in range(1, alignment.tgt_len + 1) if alignment.source_of(j) > 0)
    return Fraction(aligned, alignment.tgt_len)
