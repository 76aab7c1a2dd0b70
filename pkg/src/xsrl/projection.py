"""Transfer predicate-argument annotations across one-to-one alignments.

A target frame exists at ``p`` iff the source word aligned to ``p`` is a
predicate; a dependency ``p -r-> m`` is added iff the source holds
``a(p) -r-> a(m)`` with the same sense.  Senses are copied verbatim.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from xsrl.alignment import OneToOneAlignment, density, intersect, parse_pharaoh
from xsrl.corpus import Corpus, PredicateFrame, SemanticDependency, Sentence, Token, corpus_stats
from xsrl.errors import XsrlError


@dataclass(frozen=True)
class ProjectionStats:
    sentences: int = 0
    tokens: int = 0
    types: int = 0
    predicates: int = 0

    def to_json(self) -> dict:
        return asdict(self)


def project_sentence(src: Sentence, align: OneToOneAlignment,
                     tgt_tokens: Sequence[str] | Sequence[Token]) -> Sentence:
    if align.src_len != len(src):
        raise XsrlError(f"alignment source length {align.src_len} != source sentence length {len(src)}")
    if align.tgt_len != len(tgt_tokens):
        raise XsrlError(f"alignment target length {align.tgt_len} != target sentence length {len(tgt_tokens)}")
    tokens = tuple(t if isinstance(t, Token) else Token(i, t) for i, t in enumerate(tgt_tokens, start=1))

    # source index -> target index (injective)
    inverse = {s: t for t, s in align.a.items()}
    frames = []
    for src_frame in src.frames:
        p = inverse.get(src_frame.position)
        if p is None:
            continue
        args = [SemanticDependency(inverse[d.arg_index], d.role)
                for d in src_frame.args if d.arg_index in inverse]
        frames.append(PredicateFrame(p, src_frame.sense, tuple(args)))
    mask = tuple(align.source_of(j) > 0 for j in range(1, len(tokens) + 1))
    return Sentence(tokens, tuple(frames), mask)


def _as_fraction(threshold) -> Fraction:
    # 0.8 must compare as 4/5, not as the nearest binary double
    if isinstance(threshold, float):
        return Fraction(repr(threshold))
    return Fraction(threshold)


def filter_by_density(pairs: Iterable[tuple[OneToOneAlignment, Sentence]], threshold) -> list[tuple[OneToOneAlignment, Sentence]]:
    """Keep pairs whose alignment density is at least ``threshold``."""
    limit = _as_fraction(threshold)
    if not 0 <= limit <= 1:
        raise XsrlError(f"density threshold must lie in [0, 1], got {threshold}")
    return [(a, s) for a, s in pairs if density(a) >= limit]


def project_corpus(src: Corpus | Sequence[Sentence], tgt: Sequence[Sequence[str]],
                   fwd_lines: Sequence[str], rev_lines: Sequence[str], threshold=0.8,
                   rev_target_first: bool = True) -> tuple[Corpus, ProjectionStats]:
    """Intersect, project and density-filter a parallel corpus.

    ``rev_lines`` holds the target-to-source alignment; with
    ``rev_target_first`` its pairs are read as ``tgt-src`` and flipped.
    Sentence pairs with an empty target are skipped.
    """
    src = list(src)
    counts = [len(src), len(tgt), len(fwd_lines), len(rev_lines)]
    if len(set(counts)) != 1:
        first = min(counts)
        raise XsrlError(f"parallel inputs diverge at sentence {first + 1}: "
                        f"source={counts[0]} target={counts[1]} fwd={counts[2]} rev={counts[3]}")
    pairs = []
    for k, (s, t, f, r) in enumerate(zip(src, tgt, fwd_lines, rev_lines), start=1):
        if not t:
            continue
        try:
            fwd = parse_pharaoh(f, len(s), len(t))
            if rev_target_first:
                rev = parse_pharaoh(r, len(t), len(s)).flipped()
            else:
                rev = parse_pharaoh(r, len(s), len(t))
            align = intersect(fwd, rev, len(s), len(t))
            pairs.append((align, project_sentence(s, align, t)))
        except XsrlError as exc:
            raise type(exc)(f"sentence {k}: {exc}") from None
    kept = [sent for _, sent in filter_by_density(pairs, threshold)]
    return Corpus(tuple(kept)), ProjectionStats(**corpus_stats(kept))
