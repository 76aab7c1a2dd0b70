"""Data model and I/O for dependency-based SRL corpora.

On-disk layout is CoNLL-2009 (tab separated, one token per line, blank line
after every sentence)::

    ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL FILLPRED PRED APRED1 ... APREDm

``PLEMMA`` and ``PPOS`` populate :attr:`Token.lemma` and :attr:`Token.pos`;
the remaining non-SRL columns are carried through untouched.  A sentence may
be preceded by a ``# labeled_mask = 0110...`` comment recording which tokens
carry trusted (projected) labels.
"""

from __future__ import annotations

import io
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence, TextIO

import numpy as np

from xsrl.errors import FormatError, XsrlError

logger = logging.getLogger(__name__)

NULL_ROLE = "NULL"
PAD = "<pad>"
UNK = "<unk>"
EMPTY = "_"
N_FIXED_COLUMNS = 14
MASK_COMMENT = "# labeled_mask = "

# 0-based column offsets inside a token line
_FORM, _PLEMMA, _PPOS, _FILLPRED, _PRED = 1, 3, 5, 12, 13
_OPAQUE = (2, 4, 6, 7, 8, 9, 10, 11)

_WS = re.compile(r"\s")


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    pos: str | None = None
    lemma: str | None = None
    # LEMMA POS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL, verbatim
    extra: tuple[str, ...] = (EMPTY,) * len(_OPAQUE)

    def __post_init__(self):
        if self.index < 1:
            raise XsrlError(f"token index must be >= 1, got {self.index}")
        if not self.form or _WS.search(self.form):
            raise XsrlError(f"token {self.index}: form must be non-empty without whitespace: {self.form!r}")
        if len(self.extra) != len(_OPAQUE):
            raise XsrlError(f"token {self.index}: expected {len(_OPAQUE)} opaque columns, got {len(self.extra)}")


@dataclass(frozen=True)
class SemanticDependency:
    arg_index: int
    role: str

    def __post_init__(self):
        if self.role == NULL_ROLE:
            raise XsrlError("NULL is never stored as a role; omit the dependency instead")
        if not self.role:
            raise XsrlError("empty role label")


@dataclass(frozen=True)
class PredicateFrame:
    position: int
    sense: str
    args: tuple[SemanticDependency, ...] = ()

    def __post_init__(self):
        args = tuple(sorted(self.args, key=lambda d: d.arg_index))
        object.__setattr__(self, "args", args)
        seen = set()
        for dep in args:
            if dep.arg_index in seen:
                raise XsrlError(f"frame at {self.position}: two arguments at token {dep.arg_index}")
            seen.add(dep.arg_index)
        if not self.sense:
            raise XsrlError(f"frame at {self.position}: empty sense")

    def role_of(self, arg_index: int) -> str | None:
        for dep in self.args:
            if dep.arg_index == arg_index:
                return dep.role
        return None


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    frames: tuple[PredicateFrame, ...] = ()
    labeled_mask: tuple[bool, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "frames", tuple(sorted(self.frames, key=lambda f: f.position)))
        if self.labeled_mask is not None:
            object.__setattr__(self, "labeled_mask", tuple(bool(b) for b in self.labeled_mask))
        n = len(self.tokens)
        for i, tok in enumerate(self.tokens, start=1):
            if tok.index != i:
                raise XsrlError(f"token indices must be contiguous 1..n; found {tok.index} at slot {i}")
        positions = set()
        for fr in self.frames:
            if not 1 <= fr.position <= n:
                raise XsrlError(f"frame position {fr.position} outside 1..{n}")
            if fr.position in positions:
                raise XsrlError(f"two frames at position {fr.position}")
            positions.add(fr.position)
            for dep in fr.args:
                if not 1 <= dep.arg_index <= n:
                    raise XsrlError(f"argument index {dep.arg_index} outside 1..{n}")
        if self.labeled_mask is not None and len(self.labeled_mask) != n:
            raise XsrlError(f"labeled_mask has {len(self.labeled_mask)} entries for {n} tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def predicate_positions(self) -> list[int]:
        return [f.position for f in self.frames]

    def frame_at(self, position: int) -> PredicateFrame | None:
        for fr in self.frames:
            if fr.position == position:
                return fr
        return None

    def is_labeled(self, index: int) -> bool:
        return self.labeled_mask is None or self.labeled_mask[index - 1]

    @classmethod
    def from_forms(cls, forms: Sequence[str], frames=(), labeled_mask=None) -> "Sentence":
        tokens = tuple(Token(i, f) for i, f in enumerate(forms, start=1))
        return cls(tokens, tuple(frames), labeled_mask)


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]


# ---------------------------------------------------------------------------
# CoNLL reading / writing


def _lines(stream: TextIO | str | Iterable[str]) -> Iterator[str]:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    for line in stream:
        yield line.rstrip("\r\n")


def read_conll(stream: TextIO | str | Iterable[str]) -> Corpus:
    """Parse a CoNLL-2009 corpus from a text stream (or a whole string)."""
    sentences: list[Sentence] = []
    block: list[tuple[int, list[str]]] = []
    mask: tuple[bool, ...] | None = None
    mask_line = 0

    def flush():
        nonlocal block, mask
        if block:
            sentences.append(_build_sentence(block, mask, len(sentences) + 1, mask_line))
        elif mask is not None:
            raise FormatError(f"line {mask_line}: labeled_mask comment not followed by a sentence")
        block, mask = [], None

    lineno = 0
    for lineno, line in enumerate(_lines(stream), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            if block:
                raise FormatError(f"line {lineno}: comment inside a sentence")
            if line.startswith(MASK_COMMENT):
                bits = line[len(MASK_COMMENT):].strip()
                if not bits or set(bits) - {"0", "1"}:
                    raise FormatError(f"line {lineno}: malformed labeled_mask {bits!r}")
                mask = tuple(b == "1" for b in bits)
                mask_line = lineno
            continue
        cols = line.split("\t")
        if len(cols) < N_FIXED_COLUMNS:
            raise FormatError(
                f"line {lineno}: expected at least {N_FIXED_COLUMNS} tab-separated columns, got {len(cols)}")
        if block and len(cols) != len(block[0][1]):
            raise FormatError(
                f"line {lineno}: column count {len(cols)} differs from {len(block[0][1])} earlier in the sentence")
        block.append((lineno, cols))
    flush()
    return Corpus(tuple(sentences))


def _build_sentence(block, mask, ordinal, mask_line) -> Sentence:
    tokens = []
    pred_rows = []
    for lineno, cols in block:
        try:
            idx = int(cols[0])
        except ValueError:
            raise FormatError(f"line {lineno}: token id {cols[0]!r} is not an integer "
                              f"({len(cols)} columns)") from None
        if idx != len(tokens) + 1:
            raise FormatError(f"line {lineno}: token id {idx}, expected {len(tokens) + 1}")
        try:
            tokens.append(Token(
                index=idx,
                form=cols[_FORM],
                pos=None if cols[_PPOS] == EMPTY else cols[_PPOS],
                lemma=None if cols[_PLEMMA] == EMPTY else cols[_PLEMMA],
                extra=tuple(cols[c] for c in _OPAQUE),
            ))
        except XsrlError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        fill, pred = cols[_FILLPRED], cols[_PRED]
        if fill == "Y":
            if pred == EMPTY:
                raise FormatError(f"line {lineno}: FILLPRED is Y but PRED is empty")
            pred_rows.append((idx, pred))
        elif fill != EMPTY or pred != EMPTY:
            raise FormatError(f"line {lineno}: PRED {pred!r} given without FILLPRED=Y")

    n_apred = len(block[0][1]) - N_FIXED_COLUMNS
    if n_apred != len(pred_rows):
        raise FormatError(
            f"sentence {ordinal}: {n_apred} APRED columns for {len(pred_rows)} predicates")
    frames = []
    for k, (position, sense) in enumerate(pred_rows):
        args = []
        for lineno, cols in block:
            role = cols[N_FIXED_COLUMNS + k]
            if role != EMPTY:
                if role == NULL_ROLE:
                    raise FormatError(f"line {lineno}: NULL role stored explicitly")
                args.append(SemanticDependency(int(cols[0]), role))
        frames.append(PredicateFrame(position, sense, tuple(args)))
    if mask is not None and len(mask) != len(tokens):
        raise FormatError(f"line {mask_line}: labeled_mask has {len(mask)} entries for {len(tokens)} tokens")
    return Sentence(tuple(tokens), tuple(frames), mask)


def _check_field(value: str, what: str):
    if "\t" in value or "\n" in value or "\r" in value:
        raise XsrlError(f"{what} {value!r} contains a tab or newline")


def format_sentence(sentence: Sentence) -> str:
    out = []
    if sentence.labeled_mask is not None:
        out.append(MASK_COMMENT + "".join("1" if b else "0" for b in sentence.labeled_mask))
    frames = sentence.frames
    roles = [{d.arg_index: d.role for d in fr.args} for fr in frames]
    for fr in frames:
        _check_field(fr.sense, "sense")
        for dep in fr.args:
            _check_field(dep.role, "role label")
    senses = {fr.position: fr.sense for fr in frames}
    for tok in sentence.tokens:
        cols = [EMPTY] * N_FIXED_COLUMNS
        cols[0] = str(tok.index)
        cols[_FORM] = tok.form
        cols[_PLEMMA] = EMPTY if tok.lemma is None else tok.lemma
        cols[_PPOS] = EMPTY if tok.pos is None else tok.pos
        for c, v in zip(_OPAQUE, tok.extra):
            cols[c] = v
        if tok.index in senses:
            cols[_FILLPRED] = "Y"
            cols[_PRED] = senses[tok.index]
        cols.extend(r.get(tok.index, EMPTY) for r in roles)
        for v in cols:
            _check_field(v, "column value")
        out.append("\t".join(cols))
    return "\n".join(out) + "\n\n"


def write_conll(corpus: Corpus | Iterable[Sentence]) -> str:
    return "".join(format_sentence(s) for s in corpus)


# ---------------------------------------------------------------------------
# Embeddings and vocabularies


@dataclass
class EmbeddingTable:
    dim: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)
    trainable: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise XsrlError(f"embedding dim must be positive, got {self.dim}")
        for word, vec in self.entries.items():
            if vec.shape != (self.dim,) or not np.all(np.isfinite(vec)):
                raise XsrlError(f"embedding for {word!r} must be {self.dim} finite values")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def lookup(self, word: str) -> np.ndarray:
        """Vector for ``word``, or zeros when absent."""
        vec = self.entries.get(word)
        return np.zeros(self.dim) if vec is None else vec


def load_embeddings(stream: TextIO | str | Iterable[str], expected_dim: int) -> EmbeddingTable:
    entries: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(_lines(stream), start=1):
        parts = line.split()
        if not parts:
            continue
        if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts) and int(parts[1]) == expected_dim:
            continue  # word2vec "count dim" header
        if len(parts) - 1 != expected_dim:
            raise FormatError(f"line {lineno}: expected {expected_dim} components, got {len(parts) - 1}")
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError:
            raise FormatError(f"line {lineno}: non-numeric component") from None
        if not np.all(np.isfinite(vec)):
            raise FormatError(f"line {lineno}: non-finite component")
        entries[parts[0]] = vec
    return EmbeddingTable(expected_dim, entries, trainable=False)


class Vocab:
    """Dense bijection between strings and ids; ``specials`` take the first ids."""

    def __init__(self, items: Sequence[str] = (), specials: Sequence[str] = (PAD, UNK)):
        self.itos: list[str] = list(specials) + [s for s in items if s not in specials]
        self.stoi: dict[str, int] = {}
        for i, s in enumerate(self.itos):
            if s in self.stoi:
                raise XsrlError(f"duplicate vocabulary item {s!r}")
            self.stoi[s] = i
        self.specials = tuple(specials)

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, item: str) -> bool:
        return item in self.stoi

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.itos == other.itos and self.specials == other.specials

    def __repr__(self) -> str:
        return f"Vocab({len(self)} items, specials={self.specials})"

    @property
    def pad_id(self) -> int | None:
        return self.stoi.get(PAD)

    @property
    def unk_id(self) -> int | None:
        return self.stoi.get(UNK)

    @property
    def items(self) -> list[str]:
        """Non-special entries, in id order."""
        return self.itos[len(self.specials):]

    def id(self, item: str) -> int:
        i = self.stoi.get(item)
        if i is not None:
            return i
        if self.unk_id is None:
            raise XsrlError(f"{item!r} not in vocabulary")
        return self.unk_id

    def ids(self, items: Iterable[str]) -> list[int]:
        return [self.id(s) for s in items]

    def to_json(self) -> dict:
        return {"specials": list(self.specials), "items": self.items}

    @classmethod
    def from_json(cls, obj: dict) -> "Vocab":
        return cls(obj["items"], specials=obj["specials"])

    @classmethod
    def from_counts(cls, counts: Counter, min_count: int = 1, specials=(PAD, UNK)) -> "Vocab":
        # frequency descending, then lexicographic
        kept = sorted((s for s, c in counts.items() if c >= min_count), key=lambda s: (-counts[s], s))
        return cls(kept, specials)


class Vocabs(NamedTuple):
    words: Vocab
    chars: Vocab
    roles: Vocab
    senses: Vocab


def build_vocab(corpus: Iterable[Sentence], min_count: int = 2, char_min_count: int = 1) -> Vocabs:
    if min_count < 1 or char_min_count < 1:
        raise XsrlError("min_count must be >= 1")
    words, chars, roles, senses = Counter(), Counter(), Counter(), Counter()
    for sent in corpus:
        for tok in sent.tokens:
            words[tok.form] += 1
            chars.update(tok.form)
        for fr in sent.frames:
            senses[fr.sense] += 1
            roles.update(d.role for d in fr.args)
    return Vocabs(
        words=Vocab.from_counts(words, min_count),
        chars=Vocab.from_counts(chars, char_min_count),
        roles=Vocab.from_counts(roles, 1, specials=(NULL_ROLE,)),
        senses=Vocab.from_counts(senses, 1, specials=()),
    )


def corpus_stats(corpus: Iterable[Sentence]) -> dict:
    """Sentence/token/type/predicate counts of a corpus."""
    n_sent = n_tok = n_pred = 0
    types = set()
    for sent in corpus:
        n_sent += 1
        n_tok += len(sent)
        n_pred += len(sent.frames)
        types.update(sent.forms)
    return {"sentences": n_sent, "tokens": n_tok, "types": len(types), "predicates": n_pred}
