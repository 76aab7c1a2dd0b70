"""Small deterministic bilingual corpora for pipeline tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np

VERBS = [("praise", "lobt"), ("see", "sieht"), ("help", "hilft"), ("call", "ruft")]
NOUNS = [("anna", "Anna"), ("ben", "Ben"), ("dog", "Hund"), ("cat", "Katze"),
         ("king", "König"), ("child", "Kind"), ("bird", "Vogel"), ("farmer", "Bauer")]
ADJS = [("old", "alte"), ("small", "kleine"), ("quick", "schnelle"), ("green", "grüne")]
TALKS = [("talk", "Rede"), ("song", "Lied")]
GLUE = ("today", "heute")


def _row(idx, form, fill="_", pred="_", apreds=("_", "_")):
    cols = [str(idx), form, form.lower(), form.lower(), "_", "_", "_", "_", "_", "_", "_", "_", fill, pred]
    return "\t".join(cols + list(apreds))


def bilingual_corpus(n: int = 20, seed: int = 7):
    """``(source conll, target lines, fwd lines, rev lines)`` for ``n`` pairs.

    Source: ``N1 V N2 today ADJ TALK`` with the verb framing N1 (A0) and N2
    (A1) and the noun TALK framing ADJ (AM-ADJ).  The target mirrors the
    order; every other pair leaves ``heute`` unaligned, while in the other
    pairs it is aligned and so trains the NULL class.
    """
    rng = np.random.default_rng(seed)
    conll, tgt, fwd, rev = [], [], [], []
    for k in range(n):
        v = VERBS[k % len(VERBS)]
        a, b = (NOUNS[i] for i in rng.choice(len(NOUNS), size=2, replace=False))
        adj = ADJS[rng.integers(len(ADJS))]
        talk = TALKS[k % len(TALKS)]
        src = [a[0], v[0], b[0], GLUE[0], adj[0], talk[0]]
        roles = [("A0", "_"), ("_", "_"), ("A1", "_"), ("_", "_"), ("_", "AM-ADJ"), ("_", "_")]
        for i, form in enumerate(src, start=1):
            fill, pred = ("Y", f"{v[0]}.01") if i == 2 else ("Y", f"{talk[0]}.01") if i == 6 else ("_", "_")
            conll.append(_row(i, form, fill, pred, roles[i - 1]))
        conll.append("")
        tgt.append(" ".join([a[1], v[1], b[1], GLUE[1], adj[1], talk[1]]))
        links = [i for i in range(6) if not (i == 3 and k % 2 == 0)]
        fwd.append(" ".join(f"{i}-{i}" for i in links))
        rev.append(" ".join(f"{i}-{i}" for i in links))
    return "\n".join(conll) + "\n", tgt, fwd, rev


def write_bilingual(directory, n: int = 20, seed: int = 7) -> dict[str, Path]:
    directory = Path(directory)
    conll, tgt, fwd, rev = bilingual_corpus(n, seed)
    paths = {name: directory / fname for name, fname in
             (("src", "src.conll"), ("tgt", "tgt.txt"), ("fwd", "fwd.aln"), ("rev", "rev.aln"))}
    paths["src"].write_text(conll, encoding="utf-8")
    for name, lines in (("tgt", tgt), ("fwd", fwd), ("rev", rev)):
        paths[name].write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return paths
