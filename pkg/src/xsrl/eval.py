"""Labeled precision / recall / F1 over semantic dependencies.

Scored items are argument edges ``(predicate, argument, role)`` plus one
item per predicate for its sense.  ``gold`` sense mode copies the gold sense
onto every predicted predicate whose position is a gold predicate, so only
argument structure (and predicate positions) can be wrong.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from xsrl.corpus import Corpus, Sentence
from xsrl.errors import XsrlError

SENSE_MODES = ("gold", "auto")


@dataclass(frozen=True)
class Score:
    n_gold: int
    n_pred: int
    n_correct: int
    per_role: dict[str, dict[str, int]] = field(default_factory=dict)

    @property
    def precision(self) -> float:
        return self.n_correct / self.n_pred if self.n_pred else 0.0

    @property
    def recall(self) -> float:
        return self.n_correct / self.n_gold if self.n_gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "n_gold": self.n_gold, "n_pred": self.n_pred, "n_correct": self.n_correct,
                "per_role": {r: dict(c) for r, c in sorted(self.per_role.items())}}


def _items(sentence: Sentence, senses: dict[int, str]) -> tuple[set, set]:
    edges = {(f.position, d.arg_index, d.role) for f in sentence.frames for d in f.args}
    sense_items = {(p, s) for p, s in senses.items()}
    return edges, sense_items


def score(gold: Corpus, pred: Corpus, sense_mode: str = "auto") -> Score:
    """Compare ``pred`` against ``gold`` sentence by sentence."""
    if sense_mode not in SENSE_MODES:
        raise XsrlError(f"sense mode must be one of {SENSE_MODES}, got {sense_mode!r}")
    if len(gold) != len(pred):
        raise XsrlError(f"gold has {len(gold)} sentences, prediction has {len(pred)}")
    n_gold = n_pred = n_correct = 0
    counts = {k: Counter() for k in ("gold", "pred", "correct")}
    for k, (g, p) in enumerate(zip(gold, pred), start=1):
        if len(g) != len(p):
            raise XsrlError(f"sentence {k}: gold has {len(g)} tokens, prediction has {len(p)}")
        g_senses = {f.position: f.sense for f in g.frames}
        p_senses = {f.position: f.sense for f in p.frames}
        if sense_mode == "gold":
            p_senses = {pos: g_senses.get(pos, s) for pos, s in p_senses.items()}
        g_edges, g_items = _items(g, g_senses)
        p_edges, p_items = _items(p, p_senses)
        hit_edges = g_edges & p_edges
        n_gold += len(g_edges) + len(g_items)
        n_pred += len(p_edges) + len(p_items)
        n_correct += len(hit_edges) + len(g_items & p_items)
        counts["gold"].update(r for _, _, r in g_edges)
        counts["pred"].update(r for _, _, r in p_edges)
        counts["correct"].update(r for _, _, r in hit_edges)
    roles = set(counts["gold"]) | set(counts["pred"])
    per_role = {r: {k: counts[k][r] for k in ("gold", "pred", "correct")} for r in sorted(roles)}
    return Score(n_gold, n_pred, n_correct, per_role)


def score_both(gold: Corpus, pred: Corpus) -> dict[str, Score]:
    return {mode: score(gold, pred, mode) for mode in SENSE_MODES}


def format_cell(f1_gold: float, f1_auto: float) -> str:
    """``"61.0 (57.0)"``: gold-sense F1 with the automatic-sense F1 in parentheses."""
    return f"{100 * f1_gold:.1f} ({100 * f1_auto:.1f})"


def report(scores: dict[str, Score]) -> tuple[str, str]:
    """Text line and JSON document for scores in both sense modes."""
    missing = [m for m in SENSE_MODES if m not in scores]
    if missing:
        raise XsrlError(f"report needs scores for sense modes {missing}")
    text = format_cell(scores["gold"].f1, scores["auto"].f1)
    doc = json.dumps({m: scores[m].to_json() for m in SENSE_MODES}, sort_keys=True, indent=1)
    return text, doc
