"""Corpus-level decoding with the trained networks.

Sentences are independent; ``threads`` (default: ``$SRL_THREADS`` or 1)
decodes them concurrently while keeping output order fixed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from xsrl.corpus import Corpus, Sentence
from xsrl.errors import XsrlError
from xsrl.model.network import ArgumentModel, PredicateIdentifier, SenseModel


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("SRL_THREADS", "1") or 1)
    return max(1, threads)


def tag(sentence: Sentence, predicates: Sequence[tuple[int, str]], model: ArgumentModel) -> Sentence:
    return model.tag(sentence, predicates)


def disambiguate_senses(sentence: Sentence, positions: Sequence[int], model: SenseModel) -> list[str]:
    return model.disambiguate(sentence, positions)


def identify_predicates(sentence: Sentence, model: PredicateIdentifier) -> set[int]:
    return set(model.identify(sentence))


def tag_sentence(sentence: Sentence, args: ArgumentModel, senses: SenseModel | None = None,
                 predid: PredicateIdentifier | None = None) -> Sentence:
    if predid is not None:
        positions = sorted(identify_predicates(sentence, predid))
    else:
        positions = sentence.predicate_positions
    if senses is not None:
        labels = disambiguate_senses(sentence, positions, senses)
    else:
        gold = {f.position: f.sense for f in sentence.frames}
        missing = [p for p in positions if p not in gold]
        if missing:
            raise XsrlError(f"no sense for predicates at {missing}; supply a sense model")
        labels = [gold[p] for p in positions]
    return tag(sentence, list(zip(positions, labels)), args)


def tag_corpus(corpus: Corpus, args: ArgumentModel, senses: SenseModel | None = None,
               predid: PredicateIdentifier | None = None, threads: int | None = None) -> Corpus:
    n = thread_count(threads)
    if n == 1:
        return Corpus(tuple(tag_sentence(s, args, senses, predid) for s in corpus))
    with ThreadPoolExecutor(max_workers=n) as pool:
        return Corpus(tuple(pool.map(lambda s: tag_sentence(s, args, senses, predid), corpus)))
