"""Minibatch Adam training for the SRL networks."""

from __future__ import annotations

import logging
from collections import defaultdict

import numpy as np

from xsrl.corpus import Corpus
from xsrl.errors import TrainingError
from xsrl.model.network import Instance, Network
from xsrl.neural.autodiff import Tape, backward
from xsrl.neural.optim import adam_step

logger = logging.getLogger(__name__)


def _subsample_null(instances: list[Instance], ratio: float, rng: np.random.Generator) -> list[Instance]:
    if ratio >= 1.0:
        return instances
    keep = rng.random(len(instances)) < ratio
    return [x for x, k in zip(instances, keep) if x[2] != 0 or k]


def train(net: Network, corpus: Corpus, epochs: int | None = None, log=None) -> list[float]:
    """Minimize the summed cross-entropy with Adam; returns the loss of every epoch.

    Instances are shuffled each epoch and cut into minibatches of
    ``config.minibatch``; inside a batch they are grouped by sentence so one
    padded encoder pass covers the whole batch.
    """
    cfg = net.config
    epochs = cfg.epochs if epochs is None else epochs
    instances = net.instances(corpus)
    if not instances:
        raise TrainingError("no training signal: the corpus yields zero training instances")
    rng = np.random.default_rng([cfg.seed, 1])
    history = []
    for epoch in range(1, epochs + 1):
        pool = instances if net.kind != "args" else _subsample_null(instances, cfg.null_ratio, rng)
        order = rng.permutation(len(pool))
        total = 0.0
        for start in range(0, len(order), cfg.minibatch):
            groups: dict[int, list[Instance]] = defaultdict(list)
            for k in order[start:start + cfg.minibatch]:
                groups[pool[k][0]].append(pool[k])
            tape = Tape(net.store)
            loss = net.batch_loss(tape, [(corpus[k], groups[k]) for k in sorted(groups)])
            total += float(loss.value)
            adam_step(net.store, backward(tape, loss), lr=cfg.lr)
        history.append(total)
        (log or logger.info)(f"{net.kind} epoch {epoch}/{epochs} loss {total:.6f} ({len(pool)} instances)")
    return history
