"""Independent, deliberately naive reference implementations used by the tests."""

from __future__ import annotations

import math
import random

import numpy as np

from xsrl.corpus import PredicateFrame, SemanticDependency, Sentence, Token


def intersect_oracle(fwd: set, rev: set) -> set:
    """Pairs in both sets, minus every pair sharing a row or column with another."""
    both = [(s, t) for (s, t) in fwd if (s, t) in rev]
    out = set()
    for s, t in both:
        clash = any((s2 == s or t2 == t) and (s2, t2) != (s, t) for s2, t2 in both)
        if not clash:
            out.add((s, t))
    return out


def project_oracle(src: Sentence, links: set, tgt_forms: list) -> Sentence:
    """Enumerate every (frame, dependency) and test both endpoint alignments."""
    def target_of(i):
        hits = [t for s, t in links if s == i]
        return hits[0] if hits else None

    frames = []
    for frame in src.frames:
        p = target_of(frame.position)
        if p is None:
            continue
        deps = []
        for dep in frame.args:
            m = target_of(dep.arg_index)
            if m is not None:
                deps.append(SemanticDependency(m, dep.role))
        frames.append(PredicateFrame(p, frame.sense, tuple(deps)))
    aligned = {t for _, t in links}
    tokens = tuple(Token(j, f) for j, f in enumerate(tgt_forms, start=1))
    return Sentence(tokens, tuple(frames), tuple(j in aligned for j in range(1, len(tgt_forms) + 1)))


def random_injective_links(rng: random.Random, n_src: int, n_tgt: int, p: float = 0.7) -> set:
    tgts = list(range(1, n_tgt + 1))
    rng.shuffle(tgts)
    return {(s, t) for s, t in zip(range(1, n_src + 1), tgts) if rng.random() < p}


def random_source(rng: random.Random, n: int, roles=("A0", "A1", "A2", "AM-TMP", "AM-LOC")) -> Sentence:
    positions = sorted(rng.sample(range(1, n + 1), rng.randint(0, min(3, n))))
    frames = []
    for p in positions:
        args = sorted(rng.sample(range(1, n + 1), rng.randint(0, n // 2)))
        frames.append(PredicateFrame(p, f"v{p}.0{rng.randint(1, 3)}",
                                     tuple(SemanticDependency(a, rng.choice(roles)) for a in args)))
    return Sentence.from_forms([f"w{i}" for i in range(1, n + 1)], frames)


def lstm_scalar(x_seq, W, U, b):
    """Element-by-element LSTM over a ``(T, d)`` sequence; gates ``[i, f, o, g]``."""
    h4, d = W.shape
    hd = h4 // 4
    h = [0.0] * hd
    c = [0.0] * hd
    out = []
    for x in x_seq:
        z = [b[r] + sum(W[r][k] * x[k] for k in range(d)) + sum(U[r][k] * h[k] for k in range(hd))
             for r in range(h4)]
        sig = [1.0 / (1.0 + math.exp(-v)) for v in z]
        c = [sig[hd + k] * c[k] + sig[k] * math.tanh(z[3 * hd + k]) for k in range(hd)]
        h = [sig[2 * hd + k] * math.tanh(c[k]) for k in range(hd)]
        out.append(h)
    return np.array(out)


def adam_scalar(theta: float, grad, steps: int, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8) -> list:
    m = v = 0.0
    trace = []
    for t in range(1, steps + 1):
        g = grad(theta)
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1 ** t)
        v_hat = v / (1 - beta2 ** t)
        theta = theta - lr * m_hat / (math.sqrt(v_hat) + eps)
        trace.append(theta)
    return trace
