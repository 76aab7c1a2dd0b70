"""Differentiable operations on :class:`Var`.

Inputs may mix ``Var`` and plain arrays; arrays are treated as constants.
Broadcasting follows numpy and is undone in the backward pass.
"""

from __future__ import annotations

import numpy as np

from xsrl.errors import ShapeError
from xsrl.neural.autodiff import DTYPE, Tape, Var, accumulate


def _tape(*xs) -> Tape:
    for x in xs:
        if isinstance(x, Var):
            return x.tape
    raise ShapeError("operation needs at least one Var operand")


def _lift(x, tape: Tape) -> Var:
    return x if isinstance(x, Var) else tape.const(x)


def _out(value, tape: Tape, inputs, backward_fn) -> Var:
    out = Var(value, tape, requires_grad=any(v.requires_grad for v in inputs))
    if out.requires_grad:
        tape.record(lambda: out.grad is not None and backward_fn(out.grad))
    return out


def unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b) -> Var:
    tape = _tape(a, b)
    a, b = _lift(a, tape), _lift(b, tape)

    def bw(g):
        accumulate(a, unbroadcast(g, a.shape))
        accumulate(b, unbroadcast(g, b.shape))
    return _out(a.value + b.value, tape, (a, b), bw)


def sub(a, b) -> Var:
    tape = _tape(a, b)
    a, b = _lift(a, tape), _lift(b, tape)

    def bw(g):
        accumulate(a, unbroadcast(g, a.shape))
        accumulate(b, unbroadcast(-g, b.shape))
    return _out(a.value - b.value, tape, (a, b), bw)


def mul(a, b) -> Var:
    tape = _tape(a, b)
    a, b = _lift(a, tape), _lift(b, tape)

    def bw(g):
        accumulate(a, unbroadcast(g * b.value, a.shape))
        accumulate(b, unbroadcast(g * a.value, b.shape))
    return _out(a.value * b.value, tape, (a, b), bw)


def matmul(a, b) -> Var:
    """``a @ b`` for ``a`` of rank 1..3 and ``b`` of rank 1 or 2."""
    tape = _tape(a, b)
    a, b = _lift(a, tape), _lift(b, tape)
    if b.value.ndim not in (1, 2) or a.value.ndim not in (1, 2, 3):
        raise ShapeError(f"matmul supports rank<=3 @ rank<=2, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    av, bv = a.value, b.value

    def bw(g):
        if av.ndim == 1 and bv.ndim == 1:
            accumulate(a, g * bv)
            accumulate(b, g * av)
            return
        a2 = av.reshape(1, -1) if av.ndim == 1 else av.reshape(-1, av.shape[-1])
        b2 = bv.reshape(-1, 1) if bv.ndim == 1 else bv
        g2 = g.reshape(a2.shape[0], b2.shape[1])
        if a.requires_grad:
            accumulate(a, (g2 @ b2.T).reshape(av.shape))
        if b.requires_grad:
            accumulate(b, (a2.T @ g2).reshape(bv.shape))
    return _out(av @ bv, tape, (a, b), bw)


def transpose(a: Var) -> Var:
    return _out(a.value.T, a.tape, (a,), lambda g: accumulate(a, g.T))


def reshape(a: Var, shape) -> Var:
    return _out(a.value.reshape(shape), a.tape, (a,), lambda g: accumulate(a, g.reshape(a.shape)))


def sigmoid_np(x: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def sigmoid(a: Var) -> Var:
    y = sigmoid_np(a.value)
    return _out(y, a.tape, (a,), lambda g: accumulate(a, g * y * (1.0 - y)))


def tanh(a: Var) -> Var:
    y = np.tanh(a.value)
    return _out(y, a.tape, (a,), lambda g: accumulate(a, g * (1.0 - y * y)))


def relu(a: Var) -> Var:
    mask = a.value > 0
    return _out(np.where(mask, a.value, 0.0), a.tape, (a,), lambda g: accumulate(a, g * mask))


def sum(a: Var) -> Var:  # noqa: A001 - mirrors numpy naming
    return _out(np.sum(a.value), a.tape, (a,), lambda g: accumulate(a, np.broadcast_to(g, a.shape)))


def concat(xs, axis: int = -1) -> Var:
    tape = _tape(*xs)
    xs = [_lift(x, tape) for x in xs]
    value = np.concatenate([x.value for x in xs], axis=axis)
    splits = np.cumsum([x.shape[axis] for x in xs])[:-1]

    def bw(g):
        for x, part in zip(xs, np.split(g, splits, axis=axis)):
            accumulate(x, part)
    return _out(value, tape, xs, bw)


def stack(xs, axis: int = 0) -> Var:
    tape = _tape(*xs)
    xs = [_lift(x, tape) for x in xs]
    value = np.stack([x.value for x in xs], axis=axis)

    def bw(g):
        for k, x in enumerate(xs):
            accumulate(x, np.take(g, k, axis=axis))
    return _out(value, tape, xs, bw)


def take(a: Var, indices) -> Var:
    """Rows ``a[indices]`` (repeats allowed), e.g. an embedding lookup."""
    idx = np.asarray(indices, dtype=np.int64)

    def bw(g):
        z = np.zeros_like(a.value)
        np.add.at(z, idx, g)
        accumulate(a, z)
    return _out(a.value[idx], a.tape, (a,), bw)


def getitem(a: Var, index) -> Var:
    def bw(g):
        z = np.zeros_like(a.value)
        np.add.at(z, index, g)
        accumulate(a, z)
    return _out(a.value[index], a.tape, (a,), bw)


def place_row(v: Var, n: int, row: int) -> Var:
    """``n x d`` matrix of zeros with ``v`` at 0-based ``row``."""
    value = np.zeros((n,) + v.shape, dtype=DTYPE)
    value[row] = v.value
    return _out(value, v.tape, (v,), lambda g: accumulate(v, g[row]))


def softmax_np(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax_np(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax_xent(logits, gold_index: int) -> tuple[Var, np.ndarray]:
    """Cross-entropy of a single logit vector; returns ``(loss, probabilities)``."""
    if not isinstance(logits, Var):
        logits = Tape().const(logits)
    if logits.value.ndim != 1:
        raise ShapeError(f"softmax_xent expects a vector, got shape {logits.shape}")
    k = logits.shape[0]
    if not 0 <= gold_index < k:
        raise ShapeError(f"gold index {gold_index} outside 0..{k - 1}")
    if not np.all(np.isfinite(logits.value)):
        raise ShapeError("non-finite logits")
    logp = log_softmax_np(logits.value)
    p = np.exp(logp)

    def bw(g):
        d = p.copy()
        d[gold_index] -= 1.0
        accumulate(logits, g * d)
    return _out(-logp[gold_index], logits.tape, (logits,), bw), p


def softmax_xent_rows(logits: Var, gold: np.ndarray) -> tuple[Var, np.ndarray]:
    """Summed cross-entropy over the rows of an ``N x K`` logit matrix."""
    gold = np.asarray(gold, dtype=np.int64)
    if logits.value.ndim != 2 or gold.shape != (logits.shape[0],):
        raise ShapeError(f"logits {logits.shape} do not match {gold.shape[0]} gold labels")
    k = logits.shape[1]
    if gold.size and (gold.min() < 0 or gold.max() >= k):
        raise ShapeError(f"gold index outside 0..{k - 1}")
    logp = log_softmax_np(logits.value)
    p = np.exp(logp)
    rows = np.arange(gold.shape[0])

    def bw(g):
        d = p.copy()
        d[rows, gold] -= 1.0
        accumulate(logits, g * d)
    return _out(-logp[rows, gold].sum(), logits.tape, (logits,), bw), p


def einsum(spec: str, a, b) -> Var:
    """Two-operand ``np.einsum`` without ellipses or repeated indices per operand."""
    tape = _tape(a, b)
    a, b = _lift(a, tape), _lift(b, tape)
    inputs, out_spec = spec.replace(" ", "").split("->")
    a_spec, b_spec = inputs.split(",")
    for s, v in ((a_spec, a), (b_spec, b)):
        if len(set(s)) != len(s) or len(s) != v.value.ndim:
            raise ShapeError(f"einsum operand spec {s!r} does not fit shape {v.shape}")
        if set(s) - set(out_spec) - set(a_spec if s is b_spec else b_spec):
            raise ShapeError(f"einsum {spec!r}: index summed within one operand")

    def bw(g):
        if a.requires_grad:
            accumulate(a, np.einsum(f"{out_spec},{b_spec}->{a_spec}", g, b.value))
        if b.requires_grad:
            accumulate(b, np.einsum(f"{out_spec},{a_spec}->{b_spec}", g, a.value))
    return _out(np.einsum(spec, a.value, b.value), tape, (a, b), bw)
