"""LSTM cells and stacked bidirectional LSTMs.

Gate layout inside the ``4h`` pre-activation is ``[i, f, o, g]``::

    i, f, o = logistic(Wx + Uh + b)    g = tanh(Wx + Uh + b)
    c' = f * c + i * g                 h' = o * tanh(c')

:func:`lstm_step` composes the generic ops and is the reference cell.
:func:`lstm_layer` runs a whole (batched) sequence as one tape node with a
hand-written BPTT backward; stacks use the fused layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from xsrl.errors import ShapeError
from xsrl.neural import ops
from xsrl.neural.autodiff import DTYPE, Tape, Var, accumulate
from xsrl.neural.optim import ParamStore

DIRECTIONS = ("fwd", "bwd")


def glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def init_cell(rng: np.random.Generator, input_dim: int, hidden_dim: int):
    """Glorot-uniform weights, zero biases except forget gate = 1."""
    h = hidden_dim
    W = np.concatenate([glorot(rng, h, input_dim) for _ in range(4)])
    U = np.concatenate([glorot(rng, h, h) for _ in range(4)])
    b = np.zeros(4 * h)
    b[h:2 * h] = 1.0
    return W, U, b


@dataclass(frozen=True)
class LSTMStack:
    """Deep BiLSTM whose parameters live in a :class:`ParamStore` under ``name``."""

    name: str
    input_dim: int
    hidden_dim: int
    depth: int

    def __post_init__(self):
        if min(self.input_dim, self.hidden_dim, self.depth) < 1:
            raise ShapeError(f"{self.name}: dims and depth must be >= 1")

    @property
    def output_dim(self) -> int:
        return 2 * self.hidden_dim

    def layer_input_dim(self, layer: int) -> int:
        return self.input_dim if layer == 0 else 2 * self.hidden_dim

    def param_names(self, layer: int, direction: str) -> tuple[str, str, str]:
        base = f"{self.name}.l{layer}.{direction}"
        return f"{base}.W", f"{base}.U", f"{base}.b"

    def init(self, store: ParamStore, rng: np.random.Generator) -> "LSTMStack":
        for layer in range(self.depth):
            for direction in DIRECTIONS:
                for pname, value in zip(self.param_names(layer, direction),
                                        init_cell(rng, self.layer_input_dim(layer), self.hidden_dim)):
                    store.add(pname, value)
        return self

    def cell(self, tape: Tape, layer: int, direction: str) -> tuple[Var, Var, Var]:
        return tuple(tape.param(n) for n in self.param_names(layer, direction))

    def encode(self, tape: Tape, xs, lengths=None) -> Var:
        return bilstm_encode(self, tape, xs, lengths)


def _check(name: str, shape, expected):
    if tuple(shape) != tuple(expected):
        raise ShapeError(f"{name}: expected shape {tuple(expected)}, got {tuple(shape)}")


def lstm_step(params, x, h_prev, c_prev) -> tuple[Var, Var]:
    """One LSTM transition built from elementary ops.  ``params = (W, U, b)``."""
    W, U, b = params
    tape = ops._tape(W, U, b, x, h_prev, c_prev)
    W, U, b, x, h_prev, c_prev = (ops._lift(v, tape) for v in (W, U, b, x, h_prev, c_prev))
    if W.value.ndim != 2 or W.shape[0] % 4:
        raise ShapeError(f"W: expected shape (4h, d), got {W.shape}")
    h4, d = W.shape
    h = h4 // 4
    _check("U", U.shape, (h4, h))
    _check("b", b.shape, (h4,))
    _check("x", x.shape, (d,))
    _check("h_prev", h_prev.shape, (h,))
    _check("c_prev", c_prev.shape, (h,))
    z = W @ x + U @ h_prev + b
    i = ops.sigmoid(z[0:h])
    f = ops.sigmoid(z[h:2 * h])
    o = ops.sigmoid(z[2 * h:3 * h])
    g = ops.tanh(z[3 * h:4 * h])
    c = f * c_prev + i * g
    return o * ops.tanh(c), c


def lstm_layer(x: Var, W: Var, U: Var, b: Var, reverse: bool = False, lengths=None) -> Var:
    """Run one direction over ``x`` of shape ``(T, B, d)``; returns ``(T, B, h)``.

    Initial states are zero.  ``reverse`` consumes the sequence from the end;
    output position ``t`` always holds the state after reading ``x[t]``.
    ``lengths`` marks right-padded batches: steps ``t >= lengths[b]`` leave
    column ``b``'s state untouched, so the backward direction of a short
    sequence starts at its own last element.  Padded outputs are meaningless.
    """
    tape = x.tape
    if x.value.ndim != 3:
        raise ShapeError(f"lstm_layer expects (T, B, d) input, got {x.shape}")
    T, B, d = x.shape
    h4 = W.shape[0]
    h = h4 // 4
    _check("W", W.shape, (h4, d))
    _check("U", U.shape, (h4, h))
    _check("b", b.shape, (h4,))
    Wv, Uv = W.value, U.value
    order = list(range(T - 1, -1, -1) if reverse else range(T))
    mask = None
    if lengths is not None:
        lengths = np.asarray(lengths)
        if lengths.shape != (B,) or lengths.min(initial=1) < 1 or lengths.max(initial=0) > T:
            raise ShapeError(f"lengths must be {B} values in 1..{T}")
        if lengths.min() < T:
            mask = (np.arange(T)[:, None] < lengths[None, :]).astype(DTYPE)[:, :, None]  # (T, B, 1)

    xw = x.value @ Wv.T + b.value  # (T, B, 4h)
    gates = np.empty((T, B, h4), dtype=DTYPE)
    cs = np.empty((T, B, h), dtype=DTYPE)    # cell state after step t (carried over padding)
    tcs = np.empty((T, B, h), dtype=DTYPE)   # tanh of the freshly computed cell
    hs = np.empty((T, B, h), dtype=DTYPE)
    h_prev = np.zeros((B, h), dtype=DTYPE)
    c_prev = np.zeros((B, h), dtype=DTYPE)
    for t in order:
        z = xw[t] + h_prev @ Uv.T
        a = gates[t]
        a[:, :3 * h] = ops.sigmoid_np(z[:, :3 * h])
        a[:, 3 * h:] = np.tanh(z[:, 3 * h:])
        c_new = a[:, h:2 * h] * c_prev + a[:, :h] * a[:, 3 * h:]
        tcs[t] = np.tanh(c_new)
        h_new = a[:, 2 * h:3 * h] * tcs[t]
        if mask is not None:
            m = mask[t]
            c_new = m * c_new + (1.0 - m) * c_prev
            h_new = m * h_new + (1.0 - m) * h_prev
        cs[t] = c_prev = c_new
        hs[t] = h_prev = h_new

    def bw(gh):
        dz_all = np.empty((T, B, h4), dtype=DTYPE)
        dU = np.zeros_like(Uv)
        dh_next = np.zeros((B, h), dtype=DTYPE)
        dc_next = np.zeros((B, h), dtype=DTYPE)
        for k in range(T - 1, -1, -1):
            t = order[k]
            prev = order[k - 1] if k > 0 else None
            a = gates[t]
            i, f, o, g = a[:, :h], a[:, h:2 * h], a[:, 2 * h:3 * h], a[:, 3 * h:]
            c_before = cs[prev] if prev is not None else 0.0
            dh = gh[t] + dh_next
            dc = dh * o * (1.0 - tcs[t] ** 2) + dc_next
            if mask is not None:
                m = mask[t]
                carry_h, carry_c = (1.0 - m) * dh, (1.0 - m) * dc_next
                dh, dc = m * dh, m * dc
            dz = dz_all[t]
            dz[:, :h] = dc * g * i * (1.0 - i)
            dz[:, h:2 * h] = dc * c_before * f * (1.0 - f)
            dz[:, 2 * h:3 * h] = dh * tcs[t] * o * (1.0 - o)
            dz[:, 3 * h:] = dc * i * (1.0 - g * g)
            if prev is not None:
                dU += dz.T @ hs[prev]
            dh_next = dz @ Uv
            dc_next = dc * f
            if mask is not None:
                dh_next += carry_h
                dc_next += carry_c
        flat = dz_all.reshape(-1, h4)
        accumulate(W, flat.T @ x.value.reshape(-1, d))
        accumulate(U, dU)
        accumulate(b, flat.sum(axis=0))
        accumulate(x, dz_all @ Wv)

    return ops._out(hs, tape, (x, W, U, b), bw)


def bilstm_encode(stack: LSTMStack, tape: Tape, xs, lengths=None) -> Var:
    """Top-layer ``[forward; backward]`` states for every position.

    ``xs`` is ``(T, d)`` or batched ``(T, B, d)``; the output keeps the
    batch axis iff the input had one.  ``lengths`` (batched input only)
    gives each column's true length for right-padded batches.
    """
    xs = ops._lift(xs, tape)
    batched = xs.value.ndim == 3
    if xs.value.ndim not in (2, 3) or xs.shape[0] == 0:
        raise ShapeError(f"{stack.name}: expected a non-empty (T, d) sequence, got shape {xs.shape}")
    if xs.shape[-1] != stack.input_dim:
        raise ShapeError(f"{stack.name}: input dim {xs.shape[-1]} != {stack.input_dim}")
    h = xs if batched else ops.reshape(xs, (xs.shape[0], 1, xs.shape[1]))
    for layer in range(stack.depth):
        fwd = lstm_layer(h, *stack.cell(tape, layer, "fwd"), lengths=lengths)
        bwd = lstm_layer(h, *stack.cell(tape, layer, "bwd"), reverse=True, lengths=lengths)
        h = ops.concat([fwd, bwd], axis=-1)
    return h if batched else ops.reshape(h, (h.shape[0], h.shape[2]))
