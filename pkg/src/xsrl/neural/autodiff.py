"""Reverse-mode differentiation over numpy arrays.

Every forward computation is recorded on a :class:`Tape`.  Operations append a
closure that pushes the output adjoint back into the inputs; :func:`backward`
replays those closures once, in reverse, from a scalar root.

    tape = Tape(store)
    loss = ops.sum(ops.tanh(tape.param("w") @ tape.const(x)))
    grads = backward(tape, loss)
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from xsrl.errors import ShapeError, XsrlError

DTYPE = np.float64


class Var:
    __slots__ = ("value", "grad", "tape", "requires_grad", "name")

    def __init__(self, value, tape: "Tape", requires_grad: bool = False, name: str | None = None):
        self.value = np.asarray(value, dtype=DTYPE)
        self.grad: np.ndarray | None = None
        self.tape = tape
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def __repr__(self) -> str:
        tag = f" {self.name}" if self.name else ""
        return f"<Var{tag} shape={self.shape}>"

    def __add__(self, other):
        from xsrl.neural import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from xsrl.neural import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from xsrl.neural import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from xsrl.neural import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from xsrl.neural import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from xsrl.neural import ops
        return ops.matmul(self, other)

    def __getitem__(self, index):
        from xsrl.neural import ops
        return ops.getitem(self, index)

    @property
    def T(self):
        from xsrl.neural import ops
        return ops.transpose(self)


def accumulate(var: Var, g: np.ndarray):
    if not var.requires_grad:
        return
    if var.grad is None:
        var.grad = np.array(g, dtype=DTYPE, copy=True)
    else:
        var.grad += g


class Tape:
    """Records one forward pass.  Parameters come from an optional store.

    With ``grad=False`` nothing is recorded, which is what decoding uses.
    """

    def __init__(self, store=None, grad: bool = True):
        self.store = store
        self.grad = grad
        self._ops: list[Callable[[], None]] = []
        self._params: dict[str, Var] = {}
        self.consumed = False

    def __len__(self) -> int:
        return len(self._ops)

    def param(self, name: str) -> Var:
        var = self._params.get(name)
        if var is None:
            if self.store is None:
                raise XsrlError("tape has no parameter store")
            var = Var(self.store[name], self, requires_grad=self.grad and self.store.is_trainable(name),
                      name=name)
            self._params[name] = var
        return var

    def var(self, value, name: str | None = None) -> Var:
        """A differentiable leaf that is not backed by the store."""
        var = Var(value, self, requires_grad=True, name=name)
        if name is not None:
            self._params[name] = var
        return var

    def const(self, value) -> Var:
        return Var(value, self, requires_grad=False)

    def record(self, fn: Callable[[], None]):
        if self.consumed:
            raise XsrlError("tape already differentiated; record a new forward pass")
        self._ops.append(fn)

    @property
    def params(self) -> dict[str, Var]:
        return self._params


def backward(tape: Tape, root: Var) -> dict[str, np.ndarray]:
    """Propagate d(root)/d(.) through the tape.

    Returns a gradient for every parameter of the tape's store (zeros for
    parameters the root does not depend on) plus every named leaf.
    """
    if root.size != 1:
        raise ShapeError(f"backward needs a scalar root, got shape {root.shape}")
    if tape.consumed:
        raise XsrlError("backward already ran on this tape")
    tape.consumed = True
    root.grad = np.ones_like(root.value)
    for fn in reversed(tape._ops):
        fn()
    grads = {}
    if tape.store is not None:
        for name in tape.store.names():
            grads[name] = np.zeros_like(tape.store[name])
    for name, var in tape._params.items():
        if var.grad is not None:
            grads[name] = var.grad
        elif name not in grads:
            grads[name] = np.zeros_like(var.value)
    return grads
