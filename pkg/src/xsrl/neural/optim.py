"""Named parameter storage and the Adam update."""

from __future__ import annotations

from typing import Iterator, Mapping

import numpy as np

from xsrl.errors import ShapeError, XsrlError
from xsrl.neural.autodiff import DTYPE


class ParamStore:
    """Ordered name -> array map with per-parameter Adam moments.

    A single step counter is shared by all parameters.  Non-trainable entries
    (e.g. fixed pre-trained embeddings) are stored and checkpointed but never
    updated.
    """

    def __init__(self):
        self._values: dict[str, np.ndarray] = {}
        self._trainable: dict[str, bool] = {}
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.step = 0

    def add(self, name: str, value, trainable: bool = True) -> np.ndarray:
        if name in self._values:
            raise XsrlError(f"parameter {name!r} already defined")
        arr = np.array(value, dtype=DTYPE, copy=True)
        self._values[name] = arr
        self._trainable[name] = trainable
        if trainable:
            self.m[name] = np.zeros_like(arr)
            self.v[name] = np.zeros_like(arr)
        return arr

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._values[name]
        except KeyError:
            raise XsrlError(f"unknown parameter {name!r}") from None

    def __setitem__(self, name: str, value):
        arr = self[name]
        value = np.asarray(value, dtype=DTYPE)
        if value.shape != arr.shape:
            raise ShapeError(f"parameter {name!r}: shape {value.shape} != {arr.shape}")
        arr[...] = value

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def names(self) -> list[str]:
        return list(self._values)

    def items(self):
        return self._values.items()

    def is_trainable(self, name: str) -> bool:
        return self._trainable[name]

    def trainable_names(self) -> list[str]:
        return [n for n, t in self._trainable.items() if t]

    def n_values(self, trainable_only: bool = True) -> int:
        return sum(v.size for n, v in self._values.items() if self._trainable[n] or not trainable_only)

    def zero_(self):
        """Set every parameter to zero (used to build degenerate reference models)."""
        for arr in self._values.values():
            arr[...] = 0.0


def adam_step(store: ParamStore, grads: Mapping[str, np.ndarray], lr: float = 0.001,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> ParamStore:
    """One bias-corrected Adam update of every trainable parameter, in place.

    Trainable parameters missing from ``grads`` get a zero gradient.
    """
    for name, g in grads.items():
        if name in store and store.is_trainable(name) and np.shape(g) != store[name].shape:
            raise ShapeError(f"gradient for {name!r} has shape {np.shape(g)}, parameter {store[name].shape}")
    store.step += 1
    t = store.step
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for name in store.trainable_names():
        g = grads.get(name)
        m, v = store.m[name], store.v[name]
        m *= beta1
        v *= beta2
        if g is not None:
            m += (1.0 - beta1) * g
            v += (1.0 - beta2) * (g * g)
        store[name] -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return store
