"""Central finite-difference verification of tape gradients."""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from xsrl.neural.autodiff import Tape, Var, backward
from xsrl.neural.optim import ParamStore

LossFn = Callable[[Tape], Var]


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))


def gradient_errors(loss_fn: LossFn, store: ParamStore, eps: float = 1e-5,
                    names: Iterable[str] | None = None, max_coords: int | None = None,
                    seed: int = 0) -> dict[str, float]:
    """Max relative error per parameter.

    ``max_coords`` caps how many coordinates of each parameter are probed
    (sampled without replacement); ``None`` probes all of them.
    """
    tape = Tape(store)
    grads = backward(tape, loss_fn(tape))
    rng = np.random.default_rng(seed)
    names = list(store.trainable_names() if names is None else names)
    out = {}
    for name in names:
        value = store[name]
        flat = value.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))
        worst = 0.0
        g = grads[name].reshape(-1)
        for k in coords:
            orig = flat[k]
            flat[k] = orig + eps
            up = float(loss_fn(Tape(store, grad=False)).value)
            flat[k] = orig - eps
            down = float(loss_fn(Tape(store, grad=False)).value)
            flat[k] = orig
            worst = max(worst, relative_error(float(g[k]), (up - down) / (2 * eps)))
        out[name] = worst
    return out


def grad_check(loss_fn: LossFn, store: ParamStore, eps: float = 1e-5, **kwargs) -> float:
    """Max over probed coordinates of ``|analytic - numeric| / max(1e-8, |analytic| + |numeric|)``."""
    errors = gradient_errors(loss_fn, store, eps, **kwargs)
    return max(errors.values(), default=0.0)
