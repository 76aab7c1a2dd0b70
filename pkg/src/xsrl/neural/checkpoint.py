"""Parameter checkpoint container.

Layout (all integers ASCII, values little-endian IEEE-754 float64)::

    XSRL-PARAMS 1\\n
    <header JSON, one line>\\n
    <values of every parameter, row-major, in header order>

The header is ``{"params": [{"name": ..., "shape": [...], "trainable": bool}, ...]}``
with keys sorted.  Adam moments are not stored.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from xsrl.errors import CheckpointError
from xsrl.neural.optim import ParamStore

MAGIC = b"XSRL-PARAMS"
VERSION = 1


def dumps(store: ParamStore) -> bytes:
    header = {"params": [{"name": n, "shape": list(v.shape), "trainable": store.is_trainable(n)}
                         for n, v in store.items()]}
    parts = [MAGIC + b" " + str(VERSION).encode() + b"\n",
             json.dumps(header, sort_keys=True, separators=(",", ":")).encode() + b"\n"]
    parts.extend(np.ascontiguousarray(v, dtype="<f8").tobytes() for v in store._values.values())
    return b"".join(parts)


def loads(data: bytes) -> ParamStore:
    first, sep, rest = data.partition(b"\n")
    magic, _, version = first.partition(b" ")
    if not sep or magic != MAGIC:
        raise CheckpointError("not an xsrl parameter checkpoint")
    if version != str(VERSION).encode():
        raise CheckpointError(f"unsupported checkpoint version {version.decode(errors='replace')}")
    line, sep, body = rest.partition(b"\n")
    try:
        header = json.loads(line)
    except ValueError:
        raise CheckpointError("corrupt checkpoint header") from None
    store = ParamStore()
    offset = 0
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        end = offset + 8 * count
        if end > len(body):
            raise CheckpointError(f"checkpoint truncated in {entry['name']!r}")
        values = np.frombuffer(body[offset:end], dtype="<f8").reshape(shape)
        store.add(entry["name"], values, trainable=entry["trainable"])
        offset = end
    if offset != len(body):
        raise CheckpointError("trailing bytes after the last parameter")
    return store


def save(store: ParamStore, path) -> str:
    """Write the checkpoint; returns its sha256 hex digest."""
    data = dumps(store)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def load(path) -> tuple[ParamStore, str]:
    data = Path(path).read_bytes()
    return loads(data), hashlib.sha256(data).hexdigest()
