"""Model persistence: a parameter checkpoint plus a JSON sidecar.

``model.bin`` holds the parameters (see :mod:`xsrl.neural.checkpoint`);
``model.bin.json`` holds the model kind, config, vocabularies, lemma lexicon,
pre-trained word list and the sha256 of the checkpoint bytes.  Loading fails
unless that digest matches.
"""

from __future__ import annotations

import json
from pathlib import Path

from xsrl.corpus import Vocab
from xsrl.errors import CheckpointError
from xsrl.model.config import ModelConfig
from xsrl.model.network import MODELS, Network
from xsrl.morphology import lexicon_from_json
from xsrl.neural import checkpoint

SIDECAR_FORMAT = "xsrl-model/1"


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def save_model(net: Network, path) -> str:
    digest = checkpoint.save(net.store, path)
    sidecar = {
        "format": SIDECAR_FORMAT,
        "kind": net.kind,
        "config": net.config.to_json(),
        "lemma_mode": net.config.lemma_mode,
        "vocabs": {k: v.to_json() for k, v in sorted(net.vocabs.items())},
        "pretrained_words": net.pretrained_vocab.items,
        "lexicon": None if net.lexicon is None else net.lexicon.to_json(),
        "params_sha256": digest,
    }
    sidecar_path(path).write_text(json.dumps(sidecar, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
                                  encoding="utf-8")
    return digest


def load_model(path, kind: str | None = None) -> Network:
    try:
        meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CheckpointError(f"missing sidecar {sidecar_path(path)}") from None
    if meta.get("format") != SIDECAR_FORMAT:
        raise CheckpointError(f"unsupported sidecar format {meta.get('format')!r}")
    if kind is not None and meta["kind"] != kind:
        raise CheckpointError(f"{path} holds a {meta['kind']!r} model, expected {kind!r}")
    store, digest = checkpoint.load(path)
    if digest != meta["params_sha256"]:
        raise CheckpointError(f"{path} does not match its sidecar (sha256 {digest[:12]} vs "
                              f"{meta['params_sha256'][:12]})")
    cls = MODELS[meta["kind"]]
    vocabs = {k: Vocab.from_json(v) for k, v in meta["vocabs"].items()}
    lexicon = None if meta["lexicon"] is None else lexicon_from_json(meta["lexicon"])
    return cls(ModelConfig.from_json(meta["config"]), vocabs, store, meta["pretrained_words"], lexicon)
