from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace

from xsrl.errors import XsrlError

LEMMA_MODES = ("char", "ustem", "slem")


@dataclass(frozen=True)
class ModelConfig:
    d_w: int = 16           # word embedding (random and pre-trained)
    d_c: int = 8            # character embedding
    d_ch: int = 16          # character representation = 2 x char hidden
    d_h: int = 32           # encoder hidden size per direction
    d_le: int = 8           # input-layer lemma vector (plus one flag)
    d_lemma_dec: int = 8    # decoder lemma vector
    d_r: int = 8            # role embedding
    d_pos: int = 8          # POS embedding (predicate identifier only)
    char_depth: int = 1
    enc_depth: int = 2
    lemma_depth: int = 3    # char-BiLSTM depth for both lemma slots in char mode
    sense_depth: int = 3
    lemma_mode: str = "char"
    lr: float = 0.01        # desk scale; the "paper" preset uses 0.001
    minibatch: int = 1000   # (frame, token) instances per Adam step
    epochs: int = 2
    seed: int = 1
    null_ratio: float = 1.0
    min_count: int = 2
    init_scale: float = 0.01  # embeddings ~ U(-s, s)

    def __post_init__(self):
        dims = ("d_w", "d_c", "d_ch", "d_h", "d_le", "d_lemma_dec", "d_r", "d_pos",
                "char_depth", "enc_depth", "lemma_depth", "sense_depth", "minibatch", "min_count")
        for name in dims:
            if getattr(self, name) < 1:
                raise XsrlError(f"config: {name} must be >= 1")
        if self.epochs < 0:
            raise XsrlError("config: epochs must be >= 0")
        if self.lemma_mode not in LEMMA_MODES:
            raise XsrlError(f"config: lemma_mode must be one of {LEMMA_MODES}, got {self.lemma_mode!r}")
        if self.d_ch % 2:
            raise XsrlError("config: d_ch must be even (forward and backward halves)")
        if self.lemma_mode == "char" and (self.d_le % 2 or self.d_lemma_dec % 2):
            raise XsrlError("config: char lemma mode needs even d_le and d_lemma_dec")
        if not 0.0 < self.null_ratio <= 1.0:
            raise XsrlError("config: null_ratio must lie in (0, 1]")
        if self.lr <= 0:
            raise XsrlError("config: lr must be positive")

    @property
    def input_dim(self) -> int:
        return 2 * self.d_w + self.d_ch + self.d_le + 1

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise XsrlError(f"config: unknown keys {sorted(unknown)}")
        return cls(**obj)

    def with_overrides(self, **kw) -> "ModelConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


PRESETS = {
    "desk": ModelConfig(),
    "paper": ModelConfig(d_w=100, d_c=50, d_ch=100, d_h=512, d_le=100, d_lemma_dec=100, d_r=128,
                         d_pos=32, char_depth=1, enc_depth=3, lemma_depth=3, sense_depth=3,
                         lr=0.001, minibatch=1000, epochs=2),
}


def preset(name: str) -> ModelConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise XsrlError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
