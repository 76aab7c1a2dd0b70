"""SRL networks, training and decoding."""

from xsrl.model.config import PRESETS, ModelConfig, preset
from xsrl.model.decode import disambiguate_senses, identify_predicates, tag
from xsrl.model.io import load_model, save_model
from xsrl.model.network import ArgumentModel, PredicateIdentifier, SenseModel, role_scores
from xsrl.model.train import train

__all__ = [
    "ArgumentModel", "ModelConfig", "PRESETS", "PredicateIdentifier", "SenseModel",
    "disambiguate_senses", "identify_predicates", "load_model", "preset", "role_scores",
    "save_model", "tag", "train",
]
