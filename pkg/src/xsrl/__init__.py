"""Cross-lingual dependency SRL: annotation projection through word
alignments and a character-based BiLSTM role labeler trained on the
projected data."""

from xsrl.errors import XsrlError

__version__ = "0.1.0"

__all__ = ["XsrlError", "__version__"]
