class XsrlError(ValueError):
    """Base class for data errors raised by the toolkit."""


class FormatError(XsrlError):
    """Malformed input file (CoNLL, alignment, embedding, lexicon)."""


class ShapeError(XsrlError):
    pass


class TrainingError(XsrlError):
    pass


class CheckpointError(XsrlError):
    pass
