"""
Exceptions raised by the package.
They all derive from the generic pii-data exceptions, so that messages can be
built with "{}" placeholders plus arguments
"""

from pii_data.helper.exception import InvArgException, ProcException


class TensorShapeError(InvArgException):
    pass


class IndexRangeError(InvArgException):
    pass


class ConfigError(InvArgException):
    pass


class GeometryError(InvArgException):
    pass


class ImageFormatError(InvArgException):
    pass


class CorruptedSpectrumError(ProcException):
    pass


class CoverageError(ProcException):
    pass


class DivergenceError(ProcException):
    pass


class ConditioningError(ProcException):
    pass


class DegenerateInputError(ProcException):
    pass


class ModelFormatError(ProcException):
    pass


class ModelChecksumError(ModelFormatError):

    def __init__(self):
        super().__init__("model checksum mismatch")
