"""Exceptions raised by the M-frame codec and its tools."""


class MFrameError(Exception):
    """Base class for every codec error"""


class ConfigurationError(MFrameError, ValueError):
    """A parameter or setting is outside its allowed range"""


class StructuralError(MFrameError, ValueError):
    """Inputs have inconsistent shapes (block lengths, SI counts)"""


class DimensionMismatchError(StructuralError):
    """Frames that must share dimensions do not"""


class InfeasibleStepError(MFrameError, ValueError):
    """Step size too small to merge every SI q-coeff into one interval"""


class ContractViolation(MFrameError, ValueError):
    """A caller broke a documented precondition"""


class BitstreamError(MFrameError):
    """An M-frame bitstream cannot be decoded"""


class ChecksumError(BitstreamError):
    """The CRC-32 trailer does not match the stream contents"""


class MalformedStreamError(BitstreamError):
    """The stream is truncated or carries impossible field values"""


class InvalidTraceError(MFrameError, ValueError):
    """A switching trace uses an edge the interactivity graph does not have"""


class CurveError(MFrameError, ValueError):
    """An RD curve cannot be used for the requested metric"""
