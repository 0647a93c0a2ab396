"""Exception hierarchy shared by all codec layers."""


class CodecError(Exception):
    """Base class for every error this package raises deliberately."""


class FormatError(CodecError):
    """Input bytes do not follow the expected layout (bad magic, header,
    version, CRC, malformed PGM, ...)."""


class CorruptionError(CodecError):
    """Structurally plausible input whose content is internally
    inconsistent: truncated payload, invalid coder state, out-of-range
    reconstruction."""
