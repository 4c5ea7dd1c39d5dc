"""Exception types shared across the toolkit."""


class FcvError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(FcvError, ValueError):
    """An argument violates a documented precondition."""


class TruncatedStreamError(FcvError):
    """The bitstream ended before a read could complete."""

    def __init__(self, message, bit_offset=None, frame_no=None):
        if bit_offset is not None:
            message = f"{message} (bit offset {bit_offset})"
        if frame_no is not None:
            message = f"frame {frame_no}: {message}"
        super().__init__(message)
        self.bit_offset = bit_offset
        self.frame_no = frame_no


class CorruptStreamError(FcvError):
    """The bitstream is syntactically invalid at a known position."""

    def __init__(self, message, bit_offset=None, frame_no=None):
        if bit_offset is not None:
            message = f"{message} (bit offset {bit_offset})"
        if frame_no is not None:
            message = f"frame {frame_no}: {message}"
        super().__init__(message)
        self.bit_offset = bit_offset
        self.frame_no = frame_no


class UnsupportedFormatError(FcvError):
    """Magic number or version is not one this toolkit understands."""


class EmptyStreamError(FcvError):
    """The stream has no frames of the requested kind."""


class TensorFormatError(FcvError):
    """A tensor export file violates the container format."""


class ArchError(FcvError):
    """A network architecture description is inconsistent."""
