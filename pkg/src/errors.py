"""
Exception hierarchy shared by every package of the project
"""


class LmmError(Exception):
    """Base class for all errors raised by the library."""


class LipConfigurationError(LmmError):
    """Raised when LIP operands carry different (or invalid) M constants."""


class LipDomainError(LmmError):
    """Raised when a value lies outside the domain of a LIP operation."""


class ProbeError(LmmError):
    """Raised for malformed structuring functions."""


class LayerStateError(LmmError):
    """Raised when the layer is used out of order (e.g. backward before forward)."""


class DataFormatError(LmmError):
    """
    Raised when a data file cannot be parsed.

    Args:
        message (str): Human readable description
        offset (int, optional): Byte offset at which parsing failed
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericError(LmmError):
    """Raised when a computation produces values it cannot represent."""


class TrainingDivergedError(NumericError):
    """
    Raised when the training loss becomes NaN.

    Args:
        learning_rate (float): Step size in use
        epoch (int): Epoch index (0-based)
        batch (int): Batch index within the epoch (0-based)
    """

    def __init__(self, learning_rate, epoch, batch):
        super().__init__(
            f"loss became NaN at epoch {epoch}, batch {batch} "
            f"(learning rate {learning_rate}); try a smaller --lr"
        )
        self.learning_rate = learning_rate
        self.epoch = epoch
        self.batch = batch


class ConfigError(LmmError):
    """Raised for unusable configuration files (unknown keys, bad syntax)."""
