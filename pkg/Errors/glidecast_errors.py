class GlidecastError(ValueError):
    """Base class for every error raised by the glidecast packages."""


class InvalidInputError(GlidecastError):
    pass


class SingularSpeedError(GlidecastError):
    """Speed fell to or below the minimum the path-angle equation can divide by."""


class ShapeError(GlidecastError):
    pass


class InsufficientDataError(GlidecastError):
    pass


class InvalidWindowError(GlidecastError):
    pass


class InvalidRateError(GlidecastError):
    pass


class ModelStateError(GlidecastError):
    """Backward pass requested with no cached forward pass."""


class ModelFileError(GlidecastError):
    pass


class ModelFileNotFoundError(ModelFileError):
    pass


class ModelVersionError(ModelFileError):
    pass


class ModelFileTruncatedError(ModelFileError):
    pass


class ConfigError(GlidecastError):
    """Malformed, unknown or out-of-range run configuration."""
