"""Exception classes shared across the package."""


class ValidationError(ValueError):
    """Input data violates a documented invariant (non-finite values, bad ranges)."""


class ShapeError(ValidationError):
    """Tensor dimensions or timing fields are inconsistent."""


class ConfigError(ValueError):
    """A task, variant, or suite configuration is contradictory or incomplete."""


class MetricUndefinedError(ValueError):
    """The requested metric has no defined value for the given inputs."""


class Emb1FormatError(ValueError):
    """An EMB1 file has a malformed or unsupported header."""


class Emb1CorruptionError(Emb1FormatError):
    """An EMB1 file's payload does not match its header."""
