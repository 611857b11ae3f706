class AuditError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(AuditError, ValueError):
    pass


class DataError(AuditError, ValueError):
    """A CSV file could not be parsed against its schema."""


class TrainingError(AuditError, RuntimeError):
    pass


class UndefinedMetricError(AuditError, ValueError):
    """A fairness metric has no defined value for the given inputs."""


class StageError(AuditError):
    """An experiment stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
