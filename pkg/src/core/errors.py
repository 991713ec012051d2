"""
Exception types raised by the workbench.
"""

from typing import Optional


class WorkbenchError(Exception):
    """Base class for all workbench failures."""


class DatasetFormatError(WorkbenchError, ValueError):
    """A dataset file or record violates the format or the schema."""

    def __init__(self, message: str, line: Optional[int] = None, sequence_id: Optional[str] = None):
        self.message = message
        self.line = line
        self.sequence_id = sequence_id
        super().__init__(message, line, sequence_id)

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.sequence_id is not None:
            where.append(f"sequence {self.sequence_id!r}")
        return f"{self.message} ({', '.join(where)})" if where else self.message


class SchemaMismatchError(WorkbenchError, ValueError):
    """A checkpoint, encoder or dataset was built for a different schema."""


class ConfigError(WorkbenchError, ValueError):
    """Invalid configuration value."""


class CheckpointError(WorkbenchError):
    """Checkpoint file cannot be read or does not match its header."""


class StageError(WorkbenchError):
    """
    A pipeline stage failed.

    The constructor arguments are kept in ``args`` so the error survives
    pickling back from a worker process.
    """

    def __init__(self, stage: str, seed: Optional[int], cause: BaseException):
        self.stage = stage
        self.seed = seed
        self.cause = cause
        super().__init__(stage, seed, cause)

    def __str__(self) -> str:
        return f"stage '{self.stage}' failed (seed={self.seed}): {self.cause}"
