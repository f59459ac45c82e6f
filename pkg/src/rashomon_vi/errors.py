"""Exception types shared across the package."""

from __future__ import annotations


class IngestError(RuntimeError):
    """Raised when an input file is missing or structurally unusable."""


class DataError(ValueError):
    """Raised when ingested data is empty or contains unexpected values."""


class StratificationError(DataError):
    """Raised when a class is too small to stratify."""


class ConfigError(ValueError):
    """Raised by config validation; carries one message per violation."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class PipelineStageError(RuntimeError):
    """Wraps a failure with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException, context: str = ""):
        self.stage = stage
        self.cause = cause
        self.context = context
        where = f"stage '{stage}'" + (f" ({context})" if context else "")
        super().__init__(f"{where} failed: {cause}")
