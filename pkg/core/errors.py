from typing import Optional
from .models import FailureStage


class AbducerError(Exception):
    """Root of every error raised by the analyzer."""


class SourceError(AbducerError):
    """Malformed program text."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class LoweringError(AbducerError):
    """The program parses but cannot be turned into CFGs."""


class AnalysisFailure(AbducerError):
    """An analysis step could not produce a sound result."""

    def __init__(self, stage: FailureStage, message: str, function: Optional[str] = None):
        super().__init__(f"{stage.value}: {message}")
        self.stage = stage
        self.message = message
        self.function = function
