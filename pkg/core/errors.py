"""
Pipeline Exceptions
One hierarchy for every failure the rule-learning pipeline reports
"""

from typing import Optional


class RLIEError(Exception):
    """Base class for all pipeline errors"""
    pass


class UsageError(RLIEError, ValueError):
    """Raised when an operation is called with arguments violating its contract"""
    pass


class UnknownExampleError(RLIEError, KeyError):
    """Raised when an example id is not present in a judgment matrix"""

    def __init__(self, example_id: str):
        super().__init__(example_id)
        self.example_id = example_id

    def __str__(self) -> str:
        return f"Unknown example id: {self.example_id}"


class InvalidRuleError(RLIEError, ValueError):
    """Raised when a rule text is empty after normalization"""
    pass


class DatasetParseError(RLIEError):
    """Raised when a dataset line cannot be parsed"""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DatasetIntegrityError(RLIEError):
    """Raised when a dataset violates an integrity constraint (duplicate id, bad label)"""
    pass


class SplitError(RLIEError):
    """Raised when examples cannot be partitioned into train/validation/test"""
    pass


class ConfigError(RLIEError):
    """Raised when configuration is invalid or references missing files"""
    pass


class TemplateError(RLIEError):
    """Raised when a prompt template cannot be loaded or rendered"""
    pass


class BackendError(RLIEError):
    """Raised when a backend cannot deliver a response (transport failure after retries)"""
    pass


class ResponseParseError(RLIEError):
    """Raised when a backend response cannot be mapped to an answer token"""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class StrategyError(ResponseParseError):
    """Raised when an inference strategy cannot turn a response into a label"""
    pass


class JudgeMatrixError(RLIEError):
    """Raised when some cells of a judgment matrix could not be filled"""

    def __init__(self, message: str, missing_cells: int):
        super().__init__(f"{message} ({missing_cells} cells missing)")
        self.missing_cells = missing_cells


class GenerationError(RLIEError):
    """Raised when a generation response yields no usable rule"""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class SolverError(RLIEError):
    """Raised when the combiner solver hits a non-finite state"""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SelectionError(RLIEError):
    """Raised when hyperparameter selection is impossible (e.g. single-class validation)"""
    pass


class CheckpointIntegrityError(RLIEError):
    """Raised when a checkpoint does not match the rules or data it is used with"""
    pass
