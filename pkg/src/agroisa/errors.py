"""Exception types shared across the package."""


class AgroisaError(Exception):
    """Base class for all package-specific errors."""


class RegistryError(AgroisaError):
    """A shipped data file (registry, scoring table, manifest) is inconsistent."""


class QuestionnaireParseError(AgroisaError):
    """A questionnaire document is malformed or violates field typing.

    ``offset`` carries the byte offset of the problem when the underlying
    document could not be decoded at all, else ``None``.
    """

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ScoringError(AgroisaError):
    """Indicator scoring failed; ``codes`` lists the offending field codes."""

    def __init__(self, message, codes=(), indicator=None):
        super().__init__(message)
        self.codes = tuple(codes)
        self.indicator = indicator


class SerializationError(AgroisaError):
    """A questionnaire that fails validation cannot be serialized."""


class DatasetError(AgroisaError):
    """Dataset construction, import or export failed."""


class SynthesisError(AgroisaError):
    """A synthetic population request is infeasible or inconsistent."""


class SelectionError(AgroisaError):
    """Feature-selection preconditions were violated."""


class TrainingError(AgroisaError):
    """Classifier training preconditions were violated."""


class EvaluationError(AgroisaError):
    """Evaluation preconditions (folds, stratification) were violated."""


class ReportError(AgroisaError):
    """Report generation failed (empty selection, missing inputs)."""


class StoreError(AgroisaError):
    """Questionnaire store access failed (missing entry, bad index)."""
