"""Exception hierarchy shared by all ragocl modules."""

from __future__ import annotations


class RagOclError(Exception):
    """Base class for every error raised by this package."""

    code = "internal_error"


class NoDeclarationsFound(RagOclError):
    code = "no_declarations"


class MalformedRecord(RagOclError):
    code = "malformed_record"

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class InconsistentModel(RagOclError):
    code = "inconsistent_model"

    def __init__(self, model_name: str):
        super().__init__(f"meta-model {model_name!r} has differing PlantUML across records")
        self.model_name = model_name


class SampleTooLarge(RagOclError):
    code = "sample_too_large"


class IoFailure(RagOclError, OSError):
    code = "io_failure"


class CorruptKbFile(RagOclError):
    code = "corrupt_kb"


class ProviderUnavailable(RagOclError):
    code = "provider_unavailable"


class DimensionMismatch(RagOclError):
    code = "dimension_mismatch"


class EncoderNotFitted(RagOclError):
    code = "encoder_not_fitted"


class ZeroVector(RagOclError, ValueError):
    code = "zero_vector"


class EmptyCorpus(RagOclError, ValueError):
    code = "empty_corpus"


class UnknownModel(RagOclError, KeyError):
    code = "UnknownModel"

    def __init__(self, model_name: str):
        super().__init__(model_name)
        self.model_name = model_name

    def __str__(self) -> str:
        return f"unknown meta-model {self.model_name!r}"


class DanglingAssociation(RagOclError):
    code = "dangling_association"

    def __init__(self, names: list[str]):
        super().__init__(f"association references undeclared class(es): {', '.join(names)}")
        self.names = names


class EmptySpecification(RagOclError, ValueError):
    code = "empty_specification"


class ClientUnavailable(RagOclError):
    code = "ClientUnavailable"


class ClientTimeout(RagOclError):
    code = "ClientTimeout"

    def __init__(self, budget: float):
        super().__init__(f"LLM client exceeded its {budget}s time budget")
        self.budget = budget


class EmptyText(RagOclError, ValueError):
    code = "empty_text"


class EmptyRecordSet(RagOclError, ValueError):
    code = "empty_record_set"


class ConfigError(RagOclError, ValueError):
    code = "config_error"


class SweepError(RagOclError):
    """A module error raised inside a sweep, tagged with the cell and sample it hit."""

    code = "sweep_error"

    def __init__(self, retriever: str, k: int, sample_id: str, cause: BaseException):
        super().__init__(f"[{retriever} k={k} sample={sample_id}] {type(cause).__name__}: {cause}")
        self.retriever = retriever
        self.k = k
        self.sample_id = sample_id
        self.cause = cause


class UnknownRetriever(RagOclError, ValueError):
    code = "unknown_retriever"
