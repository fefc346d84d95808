"""Wyjątki pakietu ``dmi``.

Każdy wyjątek niesie ``exit_code`` używany przez CLI:
1 = błąd walidacji danych wejściowych, 2 = błąd I/O lub procesu zewnętrznego.
"""

from __future__ import annotations

from typing import Optional, Union


class DmiError(Exception):
    exit_code: int = 1


class ValidationError(DmiError):
    exit_code = 1


class ExternalError(DmiError):
    exit_code = 2


# --- corpus -----------------------------------------------------------------


class BoundaryMismatch(ValidationError):
    def __init__(self, line_no: int) -> None:
        super().__init__(f"document boundary mismatch at line {line_no}")
        self.line_no = line_no


class LengthMismatch(ValidationError):
    def __init__(self, message: str, index: Optional[int] = None) -> None:
        super().__init__(message)
        self.index = index


class EmptySentence(ValidationError):
    def __init__(self, line_no: int) -> None:
        super().__init__(f"empty sentence at line {line_no}")
        self.line_no = line_no


class ReservedPrefix(ValidationError):
    def __init__(self, line_no: int) -> None:
        super().__init__(f"sentence at line {line_no} starts with a reserved '#<digits>' separator")
        self.line_no = line_no


class CorpusTooSmall(ValidationError):
    pass


class UnknownDocId(ValidationError):
    def __init__(self, doc_id: str) -> None:
        super().__init__(f"unknown doc id: {doc_id}")
        self.doc_id = doc_id


class DuplicateDocId(ValidationError):
    def __init__(self, doc_id: str) -> None:
        super().__init__(f"duplicate doc id: {doc_id}")
        self.doc_id = doc_id


# --- segment / instruct ---------------------------------------------------------


class EmptyLengths(ValidationError):
    pass


class UnknownLanguageCode(ValidationError):
    def __init__(self, code: str) -> None:
        super().__init__(f"unknown language code: {code}")
        self.code = code


class ScheduleReferencesNonTrainDoc(ValidationError):
    def __init__(self, doc_id: str) -> None:
        super().__init__(f"schedule references a document outside the train split: {doc_id}")
        self.doc_id = doc_id


class InvalidRecord(ValidationError):
    pass


# --- metrics ------------------------------------------------------------------


class EmptyCorpus(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class NonPositiveInput(ValidationError):
    def __init__(self, name: str, value: float) -> None:
        super().__init__(f"{name} must be > 0, got {value}")
        self.name = name
        self.value = value


class UsageError(ValidationError):
    pass


# --- external processes / endpoints ---------------------------------------------


class ExternalTokenizerFailure(ExternalError):
    def __init__(self, detail: Union[int, str]) -> None:
        if isinstance(detail, int):
            message = f"external tokenizer exited with code {detail}"
        else:
            message = f"external tokenizer protocol violation: {detail}"
        super().__init__(message)
        self.detail = detail


class EndpointFailure(ExternalError):
    pass


class MalformedResponse(ExternalError):
    def __init__(self, line_no: int, reason: str = "") -> None:
        text = f"malformed scorer response at line {line_no}"
        if reason:
            text = f"{text}: {reason}"
        super().__init__(text)
        self.line_no = line_no


class CountMismatch(ExternalError):
    def __init__(self, expected: int, got: int) -> None:
        super().__init__(f"expected {expected} responses, got {got}")
        self.expected = expected
        self.got = got
