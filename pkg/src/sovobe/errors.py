"""Error hierarchy shared by every subsystem.

Each error carries a stable machine-readable ``code`` so that API responses,
CLI output, and logs all name failures the same way. The full code -> HTTP
status table lives in ``ERROR_STATUS`` and is documented in docs/api.md.
"""

from __future__ import annotations


class SovobeError(Exception):
    """Base class for all engine errors."""

    code = "internal-error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class DuplicateIdError(SovobeError):
    """An id (entity, KPI, monitor, store record) is already taken."""

    code = "duplicate-id"


class DanglingReferenceError(SovobeError):
    """A node references an entity that is not in the graph."""

    code = "dangling-reference"


class InvalidCompositionPairError(SovobeError):
    """Requested (subject kind, component level) is not a composition."""

    code = "invalid-composition-pair"


class UnknownEntityError(SovobeError):
    code = "unknown-entity"


class InvalidSubjectServiceError(SovobeError):
    """KPIs never target single services; SLAs do."""

    code = "invalid-subject-service"


class UnknownTaxonomyCodeError(SovobeError):
    code = "unknown-taxonomy-code"


class ExpressionCompileError(SovobeError):
    code = "expression-compile-error"


class UnknownKpiError(SovobeError):
    code = "unknown-kpi"


class ExpressionSyntaxError(SovobeError):
    code = "syntax-error"

    def __init__(self, message: str, position: int = -1):
        super().__init__(message)
        self.position = position


class ExpressionTypeError(SovobeError):
    code = "type-error"


class UnknownIdentifierError(SovobeError):
    code = "unknown-identifier"


class NotComputable(SovobeError):
    """The indicator has no defined value (empty mean, zero denominator,
    missing declared data). Deliberately never represented as NaN."""

    code = "not-computable"

    def __init__(self, reason: str = ""):
        super().__init__(reason or "not computable")
        self.reason = reason or "not computable"


class UnknownBuiltinError(SovobeError):
    code = "unknown-builtin"


class SubjectKindMismatchError(SovobeError):
    code = "subject-kind-mismatch"


class DuplicateEventIdError(SovobeError):
    code = "duplicate-event-id"


class MalformedTimestampsError(SovobeError):
    code = "malformed-timestamps"


class InapplicableKpiError(SovobeError):
    code = "inapplicable-kpi"


class InvalidCandidateError(SovobeError):
    code = "invalid-candidate"


class HeterogeneousRequirementsError(SovobeError):
    code = "heterogeneous-requirements"


class EmptyInputError(SovobeError):
    code = "empty-input"


class InvalidSpecError(SovobeError):
    code = "invalid-spec"


class InvalidDocumentError(SovobeError):
    """A workspace file failed schema or manifest validation."""

    code = "invalid-document"


# One HTTP status per error code; the API layer and docs/api.md both read
# from this table, so they cannot drift apart.
ERROR_STATUS: dict[str, int] = {
    "duplicate-id": 409,
    "duplicate-event-id": 409,
    "dangling-reference": 422,
    "invalid-composition-pair": 422,
    "unknown-entity": 404,
    "invalid-subject-service": 422,
    "unknown-taxonomy-code": 422,
    "expression-compile-error": 422,
    "unknown-kpi": 404,
    "syntax-error": 422,
    "type-error": 422,
    "unknown-identifier": 422,
    "not-computable": 422,
    "unknown-builtin": 422,
    "subject-kind-mismatch": 422,
    "malformed-timestamps": 422,
    "inapplicable-kpi": 422,
    "invalid-candidate": 422,
    "heterogeneous-requirements": 422,
    "empty-input": 422,
    "invalid-spec": 422,
    "invalid-document": 422,
    "internal-error": 500,
}
