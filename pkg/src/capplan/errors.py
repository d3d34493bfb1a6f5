"""Exception hierarchy shared by all modules.

Every error raised on purpose derives from :class:`CapPlanError`, so the CLI
can turn domain failures into exit status 1 without masking real bugs.
"""


class CapPlanError(Exception):
    """Base class for all toolkit errors."""


class DomainError(CapPlanError, ValueError):
    """An argument lies outside the domain of the operation."""


# ingest

class IngestError(CapPlanError):
    pass


class StructuralError(IngestError):
    """The CSV header does not contain a mapped column."""


class RowError(IngestError):
    """A data row could not be parsed."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EmptyInputError(IngestError):
    pass


class InvalidWindowError(IngestError, DomainError):
    pass


# regress

class RegressionError(CapPlanError):
    pass


class SingularDesignError(RegressionError):
    """The design matrix is rank deficient."""

    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(
            "singular design; dependent column(s): " + ", ".join(self.columns)
        )


class UnderdeterminedError(RegressionError):
    pass


class ArityError(RegressionError, DomainError):
    pass


class ConsistencyError(RegressionError):
    pass


# demand / growth / scaling / scenario

class FullySaturatedError(CapPlanError):
    """Every row was removed by the saturation filter."""


class LogDomainError(DomainError):
    pass


class NoDoublingError(DomainError):
    """Growth rate is not positive, so demand never doubles."""


class CellLookupError(CapPlanError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing cell"
