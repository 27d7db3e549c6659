"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: schema/data problems exit with 2,
numerical failures with 3. Plain ValueError is reserved for misuse of an
API (bad argument ranges), not for bad datasets.
"""


class KnotstatError(Exception):
    """Base class for all errors raised by knotstat."""


class SchemaError(KnotstatError):
    """A data file violates the CSV/JSON schema (bad row, duplicate name, ...)."""


class DataError(KnotstatError):
    """Data is structurally valid but unusable for the requested operation.

    Examples: empty dataset after filtering, target column contains zeros
    for a MAPE computation, Jones degree below 2 for rescaling.
    """


class NumericError(KnotstatError):
    """A numerical procedure failed: singular system, diverging training run."""
