"""Exception hierarchy shared by the whole package.

The CLI maps these onto exit codes: InputError (and subclasses) exit 2,
ResourceGuardError exit 3. Mathematical check failures are never raised as
exceptions; they travel inside reports and drive exit code 1.
"""


class KforgeError(Exception):
    """Base class for all package errors."""


class InputError(KforgeError):
    """Malformed input: schema violations, shape mismatches, bad flags."""


class MetricError(InputError):
    """A Gram matrix failed the Hermitian positive-definiteness check."""


class ResourceGuardError(KforgeError):
    """A configurable resource bound (parameters, group size) was exceeded."""


class InternalCheckError(KforgeError):
    """An internal consistency invariant failed; indicates a bug or a
    violated precondition upstream."""
