"""Exception hierarchy.

Two families matter to callers: ``InputError`` means the request itself is
malformed (bad geometry, bad parameters), ``InfeasibleError`` means the request
is well-formed but no safe plan exists for it. The CLI maps them to exit codes
1 and 2.
"""


class PwbError(Exception):
    """Base class for every error raised by this package."""


class InputError(PwbError, ValueError):
    pass


class InfeasibleError(PwbError):
    pass
