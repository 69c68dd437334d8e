"""Exception hierarchy.

The CLI maps these onto exit codes, so keep the split between bad input,
falsified mathematics and resource limits intact.
"""


class CubeUBSError(Exception):
    """Base class for all package errors."""


class InputError(CubeUBSError, ValueError):
    """Malformed or out-of-range input.

    ``position`` is a ``(line, column)`` pair when the error comes from a file.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (line {position[0]}, column {position[1]})"
        super().__init__(message)
        self.position = position


class PreconditionError(CubeUBSError):
    """An operation was called on data violating its precondition.

    ``witness`` names the offending hyperplanes (a facing triple, a
    bidirectional hyperplane, a separating wall, ...).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConsistencyError(CubeUBSError):
    """A property the theory guarantees failed on a concrete instance.

    Usually a horizon artifact; rerunning with a larger horizon is the first
    thing to try.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class RealizationError(CubeUBSError):
    """A symbolic rule admits no wallspace realization at the given horizon.

    ``conflict`` is a minimal tuple of hyperplane references whose rules
    cannot be realized together.
    """

    def __init__(self, message, conflict=None):
        super().__init__(message)
        self.conflict = conflict


class ResourceError(CubeUBSError):
    """An enumeration budget was exceeded."""


class Undecided(CubeUBSError):
    """A rule has no declared answer for the query (tables beyond their data)."""


class CycleError(CubeUBSError):
    """A directed cycle was found where an acyclic graph was expected."""

    def __init__(self, message, cycle):
        super().__init__(message)
        self.cycle = cycle
