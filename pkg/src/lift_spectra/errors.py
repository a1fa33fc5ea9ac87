"""Exception types shared by the library and the command line."""


class LiftSpectraError(Exception):
    """Base class for all errors raised by lift_spectra."""

    exit_code = 1


class InputError(LiftSpectraError, ValueError):
    """Malformed graph, vector, parameter or file."""

    exit_code = 3


class SolverError(LiftSpectraError, RuntimeError):
    """An eigensolver did not converge or produced an inconsistent result."""

    exit_code = 4


class BatchFileError(InputError):
    """A persisted trial batch is corrupt, truncated or of the wrong schema."""


class CounterexampleError(LiftSpectraError):
    """A checked inequality was violated."""

    exit_code = 5
