"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2, everything
derived from SimulationError -> 3.
"""


class ValidationError(ValueError):
    """Bad user input: parameters, file contents, infeasible budgets."""


class ParseError(ValidationError):
    """Malformed input file; message carries the offending line number."""


class SimulationError(RuntimeError):
    """Runtime failure of a numerical routine."""


class AccuracyError(SimulationError):
    """A numerical tolerance was violated (e.g. integrator drift)."""


class DivergentCouplingError(ValidationError):
    """The imaginary-time coupling diverges (transverse field <= 0)."""


class FitError(SimulationError):
    """A fit did not converge; carries the best candidate found so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SweepError(SimulationError):
    """One or more sweep workers failed; partial results are attached."""

    def __init__(self, message, completed=None, failures=None):
        super().__init__(message)
        self.completed = completed if completed is not None else []
        self.failures = failures if failures is not None else []
