"""Exception hierarchy shared by the solvers, diagnostics and CLI."""


class GBFlowError(Exception):
    """Base class for all errors raised by gbflow."""


class ConfigurationError(GBFlowError, ValueError):
    """Invalid model, parameter or run configuration."""


class DivergenceError(GBFlowError, FloatingPointError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, step=None, t=None):
        self.step = step
        self.t = t
        where = []
        if step is not None:
            where.append(f"step {step}")
        if t is not None:
            where.append(f"t={t:.6g}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class SingularSystemError(GBFlowError, ArithmeticError):
    """A linear solve hit a pivot too small to continue."""


class GeometryError(GBFlowError, ValueError):
    """Degenerate polygon (repeated vertex, too few points, ...)."""


class CFLViolation(GBFlowError, ValueError):
    """Explicit time step exceeds the stability limit."""


class KernelDomainError(GBFlowError, ValueError):
    """Backward kernel evaluated at or after its centre time, or off-schedule."""


class DiagnosticError(GBFlowError, ValueError):
    """A trajectory does not carry enough data for the requested check."""


class FitError(GBFlowError, ValueError):
    """Exponential fit requested on an unusable series."""


class RunFormatError(GBFlowError, OSError):
    """A run directory is missing files or holds a malformed one."""
