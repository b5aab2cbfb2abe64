"""Exception types raised across the package."""


class DomainError(ValueError):
    """A parameter lies outside the range where an operation is defined."""


class AssemblyError(RuntimeError):
    """Operator assembly failed (quadrature or grid problem)."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance.

    ``diagnostics`` carries whatever the solver knew when it gave up.
    """

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}
