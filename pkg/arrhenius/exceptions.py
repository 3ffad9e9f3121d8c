class ArrheniusError(Exception):
    def __init__(self, msg, *, context=None):
        super().__init__(msg)
        self.msg = msg
        self.context = context

    def __str__(self):
        if self.context is None:
            return repr(self.msg)
        return f"{self.context!s}: {self.msg!s}"


class InvalidArgumentError(ArrheniusError, ValueError):
    pass


class InvalidStateError(ArrheniusError):
    pass


class GraphError(ArrheniusError):
    def __init__(self, msg, *, context=None, diagnostics=None):
        super().__init__(msg, context=context)
        self.diagnostics = diagnostics


class SwapError(GraphError):
    def __init__(self, msg, *, accepted=0, proposed=0, rejected=0):
        super().__init__(msg, context="edge swaps")
        self.accepted = accepted
        self.proposed = proposed
        self.rejected = rejected


class ConvergenceError(ArrheniusError):
    def __init__(self, msg, *, iterations=None, residual=None):
        super().__init__(msg, context="stationary solve")
        self.iterations = iterations
        self.residual = residual


class DegenerateError(ArrheniusError):
    pass


class ConfigError(ArrheniusError):
    pass
