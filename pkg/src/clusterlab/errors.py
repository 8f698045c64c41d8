"""Exception hierarchy shared by every clusterlab module."""


class ClusterLabError(Exception):
    """Base class for all library errors."""


class DimensionError(ClusterLabError, ValueError):
    """Operands live on different numbers of sites or vector lengths disagree."""


class CapacityError(ClusterLabError, RuntimeError):
    """A request exceeds the dense or expansion limit."""


class ArgumentError(ClusterLabError, ValueError):
    """Invalid model specification, gate arity or unsupported option."""


class StructureError(ClusterLabError, ValueError):
    """Operators do not have the algebraic relation the caller assumed."""


class ConvergenceError(ClusterLabError, RuntimeError):
    """Iterative eigensolver did not reach the tolerance.

    The best residual seen is kept on ``best_residual``.
    """

    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual
