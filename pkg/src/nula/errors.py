"""Exception hierarchy shared by every module of the package."""


class NulaError(Exception):
    """Base class for all errors raised by :mod:`nula`."""


class InvalidGeometryError(NulaError, ValueError):
    """A link geometry or array layout violates its invariants."""


class DegenerateArrayError(NulaError, ValueError):
    """An array has too few elements for the requested quantity."""


class DomainError(NulaError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class RankDeficientError(NulaError, ValueError):
    """A Vandermonde factorization needs more distinct positions."""


class NotHermitianError(NulaError, ValueError):
    """A matrix handed to the eigensolver is not Hermitian."""


class InfeasibleDeploymentError(NulaError, ValueError):
    """Antenna groups overlap or do not fit inside the aperture."""


class NotAchievableError(NulaError):
    """No value of tau in the searched range reaches the target EMG.

    Attributes
    ----------
    K : int
        Target effective multiplexing gain.
    gamma : float
        Linear eigenvalue-ratio threshold.
    tau_range : tuple of float
        Interval that was searched.
    best_ratio : float
        Largest ``mu_K / mu_1`` seen on the grid.
    """

    def __init__(self, K, gamma, tau_range, best_ratio):
        self.K = K
        self.gamma = gamma
        self.tau_range = tuple(tau_range)
        self.best_ratio = best_ratio
        super().__init__(
            f"EMG {K} is not achievable at gamma={gamma:.6g} for tau in "
            f"({tau_range[0]:.6g}, {tau_range[1]:.6g}]; best ratio {best_ratio:.6g}"
        )


class ConvergenceError(NulaError, RuntimeError):
    """An iterative solver hit its iteration limit."""


class ScenarioError(NulaError, ValueError):
    """A scenario file is malformed; ``key`` and ``line`` locate the problem."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
