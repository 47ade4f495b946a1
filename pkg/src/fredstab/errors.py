"""Exception hierarchy mapped onto the CLI exit-code contract."""


class FredstabError(Exception):
    """Base class for toolkit failures."""

    exit_code = 1


class ConfigError(FredstabError):
    """Malformed configuration or artifact schema."""

    exit_code = 1


class AssumptionError(FredstabError):
    """A standing assumption on the spectral data failed (exit 2)."""

    exit_code = 2


class SolverError(FredstabError):
    """Shift search or gain solve failed (exit 3)."""

    exit_code = 3


class IterationDiverged(SolverError):
    """Fixed-point gain iteration failed to contract."""

    def __init__(self, message, contraction_ratio=None, history=None):
        super().__init__(message)
        self.contraction_ratio = contraction_ratio
        self.history = history


class IntegratorError(FredstabError):
    """Time-stepping guard violation or blow-up (exit 4)."""

    exit_code = 4
