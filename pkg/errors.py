"""
Exception hierarchy for the solver suite.

Library code raises these; only the CLI turns them into exit codes.
"""
from typing import Optional


class SolverSuiteError(Exception):
    """Base class for all errors raised by this package."""


class MalformedGameError(SolverSuiteError):
    """A game violates the GameDynamics contract (depth, chance, zero-sum, legality)."""


class UnknownGameError(SolverSuiteError, ValueError):
    """Requested game name is not registered."""


class UnknownAlgorithmError(SolverSuiteError, ValueError):
    """Requested algorithm id is not registered."""


class MissingInfoStateError(SolverSuiteError, KeyError):
    """A policy does not cover an information state it is evaluated on."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"policy has no entry for information state {key}")

    def __str__(self) -> str:
        return self.args[0]


class DegenerateReachError(SolverSuiteError):
    """q-value normalisation hit an information state with zero reach mass."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"zero reach mass at information state {key}; q-values are undefined")


class PolicyFormatError(SolverSuiteError):
    """A policy, checkpoint or curve document is unreadable or does not match the game."""


class SolverError(SolverSuiteError):
    """A solver step failed; carries the 1-based iteration index."""

    def __init__(self, iteration: int, cause: Optional[BaseException] = None):
        self.iteration = iteration
        self.cause = cause
        detail = f": {cause}" if cause is not None else ""
        super().__init__(f"solver failed at iteration {iteration}{detail}")


class CurveFormatError(SolverSuiteError):
    """A convergence-curve CSV does not have the expected columns."""
