"""Exception types shared across the simulator.

The CLI maps these onto exit codes: ValidationError -> 2,
InfeasibleMissionError and PlanningFailure -> 3, I/O errors -> 4.
"""


class ValidationError(ValueError):
    """Invalid configuration, parameters, or file contents."""


class InfeasibleMissionError(RuntimeError):
    """Mission cannot be executed within the energy budget or coverage preconditions."""


class PlanningFailure(RuntimeError):
    """A planner could not produce a usable trajectory (no feasible episode, policy loop)."""
