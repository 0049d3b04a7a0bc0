"""Exception hierarchy shared by all fogsim modules."""


class FogSimError(Exception):
    """Base class for every error raised by fogsim."""


class ValidationError(FogSimError):
    """A model object or scenario violates one or more invariants.

    ``violations`` holds every problem found, not just the first one.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ScenarioSyntaxError(FogSimError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class RoutingError(FogSimError):
    """A tuple cannot reach any instance of its destination module."""


class SimulationError(FogSimError):
    """An event handler failed while the kernel was dispatching."""
