"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MplossError(Exception):
    """Base class; the CLI maps any subclass to a nonzero exit code."""


class InfeasibleLP(MplossError):
    pass


class UnboundedLP(MplossError):
    pass


class DegenerateAtPoint(MplossError):
    """Raised when an LP violates the nondegeneracy hypothesis at a parameter.

    ``theta`` holds the witness parameter vector.
    """

    def __init__(self, theta, detail: str = ""):
        self.theta = [float(t) for t in theta]
        msg = f"LP is degenerate at theta={self.theta}"
        if detail:
            msg += f" ({detail})"
        msg += "; remedy: rebuild with perturb_spec(...) to break ties"
        super().__init__(msg)


class InfeasibleAtPoint(MplossError):
    def __init__(self, theta):
        self.theta = [float(t) for t in theta]
        super().__init__(f"LP is infeasible at theta={self.theta}")


class SingularActiveSystem(MplossError):
    pass


class ExplorationStalled(MplossError):
    def __init__(self, witness, reason: str):
        self.witness = [float(t) for t in witness]
        super().__init__(f"{reason}; uncovered witness theta={self.witness}")


class PointNotCovered(MplossError):
    def __init__(self, point):
        self.point = [float(t) for t in point]
        super().__init__(f"point {self.point} lies in no region")


class ParameterOutOfDomain(MplossError):
    pass


class InvalidSpec(MplossError):
    pass


class SpecMismatch(MplossError):
    pass


class DimensionMismatch(MplossError):
    pass


class MalformedCsv(MplossError):
    pass


class SchemaViolation(MplossError):
    pass


class ConfigError(MplossError):
    pass
