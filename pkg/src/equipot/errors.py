"""Exception hierarchy shared across the toolkit.

The CLI maps these onto its exit-code contract: bad input specs exit 2,
numeric failures exit 3, violated run invariants exit 4.
"""


class EquipotError(Exception):
    """Base class for all toolkit errors."""


class SetSpecError(EquipotError, ValueError):
    """Malformed or inconsistent input: set specs, endpoints, parameters."""


class NumericsError(EquipotError, RuntimeError):
    """A numeric kernel failed: quadrature did not converge, a linear
    system is singular, or the LP solver gave up."""


class InvariantViolation(EquipotError, RuntimeError):
    """A computed result breaks an invariant the run promised to audit."""
