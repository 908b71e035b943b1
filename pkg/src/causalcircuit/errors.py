"""Exception types raised by the certification and compilation routines."""


class CausalCircuitError(Exception):
    """Base class for all errors raised by this package."""


class LayoutError(CausalCircuitError, ValueError):
    """Dimension or slot mismatch between an operator and a tensor layout."""


class LocalizationViolation(CausalCircuitError):
    """An operator has weight outside the support it was supposed to live on."""

    def __init__(self, residual, node=None, column=None, message=None):
        self.residual = float(residual)
        self.node = node
        self.column = column
        if message is None:
            message = f"operator not localized on support (residual {self.residual:.3e})"
            if node is not None:
                message += f" at node {node}"
        super().__init__(message)


class NonUnitaryError(CausalCircuitError):
    def __init__(self, residual, message=None):
        self.residual = float(residual)
        super().__init__(message or f"operator is not unitary (residual {self.residual:.3e})")


class NonUnitaryBlock(NonUnitaryError):
    """A synthesized local gate failed its unitarity check."""


class VerificationFailure(CausalCircuitError):
    def __init__(self, deviation, worst_input):
        self.deviation = float(deviation)
        self.worst_input = worst_input
        super().__init__(f"circuit deviates from target by {self.deviation:.3e} on input {worst_input}")


class ShiftInvarianceViolation(CausalCircuitError):
    def __init__(self, deviation, node=None):
        self.deviation = float(deviation)
        self.node = node
        super().__init__(f"local gates differ across translations by {self.deviation:.3e} (node {node})")


class FormatError(CausalCircuitError, ValueError):
    """Malformed serialized document."""
