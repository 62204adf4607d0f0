"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An invalid strategy, arm, or experiment parameter."""


class ArmError(RuntimeError):
    """An arm failed to produce a feedback value."""


class ProtocolError(ArmError):
    """An external evaluator violated the line protocol."""
