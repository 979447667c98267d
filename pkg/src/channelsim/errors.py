"""Exception types shared across the package."""


class ChannelSimError(Exception):
    """Base class for all channelsim errors."""


class InvalidArgumentError(ChannelSimError, ValueError):
    """An operation was called with arguments outside its contract."""


class GridMismatchError(InvalidArgumentError):
    """Two fields that must share a grid do not."""


class DegenerateStateError(ChannelSimError, ValueError):
    """A field with (numerically) zero norm was passed where an expectation
    value is requested."""


class BelowCutoffError(InvalidArgumentError):
    """Beam momentum at or below the ground transverse-mode cutoff pi/a."""


class PacketOverlapError(InvalidArgumentError):
    """Initial packet overlaps barrier material beyond tolerance."""


class UnreliablePhaseError(ChannelSimError):
    """Overlap magnitude too small for a meaningful interferometric phase."""

    def __init__(self, magnitude: float):
        self.magnitude = magnitude
        super().__init__(
            f"overlap magnitude {magnitude:.3g} < 0.1; packets too "
            "distorted or delocalized to compare"
        )


class InvalidUseError(ChannelSimError, ValueError):
    """An observable was requested for a run type it does not apply to."""


class NumericalBlowupError(ChannelSimError, RuntimeError):
    """Non-finite amplitudes detected during propagation."""

    def __init__(self, step: int, detail: str = ""):
        self.step = step
        msg = f"non-finite field detected at step {step}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ConfigError(ChannelSimError, ValueError):
    """Run configuration failed to parse or validate.

    `path` is the dotted field path (e.g. "geometry.a") when known.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
