"""Wave-packet transits through a channel in a reflecting barrier (2D,
hbar = m = 1): confinement phase shift, reduced in-channel momentum, and the
boundary-force account of both."""

__version__ = "0.1.0"

from .analytic import (
    BeamParams,
    effective_step_height,
    mode_cutoff,
    phase_shift_approx,
    phase_shift_exact_mode,
    reduced_momentum_approx,
    reduced_momentum_exact,
    step_transmission_1d,
    transmission_phase_1d,
    unwrap_by_continuity,
)
from .errors import (
    BelowCutoffError,
    ChannelSimError,
    ConfigError,
    DegenerateStateError,
    GridMismatchError,
    InvalidArgumentError,
    InvalidUseError,
    NumericalBlowupError,
    PacketOverlapError,
    UnreliablePhaseError,
)
from .geometry import (
    BarrierModel,
    ChannelGeometry,
    FaceSegments,
    build_potential,
    face_segments,
    wall_mask,
)
from .grid import (
    Field,
    Grid,
    PacketSpec,
    build_grid,
    expectation_p_beam,
    expectation_x,
    init_gaussian,
    inner_product,
    norm_squared,
    position_variance_x,
)
from .stepper import (
    CapSpec,
    CrankNicolsonADI,
    StepperConfig,
    default_dt,
    make_stepper,
    propagate,
    step,
)
