"""Single-trapped-ion Otto engine: coupled quantum/classical simulation,
closed-form predictions, and the flywheel thermometry protocol."""

from .analytics import (
    AnalyticContext,
    GrowthMode,
    amplification,
    delta_z,
    delta_z_squeezed,
    make_context,
    protocol_amplitude,
    radial_frequency,
    squeeze_quantum_threshold,
    stroboscopic_positions,
    thermal_R,
)
from .backends import USING_NUMBA
from .engine import (
    BathSpec,
    EngineConfig,
    EngineTrace,
    QuantumBackend,
    peak_branches,
    peak_positions,
    run_engine,
    thermalize,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    IonottoError,
    NumericalError,
    OutOfTaperError,
    TruncationError,
)
from .flywheel import ForceModel, FlywheelState, axial_energy, axial_force, verlet_step
from .fock import (
    GaussianMoments,
    RadialState,
    SqueezeSpec,
    auto_dim,
    ladder_matrices,
    moments,
    radial_energy,
    squeeze,
    squeezed_thermal_moments,
    thermal_occupation,
    thermal_state,
)
from .params import (
    ATOMIC_MASS_UNIT,
    HBAR,
    K_BOLTZMANN,
    DerivedParams,
    PhysicalConstants,
    TrapConfig,
    derive_params,
    reference_trap,
)
from .propagator import (
    NewtonConfig,
    PropagationStep,
    coupling_g,
    dense_propagate_oracle,
    moments_propagate,
    newton_propagate,
)
from .thermometry import (
    MeasurementRecord,
    ProtocolBackend,
    ProtocolConfig,
    TemperatureEstimate,
    estimate_delta_T,
    run_protocol,
    sample_initial_conditions,
    sensitivity,
)

__version__ = "0.1.0"
