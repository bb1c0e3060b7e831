"""Symmetrically processed splitting integrators for Hamiltonian Monte Carlo,
with the harmonic-oscillator energy-error analysis used to tune them."""

from .errors import (
    DegenerateParameter,
    InsufficientSteps,
    NoDescent,
    NonFiniteState,
    UnstableStep,
)
from .splitting import (
    ElementaryFlow,
    FamilyParams,
    FlowKind,
    FlowSchedule,
    PhaseState,
    ProcessedIntegrator,
    adjoint_schedule,
    apply_flow,
    build_kernel,
    build_processor,
    drift,
    integrate_leg,
    kick,
    leg_gradient_count,
    modified_kick,
    momentum_flip,
    processed_family,
)
from .harmonic import (
    KernelSpectrum,
    ProcessorPolys,
    TransferMatrix,
    expected_energy_error,
    flow_matrix,
    leg_matrix,
    processor_polys,
    rho,
    rho_norm,
    schedule_matrix,
    spectrum,
    stability_length,
)
from .targets import (
    AnharmonicModel,
    GaussianModel,
    TargetModel,
    anharmonic_model,
    gaussian_model,
    oscillator_1d,
)
from .hmc import (
    ChainStats,
    ExactGaussianFlow,
    HmcConfig,
    SweepPoint,
    efficiency_curve,
    energy,
    hmc_run,
)
from .tuning import TuneResult, continuation_sweep, evaluate, tune
from .fourth_order import (
    RowlandsScheme,
    modified_force,
    order_estimate,
    rowlands_leg,
    rowlands_scheme,
)
from . import catalog

__version__ = "0.1.0"
