"""Pseudo-spectral MHD on the periodic box with a Littlewood-Paley toolkit.

The package pairs a dealiased integrating-factor RK4 solver for the
incompressible viscous/resistive MHD system with dyadic frequency analysis:
band filters, Besov norms, Bony paraproducts, commutator estimates, and the
regularity-criterion functionals monitored along simulated trajectories.
"""

__version__ = "0.1.0"

from .grid import Grid
from .fields import (
    SpectralField,
    curl,
    dealias,
    divergence,
    divergence_residual,
    from_physical,
    gradient,
    inner_product,
    jacobian,
    laplacian,
    leray_project,
    lp_norm,
    multiply,
    multiply_padded,
    random_divergence_free,
    random_field,
    to_physical,
)
from .dyadic import BesovSpec, DyadicFamily, build_dyadic_family, dump_profiles
from .paraproduct import (
    BonyTriple,
    CommutatorReport,
    band_commutator,
    bony_decompose,
    cancellation_check,
    commutator_reports,
    dump_commutator_reports,
    paraproduct,
    remainder,
)
from .solver import (
    BlowUpError,
    InitialCondition,
    MHDState,
    PhysicsParams,
    RunConfig,
    Stepper,
    advective_cfl_limit,
    energy_budget,
    ideal_invariants,
    initial_state,
    iter_states,
    rhs,
    step,
    validate_state,
)
from .monitor import (
    CoherenceEstimate,
    CriterionReport,
    CriterionSpec,
    EnvelopeReport,
    ScalarDiagnostic,
    TrajectoryMonitor,
    band_energies,
    coherence_from_vorticity,
    criterion_integral,
    envelope_check,
    envelope_from_series,
    make_criterion_spec,
    projected_equation_residual,
    serrin_norms,
    vorticity_coherence,
)
from .checkpoint import CheckpointError, read_checkpoint, write_checkpoint
from .config import ConfigError, ParsedRun, parse_config, parse_config_text

__all__ = [name for name in dir() if not name.startswith("_")]
