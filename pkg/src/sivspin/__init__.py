"""Spin Hamiltonian, Orbach relaxation, and decoherence models for S=1
color centers with <111> symmetry, plus the fitters used to analyze them."""

__version__ = "0.1.0"

from .constants import CONSTANTS, PhysicalConstants
from .spin_core import (
    EigenSystem3,
    FieldConfig,
    GTensor,
    ResonanceLine,
    SpectrumLine,
    SpinSystemParams,
    ZfsTensor,
    build_hamiltonian,
    effective_g,
    eigensolve,
    esr_spectrum_111,
    resonance_fields,
    site_angles,
)
from .orbach_singlet import (
    OrbachParams,
    OverlapTriple,
    ZeroFieldOverlaps,
    boltzmann_factor,
    labeled_relaxation_times,
    mixed_overlaps,
    mixing_matrix,
    relaxation_times_analytic,
    relaxation_times_large_imbalance,
    relaxation_times_numeric,
    singlet_rate_matrix,
    stationary_weights,
    t1_t2_ratio,
    t2_singlet,
    wigner_d1,
)
from .orbach_triplet import (
    TripletModelParams,
    TripletOverlapTable,
    coaxial_triplet_params,
    triplet_overlap_table,
    triplet_rate_matrix,
    triplet_relaxation_times,
    triplet_t2_model,
)
from .dynamics import (
    DecayCurve,
    PopulationState,
    equilibrium_state,
    inversion_recovery_curve,
    propagate,
    propagate_many,
    synthesize_noisy,
)
from .bath import (
    PairBathParams,
    averaged_echo_decay,
    bath_limited_t2,
    density_sweep,
    dipolar_coupling,
    extract_t2,
    pair_echo_decay,
)
from .fitting import (
    ArrheniusDataset,
    FitResult,
    fit_arrhenius,
    fit_biexponential,
    fit_instantaneous_diffusion,
    global_orientation_fit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
