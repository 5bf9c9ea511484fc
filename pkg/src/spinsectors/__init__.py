"""Entanglement entropy statistics in SU(2) symmetry sectors of spin chains."""

__version__ = "0.1.0"

from .combinatorics import (
    HALF,
    ONE,
    MultiplicityTable,
    SectorLabel,
    SpinSpecies,
    admissible_two_j,
    hilbert_fraction,
    multiplicity,
    multiplicity_by_quadrature,
    multiplicity_table,
    sector_dimensions,
    spin_half_multiplicity,
    spin_half_multiplicity_log,
    zero_magnetization_dim,
)
from .asymptotics import (
    SaddleData,
    fraction_peak_density,
    hilbert_fraction_asymptotic,
    log_multiplicity_saddle,
    multiplicity_rate,
    saddle_solve,
)
from .special import digamma
from .su2 import (
    SectorBasis,
    apply_total_spin_squared,
    apply_total_sz,
    clebsch_gordan,
    coupled_sector_basis,
    sector_basis,
    stretched_weight,
)
from .ensembles import (
    BipartitionSpec,
    EntropyEstimate,
    RandomStateSpec,
    default_sample_count,
    ensemble_average,
    ensemble_entropy_samples,
    entanglement_entropy,
    fixed_filling_average,
    haar_average_leading,
    max_spin_entropy_asymptotic,
    max_spin_state_entropy,
    page_average,
    paired_spin_crossover,
    random_state_average,
    sd1_average,
    sd1_semianalytic,
    sd2_average,
    sd2_average_closed,
    sd2_asymptotic,
    singlet_average_asymptotic,
    singlet_average_exact,
    slice_entanglement_entropy,
)
from .spectra import (
    ChainSpec,
    ChaosReport,
    EigenstateRecord,
    MomentumBlock,
    chaos_scan,
    diagonalize_and_resolve,
    eigenstate_entropy_average,
    gaussianity_average,
    gaussianity_of_vector,
    hamiltonian_matrix,
    momentum_blocks,
    spin_squared_matrix,
)
