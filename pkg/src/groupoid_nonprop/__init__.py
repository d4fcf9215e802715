"""Finite groupoid convolution algebras, boundary spectra, and localization checks."""

__version__ = "0.1.0"

from .algebra import Kernel, UnitFunction, convolve, cx_action, extend_by_zero, hahn_norm, involute, restrict
from .boundary import (
    BandKernel,
    Coefficient,
    CompactificationModel,
    CompactifiedGroupoid,
    NeighborhoodSpec,
    band_kernel_on_groupoid,
    boundary_operator,
    build_compactified_groupoid,
    character_symbol_spectrum,
    continuity_check,
    fourier_symbol_spectrum,
    interior_mask,
    interior_operator,
    membership_neighborhood,
)
from .errors import NonpropError
from .groupoid import (
    FiniteGroupoid,
    OrbitDecomposition,
    build_group_bundle,
    build_pair_groupoid,
    disjoint_union,
    orbit_decomposition,
    orbits,
    reduce,
    transitive_groupoid,
    validate,
)
from .groups import FiniteGroup, ZdTruncation, cyclic, direct_product, symmetric3
from .representations import OperatorMatrix, multiplier_mult, regular_rep, transport, vector_rep
from .spectral import (
    BumpFunction,
    SpectrumSet,
    decompose,
    essential_spectrum_union,
    evolution,
    functional_calculus,
    spectrum,
    support_gap,
)
from .verifier import (
    ExperimentReport,
    LatticeSystem,
    check_hypothesis,
    construct_psi,
    discrete_outliers,
    find_localization_neighborhood,
    ideal_membership_residual,
    propagation_sweep,
    run_experiment,
)
