"""Numerical laboratory for regularized Casimir energy differences."""

from .certifier import (
    BodyGeometry,
    Configuration,
    FinitenessCertificate,
    certify_finiteness,
    combination_check,
    delta_slots,
    rigid_motion,
    slot_invariants,
)
from .cutoffs import CutoffSpec, WeightFunction, post_invert, recover_weight, weight_moments
from .errors import (
    CasimirLabError,
    ConfigError,
    InvalidArgumentError,
    NumericalError,
    ResourceLimitError,
)
from .heat_kernel import DivergenceFit, SdwExpansion, divergence_fit, heat_trace, sdw_fit
from .reference_models import (
    AveragedPotential,
    MassPair,
    average_potential,
    reference_operator_1d,
    reference_pair_3d,
    solve_masses,
)
from .regularization import (
    ExtrapolationResult,
    RegularizedSweep,
    difference_sweep,
    erfc_regularized_sum,
    extrapolate_finite_part,
    f_regularized_sum,
    resum_difference,
    verify_erfc_identity,
    verify_lemma1,
)
from .spectra import (
    BoundaryCondition,
    ModeSpectrum,
    OperatorSpec1D,
    box_spectrum_3d,
    interval_spectrum,
    massive_spectrum,
    schrodinger_spectrum_1d,
)

__version__ = "0.1.0"
