"""Transition amplitudes between quasifree states of the canonical commutation relations.

The package works with finite-dimensional presymplectic spaces ``(R^n, sigma)``
and polarizations ``S = Re S + i sigma / 2``.  Infinite dimension is modeled by
rule-based truncation families.
"""

__version__ = "0.1.0"

from .amplitude import (
    AmplitudeResult,
    amplitude_oracle,
    gaussian_amplitude,
    quadrature_squaring_check,
    restrict_polarization,
    sqrt_density,
    transition_amplitude,
    twisted_convolution_gaussians,
)
from .ccr import (
    Polarization,
    PresymplecticSpace,
    apply_automorphism,
    boundary_polarization,
    classify,
    direct_sum,
    ef_block_checks,
    hyperboloid_polarization,
    make_polarization,
    quadrature,
    quadrature_spectrum,
)
from .central import (
    delta_omega,
    doubled_correction_check,
    fiber_amplitude,
    integrated_amplitude,
    split_center,
)
from .errors import NumericalError, QuasifreeError, ValidationError
from .forms import pw_geometric_mean, ratio_operator, relative_determinant
from .gaussian import (
    GaussianMeasure,
    ProductGaussianSpec,
    SequenceRule,
    hellinger_affinity,
    kakutani_classify,
    support_law_sampler,
)
from .hs import (
    build_truncated_polarization,
    diagonal_modes,
    hs_norms,
    r_operator,
    small_overlap_bound,
    truncation_verdict,
    verify_ay_bounds,
)
from .policy import NumericPolicy, get_policy, numeric_policy

__all__ = [
    "AmplitudeResult",
    "GaussianMeasure",
    "NumericPolicy",
    "NumericalError",
    "Polarization",
    "PresymplecticSpace",
    "ProductGaussianSpec",
    "QuasifreeError",
    "SequenceRule",
    "ValidationError",
    "amplitude_oracle",
    "apply_automorphism",
    "boundary_polarization",
    "build_truncated_polarization",
    "classify",
    "delta_omega",
    "diagonal_modes",
    "direct_sum",
    "doubled_correction_check",
    "ef_block_checks",
    "fiber_amplitude",
    "gaussian_amplitude",
    "get_policy",
    "hellinger_affinity",
    "hs_norms",
    "hyperboloid_polarization",
    "integrated_amplitude",
    "kakutani_classify",
    "make_polarization",
    "numeric_policy",
    "pw_geometric_mean",
    "quadrature",
    "quadrature_spectrum",
    "quadrature_squaring_check",
    "r_operator",
    "ratio_operator",
    "relative_determinant",
    "restrict_polarization",
    "small_overlap_bound",
    "split_center",
    "sqrt_density",
    "support_law_sampler",
    "transition_amplitude",
    "truncation_verdict",
    "twisted_convolution_gaussians",
    "verify_ay_bounds",
]
