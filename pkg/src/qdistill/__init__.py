"""Purification of a subsystem by repeated projective measurements on its partner,
for projected evolution operators with a continuous spectrum."""

from .cavity import (
    Coherent,
    GaussianParticleState,
    ModelParams,
    NumberOne,
    coefficients,
    initial_density,
    kernel_coherent,
    kernel_number1,
    make_kernel,
    purity_asym_formula,
    purity_closed_coherent,
    selected_momentum,
    survival_asym_number1,
    survival_closed_coherent,
)
from .errors import (
    BoundaryMaximum,
    ConfigError,
    DegenerateMaximum,
    DegenerateProbability,
    DistillError,
    InvalidKernel,
    InvalidLaplace,
    InvalidState,
    NonConvergence,
    NonFinite,
    StroboscopicDecoupling,
)
from .quadrature import IntegrationResult, integrate_1d, integrate_2d, second_derivative
from .spectral import (
    DensityKernel,
    DistillationSeries,
    LaplaceData,
    SpectralKernel,
    delta_n,
    evolve_density,
    laplace_data,
    locate_peak,
    purity_asymptotic,
    purity_exact,
    run_series,
    survival_asymptotic,
    survival_exact,
)

__version__ = "0.1.0"
