"""Direct sampling indicators for inverse acoustic scattering from far-field data."""

from .errors import ConfigurationError, DegenerateInput, DSMError, InvalidArgument, NumericalFailure
from .filter import FilterPolynomial, c_alpha, eval_polynomial, fit_filter_polynomial, gamma_alpha
from .geometry import (
    DirectionSet,
    FarFieldMatrix,
    Scatterer,
    WaveContext,
    analytic_farfield,
    born_farfield,
    boundary_radius,
    herglotz_phi,
    make_directions,
)
from .indicators import (
    IndicatorData,
    IndicatorGrid,
    SamplingGrid,
    evaluate_grid,
    fm_picard,
    hausdorff_to_truth,
    level_set,
    normalize,
    phi_vector,
    sharpen,
    w_dsm,
    w_fdsm,
    w_tdsm,
)
from .noise import NoiseSpec, corrupt, spectral_norm
from .special import bessel_eval
from .spectral import SpectralDecomposition, f_sharp, half_power_matrix, svd

__version__ = "0.1.0"
