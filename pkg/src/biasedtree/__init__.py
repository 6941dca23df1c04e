"""Return probabilities of the lambda-biased random walk on the d-regular tree."""
# flake8: noqa: F401
from .errors import (
    BiasedTreeError,
    CapacityExceeded,
    DegreeTooSmall,
    DomainError,
    InexactParameter,
    NonFinite,
    NonPositiveLambda,
    NotCoveredRegime,
    NotTransient,
)
from .exact import (
    Arithmetic,
    ProbTable,
    TableKind,
    catalan_number,
    convolve_first_return,
    first_return_catalan,
    first_return_dp,
    pn_return_dp,
)
from .genfun import (
    DarbouxReport,
    PowerSeries,
    catalan_gf,
    darboux_report,
    f_asymptotic,
    g_closed,
    p_asymptotic,
    return_probability,
    rho_derivative,
    series_g,
    series_u,
    spectral_radius,
    u_closed,
)
from .model import (
    RadialKernel,
    Regime,
    TreeKernelRow,
    WalkParams,
    critical_lambda,
    growth_rate,
    make_params,
    radial_kernel,
    sphere_size,
    tree_kernel_row,
)

__version__ = "0.1.0"
