"""Time-fractional Schrodinger dynamics via the Mittag-Leffler functional calculus."""

from __future__ import annotations

__version__ = "0.1.0"

from fracprop.errors import (  # noqa: E402
    ConfigError,
    DegenerateGrid,
    DimensionMismatch,
    FracpropError,
    NonConvergence,
    NotHermitian,
    NotPositive,
    NumericalError,
    PoleProximity,
    QuadratureFailure,
)
from fracprop.fracops import (  # noqa: E402
    GWeight,
    SampledPath,
    TimeGrid,
    caputo_l1,
    equation_residual,
    rl_integral,
    semigroup_defect,
)
from fracprop.mlf import (  # noqa: E402
    FractionalOrder,
    Method,
    MLValue,
    RayPoint,
    ml_eval,
    ml_integral,
    ml_kernel,
    ml_ray,
    ml_ray_batch,
    ml_series,
    ml_sup_sweep,
)
from fracprop.propagator import (  # noqa: E402
    SolutionFamily,
    adjoint_propagate,
    alpha_sweep,
    commutation_defect,
    free_propagate,
    gram_multiplier,
    norm_trace,
    propagate,
    residual_certify,
    unitary_reference,
)
from fracprop.spectral import (  # noqa: E402
    Decomposition,
    HermitianModel,
    PeriodicGrid,
    State,
    apply_multiplier,
    decompose,
    fourier_multiplier,
)

__all__ = [
    "ConfigError",
    "Decomposition",
    "DegenerateGrid",
    "DimensionMismatch",
    "FracpropError",
    "FractionalOrder",
    "GWeight",
    "HermitianModel",
    "MLValue",
    "Method",
    "NonConvergence",
    "NotHermitian",
    "NotPositive",
    "NumericalError",
    "PeriodicGrid",
    "PoleProximity",
    "QuadratureFailure",
    "RayPoint",
    "SampledPath",
    "SolutionFamily",
    "State",
    "TimeGrid",
    "__version__",
    "adjoint_propagate",
    "alpha_sweep",
    "apply_multiplier",
    "caputo_l1",
    "commutation_defect",
    "decompose",
    "equation_residual",
    "fourier_multiplier",
    "free_propagate",
    "gram_multiplier",
    "ml_eval",
    "ml_integral",
    "ml_kernel",
    "ml_ray",
    "ml_ray_batch",
    "ml_series",
    "ml_sup_sweep",
    "norm_trace",
    "propagate",
    "residual_certify",
    "rl_integral",
    "semigroup_defect",
    "unitary_reference",
]
