"""Buffer-overflow probabilities of tandem queues, three ways.

Exact linear-system solves on the buffer simplex, closed-form limits built
from conjugate points on the walk's characteristic surface, and seeded
Monte Carlo with certified truncation bias, plus the error analysis tying
them together.
"""

from .errors import (
    DegenerateDiscriminantError,
    EqualRatesError,
    InadmissibleBasisElementError,
    NotConvergedError,
    RankDeficientBasisError,
    TandemError,
    UnstableRatesError,
    ZeroBetaError,
)
from .model import (
    Point,
    Rates,
    Region,
    WalkKind,
    classify,
    constrained_step,
    increments,
    to_corner_frame,
)
from .charsurface import (
    ConjugatePair,
    SurfacePoint,
    char_poly,
    char_poly_boundary,
    conjugate_alpha,
    conjugate_roots,
    discriminant,
    hamiltonian,
    real_section,
    surface_intersections,
)
from .harmonic import (
    BoundaryFit,
    HarmonicityReport,
    LogLinearCombination,
    LogLinearTerm,
    boundary_coeff,
    bracket,
    diffusion_generator_residual,
    diffusion_hit_prob,
    diffusion_normal_derivative,
    fit_boundary,
    harmonicity_report,
    hit_comb_2d,
    hit_prob,
    hit_prob_2d,
    hit_prob_2d_log,
    hit_prob_3d,
    hit_prob_equal,
    pair_harmonic,
    three_tandem_combination,
)
from .exactsolve import (
    ConvergenceRow,
    GridField,
    dense_overflow_grid,
    hit_prob_within,
    hit_prob_within_curve,
    limit_convergence,
    solve_overflow_grid,
)
from .montecarlo import (
    Estimate,
    SimConfig,
    escape_bias_bound,
    simulate_hit,
    simulate_overflow,
)
from .report import (
    CheckResult,
    LdRateReport,
    SweepRow,
    VerificationReport,
    ld_rate,
    sweep,
    sweep_to_csv,
    sweep_to_json,
    verify,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
