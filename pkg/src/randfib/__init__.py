"""Growth rates of random Fibonacci sequences via Stern-Brocot measures.

The library computes the almost-sure exponential growth rate of the random
recurrences F'' = F' +- F and F'' = |F' +- F| (signs i.i.d., + with
probability p) by building the alternating Stern-Brocot measure attached to
the survivor chain of the sign-word reduction, integrating log x against it
with certified error bounds, and validating every closed form by exact
arithmetic and Monte Carlo simulation.
"""

from .params import (
    CaseParams,
    DomainError,
    ModelCase,
    PHI,
    INV_PHI,
    alpha_from_p,
    build_params,
    compression_rate,
    p_from_alpha,
    survival_probability,
)
from .words import (
    NDCoefficients,
    ReducedWord,
    ReductionStats,
    TreeKind,
    label_trace,
    label_via_matrices,
    nd_coefficients,
    reduce_word,
    reduction_trace,
    strip_leading_L,
)
from .cfrac import (
    ContinuedFraction,
    ERat,
    SternBrocotInterval,
    blocks,
    cf_eval,
    interval_of_suffix,
    pieces,
    q_of_path,
    sb_children,
    sb_locate,
)
from .measure import (
    LeafMeasure,
    MeasureLeaf,
    RefinePolicy,
    SignedLineMeasure,
    change_of_variable_residual,
    furstenberg_residual,
    furstenberg_residual_exact,
    integrate_log,
    integrate_split,
    mass_of_interval,
    nu_f_build,
    question_mark,
    refine_nu_alpha,
)
from .lyapunov import (
    GammaResult,
    dgamma_dp_at_1,
    gamma_curve,
    gamma_of_alpha,
    gamma_of_p,
    gamma_prime,
    gamma_split_check,
    gamma_via_nu_f,
    split_ratio_closed_forms,
)
from .montecarlo import (
    GrowthEstimate,
    ReductionEstimates,
    RngSpec,
    coupling_check,
    ergodic_average,
    estimate_reduction,
    nd_limit_sample,
    simulate_growth,
    stopping_time_stats,
)

__version__ = "0.1.0"
