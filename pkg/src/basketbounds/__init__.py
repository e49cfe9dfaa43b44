"""Static-arbitrage upper and lower bounds on European basket call prices."""

from .closed_bounds import (
    BreakpointCertificate,
    ConvexChain,
    HobsonCertificate,
    LowerNoForwardCertificate,
    ReducedInstance,
    UpperCertificate,
    hobson_lambda_bound,
    lower_no_forwards,
    synthetic_strikes,
    two_option_reduction,
    upper_no_forwards,
    upper_with_forwards,
)
from .core import (
    ArbitrageError,
    BasketQuote,
    BoundProblem,
    BoundResult,
    FeasibilityError,
    MarketInstance,
    Method,
    Sense,
    SolverFailure,
    Violation,
    chain_violations,
    feasibility_violations,
    payoff,
    per_asset_option_data,
    validate,
)
from .distributions import (
    DiscreteDistribution,
    OracleInfeasible,
    default_axes,
    feasible_comonotone,
    grid_oracle,
    lower_optimal_sequence,
    price_under,
    upper_certificate_axes,
)
from .lower_lp import LowerCertificate, lower_with_forwards
from .lp_backend import LinearProgram, LpSettings, LpSolution, LpStatus, solve
from .pricing import (
    LognormalMarket,
    black_call,
    implied_vol,
    mc_basket_price,
    mc_prices,
    yield_curve_demo,
)
from .relaxation import (
    CleanedChain,
    PriceSurface,
    SurfaceAnchor,
    UnboundedRelaxation,
    clean_chain,
    relax_bound,
    surface_eval,
)

__version__ = "0.1.0"
