"""Two-firm pricing under reference-price effects: equilibrium, mirror-descent
learning dynamics, step-size analysis and trajectory diagnostics."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DomainError,
    HorizonGuardExceeded,
    RefPriceError,
    RegimeError,
    SingularityError,
)
from .market import (
    MarketParams,
    PriceState,
    demand,
    gradient,
    nature_gradient,
    project,
    reference_update,
    revenue,
    surcharge_form_demand,
)
from .equilibrium import (
    Sne,
    best_response,
    best_response_dynamics,
    best_response_iterates,
    largest_best_response_profile,
    sne_closed_form,
)
from .trajectory import Trajectory
from .omd import (
    Regularizer,
    ScheduleClass,
    StepSchedule,
    classify_schedule,
    mirror_step,
    simulate,
    simulate_induced,
)
from .stepsize import (
    ConstStepReport,
    RateConstantReport,
    certified_factor,
    const_step_region,
    contraction_envelope,
    decreasing_step_band,
    f_im,
    geometric_rate_bound,
    multiplier_region,
    rate_constant,
    sigma0,
)
from .diagnostics import (
    ConvergenceVerdict,
    bregman,
    check_rate_bound,
    detect_convergence,
    dist_to_sne,
    first_hit,
    fit_rate,
    state_distance,
)
