"""Rate-programmable continuous-time optimization dynamics.

Pick a stationarity encoding (gradient, KKT, saddle KKT, or shared-game
KKT), a decay law (exponential, finite-time, fixed-time, or
prescribed-time), and a feedback realization (hgd, nd, gd); the closed
loop dz/dt = u(z, t) then drives the residual to zero at the demanded
rate.  An HTTP service and a thin CLI client wrap the library.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConstructionError,
    ConvergedAlready,
    DomainViolation,
    HorizonExceeded,
    JacobianSingular,
    OlfkitError,
    OracleAmbiguous,
    OracleFailure,
    SingularityEncountered,
    UnsupportedRealization,
)
from .laws import (
    DecayLaw,
    ExponentialLaw,
    FiniteTimeLaw,
    FixedTimeLaw,
    PrescribedTimeLaw,
    make_law,
)
from .model import Block, BlockLayout, StationarityModel, fd_check, layout
from .dynamics import (
    GradientDynamics,
    HessianGradientDynamics,
    NewtonDynamics,
    Realization,
    gd_field,
    hgd_field,
    make_realization,
    nd_field,
)
from .encodings import (
    ConstrainedProblem,
    GNEProblem,
    MinimaxProblem,
    UnconstrainedProblem,
    encode_constrained_exact,
    encode_constrained_fb,
    encode_gne,
    encode_minimax,
    encode_unconstrained,
    fb_smooth,
    fb_smooth_partials,
)
from .integrate import (
    SolveConfig,
    SolveReport,
    SolveStatus,
    Trajectory,
    solve,
    verify_decay,
    verify_trajectory,
)
from .problems import (
    AffineKKT,
    BenchmarkSpec,
    available_problems,
    build_boundqp,
    build_cournot,
    build_logsumexp,
    build_minimax_toy,
    build_num,
    build_problem,
    build_sphere,
    oracle_active_set,
    oracle_kkt_affine,
)
from .runner import SUITES, CaseResult, run_case, run_suite
