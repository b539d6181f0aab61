"""Energy-optimal partial computation offloading over MIMO femtocell links."""

from .cases import (
    CaseReport,
    UnconstrainedDecision,
    case_report,
    min_latency,
    no_offload_optimal,
    total_offload_optimal,
    unconstrained_decision,
)
from .channel import ChannelState, WaterFillResult, gram_eigenvalues, max_rate_waterfill, min_power_waterfill
from .energy import (
    PowerModelParams,
    UplinkEnergyPoint,
    e_dl,
    e_dl_norm,
    e_ul,
    e_ul_norm,
    e_ul_norm_deriv,
    min_energy_rate,
)
from .errors import InfeasibleProblem, InfeasibleSplitError, NoChannelError, ValidationError
from .optimizer import (
    ApplicationProfile,
    Decision,
    OffloadProblem,
    OffloadSolution,
    SolverConfig,
    r_ul_cap,
    r_ul_min,
    s_p1_bounds,
    solve,
)

__version__ = "0.1.0"
