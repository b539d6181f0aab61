"""Closed-form checks for the boundary regimes of the offloading problem."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .channel import ChannelState
from .energy import PowerModelParams
from .optimizer import ApplicationProfile, MinLatency, OffloadProblem, offload_time_per_bit


class UnconstrainedDecision(str, Enum):
    ALL_LOCAL = "AllLocal"
    ALL_REMOTE = "AllRemote"


@dataclass(frozen=True)
class CaseReport:
    no_offload_optimal: bool
    total_offload_optimal: bool
    l_o: float
    split_at_lo: tuple[float, float]
    unconstrained_decision: UnconstrainedDecision
    unconstrained_threshold: float
    degenerate_latency: bool = False

    def as_dict(self) -> dict:
        return {
            "no_offload_optimal": self.no_offload_optimal,
            "total_offload_optimal": self.total_offload_optimal,
            "l_o": self.l_o,
            "split_at_lo": {"s_p0": self.split_at_lo[0], "s_p1": self.split_at_lo[1]},
            "unconstrained_decision": self.unconstrained_decision.value,
            "unconstrained_threshold": self.unconstrained_threshold,
            "degenerate_latency": self.degenerate_latency,
        }


def _problem(prof, ch, pm) -> OffloadProblem:
    return OffloadProblem.build(prof, ch, pm)


def remote_cost_per_bit(problem: OffloadProblem, r_ul: float) -> float:
    """Energy to ship one bit up at ``r_ul`` and receive its output at full DL speed."""
    return problem.prof.beta_ul * problem.ul_energy_per_bit(r_ul) + problem.dl_per_bit


def no_offload_optimal(prof: ApplicationProfile, ch: ChannelState, pm: PowerModelParams) -> bool:
    """All-local processing is feasible and no marginal bit is cheaper remotely.

    The rate derivative term vanishes at ``S_P1 = 0`` because the latency
    floor on the UL rate starts at zero.
    """
    if prof.l_max < prof.s_app * prof.tau_p0:
        return False
    problem = _problem(prof, ch, pm)
    return prof.eps_p0 <= remote_cost_per_bit(problem, problem.r_ul_star(0.0))


def total_offload_optimal(prof: ApplicationProfile, ch: ChannelState, pm: PowerModelParams) -> bool:
    problem = _problem(prof, ch, pm)
    a = offload_time_per_bit(prof, problem.r_ul_max, problem.r_dl_max)
    if prof.s_app == 0:
        return False
    if math.isinf(a) or prof.l_max < prof.s_app * a:
        return False
    return problem.dfo_dsp1(prof.s_app) <= 0


def min_latency(prof: ApplicationProfile, ch: ChannelState, pm: PowerModelParams) -> MinLatency:
    """Minimum affordable latency and the split achieving it.

    When the offload path is unusable (zero UL rate, or zero DL rate with
    output bits) the result is the all-local time, flagged ``degenerate``.
    """
    return _problem(prof, ch, pm).min_latency()


def unconstrained_decision(
    prof: ApplicationProfile, ch: ChannelState, pm: PowerModelParams
) -> tuple[UnconstrainedDecision, float]:
    """All-or-nothing decision without a latency constraint.

    Returns the decision and the per-bit remote cost it is compared against;
    ties go to local processing.
    """
    problem = _problem(prof, ch, pm)
    r_star = min(problem.r_check, problem.r_ul_max)
    threshold = remote_cost_per_bit(problem, r_star)
    if threshold >= prof.eps_p0:
        return UnconstrainedDecision.ALL_LOCAL, threshold
    return UnconstrainedDecision.ALL_REMOTE, threshold


def case_report(prof: ApplicationProfile, ch: ChannelState, pm: PowerModelParams) -> CaseReport:
    lo = min_latency(prof, ch, pm)
    decision, threshold = unconstrained_decision(prof, ch, pm)
    return CaseReport(
        no_offload_optimal=no_offload_optimal(prof, ch, pm),
        total_offload_optimal=total_offload_optimal(prof, ch, pm),
        l_o=lo.l_o,
        split_at_lo=(lo.s_p0, lo.s_p1),
        unconstrained_decision=decision,
        unconstrained_threshold=threshold,
        degenerate_latency=lo.degenerate,
    )
