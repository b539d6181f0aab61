"""Joint radio/computation allocation for partial offloading.

The four-variable problem (local bits, offloaded bits, UL time, DL time) is
reduced to a single convex function of the offloaded bits ``s_p1``:

    f_o(s) = s * beta_ul * ebar_ul(r*(s)) + (dl_per_bit - eps_p0) * s + eps_p0 * s_app

where ``r*(s)`` clamps the energy-optimal UL rate into the interval allowed by
the latency budget and the radiated-power cap, and the DL always runs at its
maximum rate. ``solve`` minimizes ``f_o`` by nested intervals on the sign of
its derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .channel import ChannelState, max_rate_waterfill
from .energy import (
    PowerModelParams,
    e_dl,
    e_ul,
    e_ul_norm,
    e_ul_norm_deriv,
    e_ul_norm_limit_zero,
    min_energy_rate,
    rate_cap_ul,
)
from .errors import InfeasibleProblem, InfeasibleSplitError, NoChannelError, ValidationError

# Relative band for classifying a split as all-local / all-remote.
DECISION_RTOL = 1e-9
# Round-off allowance when the feasible interval collapses to a point.
COLLAPSE_RTOL = 1e-12
# Round-off allowance for r_ul_min exceeding R_UL^max at the right end.
RATE_RTOL = 1e-9


class Decision(str, Enum):
    NO_OFFLOAD = "NoOffload"
    PARTIAL = "Partial"
    TOTAL = "Total"


@dataclass(frozen=True)
class ApplicationProfile:
    """Application load and compute characteristics.

    ``s_app`` in bits, ``tau_*`` in s/bit, ``eps_p0`` in J/bit and ``l_max``
    in seconds (``math.inf`` for no latency constraint).
    """

    s_app: float
    beta_ul: float
    beta_dl: float
    tau_p0: float
    tau_p1: float
    eps_p0: float
    l_max: float = math.inf

    def __post_init__(self):
        for name in ("s_app", "beta_dl", "tau_p0", "tau_p1", "eps_p0", "l_max"):
            value = getattr(self, name)
            if math.isnan(value) or value < 0:
                raise ValidationError(f"{name} must be >= 0, got {value}")
        if not math.isfinite(self.s_app):
            raise ValidationError("s_app must be finite")
        if not (self.beta_ul >= 1 and math.isfinite(self.beta_ul)):
            raise ValidationError(f"beta_ul must be >= 1, got {self.beta_ul}")
        if not math.isfinite(self.beta_dl):
            raise ValidationError("beta_dl must be finite")


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-6
    max_iters: int = 200

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValidationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")


@dataclass(frozen=True)
class OffloadSolution:
    s_p0: float
    s_p1: float
    r_ul: float
    r_dl: float
    t_ul: float
    t_dl: float
    energy_ul: float
    energy_dl: float
    energy_local: float
    energy_total: float
    latency: float
    decision: Decision
    r_ul_max: float
    r_dl_max: float

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["decision"] = self.decision.value
        return out


@dataclass(frozen=True)
class MinLatency:
    l_o: float
    s_p0: float
    s_p1: float
    degenerate: bool = False


def r_ul_cap(ch: ChannelState, pm: PowerModelParams) -> float:
    """Maximum UL rate: water-filling at the MT power cap, clipped to the MCS ceiling."""
    return min(
        max_rate_waterfill(ch.eigs_ul, pm.p_tx_mt_max, ch.w_ul),
        rate_cap_ul(ch, pm),
    )


def r_dl_cap(ch: ChannelState, pm: PowerModelParams) -> float:
    return max_rate_waterfill(
        ch.eigs_dl, pm.p_tx_fap_max, ch.w_dl, pm.se_cap * ch.max_modes * ch.w_dl
    )


def offload_time_per_bit(prof: ApplicationProfile, r_ul_max: float, r_dl_max: float) -> float:
    """Seconds per offloaded bit at full UL/DL speed: ``beta_ul/R_ul + tau_p1 + beta_dl/R_dl``."""
    ul = prof.beta_ul / r_ul_max if r_ul_max > 0 else math.inf
    if prof.beta_dl == 0:
        dl = 0.0
    else:
        dl = prof.beta_dl / r_dl_max if r_dl_max > 0 else math.inf
    return ul + prof.tau_p1 + dl


def _dl_time_per_bit(prof: ApplicationProfile, r_dl_max: float) -> float:
    if prof.beta_dl == 0:
        return 0.0
    return prof.beta_dl / r_dl_max if r_dl_max > 0 else math.inf


def r_ul_min(s_p1: float, prof: ApplicationProfile, r_dl_max: float) -> float:
    """Smallest UL rate that lets ``s_p1`` offloaded bits meet the latency budget."""
    if s_p1 == 0 or math.isinf(prof.l_max):
        return 0.0
    slack = prof.l_max - prof.tau_p1 * s_p1 - _dl_time_per_bit(prof, r_dl_max) * s_p1
    if not slack > 0:
        raise InfeasibleSplitError(
            f"offloading {s_p1:.6g} bits leaves no time for the UL within l_max={prof.l_max:.6g} s"
        )
    return prof.beta_ul * s_p1 / slack


def s_p1_bounds(prof: ApplicationProfile, r_ul_max: float, r_dl_max: float) -> tuple[float, float]:
    """Feasible range ``(S_min, S_max)`` of offloaded bits; feasible iff ``S_min <= S_max``."""
    if prof.tau_p0 == 0:
        s_min = 0.0
    else:
        s_min = max(0.0, prof.s_app - prof.l_max / prof.tau_p0)
    a = offload_time_per_bit(prof, r_ul_max, r_dl_max)
    if math.isinf(a):
        s_max = 0.0
    elif a == 0:
        s_max = prof.s_app
    else:
        s_max = min(prof.s_app, prof.l_max / a)
    return s_min, s_max


def min_affordable_latency(prof: ApplicationProfile, r_ul_max: float, r_dl_max: float) -> MinLatency:
    """Smallest feasible budget and the split that attains it.

    This is where ``S_min(L)`` and ``S_max(L)`` cross:
    ``L_o = s_app * tau_p0 * A / (A + tau_p0)`` with ``A`` the offload time per bit.
    """
    a = offload_time_per_bit(prof, r_ul_max, r_dl_max)
    tau = prof.tau_p0
    s = prof.s_app
    if math.isinf(a):
        return MinLatency(s * tau, s, 0.0, degenerate=True)
    if math.isinf(tau):
        return MinLatency(s * a, 0.0, s)
    if a + tau == 0:
        return MinLatency(0.0, 0.5 * s, 0.5 * s)
    denom = a + tau
    return MinLatency(s * tau * a / denom, s * a / denom, s * tau / denom)


def clamp_rate(r_check: float, r_min: float, r_max: float) -> float:
    """Three-branch projection of the unconstrained optimum onto ``[r_min, r_max]``."""
    if r_check < r_min:
        return r_min
    if r_check <= r_max:
        return r_check
    return r_max


def classify(s_p1: float, s_app: float) -> Decision:
    if s_app == 0 or s_p1 < DECISION_RTOL * s_app:
        return Decision.NO_OFFLOAD
    if s_p1 > (1 - DECISION_RTOL) * s_app:
        return Decision.TOTAL
    return Decision.PARTIAL


@dataclass(frozen=True, eq=False)
class OffloadProblem:
    """One problem instance with the split-independent quantities precomputed.

    Build with :meth:`build`. ``r_check`` is the UL rate minimizing the energy
    per bit, ``dl_per_bit`` the MT energy spent receiving the output of one
    offloaded bit at the maximum DL rate.
    """

    prof: ApplicationProfile
    ch: ChannelState
    pm: PowerModelParams
    r_ul_max: float
    r_dl_max: float
    r_check: float
    s_min: float
    s_max: float
    dl_per_bit: float

    @classmethod
    def build(cls, prof: ApplicationProfile, ch: ChannelState, pm: PowerModelParams) -> "OffloadProblem":
        r_ul_max = r_ul_cap(ch, pm)
        r_dl_max = r_dl_cap(ch, pm)
        try:
            r_check = min_energy_rate(ch, pm)
        except NoChannelError:
            r_check = 0.0
        s_min, s_max = s_p1_bounds(prof, r_ul_max, r_dl_max)
        if prof.beta_dl == 0:
            dl_per_bit = 0.0
        elif r_dl_max > 0:
            dl_per_bit = pm.k_rx1 * prof.beta_dl / r_dl_max + pm.k_rx2 * prof.beta_dl
        else:
            dl_per_bit = math.inf
        return cls(prof, ch, pm, r_ul_max, r_dl_max, r_check, s_min, s_max, dl_per_bit)

    @property
    def feasible(self) -> bool:
        return self.s_min <= self.s_max or self._collapsed()

    def _collapsed(self) -> bool:
        return self.s_min - self.s_max <= COLLAPSE_RTOL * max(self.prof.s_app, 1.0)

    def min_latency(self) -> MinLatency:
        return min_affordable_latency(self.prof, self.r_ul_max, self.r_dl_max)

    def r_min(self, s_p1: float) -> float:
        return r_ul_min(s_p1, self.prof, self.r_dl_max)

    def r_ul_star(self, s_p1: float) -> float:
        """Energy-optimal UL rate for a given number of offloaded bits."""
        lo = self.r_min(s_p1)
        if lo > self.r_ul_max:
            if lo > self.r_ul_max * (1 + RATE_RTOL):
                raise InfeasibleSplitError(
                    f"offloading {s_p1:.6g} bits needs {lo:.6g} bit/s > R_UL^max={self.r_ul_max:.6g}"
                )
            lo = self.r_ul_max
        return clamp_rate(self.r_check, lo, self.r_ul_max)

    def ul_energy_per_bit(self, r_ul: float) -> float:
        if r_ul == 0:
            return e_ul_norm_limit_zero(self.ch, self.pm)
        return e_ul_norm(r_ul, self.ch, self.pm)

    def f_o(self, s_p1: float) -> float:
        """Total MT energy (J) when ``s_p1`` bits are offloaded."""
        prof = self.prof
        base = prof.eps_p0 * prof.s_app
        if s_p1 == 0:
            return base
        ebar = self.ul_energy_per_bit(self.r_ul_star(s_p1))
        return s_p1 * prof.beta_ul * ebar + (self.dl_per_bit - prof.eps_p0) * s_p1 + base

    def rate_slope(self, s_p1: float) -> float:
        """``d r*(S) / dS``; non-zero only while the latency floor binds above the optimum rate."""
        prof = self.prof
        if s_p1 == 0 or math.isinf(prof.l_max):
            return 0.0
        if not self.r_min(s_p1) > self.r_check:
            return 0.0
        slack = prof.l_max - s_p1 * prof.tau_p1 - s_p1 * _dl_time_per_bit(prof, self.r_dl_max)
        return prof.beta_ul * prof.l_max / (slack * slack)

    def dfo_dsp1(self, s_p1: float) -> float:
        """Derivative of :meth:`f_o`, J/bit."""
        prof = self.prof
        r = self.r_ul_star(s_p1)
        grad = prof.beta_ul * self.ul_energy_per_bit(r) + self.dl_per_bit - prof.eps_p0
        slope = self.rate_slope(s_p1)
        if slope != 0 and r > 0:
            grad += s_p1 * prof.beta_ul * e_ul_norm_deriv(r, self.ch, self.pm) * slope
        return grad

    def solution_at(self, s_p1: float) -> OffloadSolution:
        """Rebuild every allocation variable from the offloaded bit count."""
        prof, pm = self.prof, self.pm
        s_p0 = prof.s_app - s_p1
        r_ul = self.r_ul_star(s_p1)
        if s_p1 > 0:
            t_ul = prof.beta_ul * s_p1 / r_ul
            energy_ul = e_ul(t_ul, prof.beta_ul * s_p1, self.ch, pm).energy
            t_dl = _dl_time_per_bit(prof, self.r_dl_max) * s_p1
        else:
            t_ul = t_dl = energy_ul = 0.0
        energy_dl = e_dl(t_dl, prof.beta_dl * s_p1, pm)
        energy_local = prof.eps_p0 * s_p0
        local_time = prof.tau_p0 * s_p0 if s_p0 > 0 else 0.0
        remote_time = t_ul + prof.tau_p1 * s_p1 + t_dl if s_p1 > 0 else 0.0
        return OffloadSolution(
            s_p0=s_p0,
            s_p1=s_p1,
            r_ul=r_ul,
            r_dl=self.r_dl_max,
            t_ul=t_ul,
            t_dl=t_dl,
            energy_ul=energy_ul,
            energy_dl=energy_dl,
            energy_local=energy_local,
            energy_total=energy_ul + energy_local + energy_dl,
            latency=max(local_time, remote_time),
            decision=classify(s_p1, prof.s_app),
            r_ul_max=self.r_ul_max,
            r_dl_max=self.r_dl_max,
        )

    def optimal_split(self, cfg: SolverConfig | None = None) -> float:
        """Minimizer of :meth:`f_o` over ``[s_min, s_max]`` by nested intervals."""
        cfg = cfg or SolverConfig()
        if not self.feasible:
            raise InfeasibleProblem(self.min_latency().l_o)
        s_min = self.s_min
        s_max = max(self.s_max, s_min)
        if s_max == s_min:
            return s_min
        if self.dfo_dsp1(s_min) >= 0:
            return s_min
        if self.dfo_dsp1(s_max) <= 0:
            return s_max
        s_inf, s_sup = s_min, s_max
        mid = 0.5 * (s_inf + s_sup)
        width = cfg.epsilon * (s_max - s_min)
        for _ in range(cfg.max_iters):
            if self.dfo_dsp1(mid) <= 0:
                s_inf = mid
            else:
                s_sup = mid
            mid = 0.5 * (s_inf + s_sup)
            if s_sup - s_inf < width:
                break
        return mid


def solve(
    prof: ApplicationProfile,
    ch: ChannelState,
    pm: PowerModelParams,
    cfg: SolverConfig | None = None,
) -> OffloadSolution:
    """Minimum-energy offloading allocation.

    Raises
    ------
    InfeasibleProblem
        When no split meets ``prof.l_max``; ``l_required`` holds the minimum
        affordable latency.
    """
    problem = OffloadProblem.build(prof, ch, pm)
    return problem.solution_at(problem.optimal_split(cfg))


def verify_solution(
    sol: OffloadSolution,
    prof: ApplicationProfile,
    ch: ChannelState,
    pm: PowerModelParams,
) -> list[str]:
    """Re-check the problem constraints on a solution; returns violation messages."""
    problems = []
    scale = max(prof.s_app, 1.0)
    if abs(sol.s_p0 + sol.s_p1 - prof.s_app) > 1e-9 * scale or sol.s_p0 < -1e-9 * scale or sol.s_p1 < 0:
        problems.append("C1: split does not partition s_app")
    local = prof.tau_p0 * sol.s_p0 if sol.s_p0 > 0 else 0.0
    remote = sol.t_ul + prof.tau_p1 * sol.s_p1 + sol.t_dl if sol.s_p1 > 0 else 0.0
    if max(local, remote) > prof.l_max + 1e-9 * max(1.0, prof.l_max):
        problems.append(f"C2: latency {max(local, remote):.12g} exceeds l_max {prof.l_max:.12g}")
    if sol.s_p1 > 0:
        radiated = e_ul(sol.t_ul, prof.beta_ul * sol.s_p1, ch, pm).waterfill.total_power
        if radiated > pm.p_tx_mt_max * (1 + 1e-9) + 1e-9:
            problems.append(f"C3: radiated UL power {radiated:.6g} W exceeds cap")
        if sol.r_ul > rate_cap_ul(ch, pm) * (1 + 1e-9):
            problems.append("C3: UL rate exceeds the spectral-efficiency cap")
        if prof.beta_dl > 0:
            r_dl_max = r_dl_cap(ch, pm)
            if abs(sol.r_dl - r_dl_max) > 1e-9 * r_dl_max:
                problems.append("C4: DL not run at its maximum rate")
            if prof.beta_dl * sol.s_p1 > sol.t_dl * r_dl_max * (1 + 1e-9):
                problems.append("C4: DL time too short for the returned bits")
    parts = sol.energy_ul + sol.energy_local + sol.energy_dl
    if abs(sol.energy_total - parts) > 1e-12 * max(abs(parts), 1e-300):
        problems.append("energy_total is not the sum of its parts")
    return problems
