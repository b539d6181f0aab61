import math
from dataclasses import replace

import numpy as np
import pytest

from femtoffload import ChannelState, Decision, PowerModelParams, solve
from femtoffload.cases import (
    UnconstrainedDecision,
    case_report,
    min_latency,
    no_offload_optimal,
    total_offload_optimal,
    unconstrained_decision,
)
from femtoffload.config import REFERENCE_POWER_MODEL, REFERENCE_PROFILE, db_to_linear
from femtoffload.optimizer import OffloadProblem, offload_time_per_bit, r_dl_cap, r_ul_cap
from femtoffload.sim import draw_channel_state, substream

from helpers import random_instance

PROF, PM = REFERENCE_PROFILE, REFERENCE_POWER_MODEL


def channel(gamma_db, seed=3):
    return draw_channel_state(4, 4, db_to_linear(gamma_db), 1e7, 1e7, substream(seed, 0, 0, 0))


def test_no_offload_examples():
    ch = channel(30.0)
    assert no_offload_optimal(replace(PROF, eps_p0=0.0), ch, PM)
    assert not no_offload_optimal(replace(PROF, eps_p0=0.0, l_max=1.0), ch, PM)


def test_total_offload_examples():
    ch = channel(30.0)
    assert total_offload_optimal(replace(PROF, eps_p0=1.0, l_max=100.0), ch, PM)
    dead = ChannelState(np.zeros((4, 4)), np.eye(4), 1e7, 1e7)
    assert not total_offload_optimal(replace(PROF, eps_p0=1.0, l_max=100.0), dead, PM)


def test_min_latency_symmetric_case():
    # beta_ul / R_ul + tau_p1 = tau_p0 when R_ul = 2e7 bit/s and tau_p1 = tau_p0 / 2
    prof = replace(PROF, beta_dl=0.0, tau_p0=1e-7, tau_p1=5e-8)
    ch = ChannelState.siso(1e12, w_ul=1e7)
    pm = replace(PM, se_cap=2.0)
    lo = min_latency(prof, ch, pm)
    assert lo.l_o == pytest.approx(prof.s_app * prof.tau_p0 / 2, rel=1e-12)
    assert (lo.s_p0, lo.s_p1) == pytest.approx((prof.s_app / 2, prof.s_app / 2), rel=1e-12)


def test_min_latency_remote_only_limit():
    ch = channel(20.0)
    prof = replace(PROF, tau_p0=1e300)
    a = offload_time_per_bit(prof, r_ul_cap(ch, PM), r_dl_cap(ch, PM))
    assert min_latency(prof, ch, PM).l_o == pytest.approx(prof.s_app * a, rel=1e-12)


def test_min_latency_degenerate_channel():
    dead = ChannelState(np.zeros((4, 4)), np.eye(4), 1e7, 1e7)
    lo = min_latency(PROF, dead, PM)
    assert lo.degenerate
    assert lo.l_o == PROF.s_app * PROF.tau_p0


def test_min_latency_below_single_sided_times():
    rng = np.random.default_rng(1)
    for _ in range(50):
        prof, ch, pm = random_instance(rng)
        lo = min_latency(prof, ch, pm)
        a = offload_time_per_bit(prof, r_ul_cap(ch, pm), r_dl_cap(ch, pm))
        assert lo.l_o < prof.s_app * prof.tau_p0
        assert lo.l_o < prof.s_app * a


def test_bounds_collapse_at_minimum_latency():
    rng = np.random.default_rng(2)
    for _ in range(50):
        prof, ch, pm = random_instance(rng)
        lo = min_latency(prof, ch, pm)
        problem = OffloadProblem.build(replace(prof, l_max=lo.l_o), ch, pm)
        assert problem.s_min == pytest.approx(lo.s_p1, rel=1e-9)
        assert problem.s_max == pytest.approx(lo.s_p1, rel=1e-9)


def test_unconstrained_examples():
    ch = channel(20.0)
    decision, _ = unconstrained_decision(replace(PROF, eps_p0=0.0), ch, PM)
    assert decision is UnconstrainedDecision.ALL_LOCAL
    free = PowerModelParams(0.0, 1e-6, 0.0, 0.0, 0.1, 0.1, 5.5)
    decision, _ = unconstrained_decision(replace(PROF, eps_p0=1.0), ch, free)
    assert decision is UnconstrainedDecision.ALL_REMOTE


def test_unconstrained_tie_stays_local():
    ch = channel(20.0)
    _, threshold = unconstrained_decision(PROF, ch, PM)
    decision, _ = unconstrained_decision(replace(PROF, eps_p0=threshold), ch, PM)
    assert decision is UnconstrainedDecision.ALL_LOCAL


def test_unconstrained_invariant_to_application_size():
    rng = np.random.default_rng(3)
    for _ in range(20):
        prof, ch, pm = random_instance(rng)
        base = unconstrained_decision(prof, ch, pm)
        for scale in (1e-3, 10.0):
            assert unconstrained_decision(replace(prof, s_app=prof.s_app * scale), ch, pm) == base


def test_unconstrained_agrees_with_large_budget_solver():
    rng = np.random.default_rng(4)
    for _ in range(50):
        prof, ch, pm = random_instance(rng, regime="loose")
        decision, _ = unconstrained_decision(prof, ch, pm)
        sol = solve(replace(prof, l_max=1e9), ch, pm)
        expected = Decision.NO_OFFLOAD if decision is UnconstrainedDecision.ALL_LOCAL else Decision.TOTAL
        assert sol.decision is expected
        problem = OffloadProblem.build(replace(prof, l_max=math.inf), ch, pm)
        endpoint = 0.0 if expected is Decision.NO_OFFLOAD else prof.s_app
        assert sol.energy_total == pytest.approx(problem.f_o(endpoint), rel=1e-6)


def test_loose_budget_never_partial():
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 50:
        prof, ch, pm = random_instance(rng, regime="loose")
        problem = OffloadProblem.build(prof, ch, pm)
        a = offload_time_per_bit(prof, problem.r_ul_max, problem.r_dl_max)
        l_max = 2 * prof.s_app * max(prof.tau_p0, a)
        loose = OffloadProblem.build(replace(prof, l_max=l_max), ch, pm)
        if loose.r_min(loose.s_max) > loose.r_check:
            continue
        assert solve(loose.prof, ch, pm).decision in (Decision.NO_OFFLOAD, Decision.TOTAL)
        checked += 1


def test_cases_agree_with_solver():
    rng = np.random.default_rng(6)
    for _ in range(100):
        prof, ch, pm = random_instance(rng)
        sol = solve(prof, ch, pm)
        if no_offload_optimal(prof, ch, pm):
            assert sol.decision is Decision.NO_OFFLOAD
        if total_offload_optimal(prof, ch, pm):
            assert sol.decision is Decision.TOTAL


def test_no_offload_condition_matches_derivative_at_zero():
    rng = np.random.default_rng(7)
    for _ in range(50):
        prof, ch, pm = random_instance(rng)
        if prof.l_max < prof.s_app * prof.tau_p0:
            continue
        problem = OffloadProblem.build(prof, ch, pm)
        assert no_offload_optimal(prof, ch, pm) == (problem.dfo_dsp1(0.0) >= 0)


def test_case_report_dict():
    report = case_report(PROF, channel(25.0), PM).as_dict()
    assert set(report) == {
        "no_offload_optimal", "total_offload_optimal", "l_o", "split_at_lo",
        "unconstrained_decision", "unconstrained_threshold", "degenerate_latency",
    }
    assert report["unconstrained_decision"] in ("AllLocal", "AllRemote")
    assert report["split_at_lo"]["s_p0"] + report["split_at_lo"]["s_p1"] == pytest.approx(PROF.s_app)
