"""Monte Carlo sweeps over seeded Rayleigh channels and curve tables.

Reproducibility contract
------------------------
Every channel realization owns a PRNG substream: a PCG64 generator seeded
with ``numpy.random.SeedSequence(seed, spawn_key=(antenna_idx, gamma_idx,
channel_idx))``. Results therefore do not depend on evaluation order or on
the number of worker processes.

Within a substream, unit-variance circularly symmetric Gaussian entries
are formed from pairs of uniforms ``(u1, u2)`` in [0, 1) by the polar
Box-Muller transform

    z = sqrt(-ln(1 - u1)) * exp(2j*pi*u2)

so the real and imaginary parts are independent N(0, 1/2). Each matrix
consumes ``rows*cols`` consecutive pairs in row-major order, ``u1`` first.
The UL matrix is drawn before the DL matrix; the two are independent.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelState, min_power_waterfill
from .config import ScenarioConfig, SweepKind, db_to_linear
from .energy import PowerModelParams, e_ul
from .errors import InfeasibleProblem, NoChannelError
from .optimizer import OffloadProblem, solve, verify_solution


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def complex_gaussian(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    u = rng.random(size=(*shape, 2))
    radius = np.sqrt(-np.log1p(-u[..., 0]))
    return radius * np.exp(2j * np.pi * u[..., 1])


def gen_channel(n_rows: int, n_cols: int, gamma_linear: float, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh matrix with mean per-entry power gain ``gamma_linear``."""
    if n_rows < 1 or n_cols < 1:
        raise ValueError("channel dimensions must be >= 1")
    if not gamma_linear >= 0:
        raise ValueError("gamma_linear must be >= 0")
    return math.sqrt(gamma_linear) * complex_gaussian((n_rows, n_cols), rng)


def draw_channel_state(n_mt, n_fap, gamma_linear, w_ul, w_dl, rng) -> ChannelState:
    h_ul = gen_channel(n_fap, n_mt, gamma_linear, rng)
    h_dl = gen_channel(n_mt, n_fap, gamma_linear, rng)
    return ChannelState(h_ul, h_dl, w_ul, w_dl)


@dataclass(frozen=True)
class SweepRow:
    config_id: str
    gamma_db: float
    n_mt: int
    n_fap: int
    l_max: float
    n_solved: int
    n_infeasible: int
    saving_pct: float
    latency_s: float
    offloaded_pct: float
    r_ul_se: float
    r_ul_max_se: float
    decision: str = ""
    l_required_s: float = math.nan


def _saving_pct(energy_total: float, local_energy: float) -> float:
    if local_energy == 0:
        return 0.0
    return 100.0 * (1.0 - energy_total / local_energy)


def _gain_point(args) -> SweepRow:
    cfg, a_idx, g_idx = args
    n_mt, n_fap = cfg.antennas[a_idx]
    gamma_db = cfg.gamma_db_range[g_idx]
    gamma = db_to_linear(gamma_db)
    prof, pm = cfg.profile, cfg.power_model
    local_energy = prof.eps_p0 * prof.s_app

    sums = np.zeros(5)
    solved = infeasible = 0
    for c_idx in range(cfg.n_channels):
        ch = draw_channel_state(n_mt, n_fap, gamma, cfg.w_ul, cfg.w_dl, substream(cfg.seed, a_idx, g_idx, c_idx))
        try:
            sol = solve(prof, ch, pm, cfg.solver)
        except (InfeasibleProblem, NoChannelError):
            infeasible += 1
            continue
        violations = verify_solution(sol, prof, ch, pm)
        if violations:
            raise RuntimeError(f"solution failed constraint re-check at {n_mt}x{n_fap}, {gamma_db} dB: {violations}")
        solved += 1
        sums += (
            _saving_pct(sol.energy_total, local_energy),
            sol.latency,
            100.0 * sol.s_p1 / prof.s_app if prof.s_app else 0.0,
            sol.r_ul / cfg.w_ul,
            sol.r_ul_max / cfg.w_ul,
        )
    means = sums / solved if solved else np.full(5, math.nan)
    return SweepRow(
        config_id=f"{n_mt}x{n_fap}",
        gamma_db=gamma_db,
        n_mt=n_mt,
        n_fap=n_fap,
        l_max=prof.l_max,
        n_solved=solved,
        n_infeasible=infeasible,
        saving_pct=float(means[0]),
        latency_s=float(means[1]),
        offloaded_pct=float(means[2]),
        r_ul_se=float(means[3]),
        r_ul_max_se=float(means[4]),
    )


def run_gain_sweep(cfg: ScenarioConfig, workers: int = 1) -> list[SweepRow]:
    """Average the optimal allocation over ``cfg.n_channels`` draws per (antennas, gamma) point.

    Infeasible draws are counted in ``n_infeasible`` and left out of the means.
    """
    points = [(cfg, a, g) for a in range(len(cfg.antennas)) for g in range(len(cfg.gamma_db_range))]
    if workers <= 1:
        return [_gain_point(p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_gain_point, points))


def run_latency_sweep(cfg: ScenarioConfig) -> list[SweepRow]:
    """Sweep the latency budget over one fixed channel per antenna configuration.

    The channel is drawn at ``cfg.gamma_db_range[0]`` from substream
    ``(seed, antenna_idx, 0, 0)``. Budgets below the minimum affordable
    latency produce rows with decision ``Infeasible`` and ``l_required_s`` set.
    """
    gamma_db = cfg.gamma_db_range[0]
    grid = cfg.l_max_grid or tuple(0.25 * k for k in range(1, 41))
    rows = []
    for a_idx, (n_mt, n_fap) in enumerate(cfg.antennas):
        ch = draw_channel_state(
            n_mt, n_fap, db_to_linear(gamma_db), cfg.w_ul, cfg.w_dl, substream(cfg.seed, a_idx, 0, 0)
        )
        local_energy = cfg.profile.eps_p0 * cfg.profile.s_app
        for l_max in grid:
            prof = replace(cfg.profile, l_max=l_max)
            base = dict(config_id=f"{n_mt}x{n_fap}", gamma_db=gamma_db, n_mt=n_mt, n_fap=n_fap, l_max=l_max)
            try:
                sol = solve(prof, ch, cfg.power_model, cfg.solver)
            except InfeasibleProblem as exc:
                rows.append(SweepRow(
                    **base, n_solved=0, n_infeasible=1, saving_pct=math.nan, latency_s=math.nan,
                    offloaded_pct=math.nan, r_ul_se=math.nan, r_ul_max_se=math.nan,
                    decision="Infeasible", l_required_s=exc.l_required,
                ))
                continue
            violations = verify_solution(sol, prof, ch, cfg.power_model)
            if violations:
                raise RuntimeError(f"solution failed constraint re-check at l_max={l_max}: {violations}")
            rows.append(SweepRow(
                **base, n_solved=1, n_infeasible=0,
                saving_pct=_saving_pct(sol.energy_total, local_energy),
                latency_s=sol.latency,
                offloaded_pct=100.0 * sol.s_p1 / prof.s_app if prof.s_app else 0.0,
                r_ul_se=sol.r_ul / cfg.w_ul,
                r_ul_max_se=sol.r_ul_max / cfg.w_ul,
                decision=sol.decision.value,
            ))
    return rows


def run_sweep(cfg: ScenarioConfig, workers: int = 1) -> list[SweepRow]:
    if cfg.sweep is SweepKind.LATENCY:
        return run_latency_sweep(cfg)
    return run_gain_sweep(cfg, workers=workers)


def emit_energy_curve(
    ch: ChannelState, pm: PowerModelParams, s_ul: Sequence[float], t_grid: Sequence[float]
) -> list[dict]:
    """Rows of ``(s_ul, t_ul, e_ul)`` for every block size and UL time."""
    rows = []
    for s in s_ul:
        for t in t_grid:
            point = e_ul(t, s, ch, pm)
            rows.append({"s_ul_bits": s, "t_ul_s": t, "e_ul_j": point.energy, "k_active": point.waterfill.k_active})
    return rows


def emit_rate_curve(ch: ChannelState, pm: PowerModelParams, r_grid_se: Sequence[float]) -> list[dict]:
    """Rows of ``(r/W, ebar_ul, K)`` over a grid of spectral efficiencies (b/s/Hz)."""
    rows = []
    for se in r_grid_se:
        r = se * ch.w_ul
        wf = min_power_waterfill(ch.eigs_ul, r, ch.w_ul)
        ebar = (pm.k_tx1 + pm.k_tx2 * wf.total_power) / r if r > 0 else math.nan
        rows.append({"r_ul_se": se, "e_ul_norm_j_per_bit": ebar, "k_active": wf.k_active})
    return rows


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _as_records(rows: Iterable) -> tuple[list[str], list[dict]]:
    rows = list(rows)
    if rows and isinstance(rows[0], SweepRow):
        header = [f.name for f in fields(SweepRow)]
        return header, [{k: getattr(r, k) for k in header} for r in rows]
    header = list(rows[0]) if rows else []
    return header, rows


def format_csv(rows: Iterable) -> str:
    header, records = _as_records(rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rec in records:
        writer.writerow([_fmt(rec[k]) for k in header])
    return buf.getvalue()


def _json_value(value):
    if isinstance(value, float):
        if not math.isfinite(value):
            return None if math.isnan(value) else str(value)
        return float(format(value, ".12g"))
    return value


def format_jsonl(rows: Iterable) -> str:
    header, records = _as_records(rows)
    lines = [json.dumps({k: _json_value(rec[k]) for k in header}) for rec in records]
    return "".join(line + "\n" for line in lines)


def curve_rows(kind: str, cfg: ScenarioConfig, ch: ChannelState | None = None) -> list[dict]:
    """Table behind the ``curve`` CLI subcommand."""
    ch = ch or cfg.single_channel()
    if kind == "energy-time":
        return emit_energy_curve(ch, cfg.power_model, cfg.s_ul_bits, cfg.t_grid)
    rows = emit_rate_curve(ch, cfg.power_model, cfg.r_grid_se)
    if kind == "energy-rate":
        return [{"r_ul_se": r["r_ul_se"], "e_ul_norm_j_per_bit": r["e_ul_norm_j_per_bit"]} for r in rows]
    if kind == "modes":
        return [{"r_ul_se": r["r_ul_se"], "k_active": r["k_active"]} for r in rows]
    raise ValueError(f"unknown curve kind {kind!r}")


def problem_for(cfg: ScenarioConfig, ch: ChannelState | None = None) -> OffloadProblem:
    return OffloadProblem.build(cfg.profile, ch or cfg.single_channel(), cfg.power_model)
