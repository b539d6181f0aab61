"""Independent oracles and random instance generators shared by the tests."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from femtoffload import ApplicationProfile, ChannelState, PowerModelParams
from femtoffload.cases import unconstrained_decision
from femtoffload.optimizer import min_affordable_latency, r_dl_cap, r_ul_cap
from femtoffload.sim import gen_channel

# Lines printed by the terminal-summary hook in conftest.py.
ACCEPTANCE_RESULTS: list[str] = []


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-15, sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Works on the real symmetric embedding ``[[Re, -Im], [Im, Re]]``, whose
    spectrum is that of ``a`` with every eigenvalue doubled.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    m = np.block([[a.real, -a.imag], [a.imag, a.real]]).astype(float)
    size = 2 * n
    for _ in range(sweeps):
        off = math.sqrt(sum(m[i, j] ** 2 for i in range(size) for j in range(size) if i != j))
        if off <= tol * max(1.0, np.abs(np.diag(m)).max()):
            break
        for p in range(size - 1):
            for q in range(p + 1, size):
                if m[p, q] == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * m[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(size)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                m = rot.T @ m @ rot
    ev = np.sort(np.diag(m))[::-1]
    return ev[::2]


def grid_min_power(eigs, rate: float, w: float, n: int = 200, refine: int = 1) -> float:
    """Exhaustive-grid minimum of total power meeting ``rate`` over the eigenmodes.

    All modes except the strongest get an ``n``-point power grid on
    ``[0, (2^(rate/w) - 1)/lambda_i]``; the strongest mode tops up the rate in
    closed form. Each refinement level re-grids ``n`` points around the
    previous optimum.
    """
    lam = np.sort(np.asarray(eigs, dtype=float))
    target = rate / w
    his = [(2.0**target - 1.0) / x for x in lam[:-1]]
    los = [0.0] * len(his)
    best = math.inf
    for _ in range(refine + 1):
        axes = [np.linspace(lo, hi, n) for lo, hi in zip(los, his)]
        mesh = np.meshgrid(*axes, indexing="ij")
        used = sum(np.log2(1.0 + p * x) for p, x in zip(mesh, lam[:-1]))
        top_up = (np.exp2(np.maximum(target - used, 0.0)) - 1.0) / lam[-1]
        total = sum(mesh) + top_up
        idx = np.unravel_index(np.argmin(total), total.shape)
        best = min(best, float(total[idx]))
        steps = [(hi - lo) / (n - 1) for lo, hi in zip(los, his)]
        centers = [ax[i] for ax, i in zip(axes, idx)]
        los = [max(0.0, c - 2 * s) for c, s in zip(centers, steps)]
        his = [c + 2 * s for c, s in zip(centers, steps)]
    return best


def siso_energy(t: float, s: float, gamma: float, w: float, k1: float, k2: float) -> float:
    """Closed-form single-antenna UL energy; ``2^x - 1`` evaluated as ``expm1(x ln 2)``."""
    return k1 * t + k2 * t * math.expm1(s / (w * t) * math.log(2.0)) / gamma


def log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_channel(
    rng: np.random.Generator,
    shapes=((1, 1), (2, 2), (4, 2), (2, 4), (4, 4), (4, 1)),
    gamma_db=(0.0, 40.0),
    w: float = 1e7,
) -> ChannelState:
    n_mt, n_fap = shapes[rng.integers(len(shapes))]
    gamma = 10.0 ** (rng.uniform(*gamma_db) / 10.0)
    h_ul = gen_channel(n_fap, n_mt, gamma, rng)
    h_dl = gen_channel(n_mt, n_fap, gamma, rng)
    return ChannelState(h_ul, h_dl, w, w)


def random_power_model(rng: np.random.Generator, k_tx1_zero: bool = False) -> PowerModelParams:
    return PowerModelParams(
        k_tx1=0.0 if k_tx1_zero else rng.uniform(0.05, 1.0),
        k_tx2=rng.uniform(5.0, 30.0),
        k_rx1=rng.uniform(0.0, 1.0),
        k_rx2=log_uniform(rng, 1e-10, 1e-8),
        p_tx_mt_max=rng.uniform(0.05, 0.5),
        p_tx_fap_max=rng.uniform(0.05, 1.0),
        se_cap=5.5,
    )


def random_instance(rng: np.random.Generator, regime: str = "mixed"):
    """Random ``(profile, channel, power model)`` with a feasible latency budget.

    ``eps_p0`` is drawn around the unconstrained remote cost per bit and
    ``l_max`` just above the minimum affordable latency, so every decision
    (including partial splits) shows up. ``regime="loose"`` drops the budget.
    """
    ch = random_channel(rng)
    pm = random_power_model(rng, k_tx1_zero=rng.random() < 0.15)
    tau_p0 = log_uniform(rng, 2e-8, 5e-7)
    prof = ApplicationProfile(
        s_app=log_uniform(rng, 1e6, 1e8),
        beta_ul=rng.uniform(1.0, 2.0),
        beta_dl=rng.uniform(0.0, 0.5) if rng.random() < 0.8 else 0.0,
        tau_p0=tau_p0,
        tau_p1=tau_p0 * rng.uniform(0.1, 1.0),
        eps_p0=1.0,
        l_max=math.inf,
    )
    _, threshold = unconstrained_decision(prof, ch, pm)
    eps = threshold * log_uniform(rng, 0.3, 3.0)
    l_o = min_affordable_latency(prof, r_ul_cap(ch, pm), r_dl_cap(ch, pm)).l_o
    l_max = math.inf if regime == "loose" else l_o * rng.uniform(1.0, 3.0)
    return replace(prof, eps_p0=eps, l_max=l_max), ch, pm


def record(criterion: int, ok: bool, detail: str):
    """Print and store one acceptance line, then fail the test if needed."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_RESULTS.append(line)
    assert ok, line
