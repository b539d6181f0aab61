"""MIMO channel representation and eigenmode water-filling.

Channel matrices are normalized by the receiver noise, so the eigenvalues of
the Gram matrix ``H^H H`` are linear SNR gains per watt of radiated power.
All water-filling routines work on the sorted eigenvalue spectrum only; the
eigenvectors are needed for precoding but not for energy accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoChannelError, ValidationError

LN2 = math.log(2.0)

# Modes with lambda_i <= lambda_1 * RANK_RTOL are treated as numerically absent.
RANK_RTOL = 1e-12


def _as_matrix(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.size == 0:
        raise ValidationError(f"channel must be a non-empty 2-D matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValidationError("channel matrix has non-finite entries")
    return h


def gram_eigenvalues(h) -> tuple[float, ...]:
    """Eigenvalues of ``h^H h`` in non-increasing order.

    The Hermitian Gram matrix is decomposed (never ``h`` itself) so the
    result is real; round-off negatives are clipped to zero.
    """
    h = _as_matrix(h)
    gram = h.conj().T @ h
    ev = np.linalg.eigvalsh(gram)
    ev = np.clip(ev, 0.0, None)[::-1]
    return tuple(float(x) for x in ev)


def eigenmodes(h) -> tuple[tuple[float, ...], np.ndarray]:
    """Eigenvalues and the unitary basis ``U`` of ``h^H h = U diag(eigs) U^H``.

    Diagnostic only: columns of ``U`` are the transmit eigenvectors, ordered
    like the returned eigenvalues.
    """
    h = _as_matrix(h)
    ev, vecs = np.linalg.eigh(h.conj().T @ h)
    order = np.argsort(ev)[::-1]
    ev = np.clip(ev[order], 0.0, None)
    return tuple(float(x) for x in ev), vecs[:, order]


def active_eigenvalues(eigs: Sequence[float]) -> list[float]:
    """Sorted eigenvalues above the effective-rank threshold."""
    vals = sorted((float(x) for x in eigs), reverse=True)
    if not vals or not vals[0] > 0.0:
        return []
    floor = vals[0] * RANK_RTOL
    return [x for x in vals if x > floor]


def parse_complex_matrix(rows) -> np.ndarray:
    """Build a complex matrix from row-major nested ``[re, im]`` pairs."""
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"cannot parse complex matrix: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError("complex matrix must be rows of [re, im] pairs")
    return _as_matrix(arr[..., 0] + 1j * arr[..., 1])


def complex_matrix_to_json(h) -> list:
    h = np.asarray(h, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in h]


@dataclass(frozen=True, eq=False)
class ChannelState:
    """UL/DL channel pair with cached eigenvalue spectra.

    ``h_ul`` is ``n_fap x n_mt`` (MT transmits), ``h_dl`` is ``n_mt x n_fap``.
    Bandwidths are in Hz.
    """

    h_ul: np.ndarray
    h_dl: np.ndarray
    w_ul: float
    w_dl: float
    eigs_ul: tuple[float, ...] = field(init=False)
    eigs_dl: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        h_ul = _as_matrix(self.h_ul)
        h_dl = _as_matrix(self.h_dl)
        if h_dl.shape != h_ul.shape[::-1]:
            raise ValidationError(
                f"h_dl shape {h_dl.shape} must be the transpose shape of h_ul {h_ul.shape}"
            )
        for name in ("w_ul", "w_dl"):
            w = getattr(self, name)
            if not (math.isfinite(w) and w > 0):
                raise ValidationError(f"{name} must be a positive finite bandwidth, got {w}")
        h_ul.setflags(write=False)
        h_dl.setflags(write=False)
        object.__setattr__(self, "h_ul", h_ul)
        object.__setattr__(self, "h_dl", h_dl)
        object.__setattr__(self, "eigs_ul", gram_eigenvalues(h_ul))
        object.__setattr__(self, "eigs_dl", gram_eigenvalues(h_dl))

    @property
    def n_mt(self) -> int:
        return self.h_ul.shape[1]

    @property
    def n_fap(self) -> int:
        return self.h_ul.shape[0]

    @property
    def max_modes(self) -> int:
        """Largest possible number of spatial eigenmodes, ``min(n_mt, n_fap)``."""
        return min(self.h_ul.shape)

    @classmethod
    def siso(cls, gain_ul: float, gain_dl: float | None = None, w_ul: float = 1.0, w_dl: float | None = None):
        """Single-antenna channel with power gains ``|h|^2``."""
        gain_dl = gain_ul if gain_dl is None else gain_dl
        w_dl = w_ul if w_dl is None else w_dl
        return cls(
            np.array([[math.sqrt(gain_ul)]], dtype=complex),
            np.array([[math.sqrt(gain_dl)]], dtype=complex),
            w_ul,
            w_dl,
        )


@dataclass(frozen=True)
class WaterFillResult:
    k_active: int
    water_level: float
    mode_powers: tuple[float, ...]
    total_power: float
    achieved_rate: float


def _check_bandwidth(w):
    if not (math.isfinite(w) and w > 0):
        raise ValidationError(f"bandwidth must be positive and finite, got {w}")


def min_power_waterfill(eigs: Sequence[float], rate: float, w: float) -> WaterFillResult:
    """Minimum total power that supports ``rate`` bit/s over the eigenmodes.

    Parameters
    ----------
    eigs : sequence of float
        Gram eigenvalues (any order; they are sorted internally).
    rate : float
        Target rate in bit/s.
    w : float
        Bandwidth in Hz.

    Returns
    -------
    WaterFillResult
        Active-mode count ``K``, water level ``c`` and the per-mode powers
        ``c - 1/lambda_i`` for the ``K`` strongest modes.

    Notes
    -----
    ``K`` is the first ``k`` for which ``c_k > 1/lambda_k`` and
    ``c_k <= 1/lambda_{k+1}``, where ``c_k = 2^(rate/(w k)) / (prod lambda)^(1/k)``.
    At exact equality with ``1/lambda_{k+1}`` the smaller ``k`` wins. The
    test is done in the log domain and mode powers are formed with
    ``expm1`` so small rates keep full relative precision.
    """
    _check_bandwidth(w)
    if not (math.isfinite(rate) and rate >= 0):
        raise ValidationError(f"rate must be a finite non-negative number, got {rate}")
    lam = active_eigenvalues(eigs)
    if rate == 0:
        level = 1.0 / lam[0] if lam else 0.0
        return WaterFillResult(0, level, (), 0.0, 0.0)
    if not lam:
        raise NoChannelError("positive rate requested over a channel with no usable eigenmode")

    logs = [math.log(x) for x in lam]
    rank = len(lam)
    spectral = rate * LN2 / w

    k_active = 0
    running = 0.0
    last_above = 1
    for k in range(1, rank + 1):
        running += logs[k - 1]
        log_c = spectral / k - running / k
        above = log_c > -logs[k - 1]
        if above:
            last_above = k
        if above and (k == rank or log_c <= -logs[k]):
            k_active = k
            break
    if k_active == 0:
        # Both inequalities missed by round-off at a mode boundary.
        k_active = last_above

    mean_log = math.fsum(logs[:k_active]) / k_active
    per_mode = spectral / k_active
    powers = tuple(
        math.expm1(per_mode + (logs[i] - mean_log)) / lam[i] for i in range(k_active)
    )
    total = math.fsum(powers)
    achieved = w * math.fsum(math.log1p(p * l) for p, l in zip(powers, lam)) / LN2
    level = math.exp(per_mode - mean_log)
    return WaterFillResult(k_active, level, powers, total, achieved)


def max_rate_waterfill(eigs: Sequence[float], p_total: float, w: float, cap: float = math.inf) -> float:
    """Capacity (bit/s) of the eigenmodes with total power ``p_total``, clipped to ``cap``."""
    _check_bandwidth(w)
    if not (p_total >= 0 and not math.isnan(p_total)):
        raise ValidationError(f"p_total must be non-negative, got {p_total}")
    if not cap > 0:
        raise ValidationError(f"cap must be positive, got {cap}")
    lam = active_eigenvalues(eigs)
    if p_total == 0 or not lam:
        return 0.0
    if math.isinf(p_total):
        return cap
    inv = [1.0 / x for x in lam]
    rate = 0.0
    for k in range(len(lam), 0, -1):
        level = (p_total + math.fsum(inv[:k])) / k
        if level > inv[k - 1]:
            rate = w * math.fsum(math.log2(level * x) for x in lam[:k])
            break
    return min(cap, rate)
