"""MT energy models for UL transmission and DL reception.

UL consumption is ``k_tx1 + k_tx2 * p_radiated`` watts and DL consumption
is ``k_rx1 + k_rx2 * r_dl`` watts. Units: s, bit, W, J, Hz throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import LN2, ChannelState, WaterFillResult, active_eigenvalues, min_power_waterfill
from .errors import NoChannelError, ValidationError


@dataclass(frozen=True)
class PowerModelParams:
    """Consumption constants and radiated-power limits.

    Attributes
    ----------
    k_tx1 : float
        Baseline transmit-chain consumption, W.
    k_tx2 : float
        Consumed watts per radiated watt (dimensionless).
    k_rx1 : float
        Baseline receive-chain consumption, W.
    k_rx2 : float
        Decoding slope, J/bit (W per bit/s).
    p_tx_mt_max, p_tx_fap_max : float
        Radiated-power caps of the MT and the FAP, W.
    se_cap : float
        Spectral-efficiency cap per eigenmode, bit/s/Hz.
    """

    k_tx1: float
    k_tx2: float
    k_rx1: float
    k_rx2: float
    p_tx_mt_max: float
    p_tx_fap_max: float
    se_cap: float = math.inf

    def __post_init__(self):
        for name in ("k_tx1", "k_tx2", "k_rx1", "k_rx2", "p_tx_mt_max", "p_tx_fap_max", "se_cap"):
            value = getattr(self, name)
            if math.isnan(value) or value < 0:
                raise ValidationError(f"{name} must be >= 0, got {value}")
        if not self.k_tx2 > 0:
            raise ValidationError("k_tx2 must be strictly positive")
        if not self.se_cap > 0:
            raise ValidationError("se_cap must be strictly positive")


@dataclass(frozen=True)
class UplinkEnergyPoint:
    t_ul: float
    s_ul: float
    energy: float
    waterfill: WaterFillResult


def e_ul(t_ul: float, s_ul: float, ch: ChannelState, pm: PowerModelParams) -> UplinkEnergyPoint:
    """Minimum MT energy to push ``s_ul`` bits through the UL in ``t_ul`` seconds."""
    if not (t_ul > 0 and math.isfinite(t_ul)):
        raise ValidationError(f"t_ul must be positive and finite, got {t_ul}")
    if not (s_ul >= 0 and math.isfinite(s_ul)):
        raise ValidationError(f"s_ul must be non-negative and finite, got {s_ul}")
    wf = min_power_waterfill(ch.eigs_ul, s_ul / t_ul, ch.w_ul)
    energy = pm.k_tx1 * t_ul + pm.k_tx2 * t_ul * wf.total_power
    return UplinkEnergyPoint(t_ul, s_ul, energy, wf)


def _check_rate(r):
    if not (r > 0 and math.isfinite(r)):
        raise ValidationError(f"rate must be positive and finite, got {r}")


def e_ul_norm(r_ul: float, ch: ChannelState, pm: PowerModelParams) -> float:
    """UL energy per bit (J/bit) at rate ``r_ul``; depends on the rate only."""
    _check_rate(r_ul)
    return e_ul(1.0 / r_ul, 1.0, ch, pm).energy


def e_ul_norm_limit_zero(ch: ChannelState, pm: PowerModelParams) -> float:
    """Right limit of the UL energy per bit as the rate goes to zero.

    Infinite when ``k_tx1 > 0``; otherwise ``k_tx2 * ln2 / (W * lambda_1)``,
    the slope of the single-mode power curve at the origin.
    """
    lam = active_eigenvalues(ch.eigs_ul)
    if not lam:
        return math.inf
    if pm.k_tx1 > 0:
        return math.inf
    return pm.k_tx2 * LN2 / (ch.w_ul * lam[0])


def e_ul_norm_deriv(r_ul: float, ch: ChannelState, pm: PowerModelParams) -> float:
    """Derivative of the UL energy per bit with respect to the rate, J*s/bit^2.

    The water-filled power ``P(r)`` has slope ``c(r) ln2 / W``, so
    ``d/dr [(k1 + k2 P(r)) / r] = (k2 c ln2 r / W - k1 - k2 P) / r^2``.
    """
    _check_rate(r_ul)
    wf = min_power_waterfill(ch.eigs_ul, r_ul, ch.w_ul)
    numer = pm.k_tx2 * wf.water_level * LN2 * r_ul / ch.w_ul - pm.k_tx1 - pm.k_tx2 * wf.total_power
    return numer / (r_ul * r_ul)


def rate_cap_ul(ch: ChannelState, pm: PowerModelParams) -> float:
    """Practical UL rate ceiling ``se_cap * min(n_mt, n_fap) * W_ul``."""
    return pm.se_cap * ch.max_modes * ch.w_ul


def min_energy_rate(ch: ChannelState, pm: PowerModelParams, rtol: float = 1e-9) -> float:
    """UL rate (bit/s) minimizing the energy per bit.

    Returns 0 when the per-bit energy is non-decreasing (``k_tx1 = 0``) and
    the practical rate cap when it keeps decreasing up to that cap.
    Otherwise the unique root of the derivative is bracketed by doubling and
    refined by bisection to relative width ``rtol``.
    """
    if not active_eigenvalues(ch.eigs_ul):
        raise NoChannelError("UL channel has no usable eigenmode")
    if pm.k_tx1 == 0:
        return 0.0

    def slope(r):
        return e_ul_norm_deriv(r, ch, pm)

    # Beyond ~1000 b/s/Hz per mode 2**x overflows; the root is far below that.
    cap = min(rate_cap_ul(ch, pm), 1000.0 * ch.max_modes * ch.w_ul)
    hi = min(ch.w_ul, cap)
    while slope(hi) < 0:
        if hi >= cap:
            return cap
        hi = min(2.0 * hi, cap)
    lo = 0.5 * hi
    while slope(lo) >= 0:
        hi, lo = lo, 0.5 * lo
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def e_dl(t_dl: float, s_dl: float, pm: PowerModelParams) -> float:
    if t_dl < 0 or s_dl < 0:
        raise ValidationError("t_dl and s_dl must be non-negative")
    return pm.k_rx1 * t_dl + pm.k_rx2 * s_dl


def e_dl_norm(r_dl: float, pm: PowerModelParams) -> float:
    """DL energy per received bit, ``k_rx1 / r_dl + k_rx2``."""
    _check_rate(r_dl)
    return pm.k_rx1 / r_dl + pm.k_rx2
