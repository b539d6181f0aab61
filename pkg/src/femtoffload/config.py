"""JSON scenario configuration.

Units are bits, seconds, watts, joules and hertz. A few keys accept an
alternative unit, converted once here:

* ``s_app_mbytes``: 1 MByte = 10**6 bytes = 8 * 10**6 bits.
* ``k_rx2_mw_per_mbps`` / ``k_rx2_w_per_mbps``: decode slope per Mbit/s.
* ``gamma_db``: mean per-entry channel power gain, ``10**(dB/10)``.

Missing keys fall back to the reference scenario below. ``seed`` falls back
to the ``FEMTOFFLOAD_SEED`` environment variable, then to ``DEFAULT_SEED``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .channel import ChannelState, parse_complex_matrix
from .energy import PowerModelParams
from .errors import ValidationError
from .optimizer import ApplicationProfile, SolverConfig

SEED_ENV_VAR = "FEMTOFFLOAD_SEED"
DEFAULT_SEED = 20130401
DEFAULT_N_CHANNELS = 200

BITS_PER_MBYTE = 8e6

# Decode slope: 2.86 mW per Mbit/s. See README ("Reference parameters").
REFERENCE_K_RX2 = 2.86e-3 / 1e6

REFERENCE_POWER_MODEL = PowerModelParams(
    k_tx1=0.4,
    k_tx2=18.0,
    k_rx1=0.4,
    k_rx2=REFERENCE_K_RX2,
    p_tx_mt_max=0.1,
    p_tx_fap_max=0.1,
    se_cap=5.5,
)

REFERENCE_PROFILE = ApplicationProfile(
    s_app=5 * BITS_PER_MBYTE,
    beta_ul=1.0,
    beta_dl=0.2,
    tau_p0=1e-7,
    tau_p1=0.5e-7,
    eps_p0=8.6e-8,
    l_max=4.0,
)

REFERENCE_BANDWIDTH = 10e6
REFERENCE_ANTENNAS = ((4, 4), (4, 2), (4, 1), (1, 1))
REFERENCE_GAMMA_DB = tuple(float(g) for g in range(-20, 65, 5))


class SweepKind(str, Enum):
    GAIN = "gain"
    LATENCY = "latency"
    ENERGY_CURVE = "energy-curve"
    RATE_CURVE = "rate-curve"


_SWEEP_ALIASES = {
    "gainsweep": SweepKind.GAIN,
    "latencysweep": SweepKind.LATENCY,
    "energycurve": SweepKind.ENERGY_CURVE,
    "ratecurve": SweepKind.RATE_CURVE,
}


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ChannelSpec:
    """Either explicit matrices or a request to draw one Rayleigh realization."""

    h_ul: object = None
    h_dl: object = None
    n_mt: int = 4
    n_fap: int = 4
    gamma_db: float = 25.0

    def __post_init__(self):
        if self.n_mt < 1 or self.n_fap < 1:
            raise ValidationError(f"antenna counts must be >= 1, got {self.n_mt}x{self.n_fap}")
        if not math.isfinite(self.gamma_db):
            raise ValidationError("channel gamma_db must be finite")

    @property
    def explicit(self) -> bool:
        return self.h_ul is not None


@dataclass(frozen=True)
class ScenarioConfig:
    antennas: tuple[tuple[int, int], ...] = REFERENCE_ANTENNAS
    gamma_db_range: tuple[float, ...] = REFERENCE_GAMMA_DB
    n_channels: int = DEFAULT_N_CHANNELS
    seed: int = DEFAULT_SEED
    profile: ApplicationProfile = REFERENCE_PROFILE
    power_model: PowerModelParams = REFERENCE_POWER_MODEL
    sweep: SweepKind = SweepKind.GAIN
    w_ul: float = REFERENCE_BANDWIDTH
    w_dl: float = REFERENCE_BANDWIDTH
    solver: SolverConfig = field(default_factory=SolverConfig)
    l_max_grid: tuple[float, ...] = ()
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    s_ul_bits: tuple[float, ...] = (0.75 * BITS_PER_MBYTE, 1.5 * BITS_PER_MBYTE)
    t_grid: tuple[float, ...] = tuple(0.05 * k for k in range(1, 101))
    r_grid_se: tuple[float, ...] = tuple(0.05 * k for k in range(1, 201))

    def __post_init__(self):
        if self.n_channels < 1:
            raise ValidationError("n_channels must be >= 1")
        if not self.antennas:
            raise ValidationError("antennas must not be empty")
        for n_mt, n_fap in self.antennas:
            if n_mt < 1 or n_fap < 1:
                raise ValidationError(f"antenna counts must be >= 1, got {n_mt}x{n_fap}")
        if not self.gamma_db_range:
            raise ValidationError("gamma_db must not be empty")
        if not all(math.isfinite(g) for g in self.gamma_db_range):
            raise ValidationError("gamma_db values must be finite")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if any(not (l >= 0) for l in self.l_max_grid):
            raise ValidationError("l_max_grid_s values must be >= 0")

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def single_channel(self) -> ChannelState:
        """The channel used by ``solve``/``cases``/``curve``: explicit, or drawn from the seed."""
        from .sim import draw_channel_state, substream

        spec = self.channel
        if spec.explicit:
            return ChannelState(spec.h_ul, spec.h_dl, self.w_ul, self.w_dl)
        rng = substream(self.seed, 0, 0, 0)
        return draw_channel_state(spec.n_mt, spec.n_fap, db_to_linear(spec.gamma_db), self.w_ul, self.w_dl, rng)


_TOP_KEYS = {
    "seed", "sweep", "antennas", "gamma_db", "n_channels", "bandwidth_ul_hz",
    "bandwidth_dl_hz", "power_model", "profile", "solver", "l_max_grid_s",
    "channel", "curve", "description",
}


def _num(section: dict, key: str, default):
    if key not in section:
        return default
    value = section[key]
    if value is None:
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key} must be a number, got {value!r}")
    return float(value)


def _int(value, key) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"{key} must be an integer, got {value!r}")
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{key} must be an integer, got {value!r}") from None
    if out != value:
        raise ValidationError(f"{key} must be an integer, got {value!r}")
    return out


def _check_keys(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ValidationError(f"{where} must be a JSON object")
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown keys in {where}: {sorted(unknown)}")


def parse_power_model(data: dict) -> PowerModelParams:
    _check_keys(data, {
        "k_tx1_w", "k_tx2", "k_rx1_w", "k_rx2_j_per_bit", "k_rx2_w_per_mbps",
        "k_rx2_mw_per_mbps", "p_tx_mt_max_w", "p_tx_fap_max_w", "se_cap_bps_per_hz",
    }, "power_model")
    ref = REFERENCE_POWER_MODEL
    slope_keys = [k for k in ("k_rx2_j_per_bit", "k_rx2_w_per_mbps", "k_rx2_mw_per_mbps") if k in data]
    if len(slope_keys) > 1:
        raise ValidationError(f"give k_rx2 in one unit only, got {slope_keys}")
    k_rx2 = ref.k_rx2
    if "k_rx2_j_per_bit" in data:
        k_rx2 = _num(data, "k_rx2_j_per_bit", k_rx2)
    elif "k_rx2_w_per_mbps" in data:
        k_rx2 = _num(data, "k_rx2_w_per_mbps", 0.0) * 1e-6
    elif "k_rx2_mw_per_mbps" in data:
        k_rx2 = _num(data, "k_rx2_mw_per_mbps", 0.0) * 1e-9
    return PowerModelParams(
        k_tx1=_num(data, "k_tx1_w", ref.k_tx1),
        k_tx2=_num(data, "k_tx2", ref.k_tx2),
        k_rx1=_num(data, "k_rx1_w", ref.k_rx1),
        k_rx2=k_rx2,
        p_tx_mt_max=_num(data, "p_tx_mt_max_w", ref.p_tx_mt_max),
        p_tx_fap_max=_num(data, "p_tx_fap_max_w", ref.p_tx_fap_max),
        se_cap=_num(data, "se_cap_bps_per_hz", ref.se_cap),
    )


def parse_profile(data: dict) -> ApplicationProfile:
    _check_keys(data, {
        "s_app_bits", "s_app_mbytes", "beta_ul", "beta_dl", "tau_p0_s_per_bit",
        "tau_p1_s_per_bit", "eps_p0_j_per_bit", "l_max_s",
    }, "profile")
    ref = REFERENCE_PROFILE
    if "s_app_bits" in data and "s_app_mbytes" in data:
        raise ValidationError("give s_app_bits or s_app_mbytes, not both")
    s_app = _num(data, "s_app_bits", ref.s_app)
    if "s_app_mbytes" in data:
        s_app = _num(data, "s_app_mbytes", 0.0) * BITS_PER_MBYTE
    tau_p0 = _num(data, "tau_p0_s_per_bit", ref.tau_p0)
    return ApplicationProfile(
        s_app=s_app,
        beta_ul=_num(data, "beta_ul", ref.beta_ul),
        beta_dl=_num(data, "beta_dl", ref.beta_dl),
        tau_p0=tau_p0,
        tau_p1=_num(data, "tau_p1_s_per_bit", tau_p0 / 2),
        eps_p0=_num(data, "eps_p0_j_per_bit", ref.eps_p0),
        l_max=_num(data, "l_max_s", ref.l_max),
    )


def _parse_channel(data: dict) -> ChannelSpec:
    _check_keys(data, {"h_ul", "h_dl", "n_mt", "n_fap", "gamma_db"}, "channel")
    if ("h_ul" in data) != ("h_dl" in data):
        raise ValidationError("channel needs both h_ul and h_dl, or neither")
    if "h_ul" in data:
        return ChannelSpec(h_ul=parse_complex_matrix(data["h_ul"]), h_dl=parse_complex_matrix(data["h_dl"]))
    return ChannelSpec(
        n_mt=_int(data.get("n_mt", 4), "n_mt"),
        n_fap=_int(data.get("n_fap", 4), "n_fap"),
        gamma_db=_num(data, "gamma_db", 25.0),
    )


def _float_list(value, key) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ValidationError(f"{key} must be a list")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ValidationError(f"{key} must contain numbers") from None


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise ValidationError(f"{SEED_ENV_VAR}={raw!r} is not an integer") from None


def parse_config(data: dict) -> ScenarioConfig:
    _check_keys(data, _TOP_KEYS, "config")
    kwargs = {}
    kwargs["seed"] = _int(data["seed"], "seed") if "seed" in data else default_seed()
    if "sweep" in data:
        raw = str(data["sweep"])
        try:
            kwargs["sweep"] = SweepKind(raw)
        except ValueError:
            alias = _SWEEP_ALIASES.get(raw.lower().replace("-", "").replace("_", ""))
            if alias is None:
                raise ValidationError(f"unknown sweep kind {raw!r}") from None
            kwargs["sweep"] = alias
    if "antennas" in data:
        try:
            kwargs["antennas"] = tuple((int(a), int(b)) for a, b in data["antennas"])
        except (TypeError, ValueError):
            raise ValidationError("antennas must be a list of [n_mt, n_fap] pairs") from None
    if "gamma_db" in data:
        value = data["gamma_db"]
        kwargs["gamma_db_range"] = _float_list(value if isinstance(value, list) else [value], "gamma_db")
    if "n_channels" in data:
        kwargs["n_channels"] = _int(data["n_channels"], "n_channels")
    kwargs["w_ul"] = _num(data, "bandwidth_ul_hz", REFERENCE_BANDWIDTH)
    kwargs["w_dl"] = _num(data, "bandwidth_dl_hz", REFERENCE_BANDWIDTH)
    kwargs["power_model"] = parse_power_model(data.get("power_model", {}))
    kwargs["profile"] = parse_profile(data.get("profile", {}))
    if "solver" in data:
        solver = data["solver"]
        _check_keys(solver, {"epsilon", "max_iters"}, "solver")
        kwargs["solver"] = SolverConfig(
            epsilon=_num(solver, "epsilon", 1e-6),
            max_iters=_int(solver.get("max_iters", 200), "max_iters"),
        )
    if "l_max_grid_s" in data:
        kwargs["l_max_grid"] = _float_list(data["l_max_grid_s"], "l_max_grid_s")
    if "channel" in data:
        kwargs["channel"] = _parse_channel(data["channel"])
    if "curve" in data:
        curve = data["curve"]
        _check_keys(curve, {"s_ul_bits", "t_grid_s", "r_grid_se"}, "curve")
        if "s_ul_bits" in curve:
            kwargs["s_ul_bits"] = _float_list(curve["s_ul_bits"], "s_ul_bits")
        if "t_grid_s" in curve:
            kwargs["t_grid"] = _float_list(curve["t_grid_s"], "t_grid_s")
        if "r_grid_se" in curve:
            kwargs["r_grid_se"] = _float_list(curve["r_grid_se"], "r_grid_se")
    return ScenarioConfig(**kwargs)


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(data)
