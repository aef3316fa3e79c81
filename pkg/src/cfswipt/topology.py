"""System configuration, network geometry, large-scale fading, and AP mode assignment."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace

import numpy as np

SPEED_OF_LIGHT = 3.0e8

# Default operating point: -92 dBm noise, 1 W downlink, 0.2 W uplink pilots.
DEFAULT_NOISE_W = 10.0 ** (-12.2)
DEFAULT_DL_POWER_W = 1.0
DEFAULT_UL_POWER_W = 0.2


class ConfigurationError(ValueError):
    """A configuration value violates a declared invariant."""


@dataclass(frozen=True)
class SystemConfig:
    """All scalar parameters of the simulated network.

    Power-like quantities (`rho_u`, `rho_d`) are linear SNRs normalized by the
    noise power, so the additive noise in every signal model has unit variance.
    """

    M: int = 12                    # access points
    L: int = 8                     # antennas per AP
    K: int = 3                     # information users
    J: int = 5                     # energy users
    N_H: int = 4                   # RIS elements per row
    N_V: int = 4                   # RIS elements per column
    tau_c: int = 200               # symbols per coherence interval
    tau: int = 8                   # pilot length (symbols), default K + J
    rho_u: float = DEFAULT_UL_POWER_W / DEFAULT_NOISE_W    # normalized pilot SNR
    rho_d: float = DEFAULT_DL_POWER_W / DEFAULT_NOISE_W    # normalized downlink SNR
    noise_power: float = DEFAULT_NOISE_W                   # sigma_n^2 (W)
    eh_xi: float = 150.0           # harvester slope (1/W)
    eh_chi: float = 0.014          # harvester turning point (W)
    eh_phi: float = 0.024          # maximum harvested DC power (W)
    carrier_freq: float = 1.9e9    # Hz
    d_H: float = SPEED_OF_LIGHT / 1.9e9 / 4.0    # RIS element width (m), default lambda/4
    d_V: float = SPEED_OF_LIGHT / 1.9e9 / 4.0    # RIS element height (m)
    area_side: float = 1000.0      # serving area side (m)
    ap_height: float = 15.0        # m
    ris_height: float = 30.0       # m
    user_height: float = 1.65      # m
    shadow_sigma_db: float = 8.0   # log-normal shadowing std beyond d1
    e_fraction: float = 0.5        # fraction of APs operating in energy mode
    eu_disc_radius: float = 50.0   # EU cluster radius (m)
    eu_disc_offset: float = 20.0   # EU cluster center offset from the RIS ground point (m)
    ris_x_frac: float = 0.75       # RIS ground position, fraction of area_side
    ris_y_frac: float = 0.75
    ris_link_gain_db: float = 0.0  # extra gain applied to each RIS-side large-scale link
    pathloss_d0: float = 10.0      # inner three-slope breakpoint (m)
    pathloss_d1: float = 50.0      # outer three-slope breakpoint (m)
    symbol_duration: float = 1.0   # s, converts per-block energy into Joules

    @property
    def N(self) -> int:
        return self.N_H * self.N_V

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def nu(self) -> float:
        """Zero-input offset of the nonlinear harvester, 1 / (1 + exp(xi * chi))."""
        return 1.0 / (1.0 + math.exp(self.eh_xi * self.eh_chi))

    @property
    def dl_symbols(self) -> int:
        return self.tau_c - self.tau


_CONFIG_FIELDS = None  # populated lazily


def _config_fields():
    global _CONFIG_FIELDS
    if _CONFIG_FIELDS is None:
        _CONFIG_FIELDS = {f.name: f.type for f in fields(SystemConfig)}
    return _CONFIG_FIELDS


def build_config(overrides: dict | None = None) -> SystemConfig:
    """Build a validated SystemConfig from defaults plus overrides.

    Derived defaults are resolved after the overrides are applied: tau falls
    back to K + J, rho_u / rho_d to 0.2 W / 1 W over the configured noise
    power, and the RIS element size to a quarter wavelength.
    """
    overrides = dict(overrides or {})
    known = _config_fields()
    for key in overrides:
        if key not in known:
            raise ConfigurationError(f"unknown configuration key: {key!r}")

    values = {k: v for k, v in overrides.items()}
    base = {f.name: f.default for f in fields(SystemConfig)}
    base.update(values)

    if "tau" not in overrides:
        base["tau"] = int(base["K"]) + int(base["J"])
    noise = float(base["noise_power"])
    if noise <= 0:
        raise ConfigurationError("noise_power must be positive")
    if "rho_u" not in overrides:
        base["rho_u"] = DEFAULT_UL_POWER_W / noise
    if "rho_d" not in overrides:
        base["rho_d"] = DEFAULT_DL_POWER_W / noise
    lam = SPEED_OF_LIGHT / float(base["carrier_freq"])
    if "d_H" not in overrides:
        base["d_H"] = lam / 4.0
    if "d_V" not in overrides:
        base["d_V"] = lam / 4.0

    cfg = SystemConfig(**base)
    validate_config(cfg)
    return cfg


def validate_config(cfg: SystemConfig) -> None:
    """Raise ConfigurationError naming the first violated invariant."""
    checks = [
        (cfg.M >= 2, "M >= 2"),
        (cfg.L >= 1, "L >= 1"),
        (cfg.K >= 1, "K >= 1"),
        (cfg.J >= 1, "J >= 1"),
        (cfg.N_H >= 1 and cfg.N_V >= 1, "N_H, N_V >= 1"),
        (cfg.M * cfg.L > cfg.K + cfg.J, "M*L > K+J"),
        (cfg.tau >= cfg.K + cfg.J, "tau >= K+J"),
        (cfg.tau < cfg.tau_c, "tau < tau_c"),
        (cfg.rho_u > 0, "rho_u > 0"),
        (cfg.rho_d > 0, "rho_d > 0"),
        (cfg.noise_power > 0, "noise_power > 0"),
        (cfg.eh_xi > 0 and cfg.eh_chi > 0 and cfg.eh_phi > 0, "EH constants > 0"),
        (cfg.carrier_freq > 0, "carrier_freq > 0"),
        (cfg.d_H > 0 and cfg.d_V > 0, "d_H, d_V > 0"),
        (cfg.area_side > 0, "area_side > 0"),
        (0.0 < cfg.e_fraction < 1.0, "0 < e_fraction < 1"),
        (0 < cfg.pathloss_d0 < cfg.pathloss_d1, "0 < d0 < d1"),
        (cfg.shadow_sigma_db >= 0, "shadow_sigma_db >= 0"),
        (cfg.symbol_duration > 0, "symbol_duration > 0"),
    ]
    for ok, name in checks:
        if not ok:
            raise ConfigurationError(f"configuration invariant violated: {name}")


def load_config(source) -> SystemConfig:
    """Ingest a config from a JSON document (path, file object, or dict)."""
    if isinstance(source, dict):
        return build_config(source)
    if hasattr(source, "read"):
        return build_config(json.load(source))
    with open(source, "r", encoding="utf-8") as fh:
        return build_config(json.load(fh))


def with_dimensions(cfg: SystemConfig, **changes) -> SystemConfig:
    """Return a revalidated copy of cfg with the given fields replaced."""
    out = replace(cfg, **changes)
    validate_config(out)
    return out


@dataclass(frozen=True)
class ThreeSlopeParams:
    """Constants of the three-slope propagation model (COST-231 Hata fixed term)."""

    f_mhz: float = 1900.0
    ap_height: float = 15.0
    user_height: float = 1.65
    d0: float = 10.0     # m
    d1: float = 50.0     # m

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "ThreeSlopeParams":
        return cls(
            f_mhz=cfg.carrier_freq / 1e6,
            ap_height=cfg.ap_height,
            user_height=cfg.user_height,
            d0=cfg.pathloss_d0,
            d1=cfg.pathloss_d1,
        )

    @property
    def fixed_loss_db(self) -> float:
        lf = math.log10(self.f_mhz)
        return (
            46.3
            + 33.9 * lf
            - 13.82 * math.log10(self.ap_height)
            - (1.1 * lf - 0.7) * self.user_height
            + (1.56 * lf - 0.8)
        )


def three_slope_pathloss(distance_m, params: ThreeSlopeParams | None = None):
    """Three-slope path loss in dB (non-positive), vectorized over distance.

    Slope exponents are 35 dB/decade beyond d1, 20 dB/decade between d0 and
    d1, and flat below d0; the branches are continuous at both breakpoints.
    """
    if params is None:
        params = ThreeSlopeParams()
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    d_km = d / 1000.0
    d0_km = params.d0 / 1000.0
    d1_km = params.d1 / 1000.0
    base = params.fixed_loss_db
    far = -base - 35.0 * np.log10(d_km)
    mid = -base - 15.0 * np.log10(d1_km) - 20.0 * np.log10(d_km)
    near = -base - 15.0 * np.log10(d1_km) - 20.0 * math.log10(d0_km)
    out = np.where(d_km > d1_km, far, np.where(d_km > d0_km, mid, near))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class NetworkRealization:
    """One drawn network: geometry, large-scale coefficients, AP modes."""

    ap_positions: np.ndarray    # (M, 3)
    iu_positions: np.ndarray    # (K, 3)
    eu_positions: np.ndarray    # (J, 3)
    ris_position: np.ndarray    # (3,)
    beta_iu: np.ndarray         # (M, K) linear
    beta_eu: np.ndarray         # (M, J) linear
    alpha_ap: np.ndarray        # (M,)  AP-to-RIS, linear
    alpha_eu: np.ndarray        # (J,)  RIS-to-EU, linear
    a: np.ndarray               # (M,) 1 = information AP, 0 = energy AP

    def __post_init__(self):
        if not (np.all(self.beta_iu > 0) and np.all(self.beta_eu > 0)):
            raise ValueError("large-scale coefficients must be positive")
        if not (np.all(self.alpha_ap > 0) and np.all(self.alpha_eu > 0)):
            raise ValueError("RIS-link coefficients must be positive")
        if not np.all(np.isin(self.a, (0, 1))):
            raise ValueError("mode vector entries must be 0 or 1")
        if self.a.sum() == 0 or self.a.sum() == len(self.a):
            raise ValueError("mode vector must contain both AP modes")


def assign_ap_modes(M: int, e_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Draw the binary mode vector: exactly round(M * e_fraction) energy APs.

    The energy subset is the bottom-ranked slice of per-AP uniform scores, a
    uniformly random subset that stays mostly stable when the AP set is
    extended under the same stream (keeps sweep points coupled).
    """
    if M < 2:
        raise ConfigurationError("need at least two APs to split operation modes")
    if not 0.0 < e_fraction < 1.0:
        raise ConfigurationError("e_fraction must lie strictly between 0 and 1")
    n_e = int(round(M * e_fraction))
    if n_e < 1 or n_e > M - 1:
        raise ConfigurationError(
            f"e_fraction={e_fraction} leaves no AP for one of the modes (M={M})"
        )
    scores = rng.uniform(size=M)
    a = np.ones(M, dtype=np.int64)
    a[np.argsort(scores)[:n_e]] = 0
    return a


def _pairwise_distance(pos_a: np.ndarray, pos_b: np.ndarray) -> np.ndarray:
    diff = pos_a[:, None, :] - pos_b[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def generate_topology(cfg: SystemConfig, rng: np.random.Generator) -> NetworkRealization:
    """Draw AP/user positions and the large-scale fading tables.

    APs and IUs are uniform over the square; EUs are uniform in a disc near
    the RIS ground projection. Direct links get log-normal shadowing beyond
    the outer breakpoint; RIS-side links use pure path loss scaled by the
    configured extra link gain.

    Each ingredient draws from its own spawned substream, so networks with
    different M share user layouts and nest their AP sets when generated from
    the same seed (common random numbers across sweep points).
    """
    params = ThreeSlopeParams.from_config(cfg)
    side = cfg.area_side
    rng_ap, rng_iu, rng_eu, rng_shadow, rng_modes = rng.spawn(5)

    ap_xy = rng_ap.uniform(0.0, side, size=(cfg.M, 2))
    iu_xy = rng_iu.uniform(0.0, side, size=(cfg.K, 2))

    ris = np.array([cfg.ris_x_frac * side, cfg.ris_y_frac * side, cfg.ris_height])
    disc_center = ris[:2] + np.array([cfg.eu_disc_offset, 0.0])
    radius = cfg.eu_disc_radius * np.sqrt(rng_eu.uniform(0.0, 1.0, size=cfg.J))
    angle = rng_eu.uniform(0.0, 2.0 * np.pi, size=cfg.J)
    eu_xy = disc_center[None, :] + np.stack(
        [radius * np.cos(angle), radius * np.sin(angle)], axis=-1
    )

    ap_pos = np.column_stack([ap_xy, np.full(cfg.M, cfg.ap_height)])
    iu_pos = np.column_stack([iu_xy, np.full(cfg.K, cfg.user_height)])
    eu_pos = np.column_stack([eu_xy, np.full(cfg.J, cfg.user_height)])

    d_iu = _pairwise_distance(ap_pos, iu_pos)
    d_eu = _pairwise_distance(ap_pos, eu_pos)
    pl_iu = three_slope_pathloss(d_iu, params)
    pl_eu = three_slope_pathloss(d_eu, params)

    # Shadowing only where the slope model itself applies (beyond d1).
    sh = rng_shadow.normal(0.0, cfg.shadow_sigma_db, size=(cfg.M, cfg.K + cfg.J))
    pl_iu = pl_iu + np.where(d_iu > params.d1, sh[:, :cfg.K], 0.0)
    pl_eu = pl_eu + np.where(d_eu > params.d1, sh[:, cfg.K:], 0.0)

    gain_db = cfg.ris_link_gain_db
    d_ap_ris = _pairwise_distance(ap_pos, ris[None, :])[:, 0]
    d_ris_eu = _pairwise_distance(eu_pos, ris[None, :])[:, 0]
    alpha_ap = 10.0 ** ((three_slope_pathloss(d_ap_ris, params) + gain_db) / 10.0)
    alpha_eu = 10.0 ** ((three_slope_pathloss(d_ris_eu, params) + gain_db) / 10.0)

    a = assign_ap_modes(cfg.M, cfg.e_fraction, rng_modes)

    return NetworkRealization(
        ap_positions=ap_pos,
        iu_positions=iu_pos,
        eu_positions=eu_pos,
        ris_position=ris,
        beta_iu=10.0 ** (pl_iu / 10.0),
        beta_eu=10.0 ** (pl_eu / 10.0),
        alpha_ap=alpha_ap,
        alpha_eu=alpha_eu,
        a=a,
    )
