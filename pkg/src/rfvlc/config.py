"""Network configuration: defaults, derived quantities and the key-value file format.

Config files are flat ``key = value`` text.  Blank lines and ``#`` comments
are ignored.  Keys carry their unit as a suffix; see ``CONFIG_KEYS`` for the
full list.  Intensities can be given either as expected counts over the disk
(``lambda_o_count``) or as absolute intensities (``lambda_o_per_m2``).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .channel import RfDeviceParams, VlcDeviceParams, lambertian_order, rf_k_constant
from .geometry import DiskRegion, FovGeometry, fov_radius

__all__ = ["NetworkConfig", "ConfigError", "CONFIG_KEYS", "load_config", "parse_config_text"]

_RATE_UNITS = {"bps": 1.0, "kbps": 1e3, "mbps": 1e6}
MODES = ("rf_only", "vlc_only", "opportunistic", "hybrid")


class ConfigError(ValueError):
    """Invalid configuration file or field value."""


@dataclass(frozen=True)
class NetworkConfig:
    # optical tier
    p_opt_w: float = 10.0
    kappa_oe: float = 1.0
    b_o_hz: float = 40e6
    a_pd_m2: float = 1e-4
    t_filter: float = 1.0
    n_refractive: float = 1.5
    r_pd_a_per_w: float = 0.53
    n_o_a2_per_hz: float = 1e-21
    f_dc: float = 3.0
    phi_half_deg: float = 60.0
    m_order: float | None = None
    xi_fov_deg: float = 70.0
    lambda_o_count: float = 30.0
    # RF tier
    p_s_w: float = 2.0
    b_s_hz: float = 10e6
    n_s_w_per_hz: float = 10 ** (-20.4)
    alpha: float = 3.68
    kappa: float = 1.0
    theta: float = 1.0
    f_c_ghz: float = 5.0
    los: bool = True
    k_interpretation: str = "gain"
    lambda_s_count: float = 5.0
    # geometry and targets
    h_m: float = 2.0
    r_m_m: float = 10.0
    r_th: float = 3.0
    r_th_unit: str = "mbps"
    # modelling switches
    assume_u_one: bool = False
    empty_tier: str = "outage"
    association_fading: bool = False
    z1_override: float | None = None

    def __post_init__(self):
        positive = ("p_opt_w", "kappa_oe", "b_o_hz", "a_pd_m2", "t_filter", "r_pd_a_per_w",
                    "n_o_a2_per_hz", "f_dc", "p_s_w", "b_s_hz", "n_s_w_per_hz", "kappa",
                    "theta", "f_c_ghz", "h_m", "r_m_m")
        for name in positive:
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {val!r}")
        for name in ("lambda_o_count", "lambda_s_count", "r_th"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ConfigError(f"{name} must be non-negative, got {val!r}")
        if not 0.0 < self.xi_fov_deg <= 90.0:
            raise ConfigError(f"xi_fov_deg must lie in (0, 90], got {self.xi_fov_deg}")
        if not 0.0 < self.phi_half_deg < 90.0:
            raise ConfigError(f"phi_half_deg must lie in (0, 90), got {self.phi_half_deg}")
        if not 1.0 <= self.n_refractive <= 2.0:
            raise ConfigError(f"n_refractive must lie in [1, 2], got {self.n_refractive}")
        if self.alpha <= 2.0:
            raise ConfigError(f"alpha must exceed 2, got {self.alpha}")
        if self.k_interpretation not in ("gain", "loss"):
            raise ConfigError("k_interpretation must be 'gain' or 'loss'")
        if self.r_th_unit not in (*_RATE_UNITS, "bps_per_hz"):
            raise ConfigError("r_th_unit must be one of bps, kbps, mbps, bps_per_hz")
        if self.empty_tier not in ("outage", "resample"):
            raise ConfigError("empty_tier must be 'outage' or 'resample'")
        if self.m_order is not None:
            m_phi = lambertian_order(math.radians(self.phi_half_deg))
            if abs(m_phi - self.m_order) > 1e-9:
                raise ConfigError(
                    f"m_order={self.m_order} is inconsistent with phi_half_deg="
                    f"{self.phi_half_deg} (which gives m={m_phi:.12g})")
        if self.z1_override is not None and not self.z1_override > 0:
            raise ConfigError("z1_override must be positive")

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)

    # geometry ---------------------------------------------------------
    @property
    def area(self) -> float:
        return math.pi * self.r_m_m ** 2

    @property
    def lambda_o(self) -> float:
        """OBS intensity per square metre."""
        return self.lambda_o_count / self.area

    @property
    def lambda_s(self) -> float:
        return self.lambda_s_count / self.area

    @property
    def xi_fov(self) -> float:
        return math.radians(self.xi_fov_deg)

    @property
    def region(self) -> DiskRegion:
        return DiskRegion(self.r_m_m, self.h_m)

    @property
    def t_radius(self) -> float:
        return fov_radius(self.h_m, self.xi_fov, self.r_m_m)

    @property
    def u_o(self) -> float:
        if self.assume_u_one:
            return 1.0
        return -math.expm1(-self.lambda_o_count)

    @property
    def u_s(self) -> float:
        if self.assume_u_one:
            return 1.0
        return -math.expm1(-self.lambda_s_count)

    @property
    def fov(self) -> FovGeometry:
        return FovGeometry(self.xi_fov, self.t_radius, self.u_o)

    # devices ----------------------------------------------------------
    @property
    def m(self) -> float:
        if self.m_order is not None:
            return float(self.m_order)
        return lambertian_order(math.radians(self.phi_half_deg))

    @property
    def p_exp(self) -> float:
        """Optical path-loss exponent m + 3 on (r^2 + h^2)."""
        return self.m + 3.0

    @property
    def vlc_device(self) -> VlcDeviceParams:
        return VlcDeviceParams(
            a_pd=self.a_pd_m2, phi_half=math.radians(self.phi_half_deg), m_order=self.m_order,
            t_filter=self.t_filter, n_refractive=self.n_refractive, r_pd=self.r_pd_a_per_w,
            p_opt=self.p_opt_w, kappa_oe=self.kappa_oe, f_dc=self.f_dc, b_o=self.b_o_hz,
            n_o=self.n_o_a2_per_hz)

    @property
    def k_const(self) -> float:
        return rf_k_constant(self.f_c_ghz, self.los)

    @property
    def rf_device(self) -> RfDeviceParams:
        return RfDeviceParams(
            p_s=self.p_s_w, b_s=self.b_s_hz, n_s=self.n_s_w_per_hz, alpha=self.alpha,
            k_const=self.k_const, kappa_fade=self.kappa, theta_fade=self.theta,
            k_interpretation=self.k_interpretation)

    @property
    def concentrator_gain(self) -> float:
        return self.n_refractive ** 2 / math.sin(self.xi_fov) ** 2

    @property
    def z_agg(self) -> float:
        """Z = (A_pd (m+1) T G h^(m+1) / 2 pi)^2."""
        m = self.m
        return (self.a_pd_m2 * (m + 1.0) * self.t_filter * self.concentrator_gain
                * self.h_m ** (m + 1.0) / (2.0 * math.pi)) ** 2

    @property
    def p_elec(self) -> float:
        return self.p_opt_w ** 2 / self.kappa_oe ** 2

    @property
    def vlc_amplitude(self) -> float:
        """A with received VLC signal power A (r^2 + h^2)^-(m+3)."""
        return self.r_pd_a_per_w ** 2 * self.p_elec * self.z_agg

    @property
    def vlc_peak(self) -> float:
        """Signal power from an OBS directly overhead, A h^(-2(m+3))."""
        return self.vlc_amplitude * self.h_m ** (-2.0 * self.p_exp)

    @property
    def noise_vlc(self) -> float:
        return self.b_o_hz * self.f_dc ** 2 * self.n_o_a2_per_hz

    @property
    def noise_rf(self) -> float:
        return self.b_s_hz * self.n_s_w_per_hz

    @property
    def rf_gain(self) -> float:
        """P_s K with K inverted when read as a loss; mean power is rf_gain * kappa * theta * v^-alpha."""
        k = self.k_const if self.k_interpretation == "gain" else 1.0 / self.k_const
        return self.p_s_w * k

    @property
    def z1(self) -> float:
        """Association constant: an OBS at r wins iff v > sqrt(z1) (r^2 + h^2)^((m+3)/alpha)."""
        if self.z1_override is not None:
            return float(self.z1_override)
        return (self.rf_gain * self.kappa * self.theta / self.vlc_amplitude) ** (2.0 / self.alpha)

    # thresholds -------------------------------------------------------
    def _rate_bps(self, bandwidth: float) -> float:
        if self.r_th_unit == "bps_per_hz":
            return self.r_th * bandwidth
        return self.r_th * _RATE_UNITS[self.r_th_unit]

    @property
    def gamma_vlc(self) -> float:
        """SINR threshold for the VLC tier with the DCO-OFDM 1/2 prelog."""
        return math.expm1(math.log(2.0) * self._rate_bps(self.b_o_hz) / (self.b_o_hz / 2.0))

    @property
    def gamma_rf(self) -> float:
        return math.expm1(math.log(2.0) * self._rate_bps(self.b_s_hz) / self.b_s_hz)

    def derived(self) -> dict:
        """Derived quantities echoed by ``load_config`` and the CLI."""
        return {
            "m": self.m,
            "lambda_o_per_m2": self.lambda_o,
            "lambda_s_per_m2": self.lambda_s,
            "t_radius_m": self.t_radius,
            "u_o": self.u_o,
            "u_s": self.u_s,
            "k_const": self.k_const,
            "z_agg": self.z_agg,
            "z1": self.z1,
            "gamma_vlc": self.gamma_vlc,
            "gamma_rf": self.gamma_rf,
            "noise_vlc": self.noise_vlc,
            "noise_rf": self.noise_rf,
        }

    def to_mapping(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(NetworkConfig)}
_BOOL_KEYS = {"los", "assume_u_one", "association_fading"}
_STR_KEYS = {"k_interpretation", "r_th_unit", "empty_tier"}
_OPTIONAL_KEYS = {"m_order", "z1_override"}
# keys accepted in files in addition to the field names
_ALIASES = {"lambda_o_per_m2", "lambda_s_per_m2"}
CONFIG_KEYS = tuple(sorted(set(_FIELDS) | _ALIASES))


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if key in _STR_KEYS:
        return raw.strip("\"'").lower()
    if key in _OPTIONAL_KEYS and raw.lower() in ("none", ""):
        return None
    val = float(raw)
    if not math.isfinite(val):
        raise ValueError(f"expected a finite number, got {raw!r}")
    return val


def config_from_mapping(values: dict, base: NetworkConfig | None = None) -> NetworkConfig:
    """Build a config from already-parsed values, resolving intensity aliases."""
    values = dict(values)
    r_m = values.get("r_m_m", (base or NetworkConfig()).r_m_m)
    area = math.pi * r_m ** 2
    for tier in ("o", "s"):
        absolute = values.pop(f"lambda_{tier}_per_m2", None)
        if absolute is not None:
            if f"lambda_{tier}_count" in values:
                raise ConfigError(f"give lambda_{tier}_count or lambda_{tier}_per_m2, not both")
            values[f"lambda_{tier}_count"] = absolute * area
    unknown = set(values) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    base = base or NetworkConfig()
    return dataclasses.replace(base, **values)


def parse_config_text(text: str, source: str = "<string>") -> NetworkConfig:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        key = key.lower()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return config_from_mapping(values)


def load_config(path: str | Path | None) -> NetworkConfig:
    """Read a config file; ``None`` yields the reference defaults."""
    if path is None:
        return NetworkConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))
