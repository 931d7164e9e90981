"""Scenario configuration, deployment geometry and initial UE drop."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .geometry import HexagonRegion, MotionState
from .rng import RandomStreams

UE_MODELS = ("isotropic", "mpue_a3", "mpue_a1")

N_BEAMS = 12
CELLS_PER_SITE = 3
FAR_BEAMS = range(1, 9)
NEAR_BEAMS = range(9, 13)


class ConfigError(ValueError):
    """Raised when a configuration value violates the schema.

    The offending key is available as ``field``.
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class ConfigParseError(ValueError):
    """Raised when a configuration document cannot be parsed."""


@dataclass(frozen=True)
class ScenarioConfig:
    # network and radio
    carrier_frequency_ghz: float = 28.0
    bandwidth_mhz: float = 100.0
    n_sites: int = 7
    inter_site_distance_m: float = 200.0
    tx_power_dbm: float = 40.0
    bs_height_m: float = 10.0
    ue_height_m: float = 1.5
    # population and time base
    n_ues: int = 420
    ue_speed_kmh: float = 30.0
    time_step_ms: float = 10.0
    ssb_period_ms: float = 20.0
    sim_duration_s: float = 60.0
    rng_seed: int = 0
    # measurement
    omega: int = 2
    n_l1: int = 2
    p_thr_dbm: float = -100.0
    n_str: int = 2
    k_cell: float = 4.0
    k_beam: float = 4.0
    a1_scan_order: tuple[int, ...] = (2, 1, 3)
    # UE model
    ue_model: str = "isotropic"
    o_p_db: float = 0.0
    panel_elevation_deg: float = 90.0
    # handover
    k_b: int = 4
    o_a3_db: float = 2.0
    t_ttt_ms: float = 80.0
    n_prep: int = 4
    t_hof_ms: float = 200.0
    ho_interruption_ms: float = 50.0
    reestablish_delay_ms: float = 200.0
    t_fh_ms: float = 1000.0
    # beam management and link monitoring
    n_rep: int = 4
    o_b_db: float = 1.0
    l2_alpha: float = 0.5
    c_bfi_max: int = 3
    t_bfd_ms: float = 60.0
    n_rach: int = 4
    t_rach_ms: float = 20.0
    rlq_alpha: float = 0.1
    rlm_alpha: float = 0.1
    gamma_out_db: float = -8.0
    gamma_in_db: float = -6.0
    t_rlf_ms: float = 1000.0
    # channel
    los_mode: str = "soft"
    shadow_fading: bool = True
    shadow_sigma_db: float = 4.0
    shadow_decorrelation_m: float = 13.0
    fast_fading: bool = True
    rician_k_db: float = 10.0
    fading_k_mode: str = "soft_los"
    noise_figure_db: float = 9.0
    penetration_loss_db: float = 0.0

    def __post_init__(self) -> None:
        validate(self)

    @property
    def n_panels(self) -> int:
        return 1 if self.ue_model == "isotropic" else 3

    @property
    def n_steps(self) -> int:
        return int(round(self.sim_duration_s * 1000.0 / self.time_step_ms))

    def steps(self, duration_ms: float) -> int:
        """Number of whole time steps covering ``duration_ms``."""
        return int(math.ceil(duration_ms / self.time_step_ms - 1e-9))

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["a1_scan_order"] = list(self.a1_scan_order)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_DURATIONS = (
    "time_step_ms", "ssb_period_ms", "sim_duration_s", "t_ttt_ms", "t_hof_ms",
    "ho_interruption_ms", "reestablish_delay_ms", "t_fh_ms", "t_bfd_ms",
    "t_rach_ms", "t_rlf_ms",
)
_POSITIVE_INTS = ("n_sites", "n_ues", "omega", "n_l1", "n_str", "n_prep",
                  "n_rep", "c_bfi_max", "n_rach")


def validate(cfg: ScenarioConfig) -> None:
    for name in _DURATIONS:
        if not getattr(cfg, name) > 0:
            raise ConfigError(name, "duration must be > 0")
    for name in _POSITIVE_INTS:
        if getattr(cfg, name) < 1:
            raise ConfigError(name, "must be >= 1")
    if cfg.n_sites not in (1, 7):
        raise ConfigError("n_sites", "only the single-site and 7-site hexagon layouts exist")
    if not math.isclose(cfg.ssb_period_ms, cfg.omega * cfg.time_step_ms):
        raise ConfigError("ssb_period_ms", "must equal omega * time_step_ms")
    if not 1 <= cfg.k_b <= N_BEAMS:
        raise ConfigError("k_b", f"must be in 1..{N_BEAMS}")
    if not cfg.gamma_in_db > cfg.gamma_out_db:
        raise ConfigError("gamma_in_db", "must exceed gamma_out_db")
    if cfg.ue_model not in UE_MODELS:
        raise ConfigError("ue_model", f"must be one of {', '.join(UE_MODELS)}")
    if cfg.los_mode not in ("soft", "los", "nlos"):
        raise ConfigError("los_mode", "must be one of soft, los, nlos")
    if cfg.fading_k_mode not in ("soft_los", "fixed"):
        raise ConfigError("fading_k_mode", "must be one of soft_los, fixed")
    if sorted(cfg.a1_scan_order) != [1, 2, 3]:
        raise ConfigError("a1_scan_order", "must be a permutation of panels 1, 2, 3")
    if cfg.ue_speed_kmh < 0:
        raise ConfigError("ue_speed_kmh", "must be >= 0")
    if cfg.n_prep > N_BEAMS:
        raise ConfigError("n_prep", f"must be <= {N_BEAMS}")
    if cfg.n_rep > N_BEAMS:
        raise ConfigError("n_rep", f"must be <= {N_BEAMS}")
    for name in ("l2_alpha", "rlq_alpha", "rlm_alpha"):
        if not 0 < getattr(cfg, name) <= 1:
            raise ConfigError(name, "must be in (0, 1]")
    for name in ("k_cell", "k_beam"):
        if getattr(cfg, name) < 0:
            raise ConfigError(name, "must be >= 0")
    if cfg.inter_site_distance_m <= 0:
        raise ConfigError("inter_site_distance_m", "must be > 0")
    if cfg.bs_height_m <= cfg.ue_height_m:
        raise ConfigError("bs_height_m", "must exceed ue_height_m")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def _coerce(name: str, value: Any) -> Any:
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        if isinstance(value, bool):
            return value
        raise ConfigError(name, f"expected true/false, got {value!r}")
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return int(value)
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(name, f"expected a string, got {value!r}")
        return value
    # tuple[int, ...]
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split()]
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a list of integers, got {value!r}") from None


def config_from_mapping(values: dict[str, Any], base: ScenarioConfig | None = None) -> ScenarioConfig:
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    coerced = {k: _coerce(k, v) for k, v in values.items()}
    if base is None:
        return ScenarioConfig(**coerced)
    return dataclasses.replace(base, **coerced)


def load_config(source: str) -> ScenarioConfig:
    """Parse a flat ``key: value`` YAML document into a validated config.

    Omitted keys take their defaults; unknown keys are rejected.
    """
    try:
        doc = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"malformed config document: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigParseError("config document must be a flat mapping of key: value pairs")
    for key, value in doc.items():
        if isinstance(value, dict):
            raise ConfigParseError(f"nested section under {key!r}; the schema is flat")
    return config_from_mapping(doc)


def load_config_file(path: str | Path) -> ScenarioConfig:
    return load_config(Path(path).read_text())


def parse_overrides(pairs: list[str]) -> dict[str, Any]:
    """Turn ``["k_b=2", "ue_model=mpue_a1"]`` into a typed mapping."""
    out: dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigParseError(f"override {pair!r} is not of the form key=value")
        key, raw = pair.split("=", 1)
        try:
            out[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigParseError(f"bad override value in {pair!r}: {exc}") from exc
    return out


def schema_help() -> str:
    lines = ["Config keys (flat YAML, `key: value`):"]
    defaults = ScenarioConfig()
    for name, kind in _FIELD_TYPES.items():
        lines.append(f"  {name:<24} {kind:<16} default {getattr(defaults, name)!r}")
    return "\n".join(lines)


# --------------------------------------------------------------------------- #
# Deployment


def beam_angles(b: int) -> tuple[float, float]:
    """(elevation, azimuth) of 1-based beam ``b`` in degrees; azimuth is
    relative to the sector boresight, elevation is measured from zenith."""
    if b in FAR_BEAMS:
        return 90.0, -52.5 + 15.0 * (b - 1)
    if b in NEAR_BEAMS:
        return 97.0, -45.0 + 30.0 * (b - 9)
    raise ValueError(f"beam index {b} outside 1..{N_BEAMS}")


def beam_panel_size(b: int) -> tuple[int, int]:
    return (16, 8) if b in FAR_BEAMS else (8, 4)


@dataclass(frozen=True)
class Deployment:
    """Site, cell and beam geometry.

    Cells are numbered ``site * 3 + sector``; beams are indexed 0..11 in
    arrays, which corresponds to beam numbers 1..12.
    """

    site_xy: np.ndarray
    cell_site: np.ndarray
    cell_boresight_deg: np.ndarray
    beam_theta_deg: np.ndarray
    beam_phi_deg: np.ndarray
    beam_rows: np.ndarray
    beam_cols: np.ndarray
    region: HexagonRegion
    bs_height_m: float
    beam_tier: tuple[str, ...] = field(default=("far",) * 8 + ("near",) * 4)

    @property
    def n_sites(self) -> int:
        return len(self.site_xy)

    @property
    def n_cells(self) -> int:
        return len(self.cell_site)

    @property
    def n_beams(self) -> int:
        return len(self.beam_theta_deg)


def build_deployment(config: ScenarioConfig) -> Deployment:
    isd = config.inter_site_distance_m
    sites = [(0.0, 0.0)]
    if config.n_sites == 7:
        for k in range(6):
            ang = math.radians(30.0 + 60.0 * k)
            sites.append((isd * math.cos(ang), isd * math.sin(ang)))
    site_xy = np.array(sites)
    n_cells = len(sites) * CELLS_PER_SITE
    cell_site = np.repeat(np.arange(len(sites)), CELLS_PER_SITE)
    cell_boresight = np.tile(np.array([0.0, 120.0, 240.0]), len(sites))
    angles = [beam_angles(b) for b in range(1, N_BEAMS + 1)]
    sizes = [beam_panel_size(b) for b in range(1, N_BEAMS + 1)]
    ring = isd if config.n_sites == 7 else 0.0
    region = HexagonRegion(circumradius=ring + 0.5 * isd, rotation_deg=30.0)
    for arr in (site_xy, cell_site, cell_boresight):
        arr.setflags(write=False)
    assert n_cells == len(cell_site)
    return Deployment(
        site_xy=site_xy,
        cell_site=cell_site,
        cell_boresight_deg=cell_boresight,
        beam_theta_deg=np.array([a[0] for a in angles]),
        beam_phi_deg=np.array([a[1] for a in angles]),
        beam_rows=np.array([s[0] for s in sizes]),
        beam_cols=np.array([s[1] for s in sizes]),
        region=region,
        bs_height_m=config.bs_height_m,
    )


# --------------------------------------------------------------------------- #
# UE population


@dataclass
class UeState:
    """Initial state of one UE as dropped at t = 0."""

    ue_id: int
    motion: MotionState
    serving_cell: int
    serving_beam: int
    serving_panel: int


def drop_positions(config: ScenarioConfig, deployment: Deployment,
                   streams: RandomStreams) -> list[MotionState]:
    speed = config.ue_speed_kmh / 3.6
    motions = []
    for u in range(config.n_ues):
        rng = streams.get("drop", u)
        pos = deployment.region.sample(rng)
        heading = float(rng.uniform(0.0, 360.0))
        motions.append(MotionState(position=pos, heading_deg=heading, speed_mps=speed))
    return motions


def spawn_ues(config: ScenarioConfig, deployment: Deployment, streams: RandomStreams,
              channel=None) -> list[UeState]:
    """Drop ``n_ues`` UEs uniformly over the region and attach each to the
    (cell, beam, panel) with the strongest raw RSRP at t = 0.

    ``channel`` is a :class:`mpuesim.radio.ChannelModel` already sized for
    the population; a fresh one is built from ``streams`` when omitted.
    """
    from .radio import ChannelModel

    motions = drop_positions(config, deployment, streams)
    if channel is None:
        channel = ChannelModel(config, deployment, config.n_ues, streams)
    xy = np.array([m.position for m in motions])
    heading = np.array([m.heading_deg for m in motions])
    rsrp = channel.received_power(xy, heading)  # (U, C, B, P)
    flat = rsrp.reshape(len(motions), -1)
    best = np.argmax(flat, axis=1)
    c, b, p = np.unravel_index(best, rsrp.shape[1:])
    return [
        UeState(ue_id=u, motion=m, serving_cell=int(c[u]), serving_beam=int(b[u]),
                serving_panel=int(p[u]))
        for u, m in enumerate(motions)
    ]
