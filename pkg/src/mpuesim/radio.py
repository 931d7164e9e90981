"""Link budget: antenna patterns, path loss, shadow and fast fading, RSRP
and downlink SINR under multi-beam co-scheduling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .geometry import PANEL_OFFSETS
from .rng import RandomStreams

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0

RX_PEAK_GAIN_DBI = 5.0
RX_HPBW_DEG = 90.0
RX_BACK_ATTENUATION_DB = 25.0
TX_ELEMENT_GAIN_DBI = 8.0
TX_SIDELOBE_FLOOR_DB = 30.0


def array_hpbw_deg(n_elements: int, spacing_wavelengths: float) -> float:
    """Half-power beamwidth of a uniform linear array, broadside."""
    return math.degrees(0.886 / (n_elements * spacing_wavelengths))


@dataclass(frozen=True)
class TxBeamPattern:
    theta_deg: float
    phi_deg: float
    rows: int
    cols: int
    v_spacing: float = 0.7
    h_spacing: float = 0.5
    element_gain_dbi: float = TX_ELEMENT_GAIN_DBI
    sidelobe_floor_db: float = TX_SIDELOBE_FLOOR_DB

    @property
    def peak_gain_dbi(self) -> float:
        return 10.0 * math.log10(self.rows * self.cols) + self.element_gain_dbi

    @property
    def hpbw_az_deg(self) -> float:
        return array_hpbw_deg(self.cols, self.h_spacing)

    @property
    def hpbw_el_deg(self) -> float:
        return array_hpbw_deg(self.rows, self.v_spacing)


def tx_beam_gain(beam: TxBeamPattern, delta_el, delta_az):
    """Parabolic main lobe clamped at the sidelobe floor, in dBi."""
    loss = 12.0 * (np.asarray(delta_az) / beam.hpbw_az_deg) ** 2 \
        + 12.0 * (np.asarray(delta_el) / beam.hpbw_el_deg) ** 2
    return beam.peak_gain_dbi - np.minimum(loss, beam.sidelobe_floor_db)


def rx_panel_gain(delta_el, delta_az, isotropic: bool = False):
    """UE panel element gain in dBi; 0 dBi everywhere for the isotropic UE."""
    if isotropic:
        g = np.zeros(np.broadcast(np.asarray(delta_el), np.asarray(delta_az)).shape)
        return float(g) if g.ndim == 0 else g
    loss = 12.0 * (np.asarray(delta_az) / RX_HPBW_DEG) ** 2 \
        + 12.0 * (np.asarray(delta_el) / RX_HPBW_DEG) ** 2
    g = RX_PEAK_GAIN_DBI - np.minimum(loss, RX_BACK_ATTENUATION_DB)
    return float(g) if np.ndim(g) == 0 else g


def los_probability(d2d_m):
    """UMi street-canyon LOS probability."""
    d = np.asarray(d2d_m, dtype=float)
    with np.errstate(divide="ignore"):
        p = 18.0 / d + np.exp(-d / 36.0) * (1.0 - 18.0 / d)
    return np.where(d <= 18.0, 1.0, p)


def path_loss_los(d3d_m, frequency_ghz: float):
    return 32.4 + 21.0 * np.log10(d3d_m) + 20.0 * math.log10(frequency_ghz)


def path_loss_nlos(d3d_m, frequency_ghz: float):
    nlos = 35.3 * np.log10(d3d_m) + 22.4 + 21.3 * math.log10(frequency_ghz)
    return np.maximum(path_loss_los(d3d_m, frequency_ghz), nlos)


def path_loss(d3d_m, frequency_ghz: float, d2d_m=None, los: str = "soft"):
    """UMi path loss in dB.

    ``los`` selects pure ``"los"``, pure ``"nlos"`` or the ``"soft"`` blend,
    which mixes both in the linear power domain weighted by the LOS
    probability at ``d2d_m`` (defaults to ``d3d_m``).
    """
    d3d = np.asarray(d3d_m, dtype=float)
    if np.any(d3d <= 0):
        raise ValueError("distance must be positive")
    if los == "los":
        out = path_loss_los(d3d, frequency_ghz)
    elif los == "nlos":
        out = path_loss_nlos(d3d, frequency_ghz)
    elif los == "soft":
        p = los_probability(d3d if d2d_m is None else d2d_m)
        lin = p * 10.0 ** (-path_loss_los(d3d, frequency_ghz) / 10.0) \
            + (1.0 - p) * 10.0 ** (-path_loss_nlos(d3d, frequency_ghz) / 10.0)
        out = -10.0 * np.log10(lin)
    else:
        raise ValueError(f"unknown LOS mode {los!r}")
    return float(out) if np.ndim(out) == 0 else out


def rsrp_dbm(tx_power_dbm, tx_gain_dbi, rx_gain_dbi, path_loss_db,
             shadow_db=0.0, fading_loss_db=0.0, penetration_db=0.0):
    return tx_power_dbm + tx_gain_dbi + rx_gain_dbi - path_loss_db - shadow_db \
        - fading_loss_db - penetration_db


def thermal_noise_dbm(bandwidth_mhz: float, noise_figure_db: float) -> float:
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth_mhz * 1e6) + noise_figure_db


def db_to_lin(x):
    return np.power(10.0, np.asarray(x) / 10.0)


def lin_to_db(x):
    return 10.0 * np.log10(x)


def interference_mw(rx_mw: np.ndarray, k_b: int):
    """Expected intra- and inter-cell interference per (cell, beam) link.

    ``rx_mw`` has shape ``(..., C, B)``. Each cell schedules ``k_b`` of its
    ``B`` beams uniformly at random, with the victim link's own beam always
    among them, so every other beam of the serving cell is active with
    probability ``(k_b - 1) / (B - 1)`` and every beam of another cell with
    probability ``k_b / B``.
    """
    n_beams = rx_mw.shape[-1]
    cell_total = rx_mw.sum(axis=-1, keepdims=True)
    all_total = cell_total.sum(axis=-2, keepdims=True)
    intra = (k_b - 1) / (n_beams - 1) * (cell_total - rx_mw)
    inter = k_b / n_beams * (all_total - cell_total)
    return intra, inter


def sinr_db(rx_dbm: np.ndarray, k_b: int, noise_dbm: float) -> np.ndarray:
    """SINR in dB for every (cell, beam) link of ``rx_dbm`` (shape ``(..., C, B)``)."""
    rx = db_to_lin(rx_dbm)
    intra, inter = interference_mw(rx, k_b)
    return lin_to_db(rx / (intra + inter + db_to_lin(noise_dbm)))


class InterferenceField:
    """Per-step interference bookkeeping for serving-link SINR queries.

    Received power factorises as ``link[u, c, b] + rxg[u, c, p]`` in dB, so
    per-panel cell totals follow from per-cell beam sums without forming
    the full (U, C, B, P) tensor. Queries agree with :func:`sinr_db` on the
    panel's (C, B) slice up to floating-point rounding.

    Parameters
    ----------
    link_dbm : ndarray, shape (U, C, B)
        Panel-independent received power.
    rxg_dbi : ndarray, shape (U, C, P)
        Panel gain towards each cell.
    noise_dbm : float
    """

    def __init__(self, link_dbm: np.ndarray, rxg_dbi: np.ndarray, noise_dbm: float) -> None:
        self.link = link_dbm
        self.rxg = rxg_dbi
        self.n_beams = link_dbm.shape[-1]
        self.noise_mw = float(db_to_lin(noise_dbm))
        cell_mw = db_to_lin(link_dbm).sum(axis=-1)
        self.cell_p = cell_mw[..., None] * db_to_lin(rxg_dbi)  # (U, C, P)
        self.all_p = self.cell_p.sum(axis=1)  # (U, P)

    def rsrp_dbm(self, ue, cell, beam, panel) -> np.ndarray:
        return self.link[ue, cell, beam] + self.rxg[ue, cell, panel]

    def sinr_db(self, ue, cell, beam, panel, k_b) -> np.ndarray:
        s = db_to_lin(self.rsrp_dbm(ue, cell, beam, panel))
        own = self.cell_p[ue, cell, panel]
        k_b = np.asarray(k_b)
        intra = (k_b - 1) / (self.n_beams - 1) * np.maximum(own - s, 0.0)
        inter = k_b / self.n_beams * np.maximum(self.all_p[ue, panel] - own, 0.0)
        return lin_to_db(s / (intra + inter + self.noise_mw))


def _wrap_sq(angle):
    """Wrapped angle for use inside squared terms only (sign at +/-180 is irrelevant)."""
    return np.mod(angle + 180.0, 360.0) - 180.0


def sampled_interference_mw(rx_mw: np.ndarray, cell: int, beam: int, k_b: int,
                            rng: np.random.Generator, n_draws: int) -> np.ndarray:
    """Monte-Carlo draws of total interference on link (cell, beam).

    Each draw schedules ``k_b`` beams per cell uniformly without replacement;
    the serving cell always schedules ``beam`` plus ``k_b - 1`` others.
    Returns ``n_draws`` interference totals in mW.
    """
    n_cells, n_beams = rx_mw.shape
    total = np.zeros(n_draws)
    keys = rng.random((n_draws, n_cells, n_beams))
    keys[:, cell, beam] = -1.0  # always chosen first
    chosen = np.argsort(keys, axis=-1)[..., :k_b]
    for c in range(n_cells):
        picks = chosen[:, c, :]
        p = rx_mw[c][picks].sum(axis=-1)
        if c == cell:
            p = p - rx_mw[cell, beam]
        total += p
    return total


class ShadowFading:
    """Log-normal shadowing per (UE, site), exponentially correlated in
    space along each UE trajectory (first-order autoregression in path
    length)."""

    def __init__(self, n_ues: int, n_sites: int, sigma_db: float, decorrelation_m: float,
                 rng: np.random.Generator, enabled: bool = True) -> None:
        self.sigma = sigma_db
        self.decorrelation_m = decorrelation_m
        self.rng = rng
        self.enabled = enabled
        if enabled:
            self.value = sigma_db * rng.standard_normal((n_ues, n_sites))
        else:
            self.value = np.zeros((n_ues, n_sites))

    def step(self, distance_m: np.ndarray) -> None:
        if not self.enabled:
            return
        rho = np.exp(-np.asarray(distance_m, dtype=float) / self.decorrelation_m)[:, None]
        noise = self.rng.standard_normal(self.value.shape)
        self.value = rho * self.value + self.sigma * np.sqrt(1.0 - rho ** 2) * noise


class FastFading:
    """Rician block fading per (UE, cell, beam) with a Gauss-Markov diffuse
    part whose one-step correlation follows Jakes, J0(2 pi f_d dt).

    The specular share of the power is ``los_prob * K / (K + 1)``: a LOS
    link has Rician factor ``K``, an NLOS link is Rayleigh, and the soft
    LOS state mixes the two with the same probability that blends the path
    loss. Without a LOS probability the link is treated as LOS. The power
    gain has unit mean in every case.
    """

    def __init__(self, shape: tuple[int, ...], k_factor_db: float, doppler_hz: float,
                 dt_s: float, rng: np.random.Generator, enabled: bool = True) -> None:
        self.enabled = enabled
        self.rng = rng
        k = 10.0 ** (k_factor_db / 10.0)
        self.los_share = k / (k + 1.0)
        self.rho = float(j0(2.0 * math.pi * doppler_hz * dt_s))
        self.shape = shape
        if enabled:
            # real and imaginary parts of the unit-power diffuse component
            self.g = self.rng.standard_normal((2,) + shape) * math.sqrt(0.5)

    def gain_db(self, los_prob=None) -> np.ndarray | float:
        """Power gain 10 log10 |h|^2; ``los_prob`` broadcasts against the
        leading axes of the fading shape."""
        if not self.enabled:
            return 0.0
        spec = self.los_share if los_prob is None else self.los_share * np.asarray(los_prob)
        spec = np.reshape(spec, np.shape(spec) + (1,) * (len(self.shape) - np.ndim(spec)))
        los_amp = np.sqrt(spec)
        diffuse_amp = np.sqrt(1.0 - spec)
        re = los_amp + diffuse_amp * self.g[0]
        im = diffuse_amp * self.g[1]
        return 10.0 * np.log10(re * re + im * im)

    def step(self) -> None:
        if not self.enabled or self.rho == 1.0:
            return
        innov = self.rng.standard_normal(self.g.shape)
        innov *= math.sqrt(0.5 * (1.0 - self.rho ** 2))
        self.g *= self.rho
        self.g += innov


class ChannelModel:
    """Per-UE received power on every (cell, beam, panel) link.

    Parameters
    ----------
    config : ScenarioConfig
    deployment : Deployment
    n_ues : int
    streams : RandomStreams
        Shadowing and fast fading draw from the ``"shadow"`` and ``"fading"``
        substreams.
    """

    def __init__(self, config, deployment, n_ues: int, streams: RandomStreams) -> None:
        self.config = config
        self.dep = deployment
        self.n_ues = n_ues
        self.isotropic = config.ue_model == "isotropic"
        self.panel_offsets = PANEL_OFFSETS[:config.n_panels] if not self.isotropic else np.zeros(1)
        self.beams = [
            TxBeamPattern(theta_deg=float(deployment.beam_theta_deg[b]),
                          phi_deg=float(deployment.beam_phi_deg[b]),
                          rows=int(deployment.beam_rows[b]), cols=int(deployment.beam_cols[b]))
            for b in range(deployment.n_beams)
        ]
        self.peak = np.array([bp.peak_gain_dbi for bp in self.beams])
        self.hpbw_az = np.array([bp.hpbw_az_deg for bp in self.beams])
        self.hpbw_el = np.array([bp.hpbw_el_deg for bp in self.beams])
        self.shadow = ShadowFading(n_ues, deployment.n_sites, config.shadow_sigma_db,
                                   config.shadow_decorrelation_m, streams.get("shadow"),
                                   enabled=config.shadow_fading)
        speed = config.ue_speed_kmh / 3.6
        doppler = speed * config.carrier_frequency_ghz * 1e9 / SPEED_OF_LIGHT
        self.fading = FastFading((n_ues, deployment.n_cells, deployment.n_beams),
                                 config.rician_k_db, doppler, config.time_step_ms / 1000.0,
                                 streams.get("fading"), enabled=config.fast_fading)
        self.noise_dbm = thermal_noise_dbm(config.bandwidth_mhz, config.noise_figure_db)

    def step(self, distance_m: np.ndarray) -> None:
        self.shadow.step(distance_m)
        self.fading.step()

    def geometry(self, xy: np.ndarray):
        """Site-relative distances and angles, each shaped (U, S)."""
        d = self.dep.site_xy[None, :, :] - xy[:, None, :]
        d2d = np.hypot(d[..., 0], d[..., 1])
        dh = self.dep.bs_height_m - self.config.ue_height_m
        d3d = np.hypot(d2d, dh)
        az_to_site = np.degrees(np.arctan2(d[..., 1], d[..., 0]))
        depression = np.degrees(np.arctan2(dh, d2d))
        return d2d, d3d, az_to_site, depression

    def tx_gain(self, az_to_site: np.ndarray, depression: np.ndarray) -> np.ndarray:
        """(U, C, B) transmit beam gain towards each UE."""
        cs = self.dep.cell_site
        az_from_cell = az_to_site[:, cs] + 180.0 - self.dep.cell_boresight_deg[None, :]
        d_az = _wrap_sq(az_from_cell[..., None] - self.dep.beam_phi_deg)
        d_el = (90.0 + depression[:, cs])[..., None] - self.dep.beam_theta_deg
        loss = 12.0 * (d_az / self.hpbw_az) ** 2 + 12.0 * (d_el / self.hpbw_el) ** 2
        return self.peak - np.minimum(loss, TX_SIDELOBE_FLOOR_DB)

    def rx_gain(self, az_to_site: np.ndarray, depression: np.ndarray,
                heading: np.ndarray) -> np.ndarray:
        """(U, S, P) panel gain towards each site."""
        if self.isotropic:
            return np.zeros(az_to_site.shape + (1,))
        boresight = heading[:, None] + self.panel_offsets[None, :]
        d_az = _wrap_sq(az_to_site[..., None] - boresight[:, None, :])
        d_el = (-depression + (90.0 - self.config.panel_elevation_deg))[..., None]
        return rx_panel_gain(d_el, d_az)

    def los_state(self, d2d: np.ndarray):
        """LOS probability per (UE, site) that scales the fast-fading
        K-factor; all ones when ``fading_k_mode`` is ``"fixed"``."""
        cfg = self.config
        if cfg.fading_k_mode == "fixed" or cfg.los_mode == "los":
            return np.ones_like(d2d)
        if cfg.los_mode == "nlos":
            return np.zeros_like(d2d)
        return los_probability(d2d)

    def received_power(self, xy: np.ndarray, heading: np.ndarray) -> np.ndarray:
        """Instantaneous received power in dBm, shape (U, C, B, P)."""
        link, rxg = self.components(xy, heading)
        return link[..., None] + rxg[:, :, None, :]

    def components(self, xy: np.ndarray, heading: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Received power split into the panel-independent part (U, C, B) in
        dBm and the panel gain (U, C, P) in dBi; their broadcast sum is
        :meth:`received_power`."""
        d2d, d3d, az, dep = self.geometry(xy)
        pl = path_loss(d3d, self.config.carrier_frequency_ghz, d2d, los=self.config.los_mode)
        site_term = -pl - self.shadow.value - self.config.penetration_loss_db  # (U, S)
        cs = self.dep.cell_site
        link = self.config.tx_power_dbm + self.tx_gain(az, dep) + site_term[:, cs, None] \
            + self.fading.gain_db(self.los_state(d2d)[:, cs])  # (U, C, B)
        rxg = self.rx_gain(az, dep, heading)[:, cs, :]  # (U, C, P)
        return link, rxg
