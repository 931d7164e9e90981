"""UE-side measurement pipeline: L1 moving average, cell-quality
consolidation, L3 IIR smoothing and multi-panel selection.

All arithmetic is in the dB domain. Reductions are written as explicit
left-to-right sums so that the incremental pipeline is reproducible to the
last bit by a straight-line re-implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Panel

SCHEMES = ("isotropic", "mpue_a3", "mpue_a1")


@dataclass(frozen=True)
class FilterConfig:
    n_l1: int = 2
    omega: int = 2
    p_thr_dbm: float = -100.0
    n_str: int = 2
    k_cell: float = 4.0
    k_beam: float = 4.0

    @classmethod
    def from_scenario(cls, cfg) -> "FilterConfig":
        return cls(n_l1=cfg.n_l1, omega=cfg.omega, p_thr_dbm=cfg.p_thr_dbm,
                   n_str=cfg.n_str, k_cell=cfg.k_cell, k_beam=cfg.k_beam)

    @property
    def alpha_cell(self) -> float:
        return iir_alpha(self.k_cell)

    @property
    def alpha_beam(self) -> float:
        return iir_alpha(self.k_beam)


def iir_alpha(k: float) -> float:
    """Forgetting factor (1/2)^(k/4) of the L3 filter."""
    return 0.5 ** (k / 4.0)


def l1_filter(history: Sequence) -> np.ndarray | float:
    """Mean of the last ``n_l1`` raw samples, oldest first."""
    if len(history) == 0:
        raise ValueError("L1 filter needs at least one sample")
    acc = history[0]
    for sample in history[1:]:
        acc = acc + sample
    return acc / len(history)


def derive_cell_quality(l1_beams, p_thr_dbm: float, n_str: int):
    """Consolidate per-beam L1 values (last axis) into one cell quality.

    Averages the ``n_str`` strongest beams above ``p_thr_dbm`` (fewer if
    fewer qualify); with no beam above threshold the strongest beam is used.
    """
    x = np.asarray(l1_beams, dtype=float)
    s = -np.sort(-x, axis=-1)
    take = min(n_str, x.shape[-1])
    acc = np.zeros(x.shape[:-1])
    count = np.zeros(x.shape[:-1])
    for i in range(take):
        above = s[..., i] > p_thr_dbm
        acc = acc + np.where(above, s[..., i], 0.0)
        count = count + above
    out = np.where(count > 0, acc / np.maximum(count, 1.0), s[..., 0])
    return float(out) if out.ndim == 0 else out


def l3_iir(prev, current, k: float | None = None, alpha: float | None = None):
    """One L3 IIR update; ``prev`` NaN marks an unstarted filter, whose
    first output equals its first input."""
    if alpha is None:
        alpha = iir_alpha(k)
    prev = np.asarray(prev, dtype=float)
    current = np.asarray(current, dtype=float)
    out = np.where(np.isnan(prev), current, alpha * current + (1.0 - alpha) * prev)
    return float(out) if out.ndim == 0 else out


def select_serving_panel(l1_link, current, o_p_db: float = 0.0):
    """Serving-panel decision from the serving beam's per-panel L1.

    ``l1_link`` has panels on its last axis. The UE leaves its current panel
    only if another one is stronger by more than ``o_p_db``; the incumbent
    wins ties.
    """
    x = np.asarray(l1_link, dtype=float)
    cur = np.asarray(current, dtype=int)
    best = np.argmax(x, axis=-1)
    best_val = np.take_along_axis(x, best[..., None], axis=-1)[..., 0]
    cur_val = np.take_along_axis(x, cur[..., None], axis=-1)[..., 0]
    out = np.where(best_val > cur_val + o_p_db, best, cur)
    return int(out) if out.ndim == 0 else out


def select_best_panel(l1_cell):
    """Panel holding the strongest L1 beam-panel value of a cell.

    ``l1_cell`` is shaped ``(..., B, P)``; ties go to the lowest panel index.
    """
    x = np.asarray(l1_cell, dtype=float)
    out = np.argmax(x.max(axis=-2), axis=-1)
    return int(out) if out.ndim == 0 else out


def a1_scan_panel(ssb_index: int, order: Sequence[int] = (2, 1, 3)) -> Panel:
    """Panel scanned at SSB ``ssb_index`` under the round-robin scheme;
    ``order`` holds 1-based panel numbers."""
    return Panel.from_number(order[ssb_index % len(order)])


class MeasurementLattice:
    """Raw, L1 and L3 measurements for a UE population.

    Arrays are indexed ``[ue, cell, beam, panel]``; the isotropic UE has a
    single panel. Under ``mpue_a1`` only the scanned panel's raw values are
    refreshed at each SSB; the others keep their last measured value and
    flow stale into every downstream filter.
    """

    def __init__(self, n_ues: int, n_cells: int, n_beams: int, n_panels: int,
                 filters: FilterConfig, scheme: str = "isotropic",
                 scan_order: Sequence[int] = (2, 1, 3)) -> None:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown measurement scheme {scheme!r}")
        if (scheme == "isotropic") != (n_panels == 1):
            raise ValueError("isotropic scheme needs exactly one panel, MPUE schemes three")
        self.filters = filters
        self.scheme = scheme
        self.scan_order = tuple(scan_order)
        shape = (n_ues, n_cells, n_beams, n_panels)
        self.raw = np.full(shape, np.nan)
        self.raw_time = np.full(n_panels, np.nan)
        self.window: list[np.ndarray] = []
        self.l1 = np.full(shape, np.nan)
        self.best_panel = np.zeros((n_ues, n_cells), dtype=int)
        self.l1_beam = np.full(shape[:3], np.nan)
        self.l1_cell = np.full(shape[:2], np.nan)
        self.l3_cell = np.full(shape[:2], np.nan)
        self.l3_beam = np.full(shape[:3], np.nan)

    def acquire(self, rsrp: np.ndarray, now_ms: float = 0.0) -> None:
        """Initial cell search: every panel measured once before the first SSB."""
        self.raw = np.array(rsrp, dtype=float, copy=True)
        self.raw_time[:] = now_ms

    def refresh_panels(self, ssb_index: int) -> list[int]:
        if self.scheme == "mpue_a1":
            return [int(a1_scan_panel(ssb_index, self.scan_order))]
        return list(range(self.raw.shape[-1]))

    def update(self, rsrp: np.ndarray, ssb_index: int, now_ms: float) -> None:
        """Process one SSB instant given the instantaneous RSRP (U, C, B, P)."""
        panels = self.refresh_panels(ssb_index)
        if len(panels) == self.raw.shape[-1]:
            self.raw = np.array(rsrp, dtype=float, copy=True)
        else:
            self.raw = self.raw.copy()
            self.raw[..., panels] = rsrp[..., panels]
            if np.isnan(self.raw).any():
                # no initial acquisition: unscanned panels start from the scanned one
                fill = rsrp[..., panels[0]][..., None]
                self.raw = np.where(np.isnan(self.raw), fill, self.raw)
        self.raw_time[panels] = now_ms
        self._filter(self.raw)

    def _filter(self, raw: np.ndarray) -> None:
        f = self.filters
        if not self.window:
            self.window = [raw] * f.n_l1
        else:
            self.window = self.window[1:] + [raw]
        self.l1 = l1_filter(self.window)
        self.best_panel = select_best_panel(self.l1)
        self.l1_beam = np.take_along_axis(self.l1, self.best_panel[:, :, None, None], axis=-1)[..., 0]
        self.l1_cell = derive_cell_quality(self.l1_beam, f.p_thr_dbm, f.n_str)
        self.l3_cell = l3_iir(self.l3_cell, self.l1_cell, alpha=f.alpha_cell)
        self.l3_beam = l3_iir(self.l3_beam, self.l1_beam, alpha=f.alpha_beam)
