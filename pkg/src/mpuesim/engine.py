"""Discrete-time simulation loop and parameter sweeps.

Per time step the phases run in a fixed order:

1. channel (UE motion, shadowing, fast fading, received power)
2. measurements (SSB instants only: raw refresh, L1, cell quality, L3)
3. serving-panel selection (SSB instants, MPUE only)
4. beam management (SSB instants)
5. A3 evaluation and HO command (SSB instants); re-establishment
   completion, link SINR, HO execution
6. beam failure detection, radio link monitoring, beam failure recovery
7. KPI accrual (outage)
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .geometry import MobilityModel
from .kpi import (CSV_COLUMNS, HoHistoryEntry, KpiReport, OutageAccumulator, classify_fast_ho,
                  finalize, format_pct)
from .measurement import FilterConfig, MeasurementLattice, select_serving_panel
from .procedures import (A3Trigger, BeamFailureDetector, BeamFailureRecovery, BeamSwitcher,
                         HandoverExecution, RadioLinkMonitor, UeMode, prepare_handover)
from .radio import ChannelModel, InterferenceField
from .rng import RandomStreams
from .scenario import ScenarioConfig, build_deployment, spawn_ues

log = logging.getLogger(__name__)

EVENT_SCHEMA_VERSION = 1
DESK_SCALE = {"n_ues": 100, "sim_duration_s": 30.0}


@dataclass
class RunHandle:
    config_hash: str
    seed: int
    outputs: dict[str, str] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    n_steps: int = 0


class _CsvTrace:
    def __init__(self, path: Path, header: list[str]) -> None:
        self.fh = open(path, "w", newline="")
        self.writer = csv.writer(self.fh)
        self.writer.writerow(header)

    def rows(self, rows: Iterable) -> None:
        self.writer.writerows(rows)

    def close(self) -> None:
        self.fh.close()


@dataclass(frozen=True)
class ControlPlane:
    """Handover parameters that may differ between planes sharing one
    channel realisation."""

    k_b: int
    o_a3_db: float
    t_ttt_ms: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "k_b", int(self.k_b))
        object.__setattr__(self, "o_a3_db", float(self.o_a3_db))
        object.__setattr__(self, "t_ttt_ms", float(self.t_ttt_ms))

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "ControlPlane":
        return cls(cfg.k_b, cfg.o_a3_db, cfg.t_ttt_ms)


class Simulation:
    """One seeded run of the mobility scenario.

    The channel, the UE motion and the measurement pipeline do not depend
    on handover decisions, so several control planes (different ``k_b``,
    A3 offset or TTT) can share them. Each plane keeps its own copy of the
    per-UE control state in rows ``plane * n_ues + ue``, and every plane
    produces exactly the report of a standalone run with its parameters.

    Parameters
    ----------
    config : ScenarioConfig
    planes : sequence of ControlPlane, optional
        Defaults to the single plane described by ``config``.
    record_events : bool
        Keep the event log in ``self.events`` (single plane only).
    trace_dir : Path, optional
        Directory for the optional trace CSVs.
    traces : iterable of str
        Any of ``{"motion", "links", "meas"}`` (single plane only).
    """

    def __init__(self, config: ScenarioConfig, planes: Iterable[ControlPlane] | None = None,
                 record_events: bool = True, trace_dir: Path | None = None,
                 traces: Iterable[str] = ()) -> None:
        self.cfg = cfg = config
        self.planes = list(planes) if planes is not None else [ControlPlane.from_config(cfg)]
        traces = list(traces)
        if len(self.planes) > 1 and (record_events or traces):
            raise ValueError("event logs and traces need a single control plane")
        for pl in self.planes:
            cfg.replace(k_b=pl.k_b, o_a3_db=pl.o_a3_db, t_ttt_ms=pl.t_ttt_ms)  # validates
        self.dep = build_deployment(cfg)
        self.streams = RandomStreams(cfg.rng_seed)
        n = cfg.n_ues
        self.channel = ChannelModel(cfg, self.dep, n, self.streams)
        ues = spawn_ues(cfg, self.dep, self.streams, self.channel)
        self.mobility = MobilityModel([u.motion for u in ues], self.dep.region,
                                      self.streams.per_index("waypoint", n))
        self.dt = cfg.time_step_ms
        self.mpue = cfg.n_panels > 1

        n_planes = len(self.planes)
        rows = n * n_planes
        self.n_rows = rows
        self.row_ue = np.tile(np.arange(n), n_planes)
        self.k_b = np.repeat([pl.k_b for pl in self.planes], n)
        o_a3 = np.repeat([pl.o_a3_db for pl in self.planes], n).astype(float)
        t_ttt = np.repeat([pl.t_ttt_ms for pl in self.planes], n).astype(float)

        self.cell = np.tile([u.serving_cell for u in ues], n_planes)
        self.beam = np.tile([u.serving_beam for u in ues], n_planes)
        self.panel = np.tile([u.serving_panel for u in ues], n_planes)
        self.mode = np.full(rows, int(UeMode.CONNECTED))
        self.source_cell = np.full(rows, -1)
        self.reest_ready = np.full(rows, -1)

        self.meas = MeasurementLattice(n, self.dep.n_cells, self.dep.n_beams, cfg.n_panels,
                                       FilterConfig.from_scenario(cfg), cfg.ue_model,
                                       cfg.a1_scan_order)
        self.a3 = A3Trigger(rows, self.dep.n_cells, o_a3, t_ttt)
        self.hoexec = HandoverExecution(rows, cfg.gamma_out_db, cfg.t_hof_ms,
                                        cfg.ho_interruption_ms, self.dt)
        self.switcher = BeamSwitcher(rows, self.dep.n_beams, cfg.n_rep, cfg.o_b_db,
                                     cfg.l2_alpha)
        self.bfd = BeamFailureDetector(rows, cfg.gamma_out_db, cfg.c_bfi_max, cfg.t_bfd_ms,
                                       cfg.rlq_alpha)
        self.bfr = BeamFailureRecovery(rows, cfg.gamma_out_db, cfg.n_rach, cfg.t_rach_ms)
        self.rlm = RadioLinkMonitor(rows, cfg.gamma_out_db, cfg.gamma_in_db, cfg.t_rlf_ms,
                                    cfg.rlm_alpha)
        self.outage = OutageAccumulator(rows)

        self.record_events = record_events
        self.events: list[dict] = []
        self.history: list[list[HoHistoryEntry]] = [[] for _ in range(rows)]
        self.breaks: list[list[float]] = [[] for _ in range(rows)]
        self.n_hof = np.zeros(rows, dtype=np.int64)
        self.n_rlf_timer = np.zeros(rows, dtype=np.int64)
        self.n_rlf_bfr = np.zeros(rows, dtype=np.int64)
        self.step_index = 0
        self.last_sinr = np.full(rows, np.nan)

        self._traces: dict[str, _CsvTrace] = {}
        if traces:
            trace_dir = Path(trace_dir or ".")
            trace_dir.mkdir(parents=True, exist_ok=True)
            headers = {
                "motion": ["time", "ue_id", "x", "y", "heading"],
                "links": ["time", "ue", "cell", "beam", "panel", "rsrp", "sinr"],
                "meas": ["time", "ue", "cell", "l3_cell_quality"],
            }
            for name in traces:
                self._traces[name] = _CsvTrace(trace_dir / f"trace_{name}.csv", headers[name])

        self.link, self.rxg = self.channel.components(self.mobility.xy, self.mobility.heading)
        self.meas.acquire(self.full_rsrp(), 0.0)

    # ------------------------------------------------------------------ #

    def full_rsrp(self) -> np.ndarray:
        """Received power on every (cell, beam, panel), shape (U, C, B, P)."""
        return self.link[..., None] + self.rxg[:, :, None, :]

    def _event(self, kind: str, step: int, rows, **cols) -> None:
        if not self.record_events:
            return
        t = step * self.dt / 1000.0
        for r in np.flatnonzero(rows):
            ev = {"t": t, "step": step, "ue": int(r), "event": kind}
            for k, v in cols.items():
                ev[k] = int(v[r])
            self.events.append(ev)

    def _reset_link(self, mask: np.ndarray, sinr: np.ndarray) -> None:
        self.a3.reset(mask)
        self.switcher.reset(mask)
        self.bfd.reset(mask, sinr)
        self.bfr.stop(mask)
        self.rlm.reset(mask, sinr)

    def _fail(self, mask: np.ndarray, step: int) -> None:
        self.mode[mask] = int(UeMode.REESTABLISHING)
        self.reest_ready[mask] = step + self.cfg.steps(self.cfg.reestablish_delay_ms)
        self.hoexec.stop(mask)
        self.bfr.stop(mask)
        self.a3.reset(mask)

    def _handover_command(self, cmd: np.ndarray, target: np.ndarray) -> None:
        """Move commanded rows to the target cell: the CFRA-prepared beam
        with the strongest L1 value and the panel seeing it best."""
        rows = np.flatnonzero(cmd)
        ue = self.row_ue[rows]
        c = target[rows]
        prepared = prepare_handover(self.meas.l3_beam[ue, c], self.cfg.n_prep)
        l1_prep = np.take_along_axis(self.meas.l1_beam[ue, c], prepared, axis=1)
        b = prepared[np.arange(len(rows)), np.argmax(l1_prep, axis=1)]
        p = np.argmax(self.meas.l1[ue, c, b, :], axis=1)
        self.source_cell[rows] = self.cell[rows]
        self.cell[rows], self.beam[rows], self.panel[rows] = c, b, p

    def step(self) -> None:
        cfg = self.cfg
        n = self.step_index
        now = n * self.dt
        ue = self.row_ue
        rows = np.arange(self.n_rows)

        # 1. channel
        if n > 0:
            moved = self.mobility.step(self.dt / 1000.0)
            self.channel.step(moved)
            self.link, self.rxg = self.channel.components(self.mobility.xy,
                                                          self.mobility.heading)
        linked = self.mode != UeMode.REESTABLISHING
        connected = self.mode == UeMode.CONNECTED

        if n % cfg.omega == 0:
            # 2. measurements
            self.meas.update(self.full_rsrp(), n // cfg.omega, now)
            l1 = self.meas.l1
            # 3. serving panel
            if self.mpue:
                new_panel = select_serving_panel(l1[ue, self.cell, self.beam, :], self.panel,
                                                 cfg.o_p_db)
                changed = linked & (new_panel != self.panel)
                self.panel = np.where(linked, new_panel, self.panel)
                self._event("panel_switch", n, changed, cell=self.cell, beam=self.beam,
                            panel=self.panel)
            # 4. beam management on the serving panel
            l1_serving = l1[ue, self.cell, :, self.panel]
            new_beam = self.switcher.update(l1_serving, self.beam,
                                            active=connected & ~self.bfr.running)
            sw = new_beam >= 0
            self.beam = np.where(sw, new_beam, self.beam)
            self._event("beam_switch", n, sw, cell=self.cell, beam=self.beam, panel=self.panel)
            # 5. A3 and HO command
            target = self.a3.update(self.meas.l3_cell[ue], self.cell, now, active=connected)
            cmd = target >= 0
            if cmd.any():
                self._event("report", n, cmd, cell=target, from_cell=self.cell)
                self._handover_command(cmd, target)
                self.mode[cmd] = int(UeMode.EXECUTING)
                self.hoexec.start(cmd, now)
                self.bfr.stop(cmd)
                self._event("ho_cmd", n, cmd, cell=self.cell, beam=self.beam,
                            panel=self.panel, from_cell=self.source_cell)

        # 5b. re-establishment completes on the strongest cell and beam by L1
        ready = (self.mode == UeMode.REESTABLISHING) & (n >= self.reest_ready)
        if ready.any():
            l1b = self.meas.l1_beam
            best = np.argmax(l1b.reshape(l1b.shape[0], -1), axis=1)
            c, b = np.unravel_index(best, l1b.shape[1:])
            self.cell = np.where(ready, c[ue], self.cell)
            self.beam = np.where(ready, b[ue], self.beam)
            self.panel = np.where(ready, self.meas.best_panel[ue, self.cell], self.panel)
            self.mode[ready] = int(UeMode.CONNECTED)
            for r in np.flatnonzero(ready):
                self.breaks[r].append(now / 1000.0)

        # link SINR at the current panel
        field_ = InterferenceField(self.link, self.rxg, self.channel.noise_dbm)
        gamma = field_.sinr_db(ue, self.cell, self.beam, self.panel, self.k_b)
        if ready.any():
            self._reset_link(ready, gamma)
            self._event("reestablished", n, ready, cell=self.cell, beam=self.beam,
                        panel=self.panel)

        # HO execution
        success, hof = self.hoexec.update(gamma, now)
        if success.any():
            self.mode[success] = int(UeMode.CONNECTED)
            self._reset_link(success, gamma)
            for r in np.flatnonzero(success):
                self.history[r].append(HoHistoryEntry(int(ue[r]), now / 1000.0,
                                                      int(self.source_cell[r]),
                                                      int(self.cell[r])))
            self._event("ho_success", n, success, cell=self.cell, beam=self.beam,
                        panel=self.panel, from_cell=self.source_cell)
        if hof.any():
            self.n_hof += hof
            self._event("hof", n, hof, cell=self.cell, from_cell=self.source_cell)
            self._fail(hof, n)

        # 6. BFD / RLM / BFR on links that were already up this step
        steady = (self.mode == UeMode.CONNECTED) & ~success & ~ready
        rlf, _ = self.rlm.update(gamma, now, active=steady)
        if rlf.any():
            self.n_rlf_timer += rlf
            self._event("rlf_timer", n, rlf, cell=self.cell, beam=self.beam)
            self._fail(rlf, n)
        steady &= ~rlf
        _, failure = self.bfd.update(gamma, now, active=steady & ~self.bfr.running)
        if failure.any():
            self._event("bfd", n, failure, cell=self.cell, beam=self.beam)
            rec_beam = np.argmax(self.meas.l1_beam[ue, self.cell, :], axis=1)
            self.beam = np.where(failure, rec_beam, self.beam)
            self.bfr.start(failure, now)
            gamma = field_.sinr_db(ue, self.cell, self.beam, self.panel, self.k_b)
        _, recovered, bfr_failed = self.bfr.update(gamma, now)
        if recovered.any():
            self.bfd.reset(recovered, gamma)
            self._event("bfr_ok", n, recovered, cell=self.cell, beam=self.beam)
        if bfr_failed.any():
            self.n_rlf_bfr += bfr_failed
            self._event("rlf_bfr", n, bfr_failed, cell=self.cell, beam=self.beam)
            self._fail(bfr_failed, n)

        # 7. outage
        self.last_sinr = gamma
        flags = (self.mode != UeMode.CONNECTED) | (gamma < cfg.gamma_out_db)
        for r, start, length in self.outage.add(flags, n):
            self._outage_event(r, start, length)

        if self._traces:
            self._write_traces(n, field_.rsrp_dbm(ue, self.cell, self.beam, self.panel), gamma)
        self.step_index += 1

    def _outage_event(self, r: int, start: int, length: int) -> None:
        if self.record_events:
            self.events.append({"t": start * self.dt / 1000.0, "step": start, "ue": r,
                                "event": "outage", "n_steps": length})

    def _write_traces(self, n: int, rsrp: np.ndarray, gamma: np.ndarray) -> None:
        t = n * self.dt / 1000.0
        idx = range(self.n_rows)
        if "motion" in self._traces:
            m = self.mobility
            self._traces["motion"].rows(
                (t, u, m.xy[u, 0], m.xy[u, 1], m.heading[u]) for u in idx)
        if "links" in self._traces:
            self._traces["links"].rows(
                (t, u, self.cell[u], self.beam[u] + 1, self.panel[u] + 1, rsrp[u], gamma[u])
                for u in idx)
        if "meas" in self._traces and n % self.cfg.omega == 0:
            l3 = self.meas.l3_cell
            self._traces["meas"].rows(
                (t, u, c, l3[u, c]) for u in idx for c in range(l3.shape[1]))

    def run_all(self) -> list[KpiReport]:
        """Run to the configured duration; one report per control plane."""
        for _ in range(self.cfg.n_steps - self.step_index):
            self.step()
        return self.finish()

    def run(self) -> KpiReport:
        if len(self.planes) != 1:
            raise ValueError("run() needs a single control plane; use run_all()")
        return self.run_all()[0]

    def finish(self) -> list[KpiReport]:
        for r, start, length in self.outage.close(self.step_index):
            self._outage_event(r, start, length)
        for tr in self._traces.values():
            tr.close()
        self._traces = {}
        cfg = self.cfg
        t_fh_s = cfg.t_fh_ms / 1000.0
        dt_s = self.dt / 1000.0
        n = cfg.n_ues
        reports = []
        for i, pl in enumerate(self.planes):
            sl = slice(i * n, (i + 1) * n)
            n_pp = n_ss = n_success = 0
            for hist, brk in zip(self.history[sl], self.breaks[sl]):
                labels = classify_fast_ho(hist, t_fh_s, brk)
                n_success += len(hist)
                n_pp += labels.count("ping_pong")
                n_ss += labels.count("short_stay")
            report = KpiReport(
                n_success=n_success, n_hof=int(self.n_hof[sl].sum()),
                n_rlf_timer=int(self.n_rlf_timer[sl].sum()),
                n_rlf_bfr=int(self.n_rlf_bfr[sl].sum()),
                n_pingpong=n_pp, n_shortstay=n_ss, n_ues=n,
                simulated_s=self.step_index * dt_s,
                per_ue_outage_s=[int(s) * dt_s for s in self.outage.steps[sl]],
                scheme=cfg.ue_model, k_b=pl.k_b, o_a3=pl.o_a3_db, t_ttt=pl.t_ttt_ms,
                seed=cfg.rng_seed,
            )
            reports.append(finalize(report))
        return reports

    def meta(self) -> dict:
        cfg = self.cfg
        return {"event": "meta", "schema_version": EVENT_SCHEMA_VERSION,
                "n_ues": cfg.n_ues, "simulated_s": self.step_index * self.dt / 1000.0,
                "time_step_ms": cfg.time_step_ms, "t_fh_ms": cfg.t_fh_ms,
                "scheme": cfg.ue_model, "k_b": cfg.k_b, "o_a3": cfg.o_a3_db,
                "t_ttt": cfg.t_ttt_ms, "seed": cfg.rng_seed, "config_hash": cfg.config_hash()}

    def event_lines(self) -> list[str]:
        order = sorted(range(len(self.events)),
                       key=lambda i: (self.events[i]["step"], i))
        return [json.dumps(self.meta(), sort_keys=True)] + \
            [json.dumps(self.events[i], sort_keys=True) for i in order]


# --------------------------------------------------------------------------- #


def write_report_files(report: KpiReport, out_dir: Path) -> dict[str, str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "kpi_report.json"
    json_path.write_text(report.to_json() + "\n")
    csv_path = out_dir / "kpi_report.csv"
    csv_path.write_text(rows_to_csv([report.csv_row()]))
    return {"kpi_json": str(json_path), "kpi_csv": str(csv_path)}


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    extra = [k for k in (rows[0] if rows else {}) if k not in CSV_COLUMNS]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(CSV_COLUMNS) + extra)
    for row in rows:
        out = []
        for k in list(CSV_COLUMNS) + extra:
            v = row.get(k)
            out.append(format_pct(v) if k.startswith("pct") or k == "outage_pct" else v)
        writer.writerow(out)
    return buf.getvalue()


def run_simulation(config: ScenarioConfig, seed: int | None = None,
                   out_dir: str | Path | None = None, traces: Iterable[str] = (),
                   record_events: bool | None = None) -> KpiReport:
    """Run one simulation; with ``out_dir`` also write the report files and
    ``events.jsonl``."""
    if seed is not None:
        config = config.replace(rng_seed=seed)
    if record_events is None:
        record_events = out_dir is not None
    t0 = time.perf_counter()
    sim = Simulation(config, record_events=record_events,
                     trace_dir=Path(out_dir) if out_dir else None, traces=traces)
    report = sim.run()
    if out_dir is not None:
        out = Path(out_dir)
        handle = RunHandle(config.config_hash(), config.rng_seed, n_steps=sim.step_index)
        handle.outputs = write_report_files(report, out)
        ev_path = out / "events.jsonl"
        ev_path.write_text("\n".join(sim.event_lines()) + "\n")
        handle.outputs["events"] = str(ev_path)
        handle.wall_clock_s = time.perf_counter() - t0
        log.info("run %s seed %d: %d steps in %.1f s", handle.config_hash, handle.seed,
                 handle.n_steps, handle.wall_clock_s)
    return report


# --------------------------------------------------------------------------- #
# Sweeps


@dataclass(frozen=True)
class SweepSpec:
    o_a3: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    t_ttt: tuple[float, ...] = (80.0, 160.0, 240.0, 320.0)
    k_b: tuple[int, ...] = (1, 2, 4)
    scheme: tuple[str, ...] = ("isotropic", "mpue_a3", "mpue_a1")
    seeds: tuple[int, ...] = (0,)

    def points(self) -> list[tuple[str, int, float, float]]:
        """Grid points ordered by (scheme, k_b, o_a3, t_ttt)."""
        return list(itertools.product(self.scheme, self.k_b, self.o_a3, self.t_ttt))

    @classmethod
    def tradeoff_grid(cls, seeds: tuple[int, ...] = (0,)) -> "SweepSpec":
        """Both multi-panel schemes at k_b = 4 over the full offset and TTT grid."""
        return cls(k_b=(4,), scheme=("mpue_a3", "mpue_a1"), seeds=seeds)


def _run_group(args) -> tuple[str, int, list[KpiReport] | None, str | None]:
    base, scheme, seed, planes = args
    try:
        cfg = base.replace(ue_model=scheme, rng_seed=seed)
        sim = Simulation(cfg, planes=planes, record_events=False)
        return scheme, seed, sim.run_all(), None
    except Exception as exc:  # reported per point, the sweep carries on
        return scheme, seed, None, f"{type(exc).__name__}: {exc}"


def _mean(values: list) -> float | None:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def sweep_reports(spec: SweepSpec, base: ScenarioConfig,
                  parallelism: int = 1) -> dict[tuple, list]:
    """Per grid point, a list of ``(seed, report or None, error or None)``.

    All (k_b, o_a3, t_ttt) points of one scheme and seed share a single
    channel realisation and run as control planes of one simulation.
    """
    planes = [ControlPlane(k_b, o_a3, t_ttt)
              for k_b, o_a3, t_ttt in itertools.product(spec.k_b, spec.o_a3, spec.t_ttt)]
    jobs = [(base, scheme, seed, planes) for scheme in spec.scheme for seed in spec.seeds]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_group, jobs))
    else:
        results = [_run_group(j) for j in jobs]
    by_point: dict[tuple, list] = {p: [] for p in spec.points()}
    for scheme, seed, reports, err in results:
        for i, pl in enumerate(planes):
            point = (scheme, pl.k_b, pl.o_a3_db, pl.t_ttt_ms)
            by_point[point].append((seed, reports[i] if reports else None, err))
    return by_point


def run_sweep(spec: SweepSpec, base: ScenarioConfig, parallelism: int = 1) -> list[dict]:
    """Run every grid point for every seed and average KPIs across seeds.

    Rows come back ordered by (scheme, k_b, o_a3, t_ttt) whatever the
    degree of parallelism.
    """
    by_point = sweep_reports(spec, base, parallelism)
    rows = []
    for point in spec.points():
        scheme, k_b, o_a3, t_ttt = point
        entries = by_point[point]
        reports = [r for _, r, _ in entries if r is not None]
        errors = [f"seed {s}: {e}" for s, _, e in entries if e is not None]
        rows.append({
            "scheme": scheme, "k_b": k_b, "o_a3": o_a3, "t_ttt": t_ttt,
            "pct_success": _mean([r.pct_success for r in reports]),
            "pct_fast_ho": _mean([r.pct_fast_ho for r in reports]),
            "pct_failure": _mean([r.pct_failure for r in reports]),
            "outage_pct": _mean([r.outage_pct for r in reports]),
            "n_seeds": len(reports),
            "errors": "; ".join(errors),
        })
    return rows
