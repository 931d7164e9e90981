"""Mobility KPIs: handover outcomes, fast handovers and outage."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

NA = None  # JSON null / CSV "NA" for undefined percentages

CSV_COLUMNS = ("scheme", "k_b", "o_a3", "t_ttt", "pct_success", "pct_fast_ho",
               "pct_failure", "outage_pct")


@dataclass(frozen=True)
class HoHistoryEntry:
    ue: int
    time: float  # seconds
    from_cell: int
    to_cell: int


def classify_fast_ho(history: list[HoHistoryEntry], t_fh_s: float,
                     breaks: Iterable[float] = ()) -> list[str]:
    """Label each successful HO of one UE as ``ping_pong``, ``short_stay``
    or ``none``.

    A HO is fast when it leaves the cell entered by the previous HO less
    than ``t_fh_s`` later: back to the origin is a ping-pong, on to a third
    cell a short-stay. ``breaks`` are re-establishment times, which cut the
    chain.
    """
    breaks = sorted(breaks)
    labels = []
    prev = None
    for h in history:
        label = "none"
        if prev is not None and prev.to_cell == h.from_cell \
                and not any(prev.time < b <= h.time for b in breaks) \
                and h.time - prev.time < t_fh_s:
            label = "ping_pong" if h.to_cell == prev.from_cell else "short_stay"
        labels.append(label)
        prev = h
    return labels


class OutageAccumulator:
    """Per-UE outage counted in whole steps; a step counts once per UE
    whatever the number of simultaneous causes."""

    def __init__(self, n_ues: int) -> None:
        self.steps = np.zeros(n_ues, dtype=np.int64)
        self._open = np.full(n_ues, -1, dtype=np.int64)

    def add(self, flags, step: int) -> list[tuple[int, int, int]]:
        """Record one step of flags; returns closed intervals
        ``(ue, start_step, n_steps)``."""
        flags = np.asarray(flags, dtype=bool)
        self.steps += flags
        ending = ~flags & (self._open >= 0)
        closed = [(int(u), int(self._open[u]), step - int(self._open[u]))
                  for u in np.flatnonzero(ending)]
        self._open[ending] = -1
        self._open[flags & (self._open < 0)] = step
        return closed

    def close(self, step: int) -> list[tuple[int, int, int]]:
        closed = [(int(u), int(self._open[u]), step - int(self._open[u]))
                  for u in np.flatnonzero(self._open >= 0)]
        self._open[:] = -1
        return closed


def accumulate_outage(outage_ms: float, dt_ms: float, low_sinr: bool = False,
                      reestablishing: bool = False, interrupted: bool = False) -> float:
    """Add one step to a UE's outage if any cause is active."""
    return outage_ms + dt_ms if (low_sinr or reestablishing or interrupted) else outage_ms


def outage_percent(per_ue_outage_s: list[float], n_ues: int, simulated_s: float) -> float:
    return sum(per_ue_outage_s) / (n_ues * simulated_s) * 100.0


@dataclass
class KpiReport:
    n_success: int = 0
    n_hof: int = 0
    n_rlf: int = 0
    n_rlf_timer: int = 0
    n_rlf_bfr: int = 0
    n_pingpong: int = 0
    n_shortstay: int = 0
    attempts: int = 0
    pct_success: float | None = NA
    pct_fast_ho: float | None = NA
    pct_failure: float | None = NA
    outage_pct: float = 0.0
    n_ues: int = 0
    simulated_s: float = 0.0
    per_ue_outage_s: list[float] = field(default_factory=list)
    scheme: str = ""
    k_b: int = 0
    o_a3: float = 0.0
    t_ttt: float = 0.0
    seed: int = 0

    @property
    def n_failure(self) -> int:
        return self.n_hof + self.n_rlf

    @property
    def n_fast_ho(self) -> int:
        return self.n_pingpong + self.n_shortstay

    def counters(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in ("n_success", "n_hof", "n_rlf", "n_rlf_timer",
                                              "n_rlf_bfr", "n_pingpong", "n_shortstay",
                                              "attempts")}

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    def csv_row(self) -> dict[str, object]:
        return {"scheme": self.scheme, "k_b": self.k_b, "o_a3": self.o_a3, "t_ttt": self.t_ttt,
                "pct_success": self.pct_success, "pct_fast_ho": self.pct_fast_ho,
                "pct_failure": self.pct_failure, "outage_pct": self.outage_pct}


def finalize(report: KpiReport) -> KpiReport:
    """Fill attempts and percentages; undefined percentages stay ``None``."""
    report.n_rlf = report.n_rlf_timer + report.n_rlf_bfr
    report.attempts = report.n_success + report.n_hof + report.n_rlf
    if report.attempts:
        report.pct_success = 100.0 * report.n_success / report.attempts
        report.pct_failure = 100.0 * report.n_failure / report.attempts
        report.pct_fast_ho = 100.0 * report.n_fast_ho / report.attempts
    else:
        report.pct_success = report.pct_failure = report.pct_fast_ho = NA
    if report.n_ues and report.simulated_s:
        report.outage_pct = outage_percent(report.per_ue_outage_s, report.n_ues,
                                           report.simulated_s)
    return report


def format_pct(value: float | None) -> str:
    return "NA" if value is None or (isinstance(value, float) and math.isnan(value)) \
        else repr(float(value))


# --------------------------------------------------------------------------- #
# Event-log replay


def replay_events(lines: Iterable[str]) -> KpiReport:
    """Recompute a KPI report from an ``events.jsonl`` stream in one pass.

    Deliberately shares no code with the engine's bookkeeping so it can
    audit it.
    """
    meta: dict = {}
    counts = defaultdict(int)
    last_ho: dict[int, tuple[float, int, int]] = {}
    outage_steps: dict[int, int] = defaultdict(int)
    for line in lines:
        line = line.strip()
        if not line:
            continue
        ev = json.loads(line)
        kind = ev["event"]
        if kind == "meta":
            meta = ev
        elif kind == "ho_success":
            ue = ev["ue"]
            counts["n_success"] += 1
            prev = last_ho.get(ue)
            if prev is not None and prev[2] == ev["from_cell"] \
                    and ev["t"] - prev[0] < meta["t_fh_ms"] / 1000.0:
                if ev["cell"] == prev[1]:
                    counts["n_pingpong"] += 1
                else:
                    counts["n_shortstay"] += 1
            last_ho[ue] = (ev["t"], ev["from_cell"], ev["cell"])
        elif kind == "hof":
            counts["n_hof"] += 1
        elif kind == "rlf_timer":
            counts["n_rlf_timer"] += 1
        elif kind == "rlf_bfr":
            counts["n_rlf_bfr"] += 1
        elif kind == "reestablished":
            last_ho.pop(ev["ue"], None)
        elif kind == "outage":
            outage_steps[ev["ue"]] += ev["n_steps"]
    n_ues = meta.get("n_ues", 0)
    dt_s = meta.get("time_step_ms", 0.0) / 1000.0
    report = KpiReport(
        n_success=counts["n_success"], n_hof=counts["n_hof"],
        n_rlf_timer=counts["n_rlf_timer"], n_rlf_bfr=counts["n_rlf_bfr"],
        n_pingpong=counts["n_pingpong"], n_shortstay=counts["n_shortstay"],
        n_ues=n_ues, simulated_s=meta.get("simulated_s", 0.0),
        per_ue_outage_s=[outage_steps[u] * dt_s for u in range(n_ues)],
        scheme=meta.get("scheme", ""), k_b=meta.get("k_b", 0), o_a3=meta.get("o_a3", 0.0),
        t_ttt=meta.get("t_ttt", 0.0), seed=meta.get("seed", 0),
    )
    return finalize(report)
