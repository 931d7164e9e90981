"""Control-plane state machines, vectorised over the UE population.

Each machine keeps one slot per UE and advances all UEs in one call;
``active`` masks select the UEs a call applies to. Times are in ms.
"""

from __future__ import annotations

import enum

import numpy as np


class UeMode(enum.IntEnum):
    CONNECTED = 0
    EXECUTING = 1
    REESTABLISHING = 2


def _mask(active, n: int) -> np.ndarray:
    return np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)


class A3Trigger:
    """A3 entering condition with per-neighbour time-to-trigger.

    A neighbour's timer starts the first time
    ``l3[serving] + o_a3 < l3[neighbour]`` is observed and is cleared as soon
    as the condition fails at any evaluation instant.
    """

    def __init__(self, n_ues: int, n_cells: int, o_a3_db, t_ttt_ms) -> None:
        # scalars, or one value per UE row
        self.o_a3 = np.asarray(o_a3_db, dtype=float).reshape(-1, 1)
        self.t_ttt = np.asarray(t_ttt_ms, dtype=float).reshape(-1, 1)
        self.ttt_start = np.full((n_ues, n_cells), np.nan)

    def reset(self, mask) -> None:
        self.ttt_start[np.asarray(mask, dtype=bool)] = np.nan

    def update(self, l3_cell: np.ndarray, serving: np.ndarray, now: float,
               active=None) -> np.ndarray:
        """Returns the reported target cell per UE, -1 where nothing fired.

        When several neighbours expire at once the strongest is reported.
        """
        n_ues, n_cells = l3_cell.shape
        act = _mask(active, n_ues)
        serving = np.asarray(serving)
        own = np.take_along_axis(l3_cell, serving[:, None], axis=1)
        cond = (own + self.o_a3 < l3_cell) & act[:, None]
        cond[np.arange(n_ues), serving] = False
        started = np.where(np.isnan(self.ttt_start), now, self.ttt_start)
        self.ttt_start = np.where(cond, started, np.nan)
        fired = cond & (now - self.ttt_start >= self.t_ttt)
        score = np.where(fired, l3_cell, -np.inf)
        target = np.where(fired.any(axis=1), np.argmax(score, axis=1), -1)
        self.reset(target >= 0)
        return target


def prepare_handover(l3_beams: np.ndarray, n_prep: int) -> np.ndarray:
    """CFRA-prepared beams: the ``n_prep`` strongest by reported L3 beam
    measurement, lower beam index first on ties."""
    order = np.argsort(-np.asarray(l3_beams, dtype=float), axis=-1, kind="stable")
    return order[..., :n_prep]


class HandoverExecution:
    """Random access towards the target beam under the HOF timer.

    Access completes once the target SINR has stayed at or above
    ``gamma_out`` for ``interruption_ms`` in a row; any dip restarts the
    access. If the HOF timer expires first, a handover failure is declared.
    """

    def __init__(self, n_ues: int, gamma_out_db: float, t_hof_ms: float,
                 interruption_ms: float, dt_ms: float) -> None:
        self.gamma_out = gamma_out_db
        self.t_hof = t_hof_ms
        self.interruption = interruption_ms
        self.dt = dt_ms
        self.start_time = np.full(n_ues, np.nan)
        self.good_ms = np.zeros(n_ues)

    @property
    def running(self) -> np.ndarray:
        return ~np.isnan(self.start_time)

    def start(self, mask, now: float) -> None:
        mask = np.asarray(mask, dtype=bool)
        self.start_time[mask] = now
        self.good_ms[mask] = 0.0

    def stop(self, mask) -> None:
        mask = np.asarray(mask, dtype=bool)
        self.start_time[mask] = np.nan
        self.good_ms[mask] = 0.0

    def update(self, sinr_db: np.ndarray, now: float) -> tuple[np.ndarray, np.ndarray]:
        run = self.running & (now > np.nan_to_num(self.start_time, nan=np.inf))
        good = np.asarray(sinr_db) >= self.gamma_out
        self.good_ms = np.where(run, np.where(good, self.good_ms + self.dt, 0.0), self.good_ms)
        success = run & (self.good_ms >= self.interruption)
        hof = run & ~success & (now - self.start_time >= self.t_hof)
        self.stop(success | hof)
        return success, hof


class BeamSwitcher:
    """Network-side L2 filtering of reported L1 beams and the beam-switch rule."""

    def __init__(self, n_ues: int, n_beams: int, n_rep: int, o_b_db: float,
                 alpha: float) -> None:
        self.n_rep = n_rep
        self.o_b = o_b_db
        self.alpha = alpha
        self.l2 = np.full((n_ues, n_beams), np.nan)

    def reset(self, mask) -> None:
        self.l2[np.asarray(mask, dtype=bool)] = np.nan

    def report(self, l1_beams: np.ndarray) -> np.ndarray:
        """Boolean mask of the ``n_rep`` strongest beams per UE."""
        order = np.argsort(-l1_beams, axis=-1, kind="stable")[:, :self.n_rep]
        rep = np.zeros(l1_beams.shape, dtype=bool)
        np.put_along_axis(rep, order, True, axis=-1)
        return rep

    def update(self, l1_beams: np.ndarray, serving_beam: np.ndarray, active=None) -> np.ndarray:
        """Returns the new serving beam per UE, -1 where no switch happens."""
        n_ues = l1_beams.shape[0]
        act = _mask(active, n_ues)
        rep = self.report(l1_beams) & act[:, None]
        filt = np.where(np.isnan(self.l2), l1_beams,
                        self.alpha * l1_beams + (1.0 - self.alpha) * self.l2)
        self.l2 = np.where(rep, filt, self.l2)
        cand_val = np.where(rep, self.l2, -np.inf)
        cand = np.argmax(cand_val, axis=1)
        best = cand_val[np.arange(n_ues), cand]
        serving = np.asarray(serving_beam)
        cur = np.nan_to_num(self.l2[np.arange(n_ues), serving], nan=-np.inf)
        switch = act & (cand != serving) & (best > cur + self.o_b)
        return np.where(switch, cand, -1)


class BeamFailureDetector:
    """BFI counter and BFD timer driven by the filtered RLQ SINR."""

    def __init__(self, n_ues: int, gamma_out_db: float, c_bfi_max: int, t_bfd_ms: float,
                 alpha: float) -> None:
        self.gamma_out = gamma_out_db
        self.c_bfi_max = c_bfi_max
        self.t_bfd = t_bfd_ms
        self.alpha = alpha
        self.rlq = np.full(n_ues, np.nan)
        self.c_bfi = np.zeros(n_ues, dtype=int)
        self.deadline = np.full(n_ues, np.inf)

    def reset(self, mask, sinr_db=None) -> None:
        mask = np.asarray(mask, dtype=bool)
        self.rlq[mask] = np.nan if sinr_db is None else np.asarray(sinr_db)[mask]
        self.c_bfi[mask] = 0
        self.deadline[mask] = np.inf

    def update(self, sinr_db: np.ndarray, now: float, active=None):
        """Returns ``(out_of_sync, beam_failure)`` masks."""
        sinr = np.asarray(sinr_db, dtype=float)
        act = _mask(active, sinr.shape[0])
        filt = np.where(np.isnan(self.rlq), sinr,
                        self.alpha * sinr + (1.0 - self.alpha) * self.rlq)
        self.rlq = np.where(act, filt, self.rlq)
        expired = act & (self.c_bfi > 0) & (now >= self.deadline)
        self.c_bfi[expired] = 0
        self.deadline[expired] = np.inf
        oos = act & (self.rlq < self.gamma_out)
        self.c_bfi = np.where(oos, self.c_bfi + 1, self.c_bfi)
        self.deadline = np.where(oos, now + self.t_bfd, self.deadline)
        failure = oos & (self.c_bfi >= self.c_bfi_max)
        self.c_bfi[failure] = 0
        self.deadline[failure] = np.inf
        return oos, failure


class BeamFailureRecovery:
    """Up to ``n_rach`` random-access attempts on the recovery beam, spaced
    ``t_rach_ms`` apart, the first at detection time. An attempt succeeds
    if the instantaneous SINR on the recovery beam is at least ``gamma_out``."""

    def __init__(self, n_ues: int, gamma_out_db: float, n_rach: int, t_rach_ms: float) -> None:
        self.gamma_out = gamma_out_db
        self.n_rach = n_rach
        self.t_rach = t_rach_ms
        self.next_attempt = np.full(n_ues, np.nan)
        self.attempts = np.zeros(n_ues, dtype=int)

    @property
    def running(self) -> np.ndarray:
        return ~np.isnan(self.next_attempt)

    def start(self, mask, now: float) -> None:
        mask = np.asarray(mask, dtype=bool)
        self.next_attempt[mask] = now
        self.attempts[mask] = 0

    def stop(self, mask) -> None:
        mask = np.asarray(mask, dtype=bool)
        self.next_attempt[mask] = np.nan
        self.attempts[mask] = 0

    def update(self, sinr_db: np.ndarray, now: float):
        """Returns ``(attempted, recovered, failed)`` masks."""
        due = self.running & (now >= np.nan_to_num(self.next_attempt, nan=np.inf))
        ok = due & (np.asarray(sinr_db) >= self.gamma_out)
        self.attempts = np.where(due, self.attempts + 1, self.attempts)
        failed = due & ~ok & (self.attempts >= self.n_rach)
        retry = due & ~ok & ~failed
        self.next_attempt = np.where(retry, now + self.t_rach, self.next_attempt)
        self.stop(ok | failed)
        return due, ok, failed


class RadioLinkMonitor:
    """RLF timer with out-of-sync / in-sync hysteresis on the RLM SINR."""

    def __init__(self, n_ues: int, gamma_out_db: float, gamma_in_db: float, t_rlf_ms: float,
                 alpha: float) -> None:
        self.gamma_out = gamma_out_db
        self.gamma_in = gamma_in_db
        self.t_rlf = t_rlf_ms
        self.alpha = alpha
        self.rlm = np.full(n_ues, np.nan)
        self.timer_start = np.full(n_ues, np.nan)

    @property
    def running(self) -> np.ndarray:
        return ~np.isnan(self.timer_start)

    def reset(self, mask, sinr_db=None) -> None:
        mask = np.asarray(mask, dtype=bool)
        self.rlm[mask] = np.nan if sinr_db is None else np.asarray(sinr_db)[mask]
        self.timer_start[mask] = np.nan

    def update(self, sinr_db: np.ndarray, now: float, active=None):
        """Returns ``(rlf, recovered)`` masks."""
        sinr = np.asarray(sinr_db, dtype=float)
        act = _mask(active, sinr.shape[0])
        filt = np.where(np.isnan(self.rlm), sinr,
                        self.alpha * sinr + (1.0 - self.alpha) * self.rlm)
        self.rlm = np.where(act, filt, self.rlm)
        running = act & self.running
        recovered = running & (self.rlm > self.gamma_in)
        self.timer_start[recovered] = np.nan
        start = act & ~self.running & (self.rlm < self.gamma_out)
        self.timer_start[start] = now
        rlf = act & self.running & (now - self.timer_start >= self.t_rlf)
        self.timer_start[rlf] = np.nan
        return rlf, recovered
