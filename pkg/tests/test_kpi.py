"""Fast-handover classification, outage accounting, finalisation and the
event-log replay."""

from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpuesim.kpi import (CSV_COLUMNS, HoHistoryEntry, KpiReport, OutageAccumulator,
                         accumulate_outage, classify_fast_ho, finalize, format_pct,
                         outage_percent, replay_events)


def _hist(*hops):
    return [HoHistoryEntry(0, t, a, b) for t, a, b in hops]


def test_ping_pong_example():
    assert classify_fast_ho(_hist((5.78, 2, 6), (6.14, 6, 2)), 1.0) == ["none", "ping_pong"]


def test_short_stay_and_window():
    assert classify_fast_ho(_hist((1.0, 0, 1), (1.5, 1, 2)), 1.0) == ["none", "short_stay"]
    assert classify_fast_ho(_hist((1.0, 0, 1), (2.5, 1, 0)), 1.0) == ["none", "none"]


def test_reestablishment_breaks_chain():
    hops = _hist((1.0, 0, 1), (1.4, 1, 0))
    assert classify_fast_ho(hops, 1.0, breaks=[1.2]) == ["none", "none"]


def test_each_ho_labelled_once():
    hops = _hist((1.0, 0, 1), (1.3, 1, 0), (1.6, 0, 1))
    labels = classify_fast_ho(hops, 1.0)
    assert labels == ["none", "ping_pong", "ping_pong"]
    assert len(labels) == len(hops)


hop_lists = st.lists(st.tuples(st.floats(0.01, 2.0), st.integers(0, 3)), min_size=1, max_size=15)


def _chain(steps):
    t, cell, out = 0.0, 0, []
    for gap, nxt in steps:
        t += gap
        if nxt == cell:
            nxt = (cell + 1) % 4
        out.append(HoHistoryEntry(0, t, cell, nxt))
        cell = nxt
    return out


@given(hop_lists, st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_fast_ho_monotone_in_window(steps, w1, w2):
    hist = _chain(steps)
    lo, hi = sorted((w1, w2))
    fast = [sum(lab != "none" for lab in classify_fast_ho(hist, w)) for w in (lo, hi)]
    assert fast[0] <= fast[1] <= len(hist)


def test_outage_examples():
    assert outage_percent([0.0], 1, 10.0) == 0.0
    assert outage_percent([0.5], 1, 10.0) == pytest.approx(5.0, abs=1e-12)
    assert accumulate_outage(0.0, 10.0, low_sinr=True, reestablishing=True) == 10.0
    assert accumulate_outage(30.0, 10.0) == 30.0


def test_outage_accumulator_intervals():
    acc = OutageAccumulator(2)
    closed = []
    for step, flags in enumerate([[1, 0], [1, 1], [0, 1], [0, 0], [1, 0]]):
        closed += acc.add(flags, step)
    closed += acc.close(5)
    assert list(acc.steps) == [3, 2]
    assert sorted(closed) == [(0, 0, 2), (0, 4, 1), (1, 1, 2)]


def test_finalize_examples():
    r = finalize(KpiReport(n_success=95, n_hof=3, n_rlf_timer=1, n_rlf_bfr=1))
    assert r.attempts == 100 and r.n_rlf == 2
    assert r.pct_failure == 5.0 and r.pct_success == 95.0
    empty = finalize(KpiReport(n_ues=3, simulated_s=1.0, per_ue_outage_s=[0.0] * 3))
    assert empty.pct_failure is None and empty.pct_fast_ho is None
    assert format_pct(empty.pct_success) == "NA"
    assert json.loads(empty.to_json())["pct_success"] is None


def test_csv_row_columns():
    assert tuple(KpiReport().csv_row()) == CSV_COLUMNS


def _events(*evs, t_fh_ms=1000.0):
    meta = {"event": "meta", "n_ues": 2, "time_step_ms": 10.0, "simulated_s": 10.0,
            "t_fh_ms": t_fh_ms, "scheme": "mpue_a3", "k_b": 4, "o_a3": 2.0, "t_ttt": 80.0,
            "seed": 0}
    return [json.dumps(meta)] + [json.dumps(e) for e in evs]


def test_replay_counts():
    lines = _events(
        {"event": "ho_success", "t": 1.0, "ue": 0, "from_cell": 0, "cell": 1},
        {"event": "ho_success", "t": 1.5, "ue": 0, "from_cell": 1, "cell": 0},
        {"event": "ho_success", "t": 1.2, "ue": 1, "from_cell": 3, "cell": 4},
        {"event": "hof", "t": 2.0, "ue": 1},
        {"event": "reestablished", "t": 2.2, "ue": 1},
        {"event": "ho_success", "t": 2.5, "ue": 1, "from_cell": 4, "cell": 5},
        {"event": "rlf_timer", "t": 3.0, "ue": 0},
        {"event": "outage", "t": 0.0, "ue": 0, "n_steps": 50},
    )
    r = replay_events(lines)
    assert (r.n_success, r.n_hof, r.n_rlf, r.n_pingpong, r.n_shortstay) == (4, 1, 1, 1, 0)
    assert r.attempts == 6
    assert r.per_ue_outage_s == [0.5, 0.0]
    assert r.outage_pct == pytest.approx(2.5)
