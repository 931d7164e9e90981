"""Acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line with the
measured quantities before asserting, so ``pytest -v`` output doubles as
the acceptance report. Tolerances and thresholds are pinned below.
"""

from __future__ import annotations

import json
import time

import numpy as np
import pytest

from mpuesim import ControlPlane, ScenarioConfig, Simulation, SweepSpec, run_simulation
from mpuesim.engine import DESK_SCALE, sweep_reports
from mpuesim.kpi import replay_events
from mpuesim.measurement import FilterConfig, MeasurementLattice
from mpuesim.radio import rx_panel_gain
from oracles import (adversarial_sinr, random_raw_trace, reference_bfd, reference_bfr,
                     reference_filter_batch, reference_hof, reference_rlm)
from test_procedures import _run_bfd, _run_bfr, _run_hof, _run_rlm

# criterion 1
ORACLE_TRACES = 100
ORACLE_STEPS = 1000
ORACLE_GROUP = 5
ORACLE_MAX_ULP = 0
ORACLE_MAX_SECONDS = 10.0
# criterion 2
FROZEN_SSB_PERIODS = 3
# criteria 3-6
TREND_SEEDS = (0, 1, 2, 3, 4)
TREND_O_A3, TREND_T_TTT = 2.0, 80.0
MIN_ROBUSTNESS_PP = 3.0
MIN_FAST_HO_RATIO = 1.2
MAX_INVERSION_PP = 0.5
MAX_INVERSIONS_PER_LINE = 1
GRID_O_A3 = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
GRID_T_TTT = (80.0, 160.0, 240.0, 320.0)
# criterion 8
MIN_ADVERSARIAL_CASES = 1000
# criterion 9
PARALLELISM = (1, 8)
# criterion 10
GAIN_TOL_DB = 1e-12

SCHEMES = ("isotropic", "mpue_a3", "mpue_a1")


def _report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")


def _ulp_distance(a, b):
    a = np.asarray(a, dtype=np.float64).view(np.int64)
    b = np.asarray(b, dtype=np.float64).view(np.int64)
    return int(np.max(np.abs(a - b))) if a.size else 0


# --------------------------------------------------------------------------- #


def test_c01_filter_pipeline_matches_bruteforce(capsys):
    rng = np.random.default_rng(2024)
    worst = 0
    t0 = time.perf_counter()
    # traces are grouped into lattices of ORACLE_GROUP UEs sharing filter settings
    for g in range(ORACLE_TRACES // ORACLE_GROUP):
        scheme = SCHEMES[g % 3]
        n_panels = 1 if scheme == "isotropic" else 3
        params = dict(n_l1=int(rng.integers(1, 5)), p_thr=float(rng.uniform(-110, -70)),
                      n_str=int(rng.integers(1, 6)), k_cell=float(rng.choice([0, 1, 4, 8, 11])),
                      k_beam=float(rng.choice([0, 2, 4, 9])))
        trace = np.stack([random_raw_trace(rng, ORACLE_STEPS, n_cells=3, n_panels=n_panels)
                          for _ in range(ORACLE_GROUP)], axis=1)
        fc = FilterConfig(n_l1=params["n_l1"], p_thr_dbm=params["p_thr"], n_str=params["n_str"],
                          k_cell=params["k_cell"], k_beam=params["k_beam"])
        lat = MeasurementLattice(ORACLE_GROUP, 3, 12, n_panels, fc, scheme)
        lat.acquire(trace[0], 0.0)
        got_l1, got_c, got_b = [], [], []
        for i, t in enumerate(range(0, ORACLE_STEPS, 2)):
            lat.update(trace[t], i, 10.0 * t)
            got_l1.append(lat.l1)
            got_c.append(lat.l3_cell)
            got_b.append(lat.l3_beam)
        ref_l1, ref_c, ref_b = reference_filter_batch(trace, scheme, **params)
        worst = max(worst, _ulp_distance(got_l1, ref_l1), _ulp_distance(got_c, ref_c),
                    _ulp_distance(got_b, ref_b))
    elapsed = time.perf_counter() - t0
    ok = worst <= ORACLE_MAX_ULP and elapsed < ORACLE_MAX_SECONDS
    _report(capsys, 1, ok, f"{ORACLE_TRACES} traces x {ORACLE_STEPS} steps, max {worst} ULP, "
                           f"{elapsed:.1f} s (limit {ORACLE_MAX_SECONDS:.0f} s)")
    assert ok


def test_c02_frozen_channel_scheme_equivalence(capsys):
    base = ScenarioConfig(n_ues=20, ue_speed_kmh=0.0, fast_fading=False, shadow_fading=False,
                          sim_duration_s=0.4, rng_seed=9)
    a1 = Simulation(base.replace(ue_model="mpue_a1"), record_events=False)
    a3 = Simulation(base.replace(ue_model="mpue_a3"), record_events=False)
    mismatched = 0
    checked = 0
    for n in range(base.n_steps):
        a1.step()
        a3.step()
        if n % base.omega == 0 and n // base.omega >= FROZEN_SSB_PERIODS - 1:
            checked += 1
            mismatched += not np.array_equal(a1.meas.l3_cell, a3.meas.l3_cell)
    ok = checked > 0 and mismatched == 0
    _report(capsys, 2, ok, f"{checked} SSB instants after {FROZEN_SSB_PERIODS} periods, "
                           f"{mismatched} with any A1/A3 L3 difference")
    assert ok


# --------------------------------------------------------------------------- #
# desk-scale trend study shared by criteria 3-6


@pytest.fixture(scope="module")
def trend_study():
    """Mean KPIs over seeds: {(scheme, k_b, o_a3, t_ttt): (pct_failure, pct_fast_ho)}."""
    planes = [ControlPlane(1, TREND_O_A3, TREND_T_TTT), ControlPlane(2, TREND_O_A3, TREND_T_TTT)]
    planes += [ControlPlane(4, o, t) for o in GRID_O_A3 for t in GRID_T_TTT]
    acc: dict[tuple, list] = {}
    for scheme in SCHEMES:
        for seed in TREND_SEEDS:
            cfg = ScenarioConfig(ue_model=scheme, rng_seed=seed, **DESK_SCALE)
            for rep in Simulation(cfg, planes=planes, record_events=False).run_all():
                key = (scheme, rep.k_b, rep.o_a3, rep.t_ttt)
                acc.setdefault(key, []).append((rep.pct_failure, rep.pct_fast_ho))
    return {k: tuple(float(np.mean([v[i] for v in vals])) for i in range(2))
            for k, vals in acc.items()}


def test_c03_kb_degradation_trend(trend_study, capsys):
    fail = {(s, k): trend_study[(s, k, TREND_O_A3, TREND_T_TTT)][0]
            for s in SCHEMES for k in (1, 2, 4)}
    increase = {s: fail[(s, 4)] - fail[(s, 1)] for s in SCHEMES}
    strictly = all(fail[(s, 1)] < fail[(s, 2)] < fail[(s, 4)] for s in SCHEMES)
    ref_largest = all(increase["isotropic"] > increase[s] for s in ("mpue_a3", "mpue_a1"))
    ok = strictly and ref_largest
    detail = "; ".join(f"{s} {fail[(s, 1)]:.2f}/{fail[(s, 2)]:.2f}/{fail[(s, 4)]:.2f}% "
                       f"(+{increase[s]:.2f} pp)" for s in SCHEMES)
    _report(capsys, 3, ok, f"failures at k_b=1/2/4 over {len(TREND_SEEDS)} seeds: {detail}")
    assert ok


def test_c04_mpue_robustness(trend_study, capsys):
    f = {s: trend_study[(s, 4, TREND_O_A3, TREND_T_TTT)][0] for s in SCHEMES}
    gaps = {s: f["isotropic"] - f[s] for s in ("mpue_a3", "mpue_a1")}
    ok = all(g >= MIN_ROBUSTNESS_PP for g in gaps.values())
    _report(capsys, 4, ok, f"k_b=4 failures iso {f['isotropic']:.2f}%, "
                           f"A3 {f['mpue_a3']:.2f}% (-{gaps['mpue_a3']:.2f} pp), "
                           f"A1 {f['mpue_a1']:.2f}% (-{gaps['mpue_a1']:.2f} pp); "
                           f"need >= {MIN_ROBUSTNESS_PP} pp")
    assert ok


def test_c05_stale_measurement_fast_ho_excess(trend_study, capsys):
    a3 = trend_study[("mpue_a3", 4, TREND_O_A3, TREND_T_TTT)][1]
    a1 = trend_study[("mpue_a1", 4, TREND_O_A3, TREND_T_TTT)][1]
    ratio = a1 / a3 if a3 > 0 else float("inf")
    ok = a1 > a3 and ratio >= MIN_FAST_HO_RATIO
    _report(capsys, 5, ok, f"k_b=4 fast HOs A1 {a1:.2f}% vs A3 {a3:.2f}%, ratio {ratio:.3f} "
                           f"(need >= {MIN_FAST_HO_RATIO})")
    assert ok


def _monotone_violations(values, increasing):
    """Count inversions; a line fails with more than the allowed number or
    any inversion larger than the allowed size."""
    diffs = np.diff(values) if increasing else -np.diff(values)
    inv = diffs[diffs < 0]
    return len(inv) > MAX_INVERSIONS_PER_LINE or bool(np.any(-inv > MAX_INVERSION_PP)), len(inv)


def test_c06_sweep_tradeoff_monotonicity(trend_study, capsys):
    bad_lines, total_inv, lines = [], 0, 0
    for s in SCHEMES:
        fail = np.array([[trend_study[(s, 4, o, t)][0] for t in GRID_T_TTT] for o in GRID_O_A3])
        fast = np.array([[trend_study[(s, 4, o, t)][1] for t in GRID_T_TTT] for o in GRID_O_A3])
        for name, grid, inc in (("failure", fail, True), ("fast_ho", fast, False)):
            for axis_name, seqs in (("o_a3", grid.T), ("t_ttt", grid)):
                for j, seq in enumerate(seqs):
                    lines += 1
                    bad, n_inv = _monotone_violations(seq, inc)
                    total_inv += n_inv
                    if bad:
                        bad_lines.append(f"{s} {name} along {axis_name} line {j}")
    ok = not bad_lines
    _report(capsys, 6, ok, f"{lines} grid lines checked at k_b=4, {total_inv} small inversions, "
                           f"{len(bad_lines)} violating lines {bad_lines[:3]}")
    assert ok


# --------------------------------------------------------------------------- #


def test_c07_accounting_identities_and_replay(capsys):
    problems = []
    runs = 0
    for scheme in SCHEMES:
        for k_b in (1, 4):
            cfg = ScenarioConfig(n_ues=25, sim_duration_s=6.0, ue_model=scheme, k_b=k_b,
                                 rng_seed=11 + k_b)
            sim = Simulation(cfg)
            r = sim.run()
            runs += 1
            if r.attempts != r.n_success + r.n_hof + r.n_rlf:
                problems.append(f"{scheme}/{k_b} attempts")
            if r.n_pingpong + r.n_shortstay > r.n_success:
                problems.append(f"{scheme}/{k_b} fast > success")
            if not 0.0 <= r.outage_pct <= 100.0:
                problems.append(f"{scheme}/{k_b} outage range")
            again = replay_events(sim.event_lines())
            if again.counters() != r.counters() or again.per_ue_outage_s != r.per_ue_outage_s:
                problems.append(f"{scheme}/{k_b} replay")
    ok = not problems
    _report(capsys, 7, ok, f"{runs} runs, identities and event-log replay: "
                           f"{problems or 'all exact'}")
    assert ok


def test_c08_state_machine_properties(capsys):
    rng = np.random.default_rng(808)
    n = MIN_ADVERSARIAL_CASES
    violations = {}
    sinr = adversarial_sinr(rng, n, 30)
    violations["hof"] = sum(a != b for a, b in zip(
        _run_hof(sinr), [reference_hof(r, 0.0, 10.0, -8.0, 200.0, 50.0) for r in sinr.tolist()]))
    sinr = adversarial_sinr(rng, n, 80)
    got = _run_bfd(sinr)
    violations["bfd"] = sum(a != b for a, b in zip(
        got, [reference_bfd(r, 10.0, -8.0, 3, 60.0, 0.1) for r in sinr.tolist()]))
    violations["bfd_counter"] = sum(c > 3 for row in got for _, _, c in row)
    sinr = adversarial_sinr(rng, n, 12)
    violations["bfr"] = sum(a != b for a, b in zip(
        _run_bfr(sinr), [reference_bfr(r, 10.0, -8.0, 4, 20.0) for r in sinr.tolist()]))
    sinr = adversarial_sinr(rng, n, 200)
    got = _run_rlm(sinr, t_rlf=300.0, alpha=1.0)
    violations["rlm"] = sum(a != b for a, b in zip(
        got, [reference_rlm(r, 10.0, -8.0, -6.0, 300.0, 1.0) for r in sinr.tolist()]))
    for row in got:
        for k, (rlf, *_) in enumerate(row):
            if rlf and any(f > -6.0 for _, _, f, _ in row[k - 30:k + 1]):
                violations["rlm"] += 1
    off = _run_rlm(sinr, gamma_out=-np.inf, gamma_in=-np.inf, t_rlf=100.0, alpha=1.0)
    violations["no_rlf_at_-inf"] = sum(r for row in off for r, *_ in row)
    off = _run_bfd(sinr, gamma_out=-np.inf)
    violations["no_bfd_at_-inf"] = sum(f for row in off for _, f, _ in row)
    # TTT continuity is covered case-by-case against the reference in the
    # procedures suite; here a fresh batch of the same generator
    from test_procedures import _adversarial_l3, _run_a3
    from oracles import reference_a3
    l3 = _adversarial_l3(rng, n, 40, 3)
    serving = np.zeros((n, 40), dtype=int)
    got = _run_a3(l3, serving, 2.0, 80.0)
    times = [20.0 * k for k in range(40)]
    violations["a3"] = sum(reference_a3(l3[u].tolist(), [0] * 40, times, 2.0, 80.0) != list(got[u])
                           for u in range(n))
    total = sum(violations.values())
    ok = total == 0
    _report(capsys, 8, ok, f"{n} adversarial cases per machine (A3, HOF, BFD, BFR, RLM), "
                           f"violations {violations}")
    assert ok


def test_c09_determinism(tmp_path, capsys):
    cfg = ScenarioConfig(n_ues=20, sim_duration_s=3.0, ue_model="mpue_a1", k_b=4, rng_seed=99)
    run_simulation(cfg, out_dir=tmp_path / "a")
    run_simulation(cfg, out_dir=tmp_path / "b")
    same_run = (tmp_path / "a" / "kpi_report.json").read_bytes() == \
        (tmp_path / "b" / "kpi_report.json").read_bytes()
    spec = SweepSpec(o_a3=(2.0, 5.0), t_ttt=(80.0, 240.0), k_b=(1, 4), seeds=(0, 1))
    base = ScenarioConfig(n_ues=10, sim_duration_s=2.0)
    outputs = {}
    for par in PARALLELISM:
        by_point = sweep_reports(spec, base, parallelism=par)
        outputs[par] = [r.to_json() for p in spec.points() for _, r, _ in by_point[p]]
    same_par = len({json.dumps(v) for v in outputs.values()}) == 1
    ok = same_run and same_par
    _report(capsys, 9, ok, f"repeat run byte-identical: {same_run}; "
                           f"{len(outputs[PARALLELISM[0]])} sweep reports identical across "
                           f"parallelism {PARALLELISM}: {same_par}")
    assert ok


def test_c10_radiation_pattern(capsys):
    cases = {"boresight": ((0.0, 0.0), 5.0), "back": ((0.0, 180.0), -20.0),
             "hpbw_edge_az": ((0.0, 45.0), 2.0), "hpbw_edge_el": ((45.0, 0.0), 2.0)}
    errs = {k: abs(rx_panel_gain(*args) - want) for k, (args, want) in cases.items()}
    ok = max(errs.values()) <= GAIN_TOL_DB
    _report(capsys, 10, ok, f"max |error| {max(errs.values()):.1e} dB (tol {GAIN_TOL_DB})")
    assert ok
