"""Acceptance gate: one test per criterion, one printed line per check.

Settings mirror the long-run experiment defaults (tau = 0.01, omega = 20,
horizon 1000; the lattice runs at tau = 0.001). The order studies use a
gentler restraint (omega = 5) so the fixed step ladder sits inside the
asymptotic regime wherever double precision allows a measurement at all.
"""

import time

import numpy as np
import pytest

import ksplit
from ksplit import cli, verify

OMEGA = 20.0
ORDER_TAUS = (0.02, 0.01, 0.005, 0.0025)
ORDER_OMEGA = 5.0
ORDER_BANDS = {"ksym1": (1.0, 0.2), "ksym2": (2.0, 0.2), "ksym4": (4.0, 0.5),
               "rk3": (3.0, 0.3), "rk5": (5.0, 0.5)}


def report(criterion, name, value, requirement, ok):
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {criterion}] {name}: measured={value}  require {requirement}  {status}")
    return ok


@pytest.fixture(scope="session")
def paper_runs(all_models):
    """Long-horizon trajectories shared by the energy/coherence/orbit criteria."""
    model1, al4, gyro = all_models
    t0 = time.perf_counter()
    runs = {}
    plan = [
        ("model1", model1, "ksym2", 0.01, 1000.0, 1),
        ("model1", model1, "ksym4", 0.01, 1000.0, 1),
        ("model1", model1, "rk3", 0.01, 1000.0, 1),
        ("al", al4, "ksym2", 0.001, 1000.0, 10),
        ("al", al4, "ksym4", 0.001, 1000.0, 10),
        ("gyro", gyro, "ksym2", 0.01, 1000.0, 1),
        ("gyro", gyro, "ksym4", 0.01, 1000.0, 1),
        ("gyro", gyro, "rk3", 0.01, 1000.0, 1),
    ]
    for key, model, method, tau, t_final, stride in plan:
        spec = ksplit.make_extension(model, omega=OMEGA)
        runs[(key, method)] = ksplit.integrate_method(
            model, spec, method, model.default_initial, tau, t_final,
            record_every=stride)
    runs["elapsed"] = time.perf_counter() - t0
    return runs


def test_criterion_1_subflow_exactness():
    t0 = time.perf_counter()
    results = verify.suite_subflows(n_states=20, tau=0.01, substeps=10_000)
    elapsed = time.perf_counter() - t0
    failures = []
    for r in results:
        if "oracle" not in r.name:
            continue
        ok = report(1, r.name, f"{r.value:.3e}", "<= 1e-9", r.passed)
        if not ok:
            failures.append(r.name)
    report(1, "runtime", f"{elapsed:.1f}s", "< 60s", elapsed < 60.0)
    assert not failures, f"oracle residuals above 1e-9: {failures}"
    assert elapsed < 60.0


def test_criterion_2_per_subflow_conservation():
    results = verify.suite_subflows(n_states=20, tau=0.01, substeps=100)
    failures = []
    for r in results:
        if "conservation" not in r.name:
            continue
        ok = report(2, r.name, f"{r.value:.3e}", "<= 1e-12 relative", r.passed)
        if not ok:
            failures.append(r.name)
    assert not failures, f"subflows drifted off their own energy: {failures}"


def _order_slopes(model):
    spec = ksplit.make_extension(model, omega=ORDER_OMEGA)
    ref = ksplit.reference_solution(model, spec, model.default_initial, 1.0)
    slopes = {}
    for method in ORDER_BANDS:
        slopes[method] = ksplit.convergence_order(
            model, spec, method, ORDER_TAUS, 1.0, reference=ref)
    return slopes


def _assert_orders(criterion, label, slopes):
    failures = []
    for method, (target, band) in ORDER_BANDS.items():
        slope = slopes[method]
        ok = report(criterion, f"{label} {method} order",
                    f"{slope:.3f}", f"{target} +/- {band}", abs(slope - target) <= band)
        if not ok:
            failures.append(f"{method}: slope {slope:.3f} outside {target}+/-{band}")
    assert not failures, f"{label} order bands violated: {failures}"


def test_criterion_3_convergence_orders_model1(model1):
    t0 = time.perf_counter()
    slopes = _order_slopes(model1)
    elapsed = time.perf_counter() - t0
    report(3, "model1 runtime", f"{elapsed:.1f}s", "< 120s", elapsed < 120.0)
    # Known measurement limit, see the decisions ledger: the fifth-order
    # baseline's global error on this smooth model is below the attainable
    # double-precision reference floor (~1e-12) for most of the pinned
    # ladder, so its fitted slope cannot reach the stated band.
    _assert_orders(3, "model1", slopes)


def test_criterion_3_convergence_orders_ablowitz_ladik(al4):
    t0 = time.perf_counter()
    slopes = _order_slopes(al4)
    elapsed = time.perf_counter() - t0
    report(3, "lattice runtime", f"{elapsed:.1f}s", "< 120s", elapsed < 120.0)
    # Known measurement limit, see the decisions ledger: at the pinned ladder
    # the lattice (gradients ~ 1/h^2 = 16) keeps the order-1/2/3 methods far
    # outside their asymptotic range (errors ~ 1e-1 on a state of scale 0.6),
    # so those slopes cannot reach the stated bands at these step sizes.
    _assert_orders(3, "lattice", slopes)


def test_criterion_4_structure_preservation(rng):
    results = verify.suite_poisson(n_states=10, tau=0.01, fd_step=1e-6)
    failures = []
    for r in results:
        if "residual ratio" in r.name:
            ok = report(4, r.name, f"{r.value:.3e}", "> 1 (rk above strang)",
                        r.value > 1.0)
        else:
            ok = report(4, r.name, f"{r.value:.3e}", "<= 1e-5", r.passed)
        if not ok:
            failures.append(r.name)
    assert not failures, f"structure residual checks failed: {failures}"


def test_criterion_5_long_run_energy(paper_runs):
    failures = []
    for key in ("model1", "al", "gyro"):
        for method in ("ksym2", "ksym4"):
            traj = paper_runs[(key, method)]
            series = ksplit.relative_energy_error_series(traj, "augmented")
            first, second = ksplit.two_half_maxima(traj.times, series)
            ok = report(5, f"{key} {method} energy boundedness",
                        f"halves ({first:.2e}, {second:.2e})",
                        "second <= 2x first", second <= 2.0 * first)
            if not ok:
                failures.append(f"{key}/{method}")
    for key in ("model1", "gyro"):
        rk = paper_runs[(key, "rk3")]
        rk_final = abs(ksplit.relative_energy_error_series(rk, "augmented")[-1])
        ks = paper_runs[(key, "ksym2")]
        ks_max = float(np.max(np.abs(
            ksplit.relative_energy_error_series(ks, "augmented"))))
        ok = report(5, f"{key} rk3 vs strang energy error",
                    f"rk3 final {rk_final:.2e} vs strang max {ks_max:.2e}",
                    ">= 5x", rk_final >= 5.0 * ks_max)
        if not ok:
            failures.append(f"{key}/rk3 ratio")
    elapsed = paper_runs["elapsed"]
    report(5, "shared long-run wall time", f"{elapsed:.1f}s", "< 300s", elapsed < 300.0)
    assert not failures, f"long-run energy criteria failed: {failures}"
    assert elapsed < 300.0


def test_criterion_6_copy_coherence(paper_runs):
    failures = []
    for key in ("model1", "al", "gyro"):
        for method in ("ksym2", "ksym4"):
            traj = paper_runs[(key, method)]
            div = ksplit.copy_divergence_series(traj)
            first, second = ksplit.two_half_maxima(traj.times, div)
            ok = report(6, f"{key} {method} copy divergence",
                        f"halves ({first:.2e}, {second:.2e})",
                        "second <= 2x first", second <= 2.0 * first)
            if not ok:
                failures.append(f"{key}/{method}")
    assert not failures, f"copy coherence criteria failed: {failures}"


def test_criterion_7_gyro_orbit_geometry(gyro):
    spec = ksplit.make_extension(gyro, omega=OMEGA)
    ks = ksplit.integrate_method(gyro, spec, "ksym2", gyro.default_initial,
                                 0.01, 2000.0, record_every=1)
    rk = ksplit.integrate_method(gyro, spec, "rk3", gyro.default_initial,
                                 0.01, 2000.0, record_every=1)
    _, dev = ksplit.orbit_radius_stats(ks, 0, 1)
    ok_closed = report(7, "strang orbit radius deviation", f"{dev:.4f}",
                       "<= 0.05", dev <= 0.05)
    growth = ksplit.orbit_radius_growth(rk, 0, 1)
    # The secular radius drift of the third-order baseline is inward on this
    # system (energy decays); its magnitude is the orbit-degradation signal.
    ok_drift = report(7, "rk3 secular radius drift vs strang deviation",
                      f"|{growth:+.2e}| vs {dev:.2e}",
                      "drift magnitude exceeds strang deviation",
                      abs(growth) > dev)
    assert ok_closed and ok_drift


def test_criterion_8_diagonal_exactness(all_models, rng):
    omega = 37.0  # arbitrary restraint strength; the diagonal must not feel it
    failures = []
    for model in all_models:
        spec = ksplit.make_extension(model, omega=omega)
        worst = 0.0
        for z in ksplit.sample_states(model, 100, rng):
            ext = ksplit.extend(z, spec.m)
            f_ext = ksplit.extended_vector_field(model, spec, ext)[0]
            f_orig = ksplit.vector_field(model, z)
            scale = max(1.0, float(np.max(np.abs(f_orig))))
            worst = max(worst, float(np.max(np.abs(f_ext - f_orig))) / scale)
        ok = report(8, f"{model.name} diagonal field exactness",
                    f"{worst:.3e}", "<= 1e-13", worst <= 1e-13)
        if not ok:
            failures.append(model.name)
    assert not failures


def test_criterion_9_cpu_time_tables(capsys):
    # Timings are reported, never asserted: they are hardware bound.
    for model in ("model1", "gyrocenter"):
        config = cli.RunConfig(model=model, tau=0.01, t_final=1000.0)
        assert cli.cmd_bench(config) == 0
        out = capsys.readouterr().out
        lines = [ln for ln in out.splitlines() if ln.strip()]
        header, timings = lines[-2], lines[-1]
        assert [h.strip() for h in header.split("|")] == \
            ["2ndKsym", "3rdRK", "4thKsym", "5thRK"]
        values = [float(t) for t in timings.split("|")]
        assert len(values) == 4
        with capsys.disabled():
            report(9, f"{model} four-method wall times", timings.strip(),
                   "reported only", True)
