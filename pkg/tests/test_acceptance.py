"""Acceptance suite: the nine operating-point criteria, each asserted at its
stated tolerance.  Every test prints one PASS/FAIL line (use -s to stream
them); wall-clock budgets are printed, not asserted.

The whole suite takes on the order of ten minutes on two cores; criteria 2,
4 and 5 carry the big sweeps.
"""

import math
import time

import numpy as np
import pytest

from ottosim.cycle import StrokeMode, initial_state, run_cycle
from ottosim.dynamics import (
    RampProtocol,
    adiabatic_map,
    eigenbasis_populations,
    propagate_lindblad,
    propagate_unitary,
)
from ottosim.model import EngineParams, ddi_coefficients, build_total_hamiltonian
from ottosim.sweep import run_sweep, spec_from_dict, write_csv

PI_HALF = math.pi / 2


def report(criterion: int, ok: bool, detail: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status} [{time.time() - t0:.0f}s] {detail}")


def noninteracting_params():
    return EngineParams(g=0.0, chi1=0.0, chi2=0.0, xi=1e6)


# Criterion 2 grid (also reused by criterion 9): defaults with finite
# heating at t1 = 50 and quasi-static strokes.
CRITERION2_SPEC = spec_from_dict({
    "axes": [{"name": "xi", "min": 0.17, "max": 0.20, "count": 61}],
    "t1": 50.0,
})


@pytest.fixture(scope="module")
def criterion2_rows():
    # single worker: criterion 9 compares these bytes against an 8-worker run
    return run_sweep(CRITERION2_SPEC, workers=1)


def first_engine_xi(rows):
    for row in rows:
        if row.engine_flag:
            return row.xi
    return None


def test_criterion_1_noninteracting_quasistatic_cycle():
    t0 = time.time()
    p = noninteracting_params()
    ddi = ddi_coefficients(p.xi, p.theta, p.Gamma)
    assert abs(ddi.gamma12) < 1e-6 and abs(ddi.omega12) < 1e-6

    ideal = run_cycle(p, StrokeMode(heating="full", unitary="adiabatic"))
    detected = run_cycle(p, StrokeMode(heating="steady", unitary="adiabatic"))

    targets = {"Q_h": 10.0 / 3.0, "Q_c": -5.0 / 3.0, "W_out": 5.0 / 3.0, "eta": 0.5}
    worst = max(
        abs(getattr(res, k) - v) for res in (ideal, detected) for k, v in targets.items()
    )
    ok = worst < 1e-4 and ideal.closure_defect < 1e-6 and detected.closure_defect < 1e-6
    report(1, ok, f"worst |error| = {worst:.2e} over ideal and detected routes", t0)
    assert ok


def test_criterion_2_engine_onset_boundary(criterion2_rows):
    t0 = time.time()
    onset = first_engine_xi(criterion2_rows)
    n_false = sum(1 for r in criterion2_rows if not r.engine_flag)

    # Diagnostic companion: the same grid in the ideal full-thermalization
    # limit, where the onset phenomenon does appear.
    full_spec = spec_from_dict({
        "mode": {"heating": "full", "unitary": "adiabatic"},
        "axes": [{"name": "xi", "min": 0.17, "max": 0.20, "count": 61}],
    })
    full_onset = first_engine_xi(run_sweep(full_spec, workers=2))

    ok = onset is not None and abs(onset - 0.176) <= 0.003
    report(
        2, ok,
        f"finite t1=50 sweep: onset = {onset} ({n_false} non-engine rows); "
        f"ideal full-thermalization onset = {full_onset} (target 0.176 +- 0.003)",
        t0,
    )
    assert ok, (
        f"engine onset at xi = {onset} (expected 0.176 +- 0.003). "
        f"At t1 = 50 the dissipator has not yet populated the antisymmetric "
        f"level whose weight drives the heat-absorbing boundary; even in the "
        f"ideal full-thermalization limit the flag flips at {full_onset}."
    )


def test_criterion_3_full_thermalization_finite_unitary_efficiencies():
    t0 = time.time()
    mode = StrokeMode(heating="full", unitary="finite")
    measured = {}
    for xi, target in ((0.19, 0.90), (0.2, 0.775), (0.25, 0.56)):
        res = run_cycle(EngineParams(xi=xi), mode, tau=10.0)
        measured[xi] = (res.eta, target)
    ok = all(abs(eta - target) <= 0.03 for eta, target in measured.values())
    detail = ", ".join(f"eta({xi}) = {eta:.4f} vs {target}" for xi, (eta, target) in measured.items())
    report(3, ok, detail, t0)
    assert ok, detail


def onset_time(xi: float, t_max: float) -> float | None:
    mode = StrokeMode(heating="finite", unitary="adiabatic")
    p = EngineParams(xi=xi)
    for t1 in np.arange(0.0, t_max + 1e-9, 0.05):
        res = run_cycle(p, mode, t1=float(t1))
        if res.W_out > 0.0:
            return float(t1)
    return None


def test_criterion_4_onset_time_contrast():
    t0 = time.time()
    onset_close = onset_time(0.19, 1.0)
    onset_far = onset_time(15.0, 10.0)
    ok_close = onset_close is not None and abs(onset_close - 0.1) <= 0.05
    ok_far = onset_far is not None and abs(onset_far - 6.0) <= 1.0
    ok = ok_close and ok_far
    report(
        4, ok,
        f"min t1 with W_out>0: xi=0.19 -> {onset_close} (target 0.1 +- 0.05), "
        f"xi=15 -> {onset_far} (target 6 +- 1)",
        t0,
    )
    assert ok, (
        f"onset(0.19) = {onset_close}, onset(15) = {onset_far}. With quasi-static "
        f"strokes every work contribution is non-negative once any heat is "
        f"absorbed, so positive output work appears at the first nonzero grid "
        f"point at xi = 15 as well."
    )


def test_criterion_5_oscillation_dissipation_correspondence():
    t0 = time.time()
    spec = spec_from_dict({
        "axes": [{"name": "xi", "min": 1.0, "max": 15.0, "count": 281}],
        "t1": 50.0,
    })
    rows = run_sweep(spec, workers=2)
    xi = np.array([r.xi for r in rows])
    eta = np.array([r.eta for r in rows])
    q_h = np.array([r.Q_h for r in rows])

    def local_maxima(y):
        return [i for i in range(1, len(y) - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]

    gamma = np.array([ddi_coefficients(x, PI_HALF, 0.1).gamma12 for x in xi])
    zeros = []
    for i in range(len(xi) - 1):
        if gamma[i] * gamma[i + 1] < 0:
            zeros.append(xi[i] - gamma[i] * (xi[i + 1] - xi[i]) / (gamma[i + 1] - gamma[i]))

    eta_peaks = [xi[i] for i in local_maxima(eta)]
    qh_peaks = [xi[i] for i in local_maxima(q_h)]
    cell = 0.05

    aligned = [p for p in eta_peaks if min(abs(p - z) for z in zeros) <= cell]
    qh_aligned = [p for p in qh_peaks if min(abs(p - z) for z in zeros) <= cell]
    ok = len(eta_peaks) >= 4 and len(aligned) == len(eta_peaks) and len(aligned) >= 4
    report(
        5, ok,
        f"eta peaks at {[round(float(p), 3) for p in eta_peaks]} "
        f"({len(aligned)} aligned with the {len(zeros)} decay zeros "
        f"{[round(float(z), 3) for z in zeros]}); "
        f"Q_h peaks {[round(float(p), 3) for p in qh_peaks]} ({len(qh_aligned)} aligned)",
        t0,
    )
    assert ok, (
        f"only {len(eta_peaks)} efficiency maxima exist on the grid (all "
        f"aligned with decay zeros), 4 are required; the oscillation does "
        f"survive in the heat uptake, whose maxima sit at {qh_peaks} "
        f"against zeros {zeros}."
    )


def test_criterion_6_sudden_limit_with_projection():
    t0 = time.time()
    mode = StrokeMode(heating="finite", unitary="sudden")
    res_close = run_cycle(EngineParams(xi=0.19), mode, t1=50.0)
    res_far = run_cycle(EngineParams(xi=100.0), mode, t1=50.0)
    ok = abs(res_close.eta - 0.35) <= 0.05 and abs(res_far.eta - 0.50) <= 0.05
    report(
        6, ok,
        f"eta(0.19) = {res_close.eta:.4f} vs 0.35 +- 0.05, "
        f"eta(100) = {res_far.eta:.4f} vs 0.50 +- 0.05",
        t0,
    )
    assert ok


def test_criterion_7_integrator_properties():
    t0 = time.time()
    p = EngineParams(xi=0.19)
    rho0 = initial_state(p)

    ref = propagate_lindblad(rho0, p, 2.0, dt=5e-4).final_state.matrix
    e_coarse = np.abs(propagate_lindblad(rho0, p, 2.0, dt=4e-3).final_state.matrix - ref).max()
    e_fine = np.abs(propagate_lindblad(rho0, p, 2.0, dt=2e-3).final_state.matrix - ref).max()
    ratio = e_coarse / e_fine

    therm = propagate_lindblad(rho0, p, 50.0, sample_stride=100)
    ramp = RampProtocol(p.B_h, p.B_c, 10.0, "expansion")
    stroke = propagate_unitary(therm.final_state, p, ramp, sample_stride=100)
    purity0 = np.trace(therm.final_state.matrix @ therm.final_state.matrix).real
    purity1 = np.trace(stroke.final_state.matrix @ stroke.final_state.matrix).real
    purity_drift = abs(purity1 - purity0)

    trace_drift = therm.diagnostics["trace_drift_per_unit_time"]
    min_eig = min(therm.diagnostics["min_eigenvalue"], stroke.diagnostics["min_eigenvalue"])

    ok = (
        abs(ratio - 16.0) <= 3.0
        and purity_drift < 1e-8
        and trace_drift < 1e-10
        and min_eig > -1e-8
    )
    report(
        7, ok,
        f"convergence ratio = {ratio:.2f} (16 +- 3), purity drift = {purity_drift:.1e}, "
        f"trace drift = {trace_drift:.1e} per unit time, min eigenvalue = {min_eig:.1e}",
        t0,
    )
    assert ok


def test_criterion_8_adiabatic_map_validation():
    t0 = time.time()

    def discrepancy(p, rho):
        h_start = build_total_hamiltonian(p, p.B_h)
        h_end = build_total_hamiltonian(p, p.B_c)
        mapped = adiabatic_map(rho, h_start, h_end)
        slow = propagate_unitary(
            rho, p, RampProtocol(p.B_h, p.B_c, 500.0, "expansion")
        ).final_state
        return float(
            np.abs(
                eigenbasis_populations(mapped, h_end) - eigenbasis_populations(slow, h_end)
            ).max()
        )

    # The cycle's reference state at full defaults, plus a thermalized state
    # with the atom-phonon coupling off (the 500/omega ramp is only an
    # adiabatic oracle away from the coupling-induced narrow crossings).
    p_default = EngineParams(xi=0.19)
    d_reference = discrepancy(p_default, initial_state(p_default))
    p_chi0 = EngineParams(xi=0.19, chi1=0.0, chi2=0.0)
    d_thermal = discrepancy(
        p_chi0, propagate_lindblad(initial_state(p_chi0), p_chi0, 50.0).final_state
    )

    ok = d_reference < 2e-3 and d_thermal < 2e-3
    report(
        8, ok,
        f"max population mismatch: reference state {d_reference:.2e}, "
        f"thermalized chi=0 state {d_thermal:.2e} (target < 2e-3)",
        t0,
    )
    assert ok


def test_criterion_9_sweep_determinism(criterion2_rows, tmp_path):
    t0 = time.time()
    path_a = tmp_path / "workers1.csv"
    path_b = tmp_path / "workers8.csv"
    write_csv(criterion2_rows, path_a)
    write_csv(run_sweep(CRITERION2_SPEC, workers=8), path_b)
    bytes_a = path_a.read_bytes()
    bytes_b = path_b.read_bytes()
    ok = bytes_a == bytes_b
    report(9, ok, f"CSV bytes identical across worker counts: {ok} ({len(bytes_a)} bytes)", t0)
    assert ok
