"""Time evolution engines: fixed-step RK4 for the dissipative thermalization
stroke and for the driven unitary strokes, plus the exact eigenbasis
population map used for quasi-static strokes.

The propagators act on the density matrix flattened row-major (vec(A rho B) =
kron(A, B^T) vec(rho)), with the generator prebuilt as a dense superoperator;
at dimension 4*n_ph this is far cheaper per step than repeated matrix
products.  Both propagators re-Hermitize and renormalize the state after
every step and shorten the final step to land exactly on the stroke end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import QuantumState, TOL_POS, hermitize
from .model import (
    EngineParams,
    build_total_hamiltonian,
    ddi_coefficients,
    jump_operators,
    system_hamiltonian_embedded,
)

DEFAULT_DT = 1e-3
# Guard: |trace - 1| before renormalization beyond this means the step size is
# far too large for the generator's fastest scale.
TRACE_GUARD = 1e-6
HOMOTOPY_POINTS = 32
PAIRING_AMBIGUITY = 1e-6


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True)
class RampProtocol:
    """Affine field ramp B(t) = b_start + (b_end - b_start) t / tau."""

    b_start: float
    b_end: float
    tau: float
    direction: str = "expansion"

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise ValueError("ramp duration must be non-negative")
        if self.direction not in ("expansion", "compression"):
            raise ValueError(f"unknown ramp direction {self.direction!r}")

    def b_of(self, t: float) -> float:
        return self.b_start + (self.b_end - self.b_start) * t / self.tau


@dataclass
class Trajectory:
    """Sampled stroke: times (stroke-local, starting at 0), states, and the
    atomic energy Tr_ph[rho(t) H_s(B(t))] at each sample."""

    times: np.ndarray
    states: list[QuantumState]
    energies: np.ndarray
    diagnostics: dict[str, float] = field(default_factory=dict)

    @property
    def final_state(self) -> QuantumState:
        return self.states[-1]


def _vec(m: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(m).reshape(-1)


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of -i[h, .] on row-major vec."""
    d = h.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def dissipator_superop(a: np.ndarray, w_down: float, w_up: float) -> np.ndarray:
    """Superoperator of w_down (2 a . a^dag - {a^dag a, .})
    + w_up (2 a^dag . a - {a a^dag, .})."""
    d = a.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    adag = a.conj().T
    ada = adag @ a
    aad = a @ adag
    sup = w_down * (2.0 * np.kron(a, a.conj()) - np.kron(ada, eye) - np.kron(eye, ada.T))
    sup += w_up * (2.0 * np.kron(adag, adag.conj()) - np.kron(aad, eye) - np.kron(eye, aad.T))
    return sup


def _thermalization_hamiltonian(p: EngineParams, with_phonon_coupling: bool) -> np.ndarray:
    if with_phonon_coupling:
        return build_total_hamiltonian(p, p.B_h)
    return build_total_hamiltonian(replace(p, chi1=0.0, chi2=0.0), p.B_h)


def build_lindblad_liouvillian(p: EngineParams, with_phonon_coupling: bool = True) -> np.ndarray:
    """Full generator of the thermalization stroke at fixed B = B_h."""
    sup = commutator_superop(_thermalization_hamiltonian(p, with_phonon_coupling))
    for op, w_down, w_up in jump_operators(p):
        sup += dissipator_superop(op, w_down, w_up)
    return sup


def lindblad_rhs(rho: QuantumState, p: EngineParams, with_phonon_coupling: bool = True) -> np.ndarray:
    """Right-hand side of the thermalization master equation, evaluated with
    explicit matrix products (the propagator uses the prebuilt superoperator;
    the two routes agree and are cross-checked in the tests)."""
    h = _thermalization_hamiltonian(p, with_phonon_coupling)
    m = rho.matrix
    out = -1j * (h @ m - m @ h)
    for a, w_down, w_up in jump_operators(p):
        adag = a.conj().T
        ada = adag @ a
        aad = a @ adag
        out += w_down * (2.0 * (a @ m @ adag) - ada @ m - m @ ada)
        out += w_up * (2.0 * (adag @ m @ a) - aad @ m - m @ aad)
    return out


def max_stable_dt(p: EngineParams) -> float:
    """Step-size guard: dt must not exceed min(0.01, 0.1/max(1, |omega12|, B_h))."""
    ddi = ddi_coefficients(p.xi, p.theta, p.Gamma)
    return min(0.01, 0.1 / max(1.0, abs(ddi.omega12), p.B_h))


def _check_dt(p: EngineParams, dt: float) -> None:
    if dt <= 0:
        raise ValueError("dt must be positive")
    limit = max_stable_dt(p)
    if dt > limit * (1.0 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds stability guard {limit:.4g}")


def _step_plan(duration: float, dt: float) -> tuple[int, float]:
    """Number of full dt steps plus the shortened final step (0 when the
    duration is an exact multiple of dt)."""
    n_full = int(math.floor(duration / dt + 1e-9))
    rem = duration - n_full * dt
    if rem <= 1e-12 * max(1.0, duration):
        rem = 0.0
    return n_full, rem


def _rk4_step_matrix(sup: np.ndarray, h: float) -> np.ndarray:
    """One-step matrix of classical RK4 for the autonomous linear generator.

    For v' = L v the four-stage update collapses exactly to the degree-4
    Taylor polynomial I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24, so a fixed
    step is a single matrix-vector product.
    """
    a = h * sup
    a2 = a @ a
    a4 = a2 @ a2
    eye = np.eye(sup.shape[0], dtype=np.complex128)
    return eye + a + a2 / 2.0 + (a2 @ a) / 6.0 + a4 / 24.0


def _renormalize(v: np.ndarray, d: int) -> tuple[np.ndarray, float]:
    """Hermitize and rescale to unit trace; returns the trace defect seen
    before renormalization."""
    r = v.reshape(d, d)
    r = 0.5 * (r + r.conj().T)
    tr = r.trace().real
    defect = abs(tr - 1.0)
    if defect > TRACE_GUARD:
        raise PropagationError(f"trace defect {defect:.3e} mid-propagation (step too large)")
    return (r / tr).reshape(-1), defect


def _sample_guard(v: np.ndarray, d: int, t: float) -> float:
    wmin = float(np.linalg.eigvalsh(hermitize(v.reshape(d, d)))[0])
    if wmin < -TOL_POS:
        raise PropagationError(f"state eigenvalue {wmin:.3e} below -{TOL_POS} at t={t:.4g}")
    return wmin


def propagate_lindblad(
    rho0: QuantumState,
    p: EngineParams,
    t1: float,
    dt: float = DEFAULT_DT,
    sample_stride: int | None = None,
    with_phonon_coupling: bool = True,
) -> Trajectory:
    """Evolve under the fixed-field master equation for a duration t1.

    sample_stride = k stores every k-th step (plus start and end); the default
    stores only the stroke endpoints.
    """
    if t1 < 0:
        raise ValueError("t1 must be non-negative")
    _check_dt(p, dt)
    dims = rho0.dims
    d = rho0.dim
    sup = build_lindblad_liouvillian(p, with_phonon_coupling)
    e_hot = _vec(system_hamiltonian_embedded(p, p.B_h).T)

    v = _vec(rho0.matrix)
    times = [0.0]
    states = [rho0]
    energies = [float((v @ e_hot).real)]
    worst_defect = 0.0
    defect_sum = 0.0
    min_eig = _sample_guard(v, d, 0.0)

    n_full, rem = _step_plan(t1, dt)
    n_steps = n_full + (1 if rem else 0)
    step_full = _rk4_step_matrix(sup, dt) if n_full else None
    for k in range(1, n_steps + 1):
        step = step_full if k <= n_full else _rk4_step_matrix(sup, rem)
        v = step @ v
        v, defect = _renormalize(v, d)
        worst_defect = max(worst_defect, defect)
        defect_sum += defect
        last = k == n_steps
        if last or (sample_stride is not None and k % sample_stride == 0):
            t_k = t1 if last else k * dt
            min_eig = min(min_eig, _sample_guard(v, d, t_k))
            times.append(t_k)
            states.append(QuantumState(v.reshape(d, d).copy(), dims))
            energies.append(float((v @ e_hot).real))

    diagnostics = {
        "max_trace_defect": worst_defect,
        "trace_drift_per_unit_time": defect_sum / t1 if t1 > 0 else 0.0,
        "min_eigenvalue": min_eig,
        "n_steps": float(n_steps),
    }
    return Trajectory(np.asarray(times), states, np.asarray(energies), diagnostics)


def propagate_lindblad_to_steady(
    rho0: QuantumState,
    p: EngineParams,
    dt: float = DEFAULT_DT,
    residual_tol: float = 1e-9,
    t_cap: float = 2000.0,
    check_stride: int = 10,
    with_phonon_coupling: bool = True,
) -> tuple[QuantumState, float, float]:
    """Thermalize until the generator residual max|d rho/dt| drops below
    residual_tol, capped at t_cap.  Returns (state, elapsed time, residual).

    The residual check runs every check_stride steps so the detected stopping
    time is deterministic for given (p, dt, tolerances).
    """
    _check_dt(p, dt)
    d = rho0.dim
    sup = build_lindblad_liouvillian(p, with_phonon_coupling)
    v = _vec(rho0.matrix)
    residual = float(np.abs(sup @ v).max())
    if residual < residual_tol:
        return rho0, 0.0, residual

    n_cap = int(math.ceil(t_cap / dt - 1e-9))
    step = _rk4_step_matrix(sup, dt)
    t = 0.0
    for k in range(1, n_cap + 1):
        v = step @ v
        v, _ = _renormalize(v, d)
        t = k * dt
        if k % check_stride == 0 or k == n_cap:
            residual = float(np.abs(sup @ v).max())
            if residual < residual_tol:
                break
    _sample_guard(v, d, t)
    return QuantumState(v.reshape(d, d).copy(), rho0.dims), t, residual


def propagate_unitary(
    rho0: QuantumState,
    p: EngineParams,
    ramp: RampProtocol,
    dt: float = DEFAULT_DT,
    sample_stride: int | None = None,
) -> Trajectory:
    """Evolve under the driven total Hamiltonian along a field ramp.

    The generator splits as L(t) = L0 + B(t) Lz with both parts prebuilt, so
    each RK4 stage samples B at the proper (midpoint) stage time at the cost
    of two matrix-vector products.  tau = 0 is the sudden quench: no steps,
    the state is returned unchanged.
    """
    dims = rho0.dims
    d = rho0.dim
    e0 = _vec(system_hamiltonian_embedded(p, 0.0).T)
    ez = _vec((system_hamiltonian_embedded(p, 1.0) - system_hamiltonian_embedded(p, 0.0)).T)

    def energy(vv: np.ndarray, b: float) -> float:
        return float((vv @ e0).real + b * (vv @ ez).real)

    v = _vec(rho0.matrix)
    if ramp.tau == 0.0:
        u = energy(v, ramp.b_end)
        return Trajectory(np.asarray([0.0]), [rho0], np.asarray([u]), {"n_steps": 0.0})

    _check_dt(p, dt)
    sup0 = commutator_superop(build_total_hamiltonian(p, 0.0))
    supz = commutator_superop(system_hamiltonian_embedded(p, 1.0) - system_hamiltonian_embedded(p, 0.0))

    times = [0.0]
    states = [rho0]
    energies = [energy(v, ramp.b_start)]
    worst_defect = 0.0
    min_eig = _sample_guard(v, d, 0.0)

    n_full, rem = _step_plan(ramp.tau, dt)
    n_steps = n_full + (1 if rem else 0)
    for k in range(1, n_steps + 1):
        t0 = (k - 1) * dt
        h = dt if k <= n_full else rem
        t_k = ramp.tau if k == n_steps else k * dt
        b1 = ramp.b_of(t0)
        b2 = ramp.b_of(t0 + 0.5 * h)
        b3 = ramp.b_of(t_k)
        k1 = sup0 @ v + b1 * (supz @ v)
        u = v + (0.5 * h) * k1
        k2 = sup0 @ u + b2 * (supz @ u)
        u = v + (0.5 * h) * k2
        k3 = sup0 @ u + b2 * (supz @ u)
        u = v + h * k3
        k4 = sup0 @ u + b3 * (supz @ u)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        v, defect = _renormalize(v, d)
        worst_defect = max(worst_defect, defect)
        last = k == n_steps
        if last or (sample_stride is not None and k % sample_stride == 0):
            min_eig = min(min_eig, _sample_guard(v, d, t_k))
            times.append(t_k)
            states.append(QuantumState(v.reshape(d, d).copy(), dims))
            energies.append(energy(v, ramp.b_of(t_k)))

    diagnostics = {
        "max_trace_defect": worst_defect,
        "min_eigenvalue": min_eig,
        "n_steps": float(n_steps),
    }
    return Trajectory(np.asarray(times), states, np.asarray(energies), diagnostics)


def _pair_columns(v_prev: np.ndarray, v_next: np.ndarray) -> np.ndarray:
    """Match each column of v_prev to its maximal-|overlap| column of v_next.

    Greedy on the global maximum of |v_prev^dag v_next|; raises when the best
    and runner-up overlaps for a row are closer than PAIRING_AMBIGUITY, which
    signals a degenerate pair the homotopy cannot resolve.
    """
    overlap = np.abs(v_prev.conj().T @ v_next)
    n = overlap.shape[0]
    work = overlap.copy()
    assignment = np.full(n, -1, dtype=int)
    for _ in range(n):
        i, j = np.unravel_index(np.argmax(work), work.shape)
        best = work[i, j]
        row = work[i].copy()
        row[j] = -np.inf
        runner_up = row.max()
        if runner_up > -np.inf and best - runner_up < PAIRING_AMBIGUITY:
            j2 = int(np.argmax(row))
            raise ValueError(
                "ambiguous eigenvector pairing: start-branch "
                f"{i} overlaps columns {j} and {j2} within {PAIRING_AMBIGUITY}"
            )
        assignment[i] = j
        work[i, :] = -np.inf
        work[:, j] = -np.inf
    return assignment


def adiabatic_map(
    rho0: QuantumState,
    h_start: np.ndarray,
    h_end: np.ndarray,
    n_points: int = HOMOTOPY_POINTS,
) -> QuantumState:
    """Quasi-static stroke: transport eigenbasis populations from h_start to
    h_end, discarding coherences.

    Eigenvectors are paired by maximal-overlap continuation along an n_points
    linear homotopy between the two Hamiltonians (never by naive energy
    ordering), so branches are followed through level crossings.
    """
    if h_start.shape != h_end.shape or h_start.shape[0] != rho0.dim:
        raise ValueError("Hamiltonian dimensions must match the state")
    _, v_prev = np.linalg.eigh(hermitize(h_start))
    v_first = v_prev
    perm = np.arange(rho0.dim)
    for j in range(1, n_points):
        s = j / (n_points - 1)
        h_s = hermitize((1.0 - s) * h_start + s * h_end)
        _, v_next = np.linalg.eigh(h_s)
        step_map = _pair_columns(v_prev, v_next)
        perm = step_map[perm]
        v_prev = v_next

    pops = np.real(np.einsum("ij,jk,ki->i", v_first.conj().T, rho0.matrix, v_first))
    v_end_cols = v_prev[:, perm]
    rho_out = (v_end_cols * pops) @ v_end_cols.conj().T
    return QuantumState(hermitize(rho_out), rho0.dims)


def eigenbasis_populations(rho: QuantumState, h: np.ndarray) -> np.ndarray:
    """Diagonal of rho in the eigenbasis of h (ascending eigenvalue order)."""
    _, v = np.linalg.eigh(hermitize(h))
    return np.real(np.einsum("ij,jk,ki->i", v.conj().T, rho.matrix, v))
