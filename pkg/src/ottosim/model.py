"""Physics constructors: engine parameters, dipole-dipole coefficients,
Hamiltonians, collective jump operators, and thermal states.

All quantities are expressed in units set by the trap frequency: energies and
rates in units of omega, times in 1/omega.  With hbar = k_B = 1 the model has
no second absolute scale, so omega itself never enters a formula; it is kept
on EngineParams purely as the unit label.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .linalg import QuantumState, herm_eig, hermitize, kron

log = logging.getLogger(__name__)

# Single-qubit operators in the (|g>, |e>) basis.
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_X = SIGMA_PLUS + SIGMA_MINUS
SIGMA_Z = SIGMA_PLUS @ SIGMA_MINUS - SIGMA_MINUS @ SIGMA_PLUS  # diag(-1, +1)
I2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class EngineParams:
    """All physical parameters of the two-atom engine.

    Defaults reproduce the reference operating point: theta = pi/2,
    g = 0.2, B_c = 5, B_h = 10, chi1 = chi2 = 0.04, Gamma = 0.1,
    nbar = 0.1 (all in units of omega), with the phonon truncated to
    its two lowest levels.
    """

    omega: float = 1.0
    g: float = 0.2
    B_h: float = 10.0
    B_c: float = 5.0
    chi1: float = 0.04
    chi2: float = 0.04
    Gamma: float = 0.1
    theta: float = math.pi / 2
    xi: float = 0.19
    nbar: float = 0.1
    n_ph: int = 2

    def __post_init__(self) -> None:
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.Gamma < 0:
            raise ValueError("Gamma must be non-negative")
        if self.nbar < 0:
            raise ValueError("nbar must be non-negative")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if not (self.B_h > self.B_c > 0):
            raise ValueError("fields must satisfy B_h > B_c > 0")
        if self.n_ph < 2:
            raise ValueError("phonon truncation needs n_ph >= 2")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2, 2, self.n_ph)

    @property
    def dim(self) -> int:
        return 4 * self.n_ph


@dataclass(frozen=True)
class DDICoefficients:
    """Photon-mediated coupling: coherent shift omega12 and collective decay
    gamma12, plus the symmetric/antisymmetric channel rates gamma_pm = Gamma
    +/- gamma12."""

    omega12: float
    gamma12: float
    gamma_plus: float
    gamma_minus: float


def ddi_coefficients(xi: float, theta: float, Gamma: float) -> DDICoefficients:
    """Evaluate the closed-form distance/orientation dependence of the
    dipole-dipole shift and collective decay.

    xi is the dimensionless separation |k||r12|, theta the angle between the
    dipole direction and the interatomic axis.  Both formulas depend on theta
    only through cos^2(theta); xi = 0 is singular.
    """
    if xi <= 0:
        raise ValueError("xi must be positive (xi = 0 is singular)")
    c2 = math.cos(theta) ** 2
    sin_xi, cos_xi = math.sin(xi), math.cos(xi)
    omega12 = 0.75 * Gamma * (
        -(1.0 - c2) * cos_xi / xi
        + (1.0 - 3.0 * c2) * (sin_xi / xi**2 + cos_xi / xi**3)
    )
    gamma12 = 1.5 * Gamma * (
        (1.0 - c2) * sin_xi / xi
        + (1.0 - 3.0 * c2) * (cos_xi / xi**2 - sin_xi / xi**3)
    )
    if abs(gamma12) > Gamma + 1e-12:
        # Physical channel rates must stay non-negative; report, never clamp.
        log.warning(
            "collective decay |gamma12| = %.6g exceeds Gamma = %.6g at xi=%.6g theta=%.6g",
            abs(gamma12), Gamma, xi, theta,
        )
    return DDICoefficients(
        omega12=omega12,
        gamma12=gamma12,
        gamma_plus=Gamma + gamma12,
        gamma_minus=Gamma - gamma12,
    )


@dataclass(frozen=True)
class OperatorSet:
    """Atomic and phonon operators embedded in the full atom1 x atom2 x phonon
    space, plus the collective sigma_pm = (sigma_1 +/- sigma_2)/sqrt(2)."""

    sm: tuple[np.ndarray, np.ndarray]  # lowering, atoms 1 and 2
    sp: tuple[np.ndarray, np.ndarray]
    sx: tuple[np.ndarray, np.ndarray]
    sz: tuple[np.ndarray, np.ndarray]
    a: np.ndarray
    adag: np.ndarray
    sm_plus: np.ndarray
    sm_minus: np.ndarray
    sp_plus: np.ndarray
    sp_minus: np.ndarray


def phonon_ladder(n_ph: int) -> np.ndarray:
    """Annihilation operator truncated at n_ph levels."""
    a = np.zeros((n_ph, n_ph), dtype=np.complex128)
    for n in range(1, n_ph):
        a[n - 1, n] = math.sqrt(n)
    return a


def build_operators(n_ph: int) -> OperatorSet:
    i_ph = np.eye(n_ph, dtype=np.complex128)
    a_ph = phonon_ladder(n_ph)

    def embed_atom(op: np.ndarray, which: int) -> np.ndarray:
        atomic = kron(op, I2) if which == 0 else kron(I2, op)
        return kron(atomic, i_ph)

    sm = tuple(embed_atom(SIGMA_MINUS, i) for i in range(2))
    sp = tuple(embed_atom(SIGMA_PLUS, i) for i in range(2))
    sx = tuple(embed_atom(SIGMA_X, i) for i in range(2))
    sz = tuple(embed_atom(SIGMA_Z, i) for i in range(2))
    a_full = kron(np.eye(4, dtype=np.complex128), a_ph)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    sm_plus = (sm[0] + sm[1]) * inv_sqrt2
    sm_minus = (sm[0] - sm[1]) * inv_sqrt2
    return OperatorSet(
        sm=sm, sp=sp, sx=sx, sz=sz,
        a=a_full, adag=a_full.conj().T,
        sm_plus=sm_plus, sm_minus=sm_minus,
        sp_plus=sm_plus.conj().T, sp_minus=sm_minus.conj().T,
    )


def build_system_hamiltonian(p: EngineParams, B: float) -> np.ndarray:
    """Atomic Hamiltonian (4x4): transverse drive g, longitudinal field B, and
    the exchange coupling omega12 (|eg><ge| + h.c., taken real symmetric)."""
    ddi = ddi_coefficients(p.xi, p.theta, p.Gamma)
    sx1, sx2 = kron(SIGMA_X, I2), kron(I2, SIGMA_X)
    sz1, sz2 = kron(SIGMA_Z, I2), kron(I2, SIGMA_Z)
    exchange = kron(SIGMA_PLUS, I2) @ kron(I2, SIGMA_MINUS)
    h = p.g * (sx1 + sx2) + B * (sz1 + sz2) + ddi.omega12 * (exchange + exchange.conj().T)
    return h


def build_total_hamiltonian(p: EngineParams, B: float) -> np.ndarray:
    """Full Hamiltonian on atom1 x atom2 x phonon: system + phonon + exchange
    of single quanta between each atom and the mode."""
    i_ph = np.eye(p.n_ph, dtype=np.complex128)
    a_ph = phonon_ladder(p.n_ph)
    h = kron(build_system_hamiltonian(p, B), i_ph)
    h += kron(np.eye(4, dtype=np.complex128), a_ph.conj().T @ a_ph)
    for chi, op in ((p.chi1, kron(SIGMA_PLUS, I2)), (p.chi2, kron(I2, SIGMA_PLUS))):
        coupling = chi * kron(op, a_ph)  # a sigma^dagger
        h += coupling + coupling.conj().T
    return h


def system_hamiltonian_embedded(p: EngineParams, B: float) -> np.ndarray:
    """H_s(B) acting trivially on the phonon, for energy bookkeeping."""
    return kron(build_system_hamiltonian(p, B), np.eye(p.n_ph, dtype=np.complex128))


def beta_from_nbar(nbar: float, B_h: float) -> float:
    """Inverse temperature from the reservoir occupation at the hot-field
    splitting: beta = ln(1 + 1/nbar) / (2 B_h).  nbar = 0 maps to math.inf,
    the zero-temperature marker understood by gibbs_state."""
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if B_h <= 0:
        raise ValueError("B_h must be positive")
    if nbar == 0:
        return math.inf
    return math.log1p(1.0 / nbar) / (2.0 * B_h)


def gibbs_state(h: np.ndarray, beta: float, dims: tuple[int, ...] | None = None) -> QuantumState:
    """exp(-beta h)/Z via eigendecomposition.

    beta = math.inf (the zero-temperature marker) yields the normalized
    projector onto the (possibly degenerate) ground space.
    """
    w, v = herm_eig(h)
    if math.isinf(beta):
        ground = w - w[0] <= 1e-10
        pops = ground.astype(float)
    else:
        pops = np.exp(-beta * (w - w[0]))  # shift by the ground energy for stability
    pops = pops / pops.sum()
    rho = hermitize((v * pops) @ v.conj().T)
    if dims is None:
        dims = (h.shape[0],)
    return QuantumState(rho, dims)


def jump_operators(p: EngineParams) -> list[tuple[np.ndarray, float, float]]:
    """The two collective dissipation channels on the full space.

    Returns (operator, downward weight, upward weight) per channel, with
    weights gamma_s (nbar+1)/2 and gamma_s nbar/2; each weight multiplies the
    doubled Lindblad form 2 A rho A^dag - {A^dag A, rho} (or its heating
    counterpart built from A^dag).
    """
    ddi = ddi_coefficients(p.xi, p.theta, p.Gamma)
    ops = build_operators(p.n_ph)
    channels = []
    for gamma_s, op in ((ddi.gamma_plus, ops.sm_plus), (ddi.gamma_minus, ops.sm_minus)):
        if gamma_s < -1e-12:
            raise ValueError(f"negative channel rate gamma_s = {gamma_s:.3e}")
        gamma_s = max(gamma_s, 0.0)
        channels.append((op, 0.5 * gamma_s * (p.nbar + 1.0), 0.5 * gamma_s * p.nbar))
    return channels
