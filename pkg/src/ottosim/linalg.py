"""Dense complex linear algebra for small multipartite operators and states.

Everything here works on plain ``numpy`` arrays of dtype complex128.  The
subsystem order is fixed globally to atom1 x atom2 x phonon; all builders and
partial traces in the package rely on that convention.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

# State tolerances (entrywise Hermiticity defect, trace defect, eigenvalue floor).
TOL_HERM = 1e-10
TOL_TRACE = 1e-9
TOL_POS = 1e-8

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def as_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex128 array, rejecting anything else."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def hermitize(m: np.ndarray) -> np.ndarray:
    """Hermitian part (m + m†)/2."""
    return 0.5 * (m + m.conj().T)


def herm_defect(m: np.ndarray) -> float:
    """max |m - m†| entrywise."""
    return float(np.abs(m - m.conj().T).max())


@dataclass(frozen=True)
class QuantumState:
    """Density matrix tagged with its subsystem dimensions.

    ``dims`` is (2, 2, n_ph) for the full working medium and (2, 2) for the
    atomic reduction.  ``validate`` enforces the Hermiticity / unit-trace /
    positivity contract at the module tolerances.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        m = as_square(self.matrix, "state matrix")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if int(np.prod(self.dims)) != m.shape[0]:
            raise ValueError(
                f"dims {self.dims} incompatible with matrix dimension {m.shape[0]}"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, context: str = "state") -> "QuantumState":
        dh = herm_defect(self.matrix)
        if dh > TOL_HERM:
            raise ValueError(f"{context}: Hermiticity defect {dh:.3e} > {TOL_HERM}")
        dt = abs(np.trace(self.matrix) - 1.0)
        if dt > TOL_TRACE:
            raise ValueError(f"{context}: trace defect {dt:.3e} > {TOL_TRACE}")
        wmin = float(np.linalg.eigvalsh(hermitize(self.matrix))[0])
        if wmin < -TOL_POS:
            raise ValueError(f"{context}: negative eigenvalue {wmin:.3e} < -{TOL_POS}")
        return self


def pure_state(vec: np.ndarray, dims: tuple[int, ...]) -> QuantumState:
    """|v><v| as a QuantumState (v is normalized first)."""
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return QuantumState(np.outer(v, v.conj()), dims)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the row-major convention; result dim = dim(a)*dim(b)."""
    return np.kron(as_square(a, "kron left factor"), as_square(b, "kron right factor"))


def partial_trace(state: QuantumState, keep: tuple[int, ...] | list[int] | set[int]) -> QuantumState:
    """Trace out every subsystem not in ``keep``; kept subsystems stay in order."""
    keep = sorted(set(int(k) for k in keep))
    n = len(state.dims)
    if not keep:
        raise ValueError("keep set must be non-empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    bra = list(_LETTERS[:n])
    ket = list(_LETTERS[n : 2 * n])
    for i in range(n):
        if i not in keep:
            ket[i] = bra[i]  # repeated index sums over the traced subsystem
    sub_in = "".join(bra) + "".join(ket)
    sub_out = "".join(bra[i] for i in keep) + "".join(_LETTERS[n + i] for i in keep)
    t = state.matrix.reshape(state.dims + state.dims)
    reduced_dims = tuple(state.dims[i] for i in keep)
    d = int(np.prod(reduced_dims))
    out = np.einsum(f"{sub_in}->{sub_out}", t).reshape(d, d)
    return QuantumState(out, reduced_dims)


def herm_eig(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as columns) with
    h = V diag(w) V†.  Rejects inputs whose Hermiticity defect exceeds
    TOL_HERM instead of silently symmetrizing them.
    """
    h = as_square(h, "herm_eig input")
    dh = herm_defect(h)
    if dh > TOL_HERM:
        raise ValueError(f"herm_eig: input not Hermitian (defect {dh:.3e})")
    w, v = np.linalg.eigh(hermitize(h))
    return w, v


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues in [-TOL_POS, 0) are clamped to zero (integration error can
    leave states slightly indefinite); anything below -TOL_POS means the
    state is corrupted and raises.
    """
    w, v = herm_eig(m)
    wmin = float(w[0])
    if wmin < -TOL_POS:
        raise ValueError(f"sqrtm_psd: eigenvalue {wmin:.3e} below -{TOL_POS}")
    if wmin < 0.0:
        # Integration rounding routinely leaves ~1e-12 negatives; only a
        # sizeable clamp deserves a warning.
        level = logging.WARNING if wmin < -1e-10 else logging.DEBUG
        log.log(level, "sqrtm_psd: clamping negative eigenvalue %.3e to 0", wmin)
    # Zero out rounding-level eigenvalues too: sqrt amplifies an O(eps)
    # eigenvalue of a rank-deficient input into an O(sqrt(eps)) artifact.
    floor = 1e-14 * max(float(w[-1]), 0.0)
    w = np.where(w > floor, w, 0.0)
    return hermitize((v * np.sqrt(w)) @ v.conj().T)


def uhlmann_fidelity(rho: QuantumState, sigma: QuantumState) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)), clamped to [0, 1].

    Evaluated as the trace norm ||sqrt(sigma) sqrt(rho)||_1 (the same
    quantity) via singular values, which avoids taking square roots of
    rounding-level eigenvalues.  For pure states this reduces to |<psi|phi>|
    (not squared).
    """
    if rho.dims != sigma.dims:
        raise ValueError(f"dimension mismatch: {rho.dims} vs {sigma.dims}")
    product = sqrtm_psd(sigma.matrix) @ sqrtm_psd(rho.matrix)
    f = float(np.linalg.svd(product, compute_uv=False).sum())
    return min(max(f, 0.0), 1.0)
