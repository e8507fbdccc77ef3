"""Dense Hermitian linear algebra for small spin chains.

Everything downstream evolves states with matrix exponentials of Hermitian
matrices, so the propagator is built from an eigendecomposition rather than
scaling-and-squaring: U = V exp(-i D t) V+.  Dimensions stay modest (<= 4096)
and dense numpy routines are the backend throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput

# Default tolerances; callers may pass their own where a function accepts one.
HERMITICITY_RTOL = 1e-12
UNITARITY_ATOL = 1e-10
PHASE_REFINE_TOL = 1e-12


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (ascending) and matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def _as_square(mat) -> np.ndarray:
    arr = np.asarray(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    return arr


def hermiticity_defect(mat) -> float:
    """Relative magnitude of the anti-Hermitian part, entrywise max norm."""
    arr = _as_square(mat)
    scale = max(np.abs(arr).max(), 1.0)
    return float(np.abs(arr - arr.conj().T).max() / scale)


def hermitian_eig(mat, rtol: float = HERMITICITY_RTOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Raises NonHermitianInput when the relative symmetry defect exceeds rtol.
    """
    arr = _as_square(mat)
    defect = hermiticity_defect(arr)
    if defect > rtol:
        raise NonHermitianInput(f"symmetry defect {defect:.3e} exceeds rtol {rtol:.3e}")
    values, vectors = np.linalg.eigh(arr)
    return EigenSystem(values=values, vectors=vectors)


def expm_i(mat, t: float, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """exp(-i H t) for Hermitian H, via spectral decomposition."""
    eig = hermitian_eig(mat, rtol=rtol)
    phases = np.exp(-1j * eig.values * t)
    return (eig.vectors * phases) @ eig.vectors.conj().T


def expm_i_from_eig(eig: EigenSystem, t: float) -> np.ndarray:
    """Same as expm_i but reusing a precomputed eigendecomposition."""
    phases = np.exp(-1j * eig.values * t)
    return (eig.vectors * phases) @ eig.vectors.conj().T


def unitarity_defect(mat) -> float:
    """Entrywise max deviation of U+ U from the identity."""
    arr = _as_square(mat)
    return float(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0])).max())


def _maxabs(arr: np.ndarray) -> float:
    return float(np.abs(arr).max())


def op_distance(u, v, refine_tol: float = PHASE_REFINE_TOL) -> float:
    """Entrywise max norm of U - exp(i phi) V, minimized over the phase phi.

    Zero exactly when the operators agree up to a global phase.  The optimal
    phase for the Frobenius norm, angle(tr(V+ U)), seeds the search; a golden
    section pass then refines the max-norm objective, with a coarse grid as
    fallback when the trace is degenerate.
    """
    a = _as_square(u)
    b = _as_square(v)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")

    def dist(phi: float) -> float:
        return _maxabs(a - np.exp(1j * phi) * b)

    overlap = np.trace(b.conj().T @ a)
    candidates = [float(np.angle(overlap))] if abs(overlap) > 1e-12 else []
    candidates.extend(np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False))
    best_phi = min(candidates, key=dist)

    # Golden-section refinement in a bracket around the best candidate.
    span = 2.0 * np.pi / 64
    lo, hi = best_phi - span, best_phi + span
    inv_gr = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_gr * (hi - lo)
    d = lo + inv_gr * (hi - lo)
    fc, fd = dist(c), dist(d)
    while hi - lo > refine_tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - inv_gr * (hi - lo)
            fc = dist(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_gr * (hi - lo)
            fd = dist(d)
    return min(dist(best_phi), fc, fd)


def polar_unitary(mat) -> np.ndarray:
    """Closest unitary to mat in Frobenius norm (polar factor via SVD)."""
    arr = _as_square(mat)
    w, _, vh = np.linalg.svd(arr)
    return w @ vh
