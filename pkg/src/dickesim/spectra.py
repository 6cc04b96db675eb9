"""Eigenvalue machinery: extremal eigenvalues for propagator rescaling,
ground states for initial conditions, and full dense eigenbases for the
phase-resolved evolution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

#: dense solvers refuse above this dimension
DENSE_CAP = 4096

#: seed for the deterministic Krylov start vector
KRYLOV_SEED = 1234

#: iterative path is used above this dimension
_DENSE_EXTREMAL_DIM = 32


class SpectralSolverError(RuntimeError):
    """Iterative eigensolver failed to converge; carries best estimates."""

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


@dataclass(frozen=True)
class SpectralBounds:
    """Extremal eigenvalues with a relative safety padding applied when the
    interval is consumed by the propagator."""

    e_min: float
    e_max: float
    margin: float = 1e-4

    def __post_init__(self):
        if not self.e_min < self.e_max:
            raise ValueError("need e_min < e_max")

    @property
    def span(self) -> float:
        return self.e_max - self.e_min

    def padded(self) -> tuple[float, float]:
        pad = self.margin * self.span
        return self.e_min - pad, self.e_max + pad


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.size


class GroundState(NamedTuple):
    energy: float
    vector: np.ndarray
    degenerate: bool


def _start_vector(dim: int, seed: int = KRYLOV_SEED) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(dim)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Largest-magnitude component of each column made real positive, so
    decompositions are reproducible run to run."""
    vectors = np.array(vectors, copy=True)
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    if np.iscomplexobj(vectors):
        scale = np.where(np.abs(lead) > 0, np.conj(lead) / np.abs(lead), 1.0)
    else:
        scale = np.where(lead >= 0, 1.0, -1.0)
    return vectors * scale


def extremal_eigenvalues(h: sp.spmatrix, tol: float = 0.0,
                         margin: float = 1e-4,
                         seed: int = KRYLOV_SEED) -> SpectralBounds:
    """Converged lowest/highest eigenvalues of a Hermitian sparse matrix.

    Uses restarted Lanczos (ARPACK) with a fixed seeded start vector above
    a small dense cutoff; tol = 0 means machine-precision convergence.
    """
    dim = h.shape[0]
    if dim <= _DENSE_EXTREMAL_DIM:
        vals = np.linalg.eigvalsh(h.toarray())
        return SpectralBounds(float(vals[0]), float(vals[-1]), margin)
    v0 = _start_vector(dim, seed)
    try:
        lo = spla.eigsh(h, k=1, which="SA", v0=v0, tol=tol,
                        return_eigenvectors=False)
        hi = spla.eigsh(h, k=1, which="LA", v0=v0, tol=tol,
                        return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        best = exc.eigenvalues
        raise SpectralSolverError(
            f"extremal eigensolver did not converge: {exc}", best=best) from exc
    return SpectralBounds(float(lo[0]), float(hi[0]), margin)


def ground_state(h: sp.spmatrix, degeneracy_tol: float = 1e-9,
                 seed: int = KRYLOV_SEED) -> GroundState:
    """Normalised lowest eigenvector with a reproducible sign convention.

    Above the critical coupling the two parity sectors produce a
    quasi-degenerate doublet; the state is then still the lowest vector
    but the `degenerate` flag is set.
    """
    dim = h.shape[0]
    if dim <= 512:
        vals, vecs = np.linalg.eigh(h.toarray())
        e0, e1 = float(vals[0]), float(vals[1])
        vec = vecs[:, :1]
    else:
        try:
            vals, vecs = spla.eigsh(h, k=2, which="SA",
                                    v0=_start_vector(dim, seed))
        except spla.ArpackNoConvergence as exc:
            raise SpectralSolverError(
                f"ground-state solver did not converge: {exc}",
                best=exc.eigenvalues) from exc
        order = np.argsort(vals)
        e0, e1 = float(vals[order[0]]), float(vals[order[1]])
        vec = vecs[:, order[:1]]
    vec = _fix_phases(vec)[:, 0]
    vec = vec / np.linalg.norm(vec)
    return GroundState(e0, vec, bool(e1 - e0 < degeneracy_tol))


def full_diagonalization(h: sp.spmatrix, cap: int = DENSE_CAP) -> EigenDecomposition:
    """Complete orthonormal eigenbasis (dense path) with ascending values."""
    dim = h.shape[0]
    if dim > cap:
        raise DimensionRefusedError(
            f"full diagonalization refused: dimension {dim} > cap {cap}")
    vals, vecs = np.linalg.eigh(h.toarray())
    return EigenDecomposition(vals, _fix_phases(vecs))


class DimensionRefusedError(ValueError):
    """Dense solver asked to run above its dimension cap."""
