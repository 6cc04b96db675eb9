"""Model parameters, product basis and sparse operators of the (driven)
Dicke model.

A collective spin of length j (N = 2j two-level atoms) couples to a single
boson mode truncated at n_max quanta.  Basis states |n, m> are ordered
boson-major: flat index = n*(2j+1) + (m+j), so boson ladder operators act
as block shifts with cache-friendly strides.  All Hamiltonians assembled
here are real symmetric in this basis and stored as CSR matrices without
explicit zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log, pi, sqrt

import numpy as np
import scipy.sparse as sp

#: refuse to assemble operators above this dimension
DIMENSION_CAP = 4_000_000

OBSERVABLE_KINDS = ("photon_number", "Jz", "Jplus", "Jminus", "a", "N_ex")


class DimensionOverflowError(ValueError):
    """Requested truncated Hilbert space exceeds the configured cap."""


@dataclass(frozen=True)
class ModelParams:
    """Physical and truncation parameters.

    omega      photon frequency (hbar = 1)
    omega0     atomic level splitting
    coupling   atom-photon coupling strength
    delta_phi  rotation velocity of the drive around the z axis
    j          spin length, positive half-integer (N = 2j atoms)
    n_max      boson truncation: Fock states 0..n_max are kept
    """

    omega: float
    omega0: float
    coupling: float
    delta_phi: float = 0.0
    j: float = 0.5
    n_max: int = 0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be > 0")
        if self.omega0 < 0:
            raise ValueError("omega0 must be >= 0")
        if self.coupling < 0:
            raise ValueError("coupling must be >= 0")
        two_j = round(2 * self.j)
        if two_j < 1 or abs(2 * self.j - two_j) > 0:
            raise ValueError(f"j must be a positive half-integer, got {self.j}")
        # store j as the exact half-integer two_j/2 (binary-exact)
        object.__setattr__(self, "j", two_j / 2)
        if self.n_max < 0 or self.n_max != int(self.n_max):
            raise ValueError("n_max must be a non-negative integer")
        object.__setattr__(self, "n_max", int(self.n_max))
        if self.omega_rot < 0:
            raise ValueError("omega0 + delta_phi must be >= 0")

    @property
    def two_j(self) -> int:
        """Doubled spin length as an exact integer."""
        return round(2 * self.j)

    @property
    def n_atoms(self) -> int:
        return self.two_j

    @property
    def omega_rot(self) -> float:
        """Level splitting in the co-rotating frame: omega0 + delta_phi."""
        return self.omega0 + self.delta_phi

    @property
    def lambda_c0(self) -> float:
        """Critical coupling of the undriven model, sqrt(omega*omega0)/2."""
        return 0.5 * sqrt(self.omega * self.omega0)

    @property
    def lambda_c(self) -> float:
        """Critical coupling in the co-rotating frame, sqrt(omega*Omega)/2."""
        return 0.5 * sqrt(self.omega * self.omega_rot)

    @property
    def t_phi(self) -> float:
        """Drive period 2*pi/delta_phi (inf for the undriven model)."""
        return 2 * pi / self.delta_phi if self.delta_phi > 0 else np.inf

    @property
    def dim_spin(self) -> int:
        return self.two_j + 1

    @property
    def dim_boson(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.dim_spin * self.dim_boson

    def check_dimension(self, cap: int = DIMENSION_CAP) -> None:
        if self.dim > cap:
            raise DimensionOverflowError(
                f"basis dimension {self.dim} exceeds cap {cap}")

    def replace(self, **kw) -> "ModelParams":
        from dataclasses import replace
        return replace(self, **kw)


def basis_quantum_numbers(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (n, m) of boson occupation and J_z quantum number for every
    flat basis index, in basis order."""
    m_vals = np.arange(p.dim_spin) - p.j
    n = np.repeat(np.arange(p.dim_boson), p.dim_spin)
    m = np.tile(m_vals, p.dim_boson)
    return n, m


def flat_index(p: ModelParams, n: int, m: float) -> int:
    k = round(m + p.j)
    if not (0 <= n <= p.n_max) or not (0 <= k <= p.two_j):
        raise ValueError(f"(n={n}, m={m}) outside the basis")
    return n * p.dim_spin + k


def _spin_matrices(p: ModelParams):
    m = np.arange(p.dim_spin) - p.j
    jz = sp.diags(m)
    # J+|j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>: entry at (row m+1, col m)
    jp = sp.diags(np.sqrt(p.j * (p.j + 1) - m[:-1] * (m[:-1] + 1)), -1)
    return jz, jp


def _boson_matrices(p: ModelParams):
    n = np.arange(p.dim_boson)
    a = sp.diags(np.sqrt(n[1:]), 1)  # a|n> = sqrt(n)|n-1>
    num = sp.diags(n.astype(float))
    return a, num


def build_observable(kind: str, p: ModelParams) -> sp.csr_matrix:
    """Sparse matrix of a standard observable on the truncated basis.

    kind is one of photon_number (a^dag a), Jz, Jplus, Jminus, a, N_ex
    (= a^dag a + Jz + j, the excitation counter).
    """
    p.check_dimension()
    jz, jp = _spin_matrices(p)
    a, num = _boson_matrices(p)
    eye_b = sp.identity(p.dim_boson)
    eye_s = sp.identity(p.dim_spin)
    if kind == "photon_number":
        op = sp.kron(num, eye_s)
    elif kind == "Jz":
        op = sp.kron(eye_b, jz)
    elif kind == "Jplus":
        op = sp.kron(eye_b, jp)
    elif kind == "Jminus":
        op = sp.kron(eye_b, jp.T)
    elif kind == "a":
        op = sp.kron(a, eye_s)
    elif kind == "N_ex":
        op = sp.kron(num, eye_s) + sp.kron(eye_b, jz) + p.j * sp.identity(p.dim)
    else:
        raise ValueError(f"unknown observable kind {kind!r}; "
                         f"expected one of {OBSERVABLE_KINDS}")
    op = op.tocsr()
    op.eliminate_zeros()
    op.sort_indices()
    return op


def _build_hamiltonian(p: ModelParams, splitting: float) -> sp.csr_matrix:
    p.check_dimension()
    jz, jp = _spin_matrices(p)
    a, num = _boson_matrices(p)
    h = splitting * sp.kron(sp.identity(p.dim_boson), jz) \
        + p.omega * sp.kron(num, sp.identity(p.dim_spin))
    if p.coupling != 0.0:
        x = a + a.T            # a + a^dag
        jx = jp + jp.T         # J+ + J-
        h = h + (p.coupling / sqrt(p.two_j)) * sp.kron(x, jx)
    h = h.tocsr()
    h.eliminate_zeros()
    h.sort_indices()
    return h


def build_dicke_hamiltonian(p: ModelParams) -> sp.csr_matrix:
    """H_D = omega0*Jz + omega*a^dag a + coupling/sqrt(2j)*(a+a^dag)(J+ + J-)."""
    return _build_hamiltonian(p, p.omega0)


def build_rotated_hamiltonian(p: ModelParams) -> sp.csr_matrix:
    """Co-rotating-frame generator H_D + delta_phi*Jz.

    Identical to the Dicke Hamiltonian with omega0 replaced by the
    renormalised splitting omega0 + delta_phi, and built that way so the
    identity holds entrywise.
    """
    return _build_hamiltonian(p, p.omega_rot)


def parity_signs(p: ModelParams) -> np.ndarray:
    """Diagonal of the parity operator exp(i*pi*(a^dag a + Jz + j)): the
    sign (-1)^(n+m+j) per basis state."""
    n, m = basis_quantum_numbers(p)
    exc = n + np.rint(m + p.j).astype(int)
    return np.where(exc % 2 == 0, 1.0, -1.0)


def build_parity(p: ModelParams) -> sp.csr_matrix:
    """Parity operator as a sparse diagonal matrix; commutes with both
    Hamiltonians, splitting the basis into even/odd excitation sectors."""
    p.check_dimension()
    return sp.diags(parity_signs(p)).tocsr()


def coherent_state(p: ModelParams, alpha: complex, zeta: complex) -> np.ndarray:
    """Product of a boson coherent state |alpha> and an atomic (spin)
    coherent state |zeta>, as a normalised vector on the truncated basis.

    Amplitudes are assembled in log space so large |alpha| cannot overflow
    before normalisation.  If the Poisson tail of |alpha|^2 leaks past
    n_max the vector is renormalised; check `top_fock_layer_max` after
    evolving to validate the truncation.
    """
    n = np.arange(p.dim_boson)
    k = np.arange(p.dim_spin)  # k = m + j

    if alpha == 0:
        boson = np.zeros(p.dim_boson, dtype=complex)
        boson[0] = 1.0
    else:
        log_mod = n * log(abs(alpha)) - 0.5 * np.array([lgamma(i + 1) for i in n]) \
            - 0.5 * abs(alpha) ** 2
        phase = np.exp(1j * n * np.angle(alpha))
        boson = np.exp(log_mod) * phase

    if zeta == 0:
        spin = np.zeros(p.dim_spin, dtype=complex)
        spin[0] = 1.0
    else:
        log_binom = np.array([
            0.5 * (lgamma(p.two_j + 1) - lgamma(i + 1) - lgamma(p.two_j - i + 1))
            for i in k])
        log_mod = log_binom + k * log(abs(zeta)) \
            - p.j * np.log1p(abs(zeta) ** 2)
        spin = np.exp(log_mod) * np.exp(1j * k * np.angle(zeta))

    psi = np.kron(boson, spin)
    psi /= np.linalg.norm(psi)
    return psi


def top_fock_layer_max(p: ModelParams, psi: np.ndarray) -> float:
    """Largest amplitude modulus in the n = n_max boson layer; small values
    certify that the truncation does not bite."""
    return float(np.max(np.abs(psi[p.n_max * p.dim_spin:])))
