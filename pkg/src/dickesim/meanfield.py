"""Classical (thermodynamic-limit) dynamics of the driven Dicke model.

Boson and spin coherent-state parameters map to two canonical pairs,

    zeta  = (Q + iP) / sqrt(4 - Q^2 - P^2),      alpha = sqrt(j/2) (q + ip),

and the co-rotating-frame expectation values evolve under the classical
Hamiltonian

    H_cl = Omega/2 (Q^2 + P^2) + omega/2 (q^2 + p^2)
           + coupling * Q q sqrt(4 - Q^2 - P^2),

with Omega = omega0 + delta_phi.  Scaled densities are
n_ph = (q^2 + p^2)/2 and n_at = (Q^2 + P^2)/2; the spin pair lives inside
the disk Q^2 + P^2 < 4 (the pole of the stereographic parametrisation).

Time integration uses an adaptive embedded Dormand-Prince 5(4) pair,
jit-compiled because parameter scans integrate thousands of long
trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from numba import njit

from .model import ModelParams
from .timeseries import TimeSeries

#: stop integration when Q^2 + P^2 exceeds 4 minus this guard
POLE_GUARD = 1e-9

#: defaults chosen so classical energy stays conserved to <1e-8 over
#: hundreds of drive periods
DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-12


class DomainError(ValueError):
    """Spin coordinates at or beyond the coordinate pole Q^2+P^2 = 4."""


@dataclass(frozen=True)
class ClassicalState:
    """Canonical coordinates: atomic pair (Q, P), photonic pair (q, p)."""

    Q: float
    P: float
    q: float
    p: float
    time: float = 0.0

    @property
    def n_ph(self) -> float:
        return 0.5 * (self.q ** 2 + self.p ** 2)

    @property
    def n_at(self) -> float:
        return 0.5 * (self.Q ** 2 + self.P ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.Q, self.P, self.q, self.p])

    @classmethod
    def from_array(cls, y, time: float = 0.0) -> "ClassicalState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]), time)

    def negated(self) -> "ClassicalState":
        return ClassicalState(-self.Q, -self.P, -self.q, -self.p, self.time)


@dataclass(frozen=True)
class CoherentParams:
    """Coherent-state labels equivalent to a classical state at given j."""

    alpha: complex
    zeta: complex

    @classmethod
    def from_classical(cls, s: ClassicalState, j: float) -> "CoherentParams":
        r2 = s.Q ** 2 + s.P ** 2
        if r2 >= 4.0:
            raise DomainError(f"Q^2+P^2 = {r2} >= 4")
        zeta = (s.Q + 1j * s.P) / sqrt(4.0 - r2)
        alpha = sqrt(j / 2.0) * (s.q + 1j * s.p)
        return cls(alpha, zeta)

    def to_classical(self, j: float, time: float = 0.0) -> ClassicalState:
        w = 2.0 * self.zeta / sqrt(1.0 + abs(self.zeta) ** 2)
        qp = self.alpha * sqrt(2.0 / j)
        return ClassicalState(w.real, w.imag, qp.real, qp.imag, time)


# ----------------------------------------------------------------------
# equations of motion

@njit(cache=True)
def _rhs(y, omega, omega_rot, lam, out):
    big_q, big_p, q, p = y[0], y[1], y[2], y[3]
    root = np.sqrt(4.0 - (big_q * big_q + big_p * big_p))
    out[0] = omega_rot * big_p - lam * q * big_q * big_p / root
    out[1] = -omega_rot * big_q + lam * q * (2.0 * big_q * big_q + big_p * big_p - 4.0) / root
    out[2] = omega * p
    out[3] = -omega * q - lam * big_q * root


def eom_rhs(s: ClassicalState, p: ModelParams) -> np.ndarray:
    """Canonical equations (dQ/dt, dP/dt, dq/dt, dp/dt)."""
    y = s.as_array()
    if y[0] ** 2 + y[1] ** 2 >= 4.0:
        raise DomainError(f"Q^2+P^2 = {y[0]**2 + y[1]**2} >= 4")
    out = np.empty(4)
    _rhs(y, p.omega, p.omega_rot, p.coupling, out)
    return out


def classical_hamiltonian(s: ClassicalState, p: ModelParams) -> float:
    r2 = s.Q ** 2 + s.P ** 2
    if r2 > 4.0:
        raise DomainError(f"Q^2+P^2 = {r2} > 4")
    return (0.5 * p.omega_rot * r2 + 0.5 * p.omega * (s.q ** 2 + s.p ** 2)
            + p.coupling * s.Q * s.q * sqrt(4.0 - r2))


def classical_potential(big_q: float, q: float, big_p: float,
                        p: ModelParams) -> float:
    """Static potential V(Q, q, P): the Hamiltonian with both momentum
    kinetic terms dropped (P enters only through the square root)."""
    r2 = big_q ** 2 + big_p ** 2
    if r2 > 4.0:
        raise DomainError(f"Q^2+P^2 = {r2} > 4")
    return (0.5 * p.omega_rot * big_q ** 2 + 0.5 * p.omega * q ** 2
            + p.coupling * big_q * q * sqrt(4.0 - r2))


# ----------------------------------------------------------------------
# adaptive Dormand-Prince 5(4) integrator

@njit(cache=True)
def _integrate_dp54(y0, omega, omega_rot, lam, t_samples, rtol, atol):
    """Integrate from t=0 sampling at t_samples (ascending, t_samples[0]>=0).

    Returns (samples, n_filled, status, n_steps); status 1 flags a stop at
    the coordinate pole.
    """
    a21 = 1.0 / 5.0
    a31, a32 = 3.0 / 40.0, 9.0 / 40.0
    a41, a42, a43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
    a51, a52, a53, a54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
    a61, a62, a63, a64, a65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                               49.0 / 176.0, -5103.0 / 18656.0)
    b1, b3, b4, b5, b6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
    e1, e3, e4, e5, e6, e7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                              -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

    ny = 4
    n_out = t_samples.size
    out = np.empty((n_out, ny))
    y = y0.copy()
    k1 = np.empty(ny); k2 = np.empty(ny); k3 = np.empty(ny); k4 = np.empty(ny)
    k5 = np.empty(ny); k6 = np.empty(ny); k7 = np.empty(ny)
    ytmp = np.empty(ny); ynew = np.empty(ny)

    t = 0.0
    isamp = 0
    while isamp < n_out and t_samples[isamp] <= 0.0:
        out[isamp] = y
        isamp += 1

    _rhs(y, omega, omega_rot, lam, k1)
    t_end = t_samples[n_out - 1]
    h = min(1e-4, t_end if t_end > 0 else 1e-4)
    status = 0
    n_steps = 0
    while t < t_end:
        if y[0] * y[0] + y[1] * y[1] > 4.0 - POLE_GUARD:
            status = 1
            break
        if isamp < n_out and t + h > t_samples[isamp]:
            h = t_samples[isamp] - t
        if t + h > t_end:
            h = t_end - t

        for i in range(ny):
            ytmp[i] = y[i] + h * a21 * k1[i]
        _rhs(ytmp, omega, omega_rot, lam, k2)
        for i in range(ny):
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i])
        _rhs(ytmp, omega, omega_rot, lam, k3)
        for i in range(ny):
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i])
        _rhs(ytmp, omega, omega_rot, lam, k4)
        for i in range(ny):
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i])
        _rhs(ytmp, omega, omega_rot, lam, k5)
        for i in range(ny):
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i]
                                  + a64 * k4[i] + a65 * k5[i])
        _rhs(ytmp, omega, omega_rot, lam, k6)
        for i in range(ny):
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i]
                                  + b5 * k5[i] + b6 * k6[i])
        if ynew[0] * ynew[0] + ynew[1] * ynew[1] >= 4.0:
            # reject: stepped over the pole; shrink and retry
            h *= 0.25
            if h < 1e-15:
                status = 1
                break
            continue
        _rhs(ynew, omega, omega_rot, lam, k7)

        err = 0.0
        for i in range(ny):
            e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i]
                     + e6 * k6[i] + e7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err += (e / sc) ** 2
        err = np.sqrt(err / ny)

        if err <= 1.0:
            t += h
            for i in range(ny):
                y[i] = ynew[i]
                k1[i] = k7[i]  # first-same-as-last
            while isamp < n_out and t >= t_samples[isamp] - 1e-12 * max(1.0, abs(t)):
                out[isamp] = y
                isamp += 1
            n_steps += 1
        if err == 0.0:
            fac = 5.0
        else:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            elif fac > 5.0:
                fac = 5.0
        h *= fac
        if h < 1e-15:
            status = 1
            break
    return out, isamp, status, n_steps


def integrate(s0: ClassicalState, p: ModelParams, t_final: float,
              sample_dt: float, rtol: float = DEFAULT_RTOL,
              atol: float = DEFAULT_ATOL) -> TimeSeries:
    """Trajectory from s0 sampled every sample_dt up to t_final.

    Columns: Q, P, q, p, n_ph, n_at, H_cl.  An approach to the coordinate
    pole stops the run; the returned (partial) series then carries
    meta['singular'] = True.
    """
    y0 = s0.as_array()
    if y0[0] ** 2 + y0[1] ** 2 >= 4.0:
        raise DomainError("initial state outside the coordinate disk")
    n_samples = int(round(t_final / sample_dt))
    if abs(n_samples * sample_dt - t_final) > 1e-9 * max(t_final, 1.0):
        raise ValueError("t_final must be an integer multiple of sample_dt")
    t_grid = np.arange(n_samples + 1) * sample_dt
    out, n_filled, status, n_steps = _integrate_dp54(
        y0, p.omega, p.omega_rot, p.coupling, t_grid, rtol, atol)
    t_grid = t_grid[:n_filled]
    out = out[:n_filled]
    big_q, big_p, q, pp = out.T
    r2 = big_q ** 2 + big_p ** 2
    cols = {
        "Q": big_q, "P": big_p, "q": q, "p": pp,
        "n_ph": 0.5 * (q ** 2 + pp ** 2),
        "n_at": 0.5 * r2,
        "H_cl": (0.5 * p.omega_rot * r2 + 0.5 * p.omega * (q ** 2 + pp ** 2)
                 + p.coupling * big_q * q * np.sqrt(np.maximum(4.0 - r2, 0.0))),
    }
    return TimeSeries(t_grid, cols, meta={
        "singular": bool(status == 1), "n_steps": int(n_steps),
        "rtol": rtol, "atol": atol,
    })


# ----------------------------------------------------------------------
# stationary states, linear modes, closed-form linear dynamics

def stationary_states(p: ModelParams) -> list[ClassicalState]:
    """Fixed points of the flow: the origin, plus the two symmetry-broken
    condensate points above the critical coupling."""
    states = [ClassicalState(0.0, 0.0, 0.0, 0.0)]
    lam, lam_c = p.coupling, p.lambda_c
    if lam > lam_c:
        ratio2 = (lam_c / lam) ** 2
        big_q0 = sqrt(2.0) * sqrt(1.0 - ratio2)
        q0 = (2.0 * lam / p.omega) * sqrt(1.0 - ratio2 ** 2)
        states.append(ClassicalState(big_q0, 0.0, -q0, 0.0))
        states.append(ClassicalState(-big_q0, 0.0, q0, 0.0))
    return states


@dataclass(frozen=True)
class LinearModes:
    """Eigenmode angular frequencies of the linearised flow about a
    stationary state, with the photon/atom amplitude ratios."""

    eps_plus: float
    eps_minus: float
    phase: str                  # "normal" | "superradiant"
    ratio_plus: float           # photon over atom displacement, + mode
    ratio_minus: float


def linear_modes(p: ModelParams, phase: str) -> LinearModes:
    """Frequencies of small oscillations about the origin (normal) or the
    condensate (superradiant); eps_minus is the soft mode vanishing at the
    critical coupling."""
    omega, omega_rot, lam = p.omega, p.omega_rot, p.coupling
    lam_c = p.lambda_c
    if phase == "normal":
        if lam > lam_c:
            raise ValueError(f"normal phase needs coupling <= {lam_c}, got {lam}")
        half_sum = 0.5 * (omega_rot ** 2 + omega ** 2)
        disc = sqrt((omega_rot ** 2 - omega ** 2) ** 2
                    + 16.0 * lam ** 2 * omega_rot * omega)
        ep2 = half_sum + 0.5 * disc
        em2 = half_sum - 0.5 * disc
        eps_p, eps_m = sqrt(ep2), sqrt(max(em2, 0.0))
        # photon/atom displacement ratio per mode
        rp = (ep2 - omega_rot ** 2) / (2.0 * lam * omega_rot) if lam > 0 else 0.0
        rm = (em2 - omega_rot ** 2) / (2.0 * lam * omega_rot) if lam > 0 else 0.0
    elif phase == "superradiant":
        if lam < lam_c:
            raise ValueError(f"superradiant phase needs coupling >= {lam_c}, got {lam}")
        stiff = 16.0 * lam ** 4 / omega ** 2
        half_sum = 0.5 * (omega ** 2 + stiff)
        disc = sqrt((omega ** 2 - stiff) ** 2 + 4.0 * (omega * omega_rot) ** 2)
        ep2 = half_sum + 0.5 * disc
        em2 = half_sum - 0.5 * disc
        eps_p, eps_m = sqrt(ep2), sqrt(max(em2, 0.0))
        pref = 2.0 * sqrt(2.0) * omega * lam_c ** 2 / sqrt(lam ** 2 + lam_c ** 2)
        rp = pref / (ep2 - omega ** 2)
        rm = pref / (em2 - omega ** 2)
    else:
        raise ValueError(f"phase must be 'normal' or 'superradiant', got {phase!r}")
    return LinearModes(eps_p, eps_m, phase, rp, rm)


@dataclass(frozen=True)
class LinearSolution:
    """Two-cosine closed-form solution of the linearised dynamics for
    initial displacements with vanishing momenta."""

    modes: LinearModes
    center: ClassicalState          # expansion point
    amp_plus: float                 # atomic displacement amplitudes A+-
    amp_minus: float
    photon_amp_plus: float          # photonic amplitudes a+- = ratio * A+-
    photon_amp_minus: float
    omega: float
    omega_rot: float
    atom_velocity_coeff: float      # dQ/dt = coeff * P in the linearised flow

    def evaluate(self, t: np.ndarray) -> dict[str, np.ndarray]:
        t = np.asarray(t, dtype=float)
        ep, em = self.modes.eps_plus, self.modes.eps_minus
        cp, cm = np.cos(ep * t), np.cos(em * t)
        sp_, sm = np.sin(ep * t), np.sin(em * t)
        atom = self.amp_plus * cp + self.amp_minus * cm
        photon = self.photon_amp_plus * cp + self.photon_amp_minus * cm
        atom_dot = -(self.amp_plus * ep * sp_ + self.amp_minus * em * sm)
        photon_dot = -(self.photon_amp_plus * ep * sp_ + self.photon_amp_minus * em * sm)
        return {
            "Q": self.center.Q + atom,
            "P": atom_dot / self.atom_velocity_coeff,
            "q": self.center.q + photon,
            "p": photon_dot / self.omega,
        }

    def mean_photon_average(self) -> float:
        """Long-time average of n_ph = (q^2+p^2)/2 in the linear regime."""
        ep2 = self.modes.eps_plus ** 2
        em2 = self.modes.eps_minus ** 2
        w2 = self.omega ** 2
        osc = ((ep2 + w2) * self.photon_amp_plus ** 2
               + (em2 + w2) * self.photon_amp_minus ** 2) / (4.0 * w2)
        return 0.5 * self.center.q ** 2 + osc


def linear_solution(atom_dev0: float, photon_dev0: float, p: ModelParams,
                    phase: str, branch: int = +1) -> LinearSolution:
    """Closed-form linear trajectory from initial displacements
    (atom_dev0, photon_dev0) off the stationary state, with zero initial
    momenta.

    In the normal phase the displacements are the coordinates themselves;
    in the superradiant phase they are measured from the condensate point
    selected by `branch`.
    """
    modes = linear_modes(p, phase)
    rp, rm = modes.ratio_plus, modes.ratio_minus
    if abs(rp - rm) < 1e-14:
        raise ValueError("degenerate mode ratios; amplitudes undefined")
    amp_plus = (photon_dev0 - atom_dev0 * rm) / (rp - rm)
    amp_minus = (atom_dev0 * rp - photon_dev0) / (rp - rm)
    if phase == "normal":
        center = ClassicalState(0.0, 0.0, 0.0, 0.0)
        vel_coeff = p.omega_rot
    else:
        pts = stationary_states(p)
        if len(pts) < 3:
            raise ValueError("superradiant expansion needs coupling > lambda_c")
        center = pts[1] if branch >= 0 else pts[2]
        vel_coeff = 2.0 * (p.coupling ** 2 + p.lambda_c ** 2) / p.omega
    return LinearSolution(modes=modes, center=center,
                          amp_plus=amp_plus, amp_minus=amp_minus,
                          photon_amp_plus=rp * amp_plus,
                          photon_amp_minus=rm * amp_minus,
                          omega=p.omega, omega_rot=p.omega_rot,
                          atom_velocity_coeff=vel_coeff)


# ----------------------------------------------------------------------
# quench initial conditions and frame transformation

@dataclass(frozen=True)
class QuenchInit:
    state: ClassicalState
    coherent: CoherentParams
    trivial: bool               # True when coupling <= lambda_c0 (origin start)


def quench_initial_state(p: ModelParams, branch: int = +1) -> QuenchInit:
    """Symmetry-broken ground state of the undriven model as the t=0
    condition for a sudden switch-on of the rotation.

    Below the undriven critical coupling the ground state is the origin
    and the quench is trivial.
    """
    lam, lam_c0 = p.coupling, p.lambda_c0
    sgn = 1.0 if branch >= 0 else -1.0
    if lam <= lam_c0:
        state = ClassicalState(0.0, 0.0, 0.0, 0.0)
        return QuenchInit(state, CoherentParams.from_classical(state, p.j), True)
    ratio2 = (lam_c0 / lam) ** 2
    big_q0 = sgn * sqrt(2.0) * sqrt(1.0 - ratio2)
    q0 = -sgn * (2.0 * lam / p.omega) * sqrt(1.0 - ratio2 ** 2)
    state = ClassicalState(big_q0, 0.0, q0, 0.0)
    return QuenchInit(state, CoherentParams.from_classical(state, p.j), False)


def lab_frame(s: ClassicalState, phi: float) -> ClassicalState:
    """Rotate the atomic pair back to the laboratory frame by angle phi;
    the photonic pair is frame-independent."""
    c, si = np.cos(phi), np.sin(phi)
    return ClassicalState(s.Q * c - s.P * si, s.Q * si + s.P * c,
                          s.q, s.p, s.time)


# ----------------------------------------------------------------------
# fine-tuned complete-darkening initial condition

#: escape state recorded on the zero-energy unstable manifold of the origin
#: at coupling 0.823 under resonant unit-velocity driving
#: (omega = omega0 = delta_phi = 1).  Its classical energy vanishes to the
#: precision of the quoted digits.
FINE_TUNED_PRESET = ClassicalState(Q=0.9049, P=-0.0204, q=-1.6382, p=0.171581)

#: coupling the preset was recorded at
FINE_TUNED_COUPLING = 0.823


def fine_tuned_state(p: ModelParams, eta: float = 1e-6,
                     norm_threshold: float = 1.0,
                     rtol: float = 1e-12) -> ClassicalState:
    """Regenerate a fine-tuned darkening state by the two-stage procedure:
    start at the origin with an infinitesimal photon momentum eta, follow
    the escape along the unstable manifold, and record the first sampled
    state whose phase-space norm exceeds norm_threshold.

    The result lies on the zero-energy surface; by chaotic sensitivity it
    is a nearby relative, not a digit-for-digit match, of
    FINE_TUNED_PRESET.
    """
    if p.coupling <= p.lambda_c:
        raise ValueError("origin is stable below the rotating-frame critical "
                         "coupling; no escape trajectory exists")
    y = np.array([0.0, 0.0, 0.0, eta])
    chunk = np.linspace(0.0, 1.0, 101)
    t0 = 0.0
    for _ in range(2000):
        out, n_filled, status, _ = _integrate_dp54(
            y, p.omega, p.omega_rot, p.coupling, chunk, rtol, 1e-14)
        if status != 0:
            raise RuntimeError("escape trajectory hit the coordinate pole")
        norms = np.sqrt((out[1:n_filled] ** 2).sum(axis=1))
        hit = np.nonzero(norms > norm_threshold)[0]
        if hit.size:
            i = hit[0] + 1
            return ClassicalState.from_array(out[i], time=t0 + chunk[i])
        y = out[n_filled - 1].copy()
        t0 += chunk[-1]
    raise RuntimeError("no escape within the search horizon; eta too small?")
