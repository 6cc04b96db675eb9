"""Chebyshev-expansion time evolution under the co-rotating-frame
Hamiltonian.

The short-time propagator exp(-i*H*dt) is expanded in Chebyshev polynomials
of the Hamiltonian rescaled to [-1, 1],

    exp(-i*H*dt) ~ sum_k a_k T_k(h),
    h = (2H - (E_max + E_min)) / (E_max - E_min),
    a_k = (-i)^k * exp(-i*dt*(E_max+E_min)/2) * (2 - delta_k0)
          * J_k(dt*(E_max-E_min)/2),

with the order chosen adaptively from the super-exponential decay of the
Bessel coefficients, so a single step is accurate to the requested
truncation tolerance (default 1e-15, i.e. machine precision).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .model import ModelParams, build_observable, top_fock_layer_max
from .specfun import bessel_j_array
from .spectra import SpectralBounds, extremal_eigenvalues
from .timeseries import TimeSeries

#: maximum tolerated relative norm change in one Chebyshev step; larger
#: drift means the spectral bounds do not contain the spectrum
NORM_DRIFT_LIMIT = 1e-8


class PropagationError(RuntimeError):
    pass


@dataclass
class QuantumState:
    """Complex amplitude vector on the product basis at a given time."""

    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "QuantumState":
        return QuantumState(self.amplitudes.copy(), self.time)


@dataclass(frozen=True)
class ChebyshevPlan:
    """Expansion coefficients for one time step of fixed dt."""

    bounds: SpectralBounds
    dt: float
    order: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def center(self) -> float:
        lo, hi = self.bounds.padded()
        return 0.5 * (lo + hi)

    @property
    def half_span(self) -> float:
        lo, hi = self.bounds.padded()
        return 0.5 * (hi - lo)


def make_plan(bounds: SpectralBounds, dt: float, tol: float = 1e-15) -> ChebyshevPlan:
    """Chebyshev coefficients for exp(-i*H*dt), truncated where the summed
    Bessel tail falls below tol."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    lo, hi = bounds.padded()
    center = 0.5 * (hi + lo)
    half_span = 0.5 * (hi - lo)
    x = dt * half_span

    k_hi = max(8, int(np.ceil(x + 40.0 + 10.0 * x ** (1.0 / 3.0))))
    bess = bessel_j_array(x, k_hi)
    mags = 2.0 * np.abs(bess)
    mags[0] = abs(bess[0])
    tail = np.cumsum(mags[::-1])[::-1]  # tail[k] = sum_{i >= k} |a_i|
    if tail[-5] > tol / 10.0:
        raise PropagationError("Bessel window too short for requested tol")
    above = np.nonzero(tail > tol)[0]
    order = int(above[-1]) if above.size else 1
    order = max(order, 1)

    k = np.arange(order + 1)
    coeffs = ((-1j) ** k) * np.exp(-1j * dt * center) * 2.0 * bess[:order + 1]
    coeffs[0] *= 0.5
    return ChebyshevPlan(bounds=bounds, dt=dt, order=order, coeffs=coeffs)


def step(state: QuantumState, h: sp.spmatrix, plan: ChebyshevPlan) -> QuantumState:
    """One Chebyshev step via the three-term recurrence; aborts if the norm
    drifts by more than NORM_DRIFT_LIMIT (bad spectral bounds)."""
    psi = state.amplitudes
    norm_in = np.linalg.norm(psi)
    out = _apply_plan(psi, h, plan)
    norm_out = np.linalg.norm(out)
    if abs(norm_out / norm_in - 1.0) > NORM_DRIFT_LIMIT:
        raise PropagationError(
            f"norm drifted by {abs(norm_out/norm_in - 1.0):.3e} in one step: "
            "spectral bounds likely do not contain the spectrum")
    return QuantumState(out, state.time + plan.dt)


def _apply_plan(psi: np.ndarray, h: sp.spmatrix, plan: ChebyshevPlan) -> np.ndarray:
    c = plan.center
    inv_s = 1.0 / plan.half_span
    coeffs = plan.coeffs

    def h_scaled(v):
        return inv_s * (h @ v - c * v)

    t_km1 = psi
    t_k = h_scaled(psi)
    out = coeffs[0] * t_km1 + coeffs[1] * t_k
    for k in range(2, plan.order + 1):
        t_kp1 = 2.0 * h_scaled(t_k) - t_km1
        out += coeffs[k] * t_kp1
        t_km1 = t_k
        t_k = t_kp1
    return out


def evolve_and_sample(psi0: QuantumState | np.ndarray, h_rot: sp.spmatrix,
                      p: ModelParams, t_final: float, sample_dt: float, *,
                      dt: float | None = None,
                      bounds: SpectralBounds | None = None,
                      plan_tol: float = 1e-15) -> TimeSeries:
    """Propagate and record scaled observables on a regular sample grid.

    Columns: n_ph = <a^dag a>/j, n_at = 1 + <Jz>/j, n_ex = n_ph + n_at,
    plus the laboratory-frame <J+> (the co-rotating value times
    exp(i*delta_phi*t)), the norm and <H_rot>.  Scalar expectation values
    of operators commuting with Jz are frame-independent, so n_ph/n_at/n_ex
    are simultaneously rotating- and lab-frame records.

    The step dt defaults to t_phi/1000 (or sample_dt/10 without drive) and
    is rounded down so an integer number of steps lands exactly on each
    sample time.
    """
    if isinstance(psi0, QuantumState):
        psi = psi0.amplitudes.astype(complex)
    else:
        psi = np.asarray(psi0, dtype=complex)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError(f"initial state not normalised: |psi| = {nrm}")
    if sample_dt <= 0 or t_final <= 0:
        raise ValueError("t_final and sample_dt must be > 0")

    if bounds is None:
        bounds = extremal_eigenvalues(h_rot)
    if dt is None:
        dt = p.t_phi / 1000.0 if np.isfinite(p.t_phi) else sample_dt / 10.0
    steps_per_sample = max(1, int(np.ceil(sample_dt / dt - 1e-12)))
    dt = sample_dt / steps_per_sample
    plan = make_plan(bounds, dt, tol=plan_tol)

    n_samples = int(round(t_final / sample_dt))
    if abs(n_samples * sample_dt - t_final) > 1e-9 * max(t_final, 1.0):
        raise ValueError("t_final must be an integer multiple of sample_dt")
    num_op = build_observable("photon_number", p)
    jz_op = build_observable("Jz", p)
    jp_op = build_observable("Jplus", p)

    t_grid = np.arange(n_samples + 1) * sample_dt
    cols = {name: np.empty(n_samples + 1) for name in
            ("n_ph", "n_at", "n_ex", "ReJp", "ImJp", "norm", "energy")}
    top_layer = 0.0

    def record(i, psi, t):
        nonlocal top_layer
        n_ph = np.real(np.vdot(psi, num_op @ psi)) / p.j
        n_at = 1.0 + np.real(np.vdot(psi, jz_op @ psi)) / p.j
        jplus = np.vdot(psi, jp_op @ psi) * np.exp(1j * p.delta_phi * t)
        cols["n_ph"][i] = n_ph
        cols["n_at"][i] = n_at
        cols["n_ex"][i] = n_ph + n_at
        cols["ReJp"][i] = jplus.real
        cols["ImJp"][i] = jplus.imag
        cols["norm"][i] = np.linalg.norm(psi)
        cols["energy"][i] = np.real(np.vdot(psi, h_rot @ psi))
        top_layer = max(top_layer, top_fock_layer_max(p, psi))

    record(0, psi, 0.0)
    state = QuantumState(psi, 0.0)
    for i in range(1, n_samples + 1):
        for _ in range(steps_per_sample):
            state = step(state, h_rot, plan)
        record(i, state.amplitudes, t_grid[i])

    return TimeSeries(t_grid, cols, meta={
        "dt": dt, "order": plan.order, "steps_per_sample": steps_per_sample,
        "top_fock_layer_max": top_layer,
        "bounds": (bounds.e_min, bounds.e_max, bounds.margin),
    })


def time_average(series: TimeSeries, t_window: float | None = None,
                 columns: tuple[str, ...] | None = None) -> dict[str, float]:
    """Trapezoid-rule averages (1/T) * integral_0^T of the named columns.

    The series must cover [0, T]; T defaults to the full record.
    """
    t = series.t
    if t_window is None:
        t_window = float(t[-1])
    if t_window <= 0:
        raise ValueError("averaging window must be > 0")
    if t_window > t[-1] * (1 + 1e-12):
        raise ValueError(f"series covers [0, {t[-1]}], cannot average to {t_window}")
    mask = t <= t_window * (1 + 1e-12)
    tt = t[mask]
    names = columns if columns is not None else series.names
    return {name: float(np.trapezoid(series[name][mask], tt) / (tt[-1] - tt[0]))
            for name in names}
