"""Reproduction drivers: quench protocols, coupling/velocity scans with
time averages, and the dynamic-critical-line extraction with its power-law
fit.

Scan points are independent; they are dispatched to a process pool (size
from the DICKESIM_WORKERS environment variable, default: CPU count) and
re-assembled in grid order, so results are bit-identical regardless of
worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from math import sqrt

import numpy as np

from . import meanfield
from .geomphase import evolve_phase_resolved
from .meanfield import (ClassicalState, integrate, linear_solution,
                        quench_initial_state)
from .model import (ModelParams, build_dicke_hamiltonian, build_observable,
                    build_rotated_hamiltonian, coherent_state)
from .propagator import evolve_and_sample, time_average
from .spectra import extremal_eigenvalues, full_diagonalization, ground_state
from .timeseries import TimeSeries, write_csv_atomic

ENGINES = ("quantum", "meanfield", "meanfield_linear", "geomphase")

WORKERS_ENV = "DICKESIM_WORKERS"

#: default averaging windows in units of the drive period
DEFAULT_WINDOW = {"quantum": 150, "meanfield": 150,
                  "meanfield_linear": 150, "geomphase": 10}


def _workers(requested: int | None, n_points: int) -> int:
    if requested is None:
        requested = int(os.environ.get(WORKERS_ENV, 0)) or (os.cpu_count() or 1)
    return max(1, min(requested, n_points))


# ----------------------------------------------------------------------
# single quench run

def run_quench(p: ModelParams, engine: str, t_total: float, *,
               sample_dt: float | None = None, dt: float | None = None,
               initial: str | ClassicalState = "meanfield",
               branch: int = +1, rtol: float | None = None) -> TimeSeries:
    """Evolve the pre-quench ground state under the suddenly rotated
    Hamiltonian and record scaled observables.

    The default initial condition is the symmetry-broken (mean-field)
    ground state of the undriven model: the classical stationary point for
    the classical engines, the corresponding coherent state for the
    quantum engine.  `initial='quantum'` selects the exact ground state
    instead (quantum/geomphase engines); an explicit ClassicalState is
    accepted for the classical engines.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if sample_dt is None:
        sample_dt = p.t_phi / 100.0 if np.isfinite(p.t_phi) else t_total / 1000.0

    if engine == "meanfield":
        state0 = initial if isinstance(initial, ClassicalState) \
            else quench_initial_state(p, branch).state
        return integrate(state0, p, t_total, sample_dt,
                         rtol=rtol if rtol is not None else meanfield.DEFAULT_RTOL)

    if engine == "meanfield_linear":
        return _linear_quench(p, t_total, sample_dt, branch)

    if engine == "quantum":
        if isinstance(initial, ClassicalState):
            coh = meanfield.CoherentParams.from_classical(initial, p.j)
            psi0 = coherent_state(p, coh.alpha, coh.zeta)
        elif initial == "quantum":
            psi0 = ground_state(build_dicke_hamiltonian(p)).vector.astype(complex)
        else:
            coh = quench_initial_state(p, branch).coherent
            psi0 = coherent_state(p, coh.alpha, coh.zeta)
        h_rot = build_rotated_hamiltonian(p)
        return evolve_and_sample(psi0, h_rot, p, t_total, sample_dt, dt=dt)

    # geomphase: exact ground state of the undriven Hamiltonian by
    # construction (chi_l(0) = delta_{l,0})
    basis = full_diagonalization(build_dicke_hamiltonian(p))
    jz = build_observable("Jz", p)
    series = evolve_phase_resolved(
        None, basis, p, t_total, sample_dt=sample_dt,
        rtol=rtol if rtol is not None else 1e-10,
        extra_observables={"jz_scaled": jz / p.j})
    series.columns["n_at"] = 1.0 + series.columns.pop("jz_scaled")
    # keep column order t, n_ph, n_at, norm
    series.columns = {k: series.columns[k] for k in ("n_ph", "n_at", "norm")}
    return series


def _linear_quench(p: ModelParams, t_total: float, sample_dt: float,
                   branch: int) -> TimeSeries:
    init = quench_initial_state(p, branch)
    t = np.arange(int(round(t_total / sample_dt)) + 1) * sample_dt
    if init.trivial:
        zero = np.zeros_like(t)
        return TimeSeries(t, {"Q": zero, "P": zero, "q": zero.copy(),
                              "p": zero.copy(), "n_ph": zero.copy(),
                              "n_at": zero.copy(), "H_cl": zero.copy()},
                          meta={"trivial": True})
    if p.coupling > p.lambda_c:
        phase = "superradiant"
        center = meanfield.stationary_states(p)[1 if branch >= 0 else 2]
        dev_atom = init.state.Q - center.Q
        dev_photon = init.state.q - center.q
    else:
        phase = "normal"
        dev_atom = init.state.Q
        dev_photon = init.state.q
    sol = linear_solution(dev_atom, dev_photon, p, phase, branch)
    coords = sol.evaluate(t)
    n_ph = 0.5 * (coords["q"] ** 2 + coords["p"] ** 2)
    n_at = 0.5 * (coords["Q"] ** 2 + coords["P"] ** 2)
    r2 = coords["Q"] ** 2 + coords["P"] ** 2
    h_cl = (0.5 * p.omega_rot * r2 + p.omega * n_ph
            + p.coupling * coords["Q"] * coords["q"] * np.sqrt(4.0 - r2))
    cols = dict(coords)
    cols.update({"n_ph": n_ph, "n_at": n_at, "H_cl": h_cl})
    return TimeSeries(t, cols, meta={
        "mean_photon_closed_form": sol.mean_photon_average()})


# ----------------------------------------------------------------------
# parameter scans

@dataclass(frozen=True)
class ScanSpec:
    """One-parameter sweep: evolve a quench at every grid point and tabulate
    n_ph after one drive period plus window time-averages."""

    axis: str                      # "lambda" | "delta_phi"
    values: np.ndarray
    engine: str
    base: ModelParams
    window: float | None = None    # averaging time in units of t_phi
    samples_per_period: int = 100
    initial: str | ClassicalState = "meanfield"
    branch: int = +1
    rtol: float | None = None
    dt: float | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.axis not in ("lambda", "delta_phi"):
            raise ValueError("axis must be 'lambda' or 'delta_phi'")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=float))
        if self.values.size < 2:
            raise ValueError("grid needs at least 2 points")
        if self.window is not None and self.window < 1:
            raise ValueError("averaging window must be >= 1 drive period")

    def params_at(self, value: float) -> ModelParams:
        if self.axis == "lambda":
            return replace(self.base, coupling=float(value))
        return replace(self.base, delta_phi=float(value))

    def window_periods(self) -> float:
        return self.window if self.window is not None \
            else DEFAULT_WINDOW[self.engine]


@dataclass
class ScanResult:
    spec: ScanSpec
    values: np.ndarray
    n_ph_period: np.ndarray        # n_ph after a single drive period
    nbar_ph: np.ndarray
    nbar_at: np.ndarray
    errors: list[tuple[int, str]] = field(default_factory=list)

    def write_csv(self, path) -> None:
        write_csv_atomic(path, f"{self.spec.axis},n_ph_Tphi,nbar_ph,nbar_at",
                         [self.values, self.n_ph_period,
                          self.nbar_ph, self.nbar_at])


def _scan_point(args) -> tuple[int, float, float, float, str]:
    spec, index = args
    value = float(spec.values[index])
    p = spec.params_at(value)
    try:
        t_phi = p.t_phi
        if not np.isfinite(t_phi):
            raise ValueError("scans require delta_phi > 0 for the drive period")
        t_total = spec.window_periods() * t_phi
        series = run_quench(p, spec.engine, t_total,
                            sample_dt=t_phi / spec.samples_per_period,
                            dt=spec.dt, initial=spec.initial,
                            branch=spec.branch, rtol=spec.rtol)
        averages = time_average(series, columns=("n_ph", "n_at"))
        i_period = int(round(spec.samples_per_period))
        n_ph_period = float(series["n_ph"][i_period]) \
            if i_period < series.t.size else np.nan
        return index, n_ph_period, averages["n_ph"], averages["n_at"], ""
    except Exception as exc:  # per-point failures recorded, scan continues
        return index, np.nan, np.nan, np.nan, f"{type(exc).__name__}: {exc}"


def scan(spec: ScanSpec) -> ScanResult:
    """Run the sweep, in parallel when more than one worker is available;
    rows are assembled in grid order regardless of completion order."""
    n = spec.values.size
    jobs = [(spec, i) for i in range(n)]
    workers = _workers(spec.workers, n)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_point, jobs))
    else:
        rows = [_scan_point(job) for job in jobs]
    rows.sort(key=lambda r: r[0])
    n_ph_period = np.array([r[1] for r in rows])
    nbar_ph = np.array([r[2] for r in rows])
    nbar_at = np.array([r[3] for r in rows])
    errors = [(r[0], r[4]) for r in rows if r[4]]
    return ScanResult(spec, spec.values.copy(), n_ph_period, nbar_ph,
                      nbar_at, errors)


# ----------------------------------------------------------------------
# dynamic critical line

@dataclass
class CriticalLineFit:
    """Per-velocity darkening minima with the fitted power law
    lambda_min(delta_phi) = lambda_c0 + c * delta_phi**beta."""

    delta_values: np.ndarray
    lambda_min: np.ndarray          # NaN where no interior minimum was found
    coefficient: float
    exponent: float
    residual_rms: float
    analytic_estimate: np.ndarray   # energy-balance estimate per velocity
    excluded: list[int] = field(default_factory=list)
    curves: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def write_csv(self, path) -> None:
        write_csv_atomic(path, "delta_phi,lambda_min,analytic_estimate",
                         [self.delta_values, self.lambda_min,
                          self.analytic_estimate])


def dynamic_critical_estimate(p: ModelParams) -> float:
    """Energy-balance estimate sqrt(omega*(omega0 + 2*delta_phi))/2: the
    coupling where the quench energy matches the potential hump at the
    origin."""
    return 0.5 * sqrt(p.omega * (p.omega0 + 2.0 * p.delta_phi))


def _smooth(vals: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return vals
    kern = np.ones(width) / width
    return np.convolve(np.pad(vals, width // 2, mode="edge"), kern,
                       mode="valid")


def locate_darkness_minimum(lams: np.ndarray, nbar: np.ndarray,
                            smooth: int = 5,
                            depth_tolerance: float = 1.3) -> float | None:
    """Coupling of the darkening dip on a sampled nbar_ph(lambda) curve.

    The curve rises from zero at the undriven critical coupling, passes a
    first maximum, wiggles across a valley and finally climbs towards the
    stationary branch.  The dip is taken as the rightmost local minimum of
    the smoothed curve whose depth is within `depth_tolerance` of the
    deepest post-maximum value, which ignores hair-thin resonance spikes
    while tracking the valley floor.  Refined by three-point parabolic
    interpolation; None when no interior minimum exists.
    """
    ok = np.isfinite(nbar)
    if ok.sum() < 7:
        return None
    lams = lams[ok]
    nbar = nbar[ok]
    sm = _smooth(nbar, smooth)
    imax = None
    for i in range(1, sm.size - 1):
        if sm[i] >= sm[i - 1] and sm[i] >= sm[i + 1] \
                and sm[i] > 1.10 * sm[: i].min():
            imax = i
            break
    if imax is None or imax + 2 >= sm.size:
        return None
    seg = sm[imax + 1:]
    floor = seg.min()
    candidates = [imax + 1 + k for k in range(1, seg.size - 1)
                  if seg[k] <= seg[k - 1] and seg[k] <= seg[k + 1]
                  and seg[k] <= depth_tolerance * floor]
    if not candidates:
        return None
    j = candidates[-1]
    y0, y1, y2 = sm[j - 1], sm[j], sm[j + 1]
    den = y0 - 2.0 * y1 + y2
    step = lams[j] - lams[j - 1]
    shift = 0.5 * step * (y0 - y2) / den if den > 0 else 0.0
    return float(lams[j] + shift)


def critical_line(delta_grid, p_base: ModelParams,
                  lambda_grid: np.ndarray | None = None, *,
                  lambda_step: float = 0.005, window: float = 150,
                  samples_per_period: int = 100, smooth: int = 5,
                  depth_tolerance: float = 1.3, refit_sigma: float = 2.0,
                  rtol: float | None = None,
                  workers: int | None = None) -> CriticalLineFit:
    """Locate the darkening minimum per driving velocity and fit the power
    law lambda_min = lambda_c0 + c * delta_phi**beta.

    lambda_grid, when given, is used for every velocity; otherwise a
    per-velocity grid spans the region between the undriven critical
    coupling and the upper end of the scaling band.  A single robust pass
    excludes points whose log-log residual exceeds refit_sigma times the
    rms and refits; excluded indices are reported.
    """
    delta_grid = np.asarray(delta_grid, dtype=float)
    lam_c0 = p_base.lambda_c0
    minima = np.full(delta_grid.size, np.nan)
    analytic = np.empty(delta_grid.size)
    curves = []
    for i, dphi in enumerate(delta_grid):
        if lambda_grid is None:
            hi = lam_c0 + 0.55 * dphi ** 0.75 + 0.08
            lams = np.arange(lam_c0 + 0.02, hi, lambda_step)
        else:
            lams = np.asarray(lambda_grid, dtype=float)
        spec = ScanSpec(axis="lambda", values=lams, engine="meanfield",
                        base=replace(p_base, delta_phi=float(dphi)),
                        window=window, samples_per_period=samples_per_period,
                        rtol=rtol, workers=workers)
        result = scan(spec)
        curves.append((lams, result.nbar_ph))
        minima[i] = locate_darkness_minimum(
            lams, result.nbar_ph, smooth, depth_tolerance) or np.nan
        analytic[i] = dynamic_critical_estimate(
            replace(p_base, delta_phi=float(dphi)))

    usable = np.isfinite(minima) & (minima > lam_c0)
    excluded = [int(i) for i in np.nonzero(~usable)[0]]
    if usable.sum() < 3:
        raise RuntimeError("too few interior minima to fit a power law")

    def fit(mask):
        x = np.log(delta_grid[mask])
        y = np.log(minima[mask] - lam_c0)
        a = np.vstack([x, np.ones_like(x)]).T
        (beta, logc), *_ = np.linalg.lstsq(a, y, rcond=None)
        resid = y - a @ np.array([beta, logc])
        return float(np.exp(logc)), float(beta), resid

    coeff, beta, resid = fit(usable)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    if rms > 0:
        keep = usable.copy()
        keep[np.nonzero(usable)[0][np.abs(resid) > refit_sigma * rms]] = False
        if keep.sum() >= 3 and keep.sum() < usable.sum():
            excluded += [int(i) for i in np.nonzero(usable & ~keep)[0]]
            coeff, beta, resid = fit(keep)
            rms = float(np.sqrt(np.mean(resid ** 2)))
    return CriticalLineFit(delta_grid, minima, coeff, beta, rms, analytic,
                           sorted(excluded), curves)


# ----------------------------------------------------------------------
# potential contours

def potential_grid(p: ModelParams, q_range=(-2.0, 2.0), qq_range=(-4.0, 4.0),
                   n_atom: int = 81, n_photon: int = 121) -> tuple[np.ndarray, ...]:
    """Static classical potential V(Q, q, P=0) on a rectangular grid,
    flattened to (Q, q, V) columns for contour export."""
    big_q = np.linspace(*q_range, n_atom)
    q = np.linspace(*qq_range, n_photon)
    bq, qq = np.meshgrid(big_q, q, indexing="ij")
    v = (0.5 * p.omega_rot * bq ** 2 + 0.5 * p.omega * qq ** 2
         + p.coupling * bq * qq * np.sqrt(np.maximum(4.0 - bq ** 2, 0.0)))
    return bq.ravel(), qq.ravel(), v.ravel()
