"""Classical particle in the isotropic quartic double well ("Mexican hat"):
elliptic-integral period and time-averaged radius, plus a Cartesian
numerical integrator for cross-checks.

For energy -eps just below the central hump, radial motion runs between
turning points rho_-, rho_+ and the closed forms are

    T_half    = sqrt(2m/g) * K(kappa) / rho_+,
    <rho^2>_T = rho_+^2 * E(kappa) / K(kappa),
    kappa     = sqrt(rho_+^2 - rho_-^2) / rho_+.

As eps -> 0 the inner turning point collapses onto the hump, K diverges
logarithmically and the averages slow-roll to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, sqrt

import numpy as np
from scipy.integrate import solve_ivp

from .specfun import elliptic_ke_complement
from .timeseries import TimeSeries

#: below this energy depth the half-period is reported as infinite
EPS_FLOOR = 1e-300


@dataclass(frozen=True)
class MexHatParams:
    """Mass m, quadratic coefficient k > 0, quartic coefficient g > 0, and
    energy depth eps >= 0 (total energy is -eps)."""

    m: float
    k: float
    g: float
    eps: float = 0.0

    def __post_init__(self):
        if self.m <= 0 or self.k <= 0 or self.g <= 0:
            raise ValueError("m, k, g must all be > 0")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")

    @property
    def rho0_sq(self) -> float:
        """Radius squared of the potential minimum, k/g."""
        return self.k / self.g

    @property
    def v_min(self) -> float:
        """Well depth -k^2/(4g)."""
        return -self.k ** 2 / (4.0 * self.g)

    @property
    def eps_max(self) -> float:
        """Largest depth with bound radial motion, k^2/(4g)."""
        return self.k ** 2 / (4.0 * self.g)

    def potential(self, rho_sq):
        return -0.5 * self.k * rho_sq + 0.25 * self.g * rho_sq ** 2


def turning_points(p: MexHatParams) -> tuple[float, float]:
    """Radial turning points (rho_-, rho_+) of the bound motion.

    rho_-^2 is evaluated via the product form 4*eps/g / rho_+^2 so tiny
    eps keeps full relative precision (the naive difference cancels)."""
    if not 0.0 <= p.eps <= p.eps_max * (1 + 1e-12):
        raise ValueError(f"eps must lie in [0, {p.eps_max}], got {p.eps}")
    disc = max(p.rho0_sq ** 2 - 4.0 * p.eps / p.g, 0.0)
    rp_sq = p.rho0_sq + sqrt(disc)
    rm_sq = (4.0 * p.eps / p.g) / rp_sq  # = rho0^2 - sqrt(disc), stably
    return sqrt(rm_sq), sqrt(rp_sq)


def half_period(p: MexHatParams) -> float:
    """Time to travel from rho_- to rho_+ (diverges logarithmically as
    eps -> 0; +inf is returned below the floor guard)."""
    if p.eps <= EPS_FLOOR:
        return inf
    rm, rp = turning_points(p)
    big_k, _ = elliptic_ke_complement(min(rm / rp, 1.0))
    return sqrt(2.0 * p.m / p.g) * big_k / rp


def average_rho_squared(p: MexHatParams) -> float:
    """Closed-form time average of rho^2 over one radial half-period."""
    if not 0.0 < p.eps <= p.eps_max * (1 + 1e-12):
        raise ValueError(f"eps must lie in (0, {p.eps_max}], got {p.eps}")
    rm, rp = turning_points(p)
    big_k, big_e = elliptic_ke_complement(min(rm / rp, 1.0))
    return rp * rp * big_e / big_k


def integrate_mexhat(x0, v0, p: MexHatParams, t_final: float,
                     sample_dt: float | None = None,
                     rtol: float = 1e-11, atol: float = 1e-12) -> TimeSeries:
    """Cartesian trajectory under m*r'' = k*r - g*|r|^2 r.

    Cartesian coordinates sidestep the polar singularity at the hump, which
    the near-critical orbits graze.  Columns: q1, q2, v1, v2, rho2, prho2,
    energy.
    """
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if x0.shape != (2,) or v0.shape != (2,):
        raise ValueError("x0 and v0 must be 2-vectors")
    if sample_dt is None:
        sample_dt = t_final / 2000.0
    n_samples = int(round(t_final / sample_dt))
    t_grid = np.arange(n_samples + 1) * sample_dt

    m, k, g = p.m, p.k, p.g

    def rhs(t, y):
        q1, q2, u1, u2 = y
        r2 = q1 * q1 + q2 * q2
        f = (k - g * r2) / m
        return [u1, u2, f * q1, f * q2]

    sol = solve_ivp(rhs, (0.0, t_grid[-1]), np.concatenate([x0, v0]),
                    t_eval=t_grid, rtol=rtol, atol=atol, method="RK45")
    if not sol.success:
        raise RuntimeError(f"quartic-well integration failed: {sol.message}")
    q1, q2, u1, u2 = sol.y
    rho2 = q1 ** 2 + q2 ** 2
    radial = q1 * u1 + q2 * u2
    prho2 = np.where(rho2 > 1e-30, m * m * radial ** 2 / rho2, 0.0)
    energy = 0.5 * m * (u1 ** 2 + u2 ** 2) + p.potential(rho2)
    return TimeSeries(sol.t, {
        "q1": q1, "q2": q2, "v1": u1, "v2": u2,
        "rho2": rho2, "prho2": prho2, "energy": energy,
    })


def average_rho_squared_numeric(p: MexHatParams, n_half_periods: int = 6,
                                samples_per_period: int = 2000,
                                rtol: float = 1e-11) -> float:
    """Trajectory average of rho^2 from a radial start at the outer turning
    point, taken over an integer number of analytic half-periods to avoid
    partial-period bias."""
    rm, rp = turning_points(p)
    t_half = half_period(p)
    if not np.isfinite(t_half):
        raise ValueError("eps too small: infinite half-period")
    t_final = n_half_periods * t_half
    series = integrate_mexhat([rp, 0.0], [0.0, 0.0], p, t_final,
                              sample_dt=t_final / (n_half_periods * samples_per_period),
                              rtol=rtol)
    return float(np.trapezoid(series["rho2"], series.t) / t_final)


def sweep_eps(p_base: MexHatParams, eps_grid, n_half_periods: int = 6,
              rtol: float = 1e-11) -> TimeSeries:
    """Analytic vs numeric <rho^2> over an energy-depth grid.

    Returned as a TimeSeries with eps on the abscissa; columns
    avg_rho2_analytic, avg_rho2_numeric, T_half.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    ana = np.empty_like(eps_grid)
    num = np.empty_like(eps_grid)
    t_half = np.empty_like(eps_grid)
    for i, eps in enumerate(eps_grid):
        pp = MexHatParams(p_base.m, p_base.k, p_base.g, eps)
        ana[i] = average_rho_squared(pp)
        t_half[i] = half_period(pp)
        num[i] = average_rho_squared_numeric(pp, n_half_periods, rtol=rtol)
    ts = TimeSeries(eps_grid, {
        "avg_rho2_analytic": ana, "avg_rho2_numeric": num, "T_half": t_half,
    })
    ts.meta["abscissa"] = "eps"
    return ts
