"""Special functions used by the propagator and the quartic-well analytics:
integer-order Bessel functions of the first kind and complete elliptic
integrals.

Bessel values come from the backward (Miller) recurrence normalised with
J_0 + 2*sum(J_2k) = 1; elliptic integrals from the arithmetic-geometric-mean
iteration.  Both are plain float64 routines, accurate to ~1e-14 relative.
"""

from __future__ import annotations

import math

import numpy as np

_AGM_MAX_ITER = 40
_AGM_TOL = 1e-16


def bessel_j_array(x: float, k_max: int) -> np.ndarray:
    """J_0(x) .. J_{k_max}(x) for x >= 0 by normalised downward recurrence.

    The recurrence starts well above both k_max and the turning point
    k ~ x, where J_k decays super-exponentially, so the seeded values are
    irrelevant after normalisation.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        out = np.zeros(k_max + 1)
        out[0] = 1.0
        return out

    # start order: safety margin above both k_max and x so the downward
    # sweep begins deep in the decaying regime; the margin is sized for
    # ~1e-15 relative contamination of the unwanted solution
    start = max(k_max, math.ceil(x)) \
        + 30 + math.ceil(3.0 * math.sqrt(max(k_max, x) + 1.0))
    if start % 2:
        start += 1

    out = np.zeros(k_max + 1)
    fkp1 = 0.0
    fk = 1e-300
    even_sum = 0.0  # accumulates f_0 + 2*f_2 + 2*f_4 + ...
    for k in range(start, 0, -1):
        fkm1 = (2.0 * k / x) * fk - fkp1
        fkp1 = fk
        fk = fkm1
        if abs(fk) > 1e250:  # rescale to avoid overflow of the unnormalised run
            fk *= 1e-250
            fkp1 *= 1e-250
            even_sum *= 1e-250
            out *= 1e-250
        if (k - 1) % 2 == 0:
            even_sum += 2.0 * fk
        if k - 1 <= k_max:
            out[k - 1] = fk
    even_sum -= fk  # J_0 enters the normaliser with weight 1, not 2
    out /= even_sum
    return out


def _agm_ke(b0: float, c0_sq: float) -> tuple[float, float]:
    # a0 = 1, b0 = complementary modulus, c0^2 = modulus^2
    a = 1.0
    b = b0
    csum = 0.5 * c0_sq
    pw = 1.0
    for _ in range(_AGM_MAX_ITER):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        csum += pw * c * c
        pw *= 2.0
        if abs(c) < _AGM_TOL * a:
            break
    big_k = math.pi / (2.0 * a)
    return big_k, big_k * (1.0 - csum)


def elliptic_ke(kappa: float) -> tuple[float, float]:
    """Complete elliptic integrals (K(kappa), E(kappa)), modulus convention
    K(kappa) = integral_0^{pi/2} dtheta / sqrt(1 - kappa^2 sin^2 theta).

    kappa must lie in [0, 1); K diverges at kappa = 1.
    """
    if not 0.0 <= kappa < 1.0:
        raise ValueError(f"kappa must be in [0, 1), got {kappa}")
    b0 = math.sqrt((1.0 - kappa) * (1.0 + kappa))
    return _agm_ke(b0, kappa * kappa)


def elliptic_ke_complement(kappa_comp: float) -> tuple[float, float]:
    """(K, E) given the complementary modulus kappa' = sqrt(1 - kappa^2).

    Near kappa = 1 forming kappa explicitly loses all precision; passing
    kappa' directly keeps the log-divergence of K accurate down to
    kappa' ~ 1e-150.
    """
    if not 0.0 < kappa_comp <= 1.0:
        raise ValueError(f"kappa_comp must be in (0, 1], got {kappa_comp}")
    return _agm_ke(kappa_comp, (1.0 - kappa_comp) * (1.0 + kappa_comp))


def elliptic_e(kappa: float) -> float:
    """E(kappa) on [0, 1]; E(1) = 1 exactly (limit case)."""
    if kappa == 1.0:
        return 1.0
    return elliptic_ke(kappa)[1]
