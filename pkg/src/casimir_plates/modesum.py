r"""Regulated vacuum energy between plates by direct mode summation.

Every quantity is (sum over plate modes) minus (free-space integral).  After
the radial k_parallel integration with omega^2 = k_parallel^2 + mu^2, a plate
mode with transverse wavenumber mu contributes

    J(mu, Lambda) = \int_mu^\infty omega^2 C(Lambda omega) d omega
                  = Lambda^-3 \int_{Lambda mu}^\infty x^2 C(x) dx,

so the density is

    E(z) = 1/2 [ (1/2pi) sum_n w_n(z) J(mu_n) - (1/2pi^2) \int k^3 C(Lambda k) dk ].

Terms are accumulated in extended precision (mpmath) because the plate sum
and the free integral agree to many digits at small Lambda.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import mpmath as mp

from .errors import AccuracyError, CapabilityError, DomainError
from .regulator import Regulator, as_lambda

WORKING_DPS = 40
DEFAULT_TOL = 1e-22
N_MAX = 200_000
# consecutive small terms required before the tail bound is consulted
QUIET_TERMS = 5


class BoundaryCondition(str, enum.Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class PlateGeometry:
    """Two parallel plates at z = 0 and z = d."""

    d: float
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise DomainError(f"plate separation must be positive, got {self.d!r}")
        object.__setattr__(self, "bc", BoundaryCondition(self.bc))

    def mu(self, n: int):
        """Transverse wavenumber of mode n."""
        step = 1 if self.bc is BoundaryCondition.DIRICHLET else 2
        return step * abs(n) * mp.pi / self.d

    def weight(self, n: int, z):
        """|U_n(z)|^2 integrated over the parallel plane, per unit area."""
        if self.bc is BoundaryCondition.DIRICHLET:
            return 2 * mp.sin(n * mp.pi * z / self.d) ** 2 / self.d
        return mp.mpf(1) / self.d


@dataclass(frozen=True)
class DensitySample:
    z: float
    value: float
    lam: float | None  # None marks the Lambda -> 0 limit


def truncation_tol(result_tol: float, lam, d: float) -> float:
    """Mode-sum truncation tolerance that delivers ``result_tol`` on the density.

    The plate sum exceeds the density it produces by up to ~(d/Lambda)^4, so
    the relative truncation target is scaled down by that factor (and 1e3 of
    margin), never above DEFAULT_TOL.
    """
    lam = as_lambda(lam)
    return max(min(DEFAULT_TOL, result_tol * 1e-3 * (lam / d) ** 4), 1e-35)


def _tail_integral_mp(mu, lam, reg: Regulator):
    a = lam * mu
    return reg.tail_moment(2, a) / lam ** 3


def _tail_integral_integrated_mp(q, lam, reg: Regulator):
    # \int_q^\infty J(p) dp = Lambda^-4 [T3(Lambda q) - Lambda q T2(Lambda q)]
    a = lam * q
    return (reg.tail_moment(3, a) - a * reg.tail_moment(2, a)) / lam ** 4


def tail_integral(mu: float, lam, reg: Regulator) -> float:
    """J(mu, Lambda): integral of omega^2 C(Lambda omega) over [mu, inf)."""
    if mu < 0:
        raise DomainError(f"mu must be nonnegative, got {mu!r}")
    lam = as_lambda(lam)
    with mp.workdps(WORKING_DPS):
        return float(_tail_integral_mp(mp.mpf(mu), mp.mpf(lam), reg))


def _free_moment3(reg: Regulator):
    m3 = reg.tail_moment(3, mp.mpf(0))
    if not mp.isfinite(m3):
        raise CapabilityError(
            f"{reg.kind} regulator: the free-space integral of k^3 C(Lambda k) diverges, "
            "so plate and free sums cannot be subtracted term by term")
    return m3


def _mode_series(geom: PlateGeometry, lam, reg: Regulator, weight, tol, n_max, bound_scale):
    """Sum weight(n) * J(mu_n) over n >= 1 with the truncation policy.

    Stop once QUIET_TERMS consecutive terms are below tol*|partial| and the
    bound on the remainder, bound_scale * \\int_{mu_N}^\\infty J dq /(dmu), is
    below tol*|partial| as well.
    """
    dmu = geom.mu(1)
    total = mp.mpf(0)
    quiet = 0
    bound = mp.inf
    for n in range(1, n_max + 1):
        mu = geom.mu(n)
        term = weight(n) * _tail_integral_mp(mu, lam, reg)
        total += term
        thresh = tol * abs(total)
        quiet = quiet + 1 if abs(term) <= thresh else 0
        if quiet >= QUIET_TERMS:
            # J is decreasing, so sum_{m>n} J(mu_m) <= (1/dmu) \int_{mu_n}^\infty J
            bound = bound_scale * _tail_integral_integrated_mp(mu, lam, reg) / dmu
            if bound <= thresh:
                return total
    raise AccuracyError(
        f"mode sum not converged after {n_max} terms (tail bound {float(bound):.3g})",
        achieved=float(bound / abs(total)) if total else None)


def _density_mp(z, geom: PlateGeometry, lam, reg: Regulator, tol, n_max):
    d = geom.d
    free = _free_moment3(reg) / lam ** 4
    if geom.bc is BoundaryCondition.DIRICHLET:
        plates = _mode_series(geom, lam, reg, lambda n: geom.weight(n, z), tol, n_max, 2 / d)
    else:
        # n in Z folded onto n >= 0: multiplicity 1 for n = 0, 2 otherwise
        plates = (_tail_integral_mp(mp.mpf(0), lam, reg)
                  + _mode_series(geom, lam, reg, lambda n: 2, tol, n_max, 2)) / d
    return (plates / (2 * mp.pi) - free / (2 * mp.pi ** 2)) / 2


def density_direct(z: float, geom: PlateGeometry, lam, reg: Regulator,
                   tol: float = DEFAULT_TOL, n_max: int = N_MAX, clip: bool = True) -> DensitySample:
    """Regulated vacuum energy density at position z.

    Parameters
    ----------
    z : float
        Position across the slab.
    geom : PlateGeometry
    lam : float or CutoffLambda
        Cutoff length, > 0.
    reg : Regulator
        Must have a finite third moment (true for ``exp`` and ``gauss``).
    tol : float
        Relative truncation tolerance of the mode sum.
    clip : bool
        If True the density is exactly 0 outside [0, d].  ``clip=False``
        evaluates the mode expressions at any z.

    Returns
    -------
    DensitySample
    """
    lam = as_lambda(lam)
    if tol <= 0:
        raise DomainError("tol must be positive")
    if clip and (z < 0 or z > geom.d):
        return DensitySample(z, 0.0, lam)
    with mp.workdps(WORKING_DPS):
        val = _density_mp(mp.mpf(z), geom, mp.mpf(lam), reg, mp.mpf(tol), n_max)
        return DensitySample(z, float(val), lam)


def _energy_per_area_mp(geom: PlateGeometry, lam, reg: Regulator, tol, n_max):
    d = mp.mpf(geom.d)
    free = d * _free_moment3(reg) / lam ** 4
    # g(m) = 2 J(mu_m); (1/8pi) sum g = (1/4pi) sum J
    if geom.bc is BoundaryCondition.DIRICHLET:
        plates = _mode_series(geom, lam, reg, lambda n: 1, tol, n_max, 1)
    else:
        plates = (_tail_integral_mp(mp.mpf(0), lam, reg)
                  + _mode_series(geom, lam, reg, lambda n: 2, tol, n_max, 2))
    return plates / (4 * mp.pi) - free / (4 * mp.pi ** 2)


def energy_per_area_direct(geom: PlateGeometry, lam, reg: Regulator,
                           tol: float = DEFAULT_TOL, n_max: int = N_MAX) -> float:
    """Regulated vacuum energy per unit plate area.

    Dirichlet: (1/8pi) sum_{m>=1} g(m) - d/(4 pi^2) \\int k^3 C(Lambda k) dk, which
    diverges like Lambda^-3 as the cutoff is removed.  Periodic: the n = 0 mode
    is included and the ladder spacing is 2 pi/d; the result stays finite.
    """
    lam = as_lambda(lam)
    if tol <= 0:
        raise DomainError("tol must be positive")
    with mp.workdps(WORKING_DPS):
        return float(_energy_per_area_mp(geom, mp.mpf(lam), reg, mp.mpf(tol), n_max))
