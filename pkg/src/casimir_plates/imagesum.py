"""Image-sum (Poisson-resummed) densities for the exponential cutoff.

Poisson summation turns the Dirichlet mode sum into a sum over mirror
distances 2z, 2md and 2(md +- z); each image at distance a contributes

    T(a, Lambda) = (a^2 - 3 Lambda^2) / (Lambda^2 + a^2)^3  ->  a^-4.

Periodic plates have images at md only and no z dependence.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError, SingularityError
from .modesum import BoundaryCondition
from .regulator import as_lambda

ZETA4 = math.pi ** 4 / 90
# relative tail target of the truncated m-sums
SUM_RTOL = 1e-14


def image_term(a, lam):
    """T(a, Lambda) for image distance a."""
    a = np.asarray(a, dtype=float)
    lam2 = lam * lam
    return (a * a - 3 * lam2) / (lam2 + a * a) ** 3


def _terms_needed(d, z, scale):
    # sum_{m>M} (m d - z)^-4 <= (M d - z)^-3 / (3 d); four such sums at most
    m = 2
    while 4 * ((m * d - z) ** -3) / (3 * d) > SUM_RTOL * scale:
        m *= 2
    return m


def density_closed(z: float, d: float, lam, bc=BoundaryCondition.DIRICHLET) -> float:
    """Regulated density at finite Lambda from the image sum (exponential cutoff only)."""
    lam = as_lambda(lam)
    bc = BoundaryCondition(bc)
    if d <= 0:
        raise DomainError("plate separation must be positive")
    if z < 0 or z > d:
        return 0.0
    if bc is BoundaryCondition.PERIODIC:
        # -(1/pi^2) sum_{m>=1} T(md); tends to -zeta(4)/(pi^2 d^4)
        m_max = _terms_needed(d, 0.0, 1.0 / d ** 4)
        m = np.arange(1, m_max + 1, dtype=float)
        return -math.fsum(image_term(m * d, lam)) / math.pi ** 2
    m_max = _terms_needed(d, z, 1.0 / d ** 4)
    m = np.arange(1, m_max + 1, dtype=float)
    bracket = (-2 * image_term(2 * m * d, lam) + image_term(2 * (m * d + z), lam)
               + image_term(2 * (m * d - z), lam))
    return 0.5 * (float(image_term(2 * z, lam)) + math.fsum(bracket)) / math.pi ** 2


def single_plate_density(z: float, lam) -> float:
    """Density next to one plate (all m != 0 images dropped)."""
    lam = as_lambda(lam)
    return 0.5 * float(image_term(2 * z, lam)) / math.pi ** 2


def density_limit(z: float, d: float, bc=BoundaryCondition.DIRICHLET) -> float:
    """Cutoff-independent density (Lambda -> 0).

    Dirichlet: (1/32 pi^2) [z^-4 - 2 zeta(4)/d^4 + sum_m ((md+z)^-4 + (md-z)^-4)],
    evaluated with Hurwitz zeta functions; raises at the plates.
    Periodic: -pi^2/(90 d^4), independent of z.
    """
    bc = BoundaryCondition(bc)
    if d <= 0:
        raise DomainError("plate separation must be positive")
    if z < 0 or z > d:
        return 0.0
    if bc is BoundaryCondition.PERIODIC:
        return -math.pi ** 2 / (90 * d ** 4)
    if z == 0 or z == d:
        raise SingularityError(f"Dirichlet density diverges at the plate z = {z!r}")
    s = z / d
    images = special.zeta(4, 1 + s) + special.zeta(4, 1 - s)
    return float((z ** -4 + (images - 2 * ZETA4) / d ** 4) / (32 * math.pi ** 2))


def integrated_density_limit(eps: float, d: float) -> float:
    """Integral of the Dirichlet limit density over [eps, d - eps].

    Closed form: every image term integrates to a difference of cubes and the
    m-sums are again Hurwitz zeta values.  Grows like eps^-3/(48 pi^2).
    """
    if not 0 < eps < d / 2:
        raise DomainError("need 0 < eps < d/2")
    s = eps / d
    # \int_eps^{d-eps} z^-4 = (eps^-3 - (d-eps)^-3)/3
    direct = (eps ** -3 - (d - eps) ** -3) / 3
    # sum_m \int (md+z)^-4 = (1/3d^3) sum_m [(m+s)^-3 - (m+1-s)^-3]
    plus = (special.zeta(3, 1 + s) - special.zeta(3, 2 - s)) / (3 * d ** 3)
    # sum_m \int (md-z)^-4 = (1/3d^3) sum_m [(m-1+s)^-3 - (m-s)^-3]
    minus = (special.zeta(3, s) - special.zeta(3, 1 - s)) / (3 * d ** 3)
    const = -2 * ZETA4 * (d - 2 * eps) / d ** 4
    return float((direct + plus + minus + const) / (32 * math.pi ** 2))


def energy_per_area_periodic(d: float) -> float:
    """Energy per unit area for periodic plates, -pi^2/(90 d^3)."""
    if d <= 0:
        raise DomainError("plate separation must be positive")
    return -math.pi ** 2 / (90 * d ** 3)
