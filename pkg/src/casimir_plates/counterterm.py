"""Surface counterterms and the renormalized energy per unit area.

Each plate carries the surface energy density

    sigma(Lambda) = (1/4pi) \\int_0^\\infty k^2 C(Lambda k) dk = M2 / (4 pi Lambda^3),

and the Dirichlet energy per area diverges as -M2/(8 pi Lambda^3), so adding
a quarter of sigma for each plate (half in total) leaves a finite result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .errors import DomainError
from .eulermac import DEFAULT_QUAD_TOL, GFunction, sigma_k
from .modesum import (BoundaryCondition, DEFAULT_TOL, N_MAX, WORKING_DPS, PlateGeometry,
                      _energy_per_area_mp)
from .regulator import Regulator, as_lambda

# net weight of the two plate counterterms, 1/4 each
PLATE_WEIGHT = 0.5


@dataclass(frozen=True)
class SurfaceCounterterm:
    per_plate_density: float
    lam: float
    reg: Regulator


def surface_density(lam, reg: Regulator) -> float:
    """Per-plate surface energy density M2 / (4 pi Lambda^3)."""
    lam = as_lambda(lam)
    return reg.moment2() / (4 * math.pi * lam ** 3)


def counterterm(lam, reg: Regulator) -> SurfaceCounterterm:
    lam = as_lambda(lam)
    return SurfaceCounterterm(surface_density(lam, reg), lam, reg)


def renormalized_energy_per_area(geom: PlateGeometry, lam, reg: Regulator,
                                 tol: float = DEFAULT_TOL, method: str = "direct",
                                 quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Energy per area with the plate counterterms added.

    Parameters
    ----------
    geom : PlateGeometry
    lam : float or CutoffLambda
        Must be below 0.2 d.
    reg : Regulator
    tol : float
        Mode-sum truncation tolerance (``method="direct"``).
    method : {"direct", "euler_maclaurin"}
        ``direct`` sums the modes in extended precision and adds the
        counterterm before rounding, so the Lambda^-3 cancellation costs no
        digits.  ``euler_maclaurin`` uses Sigma_2 / (8 pi), which needs no
        third moment and therefore also works for the rational regulator.

    Returns
    -------
    float
        Tends to -pi^2/(1440 d^3) (Dirichlet) or -pi^2/(90 d^3) (periodic)
        with an O(Lambda^2) error.  Periodic plates get no counterterm.
    """
    lam = as_lambda(lam)
    if lam >= 0.2 * geom.d:
        raise DomainError("renormalized energy needs Lambda < 0.2 d")
    dirichlet = geom.bc is BoundaryCondition.DIRICHLET
    if method == "euler_maclaurin":
        if dirichlet:
            return sigma_k(2, GFunction(lam, geom.d, reg), quad_tol) / (8 * math.pi)
        # periodic ladder at spacing 2 pi/d equals the Dirichlet ladder of d/2, counted twice
        return sigma_k(2, GFunction(lam, geom.d / 2, reg), quad_tol) / (4 * math.pi)
    if method != "direct":
        raise DomainError(f"unknown method {method!r}")
    with mp.workdps(WORKING_DPS):
        lam_mp = mp.mpf(lam)
        val = _energy_per_area_mp(geom, lam_mp, reg, mp.mpf(tol), N_MAX)
        if dirichlet:
            val += PLATE_WEIGHT * reg.tail_moment(2, 0) / (4 * mp.pi * lam_mp ** 3)
        return float(val)
