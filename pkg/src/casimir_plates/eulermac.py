r"""Euler-Maclaurin analysis of the plate mode sum.

With a = pi/d and b = Lambda pi/d the energy per unit area is
(1/8pi) [sum_{m>=1} g(m) - \int_0^\infty g], where

    g(t) = \int_{(t pi/d)^2}^\infty sqrt(u) C(Lambda sqrt(u)) du,
    g'(t) = -2 a^3 t^2 C(b t).

Euler-Maclaurin with reference point 0 gives

    sum_{m>=1} g(m) - \int_0^\infty g = -g(0)/2 + Sigma_k,
    Sigma_k = -S_k(0) - 1/(2k+2)! \int_0^\infty psi_{2k+2}(t) g^{(2k+2)}(t) dt,

with S_k(0) = sum_{r=1}^k (-1)^(r-1) B_r/(2r)! g^{(2r-1)}(0), B_r the
all-positive Bernoulli numbers (B_1 = 1/6, B_2 = 1/30, ...) and psi_k the
periodic Bernoulli functions vanishing at integers.  Sigma_k does not depend
on k, and Sigma_2 -> -B_2 (pi/d)^3 / 6 as Lambda -> 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, CapabilityError, DecompositionError, DomainError
from .modesum import BoundaryCondition, PlateGeometry, energy_per_area_direct, tail_integral
from .regulator import Regulator, as_lambda

HARDY_MAX = 20
GL_NODES = 24
DEFAULT_QUAD_TOL = 1e-13
MAX_INTERVALS = 1 << 22


# --- Bernoulli numbers and periodic Bernoulli functions ----------------------------

@lru_cache(maxsize=None)
def bernoulli_standard(n: int) -> Fraction:
    """Standard Bernoulli number B_n (B_1 = -1/2)."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(math.comb(m + 1, j) * b[j] for j in range(m)) / (m + 1))
    return b[n]


def bernoulli_hardy(r: int) -> Fraction:
    """Bernoulli number in the all-positive convention, |B_{2r}| for r >= 1."""
    if not 1 <= r <= HARDY_MAX:
        raise DomainError(f"r must lie in 1..{HARDY_MAX}, got {r}")
    return abs(bernoulli_standard(2 * r))


@lru_cache(maxsize=None)
def _psi_coeffs(k: int) -> np.ndarray:
    # B_k(x) - B_k(0) = sum_{j<k} C(k, j) B_j x^(k-j), highest power first
    c = [float(math.comb(k, j) * bernoulli_standard(j)) for j in range(k)]
    return np.array(c + [0.0])


def psi(k: int, t):
    """Periodic Bernoulli function psi_k(t) = phi_k(t mod 1).

    phi_k is the Bernoulli polynomial B_k minus its constant term, the
    coefficient of x^k/k! in x (e^{xt} - 1)/(e^x - 1).
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    t = np.asarray(t, dtype=float)
    frac = t - np.floor(t)
    out = np.polyval(_psi_coeffs(k), frac)
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _psi_antiderivative_max(n: int) -> float:
    # Q(t) = \int_0^t (psi_n - mean) = B_{n+1}(t)/(n+1) for even n >= 2
    x = np.linspace(0.0, 1.0, 4001)
    q = (np.polyval(_psi_coeffs(n + 1), x) + float(bernoulli_standard(n + 1))) / (n + 1)
    return float(np.max(np.abs(q)))


# --- the function g and its derivatives ---------------------------------------------

@dataclass(frozen=True)
class GFunction:
    """g(t) for plate separation d, cutoff lam and regulator reg."""

    lam: float
    d: float
    reg: Regulator
    max_order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lam", as_lambda(self.lam))
        if not self.d > 0:
            raise DomainError("plate separation must be positive")
        # g^(n) needs C^(n-1)
        object.__setattr__(self, "max_order", self.max_order or self.reg.max_order + 1)
        if self.max_order > self.reg.max_order + 1:
            raise CapabilityError(
                f"regulator supports C^(k) only up to k = {self.reg.max_order}")
        if self.max_order < 8:
            raise CapabilityError("GFunction needs derivatives of g up to order 8")

    @property
    def a(self):
        return math.pi / self.d

    @property
    def b(self):
        return self.lam * math.pi / self.d


def g_eval(m, gf: GFunction) -> float:
    """g(m) = 2 J(m pi/d, Lambda) (substitution u = omega^2)."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    return 2.0 * tail_integral(m * math.pi / gf.d, gf.lam, gf.reg)


def _creg(gf, k, x):
    return gf.reg.eval(x) if k == 0 else gf.reg.deriv(k, x)


def g_deriv(order: int, t, gf: GFunction):
    """n-th derivative of g at continuous t >= 0.

    Leibniz on g'(t) = -2 a^3 t^2 C(bt):
    g^(n) = -2 a^3 [t^2 b^(n-1) C^(n-1) + 2(n-1) t b^(n-2) C^(n-2) + (n-1)(n-2) b^(n-3) C^(n-3)].
    """
    if order < 1:
        raise DomainError("order must be >= 1")
    if order > gf.max_order:
        raise CapabilityError(f"g derivatives available up to order {gf.max_order}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("g is only defined for t >= 0")
    a, b = gf.a, gf.b
    x = b * t
    if order == 1:
        out = -2 * a ** 3 * t * t * _creg(gf, 0, x)
    elif order == 3:
        out = -2 * a ** 3 * (2 * _creg(gf, 0, x) + 4 * b * t * _creg(gf, 1, x)
                             + b * b * t * t * _creg(gf, 2, x))
    else:
        n1 = order - 1
        out = t * t * b ** n1 * _creg(gf, n1, x)
        out = out + 2 * n1 * t * b ** (n1 - 1) * _creg(gf, n1 - 1, x)
        if n1 >= 2:
            out = out + n1 * (n1 - 1) * b ** (n1 - 2) * _creg(gf, n1 - 2, x)
        out = -2 * a ** 3 * out
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


# --- Ramanujan sums ------------------------------------------------------------------

def boundary_sum(k: int, gf: GFunction, hardy=bernoulli_hardy) -> float:
    """S_k(0) = sum_{r=1}^k (-1)^(r-1) B_r/(2r)! g^(2r-1)(0)."""
    return math.fsum((-1) ** (r - 1) * float(hardy(r)) / math.factorial(2 * r)
                     * g_deriv(2 * r - 1, 0.0, gf) for r in range(1, k + 1))


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def remainder_integral(n: int, gf: GFunction, tol: float = DEFAULT_QUAD_TOL, scale=None):
    """\\int_0^\\infty psi_n(t) g^(n)(t) dt for even n >= 2, with an error bound.

    Unit intervals are integrated with Gauss-Legendre (psi_n is a polynomial
    on each).  Beyond the cut T the slowly varying mean of psi_n is integrated
    exactly, -mean * g^(n-1)(T); the oscillating rest is bounded by
    max|Q| |g^(n)(T)| with Q the periodic antiderivative of psi_n - mean.

    The cut doubles until the bound is below ``tol * scale`` (default: the
    magnitude of the value itself).  Returns (value, bound).
    """
    if n < 2 or n % 2:
        raise DomainError("remainder order must be even and >= 2")
    x, w = _gauss_legendre(GL_NODES)
    mean = -float(bernoulli_standard(n))
    qmax = _psi_antiderivative_max(n)
    psi_nodes = psi(n, x)
    t_cut = max(16, math.ceil(30.0 / gf.b))
    done = 0
    acc = []
    while True:
        starts = np.arange(done, t_cut, dtype=float)
        nodes = starts[:, None] + x[None, :]
        vals = g_deriv(n, nodes, gf)
        acc.extend((vals * psi_nodes[None, :]) @ w)
        done = t_cut
        head = math.fsum(acc)
        tail = -mean * g_deriv(n - 1, float(t_cut), gf)
        bound = 2 * qmax * abs(g_deriv(n, float(t_cut), gf))
        target = tol * (scale if scale is not None else max(abs(head + tail), 1e-300))
        if bound <= target:
            return head + tail, bound
        if t_cut >= MAX_INTERVALS:
            raise AccuracyError(f"remainder integral tail bound {bound:.3g} not below tolerance",
                                achieved=bound)
        t_cut *= 2


def sigma_k(k: int, gf: GFunction, quad_tol: float = DEFAULT_QUAD_TOL,
            hardy=bernoulli_hardy) -> float:
    """Ramanujan sum Sigma_k of the series sum_{m>=1} g(m)."""
    if k < 1:
        raise DomainError("k must be >= 1")
    n = 2 * k + 2
    if n > gf.max_order:
        raise CapabilityError(f"Sigma_{k} needs g^({n}); available up to {gf.max_order}")
    s_k = boundary_sum(k, gf, hardy)
    rem, _ = remainder_integral(n, gf, quad_tol, scale=math.factorial(n) * abs(s_k) or None)
    return -s_k - rem / math.factorial(n)


def check_sigma_independence(k_list, gf: GFunction, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Largest pairwise relative deviation |Sigma_i - Sigma_j|/|Sigma_i|."""
    vals = [sigma_k(k, gf, quad_tol) for k in k_list]
    worst = 0.0
    for i, si in enumerate(vals):
        for sj in vals[i + 1:]:
            worst = max(worst, abs(si - sj) / abs(si))
    return worst


# --- energy decomposition -------------------------------------------------------------

@dataclass(frozen=True)
class EnergyDecomposition:
    """E/A = c_div/Lambda^3 + eps_f + O(Lambda^p), p = remainder_exponent.

    ``finite_parts`` are the Lambda-dependent finite pieces (E/A minus the
    divergent term) at each sweep point.  The ``fit_*`` fields come from an
    independent least-squares fit of direct mode sums; they are ``None`` when
    the regulator does not admit direct sums.
    """

    c_div: float
    eps_f: float
    remainder_exponent: float
    lambdas: tuple
    finite_parts: tuple
    fit_c_div: float | None = None
    fit_eps_f: float | None = None
    agreement: float | None = None

    def energy(self, lam: float) -> float:
        """Leading asymptotic energy per area at cutoff lam."""
        return self.c_div / lam ** 3 + self.eps_f


def _finite_part(geom: PlateGeometry, lam: float, reg: Regulator, quad_tol, hardy):
    """(c_div, finite part) at one cutoff from the exact split."""
    if geom.bc is BoundaryCondition.DIRICHLET:
        gf = GFunction(lam, geom.d, reg)
        half_g0 = g_eval(0.0, gf) / 2
        c_div = -half_g0 * lam ** 3 / (8 * math.pi)
        return c_div, sigma_k(2, gf, quad_tol, hardy) / (8 * math.pi)
    # periodic ladder 2 pi n/d, n in Z: g on spacing pi/(d/2), m = 0 once, m >= 1 twice
    gf = GFunction(lam, geom.d / 2, reg)
    g0 = g_eval(0.0, gf)
    c_div = (g0 - 2 * (g0 / 2)) * lam ** 3 / (8 * math.pi)
    return c_div, 2 * sigma_k(2, gf, quad_tol, hardy) / (8 * math.pi)


def richardson_lambda2(l1, f1, l2, f2):
    """Eliminate the Lambda^2 term from two samples f(l) = f0 + c l^2."""
    return (l1 * l1 * f2 - l2 * l2 * f1) / (l1 * l1 - l2 * l2)


def fit_direct(lambdas, energies):
    """Least-squares fit of E(Lambda) to c/Lambda^3 + eps + b2 Lambda^2 (+ b4 Lambda^4)."""
    lam = np.asarray(lambdas, dtype=float)
    e = np.asarray(energies, dtype=float)
    cols = [lam ** -3, np.ones_like(lam), lam ** 2]
    if lam.size >= 4:
        cols.append(lam ** 4)
    a = np.column_stack(cols)
    scale = np.max(np.abs(a), axis=0)
    coef, *_ = np.linalg.lstsq(a / scale, e, rcond=None)
    coef = coef / scale
    return float(coef[0]), float(coef[1])


def decompose_energy(geom: PlateGeometry, reg: Regulator, lambda_sweep,
                     fit: bool = True, fit_tol: float = 1e-4,
                     quad_tol: float = DEFAULT_QUAD_TOL, hardy=bernoulli_hardy) -> EnergyDecomposition:
    """Split the energy per area into divergent, finite and remainder parts.

    Route 1 (exact split): c_div from -g(0)/2 (zero for periodic plates), the
    finite part from Sigma_2 at each cutoff, extrapolated to Lambda -> 0 by
    Richardson in Lambda^2 on the two smallest cutoffs.  Route 2: a fit of
    direct mode sums to c/Lambda^3 + eps + b Lambda^2 (+ b' Lambda^4); skipped
    when ``fit`` is False or the regulator has no finite third moment.

    Raises DecompositionError when the two routes disagree by more than
    ``fit_tol`` relative in eps_f.
    """
    lams = sorted({as_lambda(x) for x in lambda_sweep})
    if len(lams) < 2:
        raise DomainError("decomposition needs at least two distinct cutoffs")
    if lams[-1] >= 0.2 * geom.d:
        raise DomainError("all cutoffs must be below 0.2 d")

    parts = [_finite_part(geom, lam, reg, quad_tol, hardy) for lam in lams]
    c_div = math.fsum(p[0] for p in parts) / len(parts)
    finite = [p[1] for p in parts]
    eps_f = richardson_lambda2(lams[0], finite[0], lams[1], finite[1])

    resid = np.abs(np.array(finite) - eps_f)
    keep = resid > 0
    if keep.sum() >= 2:
        slope, _ = np.polyfit(np.log(np.array(lams)[keep]), np.log(resid[keep]), 1)
        exponent = float(slope)
    else:
        exponent = float("nan")

    fit_c = fit_e = agreement = None
    if fit and math.isfinite(float(reg.tail_moment(3, 0))):
        energies = [energy_per_area_direct(geom, lam, reg) for lam in lams]
        fit_c, fit_e = fit_direct(lams, energies)
        agreement = abs(fit_e - eps_f) / abs(eps_f)
        if agreement > fit_tol:
            raise DecompositionError(
                f"eps_f from the exact split ({eps_f:.10g}) and the direct fit ({fit_e:.10g}) "
                f"differ by {agreement:.3g} relative")
    return EnergyDecomposition(c_div, eps_f, exponent, tuple(lams), tuple(finite),
                               fit_c, fit_e, agreement)
