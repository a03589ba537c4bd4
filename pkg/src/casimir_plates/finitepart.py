"""Hadamard finite parts of integrals with endpoint power singularities.

An integrand f on [a, b] with singular part sum_p c_p s^-p (s the distance
to the endpoint, integer p >= 2) is split as

    PF \\int_a^b f = \\int_a^b (f - singular) + sum_p c_p PF \\int_0^L s^-p ds,
    PF \\int_0^L s^-p ds = -L^(1-p)/(p-1),

the second piece being the epsilon -> 0 limit after the divergent powers of
epsilon are discarded.  Singular coefficients are always supplied by the
caller; they are never fitted from samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath as mp
import numpy as np
import sympy

from .errors import CapabilityError, DomainError, SpecMismatchError
from .imagesum import ZETA4, density_limit

GL_ORDER = 16
MAX_PANELS = 256
# coefficient of z^-4 at each plate in the Dirichlet limit density
PLATE_POLE = 1.0 / (32 * math.pi ** 2)


@dataclass(frozen=True)
class SingularitySpec:
    """Singular part sum c_p s^-p at one endpoint; terms are (p, c_p) pairs."""

    endpoint: str
    terms: tuple

    def __post_init__(self):
        if self.endpoint not in ("left", "right"):
            raise DomainError("endpoint must be 'left' or 'right'")
        # coefficients may be mpf so that epsilon_limit can subtract them exactly
        terms = tuple((int(p), c if isinstance(c, mp.mpf) else float(c)) for p, c in self.terms)
        for p, _ in terms:
            if p < 2:
                raise CapabilityError(
                    f"pole order {p} not supported: only integer orders >= 2 (no logarithms)")
        object.__setattr__(self, "terms", terms)

    def distance(self, z, a, b):
        return z - a if self.endpoint == "left" else b - z

    def evaluate(self, z, a, b):
        s = self.distance(z, a, b)
        return sum(float(c) * s ** -p for p, c in self.terms)

    def finite_part(self, length):
        return math.fsum(-float(c) / ((p - 1) * length ** (p - 1)) for p, c in self.terms)


@dataclass(frozen=True)
class FinitePartResult:
    value: float
    subtracted: tuple  # ((endpoint, p, c_p), ...)
    epsilon_floor: float  # closest approach of the quadrature nodes to a singular endpoint


def _as_specs(spec) -> tuple:
    if spec is None:
        return ()
    if isinstance(spec, SingularitySpec):
        return (spec,)
    return tuple(spec)


def _composite_gl(func, a, b, panels):
    x, w = np.polynomial.legendre.leggauss(GL_ORDER)
    edges = np.linspace(a, b, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    vals = np.array([func(z) for z in nodes], dtype=float)
    return math.fsum(vals * weights), nodes


def pf_endpoint_integral(f: Callable, spec, a: float, b: float,
                         tol: float = 1e-10, regular: Callable | None = None) -> FinitePartResult:
    """Finite part of the integral of f over [a, b].

    Parameters
    ----------
    f : callable
        Scalar integrand, evaluated only at interior points.
    spec : SingularitySpec or sequence of them (at most one per endpoint)
        Singular parts, supplied analytically.
    tol : float
        Relative agreement required between successive panel refinements of
        the regular remainder.
    regular : callable, optional
        f minus its singular part in a cancellation-free form.  When omitted
        the subtraction is done numerically, which costs roughly
        eps * s^-p of accuracy at the nodes nearest the endpoint.

    Raises
    ------
    SpecMismatchError
        If the remainder keeps drifting under refinement, i.e. the supplied
        singular part does not remove the non-integrable behaviour of f.
    """
    if not b > a:
        raise DomainError("need a < b")
    specs = _as_specs(spec)
    if len({s.endpoint for s in specs}) != len(specs):
        raise DomainError("at most one SingularitySpec per endpoint")
    length = b - a

    if regular is None:
        def regular(z):
            return f(z) - sum(s.evaluate(z, a, b) for s in specs)

    closed = math.fsum(s.finite_part(length) for s in specs)
    prev = None
    panels = 1
    while panels <= MAX_PANELS:
        val, nodes = _composite_gl(regular, a, b, panels)
        if prev is not None:
            scale = max(abs(val + closed), abs(closed), 1e-300)
            if abs(val - prev) <= tol * scale:
                floor = min(float(np.min(s.distance(nodes, a, b))) for s in specs) if specs \
                    else float(np.min(np.minimum(nodes - a, b - nodes)))
                subtracted = tuple((s.endpoint, p, float(c)) for s in specs for p, c in s.terms)
                return FinitePartResult(val + closed, subtracted, floor)
        prev = val
        panels *= 2
    raise SpecMismatchError(
        "regularised integrand does not converge under refinement; "
        "the singular part does not match the integrand")


def _graded_points(lo, hi, eps, ends):
    # geometric breakpoints toward singular ends keep tanh-sinh accurate
    mid = (lo + hi) / 2
    left = [lo]
    right = [hi]
    k = 10
    while eps * k < (mid - lo) / 2:
        if "left" in ends:
            left.append(lo - eps + eps * k)
        if "right" in ends:
            right.append(hi + eps - eps * k)
        k *= 10
    return left + [mid] + right[::-1]


def epsilon_limit(f: Callable, spec, a: float, b: float,
                  eps_values: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5), dps: int = 40) -> float:
    """Finite part computed as lim_{eps->0} [\\int_{a+eps}^{b-eps} f - divergent eps powers].

    Integrals are done with mpmath at ``dps`` digits (f must accept mpf
    arguments) and the limit is taken by polynomial extrapolation in eps.
    Only endpoints carrying a singular part are moved inward.  Coefficients
    given as float limit the result to about eps_mach * c * eps^(1-p); pass
    mpf coefficients for small eps.
    """
    specs = _as_specs(spec)
    ends = {s.endpoint for s in specs}
    with mp.workdps(dps):
        eps_mp = [mp.mpf(e) for e in eps_values]
        samples = []
        for e in eps_mp:
            lo = mp.mpf(a) + (e if "left" in ends else 0)
            hi = mp.mpf(b) - (e if "right" in ends else 0)
            val = mp.quad(f, _graded_points(lo, hi, e, ends))
            for s in specs:
                for p, c in s.terms:
                    val -= mp.mpf(c) * e ** (1 - p) / (p - 1)
            samples.append(val)
        # Neville extrapolation to eps = 0
        table = list(samples)
        n = len(table)
        for level in range(1, n):
            for i in range(n - level):
                table[i] = (eps_mp[i + level] * table[i] - eps_mp[i] * table[i + 1]) / (
                    eps_mp[i + level] - eps_mp[i])
        return float(table[0])


# --- the Dirichlet energy per area by finite parts ------------------------------------

def _dirichlet_specs(d, exact=False):
    c = 1 / (32 * mp.pi ** 2) if exact else PLATE_POLE
    return (SingularitySpec("left", ((4, c),)), SingularitySpec("right", ((4, c),)))


def epsilon_limit_dirichlet(d: float, dps: int = 40) -> float:
    """Epsilon-limit evaluation of the Dirichlet finite part, independent of the quadrature route."""
    with mp.workdps(dps):
        return epsilon_limit(lambda z: dirichlet_density_mp(z, d), _dirichlet_specs(d, exact=True),
                             0.0, d, dps=dps)


def pf_energy_per_area_dirichlet(d: float, tol: float = 1e-10) -> float:
    """Finite part of the integral of the Lambda -> 0 Dirichlet density over [0, d].

    The density has z^-4 poles at both plates (the direct term at z = 0, the
    m = 1 image at z = d), each with coefficient 1/(32 pi^2).  The result is
    -pi^2/(1440 d^3).
    """
    if not d > 0:
        raise DomainError("plate separation must be positive")
    res = pf_endpoint_integral(lambda z: density_limit(z, d), _dirichlet_specs(d), 0.0, d, tol,
                               regular=lambda z: _dirichlet_regular(z, d))
    return res.value


def _dirichlet_regular(z, d):
    # sum_m (md - z)^-4 = (d - z)^-4 + zeta(4, 2 - s)/d^4 peels off the right pole
    from scipy import special

    s = z / d
    images = special.zeta(4, 1 + s) + special.zeta(4, 2 - s)
    return PLATE_POLE * (images - 2 * ZETA4) / d ** 4


def dirichlet_density_mp(z, d):
    """Dirichlet limit density in mpmath precision (for epsilon-limit checks)."""
    z = mp.mpf(z)
    d = mp.mpf(d)
    s = z / d
    zeta4 = mp.pi ** 4 / 90
    images = mp.zeta(4, 1 + s) + mp.zeta(4, 1 - s)
    return (z ** -4 + (images - 2 * zeta4) / d ** 4) / (32 * mp.pi ** 2)


@dataclass(frozen=True)
class DirichletFinitePartTerms:
    """Contributions to the finite part, each already multiplied by 1/(32 pi^2)."""

    left_pole: float     # PF of the z^-4 term
    right_pole: float    # PF of the (d - z)^-4 term
    images_plus: float   # sum_m \int (md + z)^-4
    images_minus: float  # sum_{m>=2} \int (md - z)^-4
    constant: float      # -2 zeta(4) d / d^4

    @property
    def singular_net(self) -> float:
        return self.left_pole + self.right_pole + self.images_plus + self.images_minus

    @property
    def total(self) -> float:
        return self.singular_net + self.constant


def dirichlet_finite_part_terms(d: float) -> DirichletFinitePartTerms:
    """Term-by-term finite part of the Dirichlet density integral.

    The two pole finite parts (-1/(3 d^3) each) are cancelled by the
    telescoping image sums (+1/(3 d^3) each, integrated numerically here),
    leaving only the constant -2 zeta(4)/d^3.
    """
    from scipy import integrate, special

    pole = _dirichlet_specs(d)[0].finite_part(d)
    plus, _ = integrate.quad(lambda z: special.zeta(4, 1 + z / d) / d ** 4, 0, d,
                             epsabs=0, epsrel=1e-13)
    minus, _ = integrate.quad(lambda z: special.zeta(4, 2 - z / d) / d ** 4, 0, d,
                              epsabs=0, epsrel=1e-13)
    k = PLATE_POLE
    return DirichletFinitePartTerms(pole, pole, k * plus, k * minus, -2 * k * ZETA4 / d ** 3)


# --- pseudofunction derivative identity ------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    lhs: float  # PF <z^-2, phi''>
    rhs: float  # 6 PF <z^-4, phi>
    residual: float
    passed: bool


def pf_derivative_identity_check(phi, tol: float = 1e-9) -> IdentityCheck:
    """Check <PF z^-2, phi''> = 6 <PF z^-4, phi> on [0, 1].

    This is the pairing form of d^2/dz^2 PF(z^-2) = 6 PF(z^-4).  ``phi`` is a
    sympy expression (or string) in ``z`` with phi(1) = phi'(1) = 0.  Singular
    coefficients come from its exact Taylor series at 0; phi'''(0) must
    vanish, otherwise both pairings carry logarithmic finite parts.
    """
    z = sympy.Symbol("z")
    expr = sympy.sympify(phi, locals={"z": z})
    d1 = sympy.diff(expr, z)
    d2 = sympy.diff(expr, z, 2)
    if abs(float(expr.subs(z, 1))) > 1e-14 or abs(float(d1.subs(z, 1))) > 1e-14:
        raise DomainError("test function must satisfy phi(1) = phi'(1) = 0")
    taylor = sympy.series(expr, z, 0, 4).removeO()
    c = [float(taylor.coeff(z, j)) for j in range(4)]
    if c[3] != 0:
        raise CapabilityError("phi'''(0) != 0 gives a logarithmic finite part, not supported")

    exact = [taylor.coeff(z, j) for j in range(3)]
    f4 = sympy.lambdify(z, expr / z ** 4, "math")
    f2 = sympy.lambdify(z, d2 / z ** 2, "math")
    # regular parts with the poles removed symbolically
    r4 = sympy.lambdify(z, sympy.cancel((expr - sum(exact[j] * z ** j for j in range(3))) / z ** 4),
                        "math")
    r2 = sympy.lambdify(z, sympy.cancel((d2 - 2 * exact[2]) / z ** 2), "math")
    spec4 = [SingularitySpec("left", tuple((4 - j, c[j]) for j in range(3) if c[j] != 0))]
    spec2 = [SingularitySpec("left", ((2, 2 * c[2]),))] if c[2] != 0 else []
    spec4 = [s for s in spec4 if s.terms]

    rhs = 6 * pf_endpoint_integral(f4, spec4, 0.0, 1.0, tol / 10, regular=r4).value
    lhs = pf_endpoint_integral(f2, spec2, 0.0, 1.0, tol / 10, regular=r2).value
    residual = abs(lhs - rhs)
    return IdentityCheck(lhs, rhs, residual, residual <= tol * max(1.0, abs(lhs)))
