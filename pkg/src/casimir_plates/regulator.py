"""Admissible cutoff functions C with C(0) = 1.

A regulator damps mode k through the factor C(Lambda * omega_k).  Three
built-in families are provided (``exp``, ``gauss``, ``rational``); further
regulators can be built with :meth:`Regulator.custom`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import mpmath as mp
import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, CapabilityError, DomainError

# derivative order needed by the k = 2 Euler-Maclaurin remainder (g'''''''' -> C''''''')
MIN_USER_ORDER = 7
BUILTIN_MAX_ORDER = 24

VALIDATION_XMAX = 50.0


@dataclass(frozen=True)
class CutoffLambda:
    """Cutoff length; strictly positive."""

    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise DomainError(f"cutoff must be positive and finite, got {self.value!r}")

    def __float__(self):
        return float(self.value)


def as_lambda(lam) -> float:
    """Coerce a float or :class:`CutoffLambda` to a validated positive float."""
    if isinstance(lam, CutoffLambda):
        return lam.value
    return CutoffLambda(float(lam)).value


@dataclass(frozen=True)
class Regulator:
    """Cutoff function C together with its derivatives and moments.

    Attributes
    ----------
    kind : str
        ``"exp"``, ``"gauss"``, ``"rational"`` or ``"custom"``.
    func : callable
        C(x) for x >= 0, vectorised over numpy arrays.
    derivative : callable or None
        ``derivative(k, x)`` returning C^(k)(x).  ``None`` selects finite
        differences.
    analytic_moment2 : float or None
        Exact value of the integral of u^2 C(u) over [0, inf).
    max_order : int
        Largest derivative order that may be requested.
    tail : callable or None
        ``tail(n, a)`` returning the integral of x^n C(x) over [a, inf) as an
        mpmath number (``mp.inf`` when divergent).
    """

    kind: str
    func: Callable
    derivative: Optional[Callable] = None
    analytic_moment2: Optional[float] = None
    max_order: int = BUILTIN_MAX_ORDER
    tail: Optional[Callable] = field(default=None, repr=False)

    @classmethod
    def custom(cls, func, derivative=None, max_order=MIN_USER_ORDER, moment2=None):
        """Wrap a user-supplied cutoff.

        Without ``derivative`` all derivatives come from finite differences
        (see :func:`fd_derivative`), which limits accuracy to roughly
        ``1e-3`` relative for the highest orders.
        """
        if max_order < MIN_USER_ORDER:
            raise CapabilityError(
                f"user regulators must support derivatives up to order {MIN_USER_ORDER}, "
                f"declared {max_order}")
        return cls("custom", func, derivative, moment2, max_order)

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        _check_nonnegative(x)
        return self.func(x)

    def deriv(self, k: int, x):
        """k-th derivative C^(k)(x), k >= 1."""
        if k < 1:
            raise DomainError(f"derivative order must be >= 1, got {k}")
        if k > self.max_order:
            raise CapabilityError(
                f"{self.kind} regulator supports derivatives up to order {self.max_order}, "
                f"requested {k}")
        _check_nonnegative(x)
        if self.derivative is not None:
            return self.derivative(k, x)
        if np.ndim(x):
            return np.array([fd_derivative(self.func, k, float(xi)) for xi in np.ravel(x)]
                            ).reshape(np.shape(x))
        return fd_derivative(self.func, k, float(x))

    def tail_moment(self, n: int, a):
        """Integral of x^n C(x) over [a, inf) as an mpmath number."""
        if self.tail is not None:
            return self.tail(n, mp.mpf(a))
        return mp.mpf(_quad_tail(self.func, n, float(a)))

    def moment2(self) -> float:
        """M2 = integral of u^2 C(u) du over [0, inf)."""
        if self.analytic_moment2 is not None:
            return self.analytic_moment2
        return _quad_tail(self.func, 2, 0.0)


def _check_nonnegative(x):
    if np.any(np.asarray(x) < 0):
        raise DomainError("regulator argument must be nonnegative")


def _quad_tail(func, n, a, rtol=1e-10):
    val, err = integrate.quad(lambda x: x ** n * func(x), a, np.inf, epsabs=0.0,
                              epsrel=rtol, limit=500)
    if not math.isfinite(val) or err > 10 * rtol * max(abs(val), 1e-300):
        raise AccuracyError(f"moment quadrature did not converge (error estimate {err:.3g})",
                            achieved=err)
    return val


@lru_cache(maxsize=None)
def _fd_weights(k: int, offsets: tuple) -> np.ndarray:
    s = np.array(offsets, dtype=float)
    npts = len(s)
    a = np.array([s ** m / math.factorial(m) for m in range(npts)])
    rhs = np.zeros(npts)
    rhs[k] = 1.0
    return np.linalg.solve(a, rhs)


def fd_derivative(func, k: int, x: float, accuracy: int = 4) -> float:
    """k-th derivative by a finite-difference stencil of the given accuracy order.

    The stencil has ``k + accuracy`` (central, rounded up to odd) points with
    step ``h = eps**(1/(k + accuracy)) * max(1, |x|)``.  Near x = 0 the
    stencil is shifted to be one-sided so that C is never sampled at negative
    arguments.
    """
    npts = k + accuracy
    if npts % 2 == 0:
        npts += 1
    half = npts // 2
    h = np.finfo(float).eps ** (1.0 / (k + accuracy)) * max(1.0, abs(x))
    shift = 0
    if x - half * h < 0:
        shift = half - int(math.floor(x / h))
    offsets = tuple(j - half + shift for j in range(npts))
    w = _fd_weights(k, offsets)
    vals = np.array([func(x + o * h) for o in offsets], dtype=float)
    return float(np.dot(w, vals) / h ** k)


# --- built-in families -------------------------------------------------------

def _exp_func(x):
    return np.exp(-np.asarray(x, dtype=float)) if np.ndim(x) else math.exp(-x)


def _exp_deriv(k, x):
    return (-1) ** k * _exp_func(x)


def _exp_tail(n, a):
    return mp.gammainc(n + 1, a)


def _gauss_func(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-x * x)
    return out if out.ndim else float(out)


def _gauss_deriv(k, x):
    # d^k/dx^k e^{-x^2} = (-1)^k H_k(x) e^{-x^2}, physicists' Hermite polynomials
    x = np.asarray(x, dtype=float)
    out = (-1) ** k * special.eval_hermite(k, x) * np.exp(-x * x)
    return out if out.ndim else float(out)


def _gauss_tail(n, a):
    return mp.gammainc(mp.mpf(n + 1) / 2, a * a) / 2


def _rational_func(x):
    x = np.asarray(x, dtype=float)
    out = (1.0 + x) ** -4
    return out if out.ndim else float(out)


def _rational_deriv(k, x):
    x = np.asarray(x, dtype=float)
    coef = (-1) ** k * math.factorial(k + 3) / 6.0
    out = coef * (1.0 + x) ** (-4 - k)
    return out if out.ndim else float(out)


def _rational_tail(n, a):
    # substitute y = 1 + x: (y - 1)^n y^-4, expanded binomially
    if n >= 3:
        return mp.inf
    y = 1 + a
    total = mp.mpf(0)
    for j in range(n + 1):
        total += math.comb(n, j) * (-1) ** (n - j) * y ** (j - 3) / (3 - j)
    return total


EXPONENTIAL = Regulator("exp", _exp_func, _exp_deriv, 2.0, BUILTIN_MAX_ORDER, _exp_tail)
GAUSSIAN = Regulator("gauss", _gauss_func, _gauss_deriv, math.sqrt(math.pi) / 4,
                     BUILTIN_MAX_ORDER, _gauss_tail)
RATIONAL = Regulator("rational", _rational_func, _rational_deriv, 1.0 / 3.0,
                     BUILTIN_MAX_ORDER, _rational_tail)

BUILTINS = {"exp": EXPONENTIAL, "gauss": GAUSSIAN, "rational": RATIONAL}


def get_regulator(name: str) -> Regulator:
    try:
        return BUILTINS[name]
    except KeyError:
        raise DomainError(f"unknown regulator {name!r}; choose from {sorted(BUILTINS)}") from None


# --- admissibility -------------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AdmissibilityReport:
    kind: str
    conditions: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name):
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def _max_slope(f, delta, xmax):
    x = np.arange(0.0, xmax + delta, delta)
    y = np.array([f(xi) for xi in x], dtype=float)
    return float(np.max(np.abs(np.diff(y))) / delta)


def _smooth_on_grid(f, xmax, delta=0.05):
    # a jump of size J inside some grid cell shows up as slope J/delta, which
    # doubles when delta is halved; a smooth function's maximal slope does not
    coarse = _max_slope(f, delta, xmax)
    fine = _max_slope(f, delta / 2, xmax)
    return fine <= 1.5 * coarse + 1e-9, coarse, fine


def validate(reg: Regulator, xmax: float = VALIDATION_XMAX, max_order: int = 6) -> AdmissibilityReport:
    """Check the admissibility conditions numerically on [0, xmax].

    Conditions: normalisation C(0) = 1; smoothness (no jumps in C, C', C''
    detected on a grid); decay of C and its derivatives at large argument;
    integrability of |C^(k)| on [0, xmax] with tail bound |C^(k-1)(xmax)|.
    Failures are report entries, never exceptions.
    """
    conds = []

    c0 = float(reg.eval(0.0))
    conds.append(Condition("normalization", abs(c0 - 1.0) <= 1e-12, f"C(0) = {c0!r}"))

    smooth = True
    details = []
    for k in range(3):
        f = reg.func if k == 0 else (lambda x, k=k: reg.deriv(k, x))
        ok, coarse, fine = _smooth_on_grid(f, min(xmax, 10.0) if reg.derivative is None else xmax)
        smooth &= ok
        details.append(f"k={k}: slope {coarse:.3g} -> {fine:.3g}")
    conds.append(Condition("smoothness", smooth, "; ".join(details)))

    decay = True
    worst = 0.0
    for k in range(max_order + 1):
        vfar = abs(float(reg.eval(xmax) if k == 0 else reg.deriv(k, xmax)))
        vmid = abs(float(reg.eval(xmax / 2) if k == 0 else reg.deriv(k, xmax / 2)))
        worst = max(worst, vfar)
        if not (vfar < 1e-6 and vfar <= vmid + 1e-300):
            decay = False
    conds.append(Condition("decay", decay, f"max |C^(k)({xmax:g})| = {worst:.3g}"))

    if not smooth:
        conds.append(Condition("derivative_integrability", False,
                               "derivatives do not exist (function is not smooth)"))
    else:
        integ = True
        parts = []
        for k in range(1, max_order + 1):
            val, _ = integrate.quad(lambda x: abs(reg.deriv(k, x)), 0.0, xmax, limit=400)
            prev = reg.eval(xmax) if k == 1 else reg.deriv(k - 1, xmax)
            tail = abs(float(prev))
            ok = math.isfinite(val) and tail <= 1e-6
            integ &= ok
            parts.append(f"k={k}: {val:.4g} (+tail {tail:.2g})")
        conds.append(Condition("derivative_integrability", integ, "; ".join(parts)))

    return AdmissibilityReport(reg.kind, tuple(conds))
