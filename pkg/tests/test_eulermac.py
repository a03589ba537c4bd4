import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from casimir_plates.errors import CapabilityError, DomainError
from casimir_plates.eulermac import (GFunction, bernoulli_hardy, check_sigma_independence,
                                     decompose_energy, g_deriv, g_eval, psi, richardson_lambda2,
                                     sigma_k)
from casimir_plates.modesum import PlateGeometry, energy_per_area_direct
from casimir_plates.regulator import BUILTINS, EXPONENTIAL, GAUSSIAN, RATIONAL, Regulator

EPS_F = -math.pi ** 2 / 1440


def series_phi(k):
    """phi_k from the coefficient of x^k/k! in x (e^{xt} - 1)/(e^x - 1)."""
    x, t = sp.symbols("x t")
    gen = x * (sp.exp(x * t) - 1) / (sp.exp(x) - 1)
    coeff = sp.series(gen, x, 0, k + 1).removeO().coeff(x, k)
    return sp.lambdify(t, sp.expand(coeff * sp.factorial(k)))


def hardy_from_generating_function(r):
    # x/(e^x - 1) = 1 - x/2 + sum_r (-1)^(r-1) B_r x^(2r)/(2r)!
    x = sp.Symbol("x")
    c = sp.series(x / (sp.exp(x) - 1), x, 0, 2 * r + 1).removeO().coeff(x, 2 * r)
    return Fraction(str((-1) ** (r - 1) * c * sp.factorial(2 * r)))


def test_bernoulli_examples():
    assert bernoulli_hardy(1) == Fraction(1, 6)
    assert bernoulli_hardy(2) == Fraction(1, 30)
    assert bernoulli_hardy(3) == Fraction(1, 42)
    for r in range(1, 8):
        assert bernoulli_hardy(r) == hardy_from_generating_function(r)
        assert bernoulli_hardy(r) > 0
    with pytest.raises(DomainError):
        bernoulli_hardy(0)
    with pytest.raises(DomainError):
        bernoulli_hardy(21)


def test_psi_examples():
    for k in range(1, 10):
        assert psi(k, 0.0) == 0.0
    assert psi(6, 0.5) == pytest.approx(-3 / 64, abs=1e-15)
    assert psi(2, 1.25) == pytest.approx(-0.1875, abs=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6, 7])
def test_psi_against_series_extraction(k):
    phi = series_phi(k)
    for t in np.linspace(0.05, 0.95, 7):
        assert psi(k, t) == pytest.approx(phi(t), abs=1e-13)
        assert psi(k, t + 3) == pytest.approx(phi(t), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.floats(0.0, 0.999))
def test_psi_periodic(k, t):
    assert psi(k, t) == psi(k, t + 1.0) or abs(psi(k, t) - psi(k, t + 1.0)) < 1e-13


def _fd(f, x, h=1e-3):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def test_psi_recurrences():
    xs = np.linspace(0.02, 0.98, 50)
    for m in range(2, 5):
        lhs = psi(2 * m - 1, xs)
        rhs = _fd(lambda x: psi(2 * m, x), xs) / (2 * m)
        assert np.max(np.abs(lhs - rhs)) < 1e-8
    for m in range(1, 5):
        lhs = psi(2 * m, xs)
        rhs = _fd(lambda x: psi(2 * m + 1, x), xs) / (2 * m + 1) + (-1) ** m * float(bernoulli_hardy(m))
        assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_odd_recurrence_fails_for_m1():
    # psi_1 = t - 0 differs from psi_2'/2 = t - 1/2 by the odd Bernoulli number
    xs = np.linspace(0.1, 0.9, 5)
    assert np.allclose(psi(1, xs) - _fd(lambda x: psi(2, x), xs) / 2, 0.5)


def test_g_eval_examples():
    gf = GFunction(1.0, 1.0, EXPONENTIAL)
    assert g_eval(0, gf) == pytest.approx(4.0, rel=1e-14)
    assert 0.5 * g_eval(0, gf) == pytest.approx(EXPONENTIAL.moment2(), rel=1e-14)
    pi = math.pi
    assert g_eval(1, gf) == pytest.approx(2 * math.exp(-pi) * (pi ** 2 + 2 * pi + 2), rel=1e-14)


def test_g_positive_decreasing():
    gf = GFunction(0.1, 1.0, GAUSSIAN)
    vals = [g_eval(m, gf) for m in range(8)]
    assert all(v > 0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_g_deriv_examples():
    gf = GFunction(1.0, math.pi, EXPONENTIAL)
    assert g_deriv(1, 1.0, gf) == pytest.approx(-2 * math.exp(-1), rel=1e-14)
    assert g_deriv(1, 0.0, gf) == 0.0
    gf1 = GFunction(0.37, 1.0, EXPONENTIAL)
    assert g_deriv(3, 0.0, gf1) == pytest.approx(-4 * math.pi ** 3, rel=1e-14)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_g_deriv_against_numerical_derivatives(name):
    reg = BUILTINS[name]
    gf = GFunction(0.1, 1.0, reg)

    def g_mp(t):
        return 2 * reg.tail_moment(2, gf.lam * t * mp.pi / gf.d) / mp.mpf(gf.lam) ** 3

    with mp.workdps(30):
        for t in (0.3, 1.7, 4.25):
            for order in range(1, 5):
                ref = float(mp.diff(g_mp, mp.mpf(t), order))
                assert float(g_deriv(order, t, gf)) == pytest.approx(ref, rel=1e-6)


def test_gfunction_order_requirement():
    weak = Regulator("custom", EXPONENTIAL.func, EXPONENTIAL.derivative, 2.0, max_order=6)
    with pytest.raises(CapabilityError):
        GFunction(0.1, 1.0, weak)


def test_sigma_examples():
    gf = GFunction(0.01, 1.0, EXPONENTIAL)
    s2 = sigma_k(2, gf)
    assert s2 == pytest.approx(-math.pi ** 3 / 180, abs=2e-4)
    assert sigma_k(3, gf) == pytest.approx(s2, rel=1e-6)


def test_sigma_d_scaling_at_fixed_ratio():
    s1 = sigma_k(2, GFunction(0.01, 1.0, EXPONENTIAL))
    s2 = sigma_k(2, GFunction(0.02, 2.0, EXPONENTIAL))
    assert s2 == pytest.approx(s1 / 8, rel=1e-6)


@pytest.mark.parametrize("name", sorted(BUILTINS))
@pytest.mark.parametrize("lam", [0.1, 0.01])
def test_sigma_independence(name, lam):
    gf = GFunction(lam, 1.0, BUILTINS[name])
    assert check_sigma_independence([2, 3, 4], gf) < 1e-6
    assert check_sigma_independence([2], gf) == 0.0


def test_sigma_reproduces_direct_energy():
    gf = GFunction(0.1, 1.0, EXPONENTIAL)
    em = (sigma_k(2, gf) - 0.5 * g_eval(0, gf)) / (8 * math.pi)
    assert em == pytest.approx(energy_per_area_direct(PlateGeometry(1.0), 0.1, EXPONENTIAL),
                               rel=1e-12)


def test_richardson():
    f = lambda lam: 3.0 + 5 * lam ** 2
    assert richardson_lambda2(0.1, f(0.1), 0.05, f(0.05)) == pytest.approx(3.0, rel=1e-14)


SWEEP = (0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001)


@pytest.fixture(scope="module")
def decomps():
    out = {}
    for name, reg in BUILTINS.items():
        out[name] = decompose_energy(PlateGeometry(1.0), reg, SWEEP)
    out["periodic"] = decompose_energy(PlateGeometry(1.0, "periodic"), EXPONENTIAL, SWEEP)
    return out


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_decomposition_finite_part(decomps, name):
    dec = decomps[name]
    assert dec.eps_f == pytest.approx(EPS_F, rel=1e-4)
    assert abs(dec.remainder_exponent - 2) < 0.1


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_decomposition_divergent_coefficient(decomps, name):
    # the Lambda^-3 coefficient is -M2/(8 pi)
    reg = BUILTINS[name]
    assert decomps[name].c_div == pytest.approx(-reg.moment2() / (8 * math.pi), rel=1e-12)


def test_decomposition_examples(decomps):
    assert abs(decomps["exp"].c_div) == pytest.approx(0.0795775, abs=1e-7)
    assert abs(decomps["gauss"].c_div) == pytest.approx(0.0176310, abs=1e-7)
    assert decomps["exp"].fit_c_div == pytest.approx(decomps["exp"].c_div, rel=1e-6)
    assert decomps["rational"].fit_eps_f is None  # no finite third moment, no direct sums
    per = decomps["periodic"]
    assert abs(per.c_div) < 1e-10
    assert per.eps_f == pytest.approx(-0.1096623, abs=1e-7)


def test_decomposition_regulator_independence(decomps):
    vals = [decomps[n].eps_f for n in BUILTINS]
    assert max(vals) - min(vals) < 1e-4 * abs(EPS_F)


def test_decomposition_preconditions():
    with pytest.raises(DomainError):
        decompose_energy(PlateGeometry(1.0), EXPONENTIAL, [0.01])
    with pytest.raises(DomainError):
        decompose_energy(PlateGeometry(1.0), EXPONENTIAL, [0.3, 0.01])


def test_perturbed_bernoulli_breaks_finite_part():
    def mutated(r):
        return Fraction(1, 29) if r == 2 else bernoulli_hardy(r)

    dec = decompose_energy(PlateGeometry(1.0), EXPONENTIAL, (0.01, 0.005), fit=False, hardy=mutated)
    assert abs(dec.eps_f / EPS_F - 1) > 1e-4
