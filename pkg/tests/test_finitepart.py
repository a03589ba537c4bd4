import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy import integrate

from casimir_plates.errors import CapabilityError, DomainError, SpecMismatchError
from casimir_plates.eulermac import decompose_energy
from casimir_plates.finitepart import (PLATE_POLE, SingularitySpec, dirichlet_finite_part_terms,
                                       epsilon_limit, epsilon_limit_dirichlet,
                                       pf_derivative_identity_check, pf_endpoint_integral,
                                       pf_energy_per_area_dirichlet)
from casimir_plates.imagesum import density_limit
from casimir_plates.modesum import PlateGeometry
from casimir_plates.regulator import EXPONENTIAL

EPS_F = -math.pi ** 2 / 1440
UNIT = 1 / (4 * (2 * math.pi) ** 2)


def test_unit_pole():
    r = pf_endpoint_integral(lambda z: z ** -4, SingularitySpec("left", ((4, 1.0),)), 0.0, 1.0)
    assert r.value == pytest.approx(-1 / 3, rel=1e-14)
    assert r.subtracted == (("left", 4, 1.0),)
    assert 0 < r.epsilon_floor < 0.1


def test_plate_pole_values():
    target = -1 / (12 * (2 * math.pi) ** 2)
    left = pf_endpoint_integral(lambda z: UNIT * z ** -4, SingularitySpec("left", ((4, UNIT),)),
                                0.0, 1.0)
    right = pf_endpoint_integral(lambda z: UNIT * (1 - z) ** -4,
                                 SingularitySpec("right", ((4, UNIT),)), 0.0, 1.0)
    assert left.value == pytest.approx(target, rel=1e-12)
    assert right.value == pytest.approx(target, rel=1e-12)
    assert target == pytest.approx(-2.11086e-3, abs=1e-8)


def test_shifted_interval():
    # PF \int_2^5 (z-2)^-3 = -1/(2 * 3^2)
    r = pf_endpoint_integral(lambda z: (z - 2) ** -3, SingularitySpec("left", ((3, 1.0),)), 2.0, 5.0)
    assert r.value == pytest.approx(-1 / 18, rel=1e-13)


def test_spec_mismatch_detected():
    with pytest.raises(SpecMismatchError):
        pf_endpoint_integral(lambda z: z ** -4, SingularitySpec("left", ((4, 0.5),)), 0.0, 1.0)
    with pytest.raises(SpecMismatchError):
        pf_endpoint_integral(lambda z: density_limit(z, 1.0),
                             SingularitySpec("left", ((4, PLATE_POLE),)), 0.0, 1.0)


def test_unsupported_orders():
    with pytest.raises(CapabilityError):
        SingularitySpec("left", ((1, 1.0),))
    with pytest.raises(DomainError):
        SingularitySpec("middle", ((2, 1.0),))
    with pytest.raises(DomainError):
        pf_endpoint_integral(lambda z: z, None, 1.0, 0.0)


def test_no_singularity_is_ordinary_integral():
    f = lambda z: math.exp(-z) * math.sin(3 * z)
    q, _ = integrate.quad(f, 0, 2, epsabs=0, epsrel=1e-13)
    assert pf_endpoint_integral(f, None, 0.0, 2.0).value == pytest.approx(q, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_linearity(alpha, c4, c2):
    fa = lambda z: c4 * z ** -4 + c2 * z ** -2 + math.cos(z)
    fb = lambda z: z ** -3 + z * z
    sa = SingularitySpec("left", ((4, c4), (2, c2)))
    sb = SingularitySpec("left", ((3, 1.0),))
    both = SingularitySpec("left", ((4, alpha * c4), (2, alpha * c2), (3, 1.0)))
    pa = pf_endpoint_integral(fa, sa, 0.0, 1.0, regular=math.cos).value
    pb = pf_endpoint_integral(fb, sb, 0.0, 1.0, regular=lambda z: z * z).value
    pab = pf_endpoint_integral(lambda z: alpha * fa(z) + fb(z), both, 0.0, 1.0,
                               regular=lambda z: alpha * math.cos(z) + z * z).value
    assert pab == pytest.approx(alpha * pa + pb, rel=1e-12, abs=1e-13)


def test_dirichlet_finite_part():
    assert pf_energy_per_area_dirichlet(1.0) == pytest.approx(EPS_F, rel=1e-8)
    assert pf_energy_per_area_dirichlet(2.0) == pytest.approx(-8.56736e-4, rel=1e-6)
    assert pf_energy_per_area_dirichlet(2.0) == pytest.approx(EPS_F / 8, rel=1e-12)


def test_agrees_with_decomposition():
    dec = decompose_energy(PlateGeometry(1.0), EXPONENTIAL, (0.002, 0.001), fit=False)
    assert pf_energy_per_area_dirichlet(1.0) == pytest.approx(dec.eps_f, rel=1e-6)


def test_internal_cancellation():
    t = dirichlet_finite_part_terms(1.0)
    assert t.left_pole == pytest.approx(-PLATE_POLE / 3, rel=1e-14)
    assert t.images_plus == pytest.approx(PLATE_POLE / 3, rel=1e-12)
    assert abs(t.singular_net) < 1e-10
    assert t.total == pytest.approx(EPS_F, rel=1e-12)


def test_epsilon_limit_consistency():
    assert epsilon_limit_dirichlet(1.0) == pytest.approx(pf_energy_per_area_dirichlet(1.0), rel=1e-8)
    simple = epsilon_limit(lambda z: z ** -4 + z, SingularitySpec("left", ((4, 1.0),)), 0.0, 1.0)
    assert simple == pytest.approx(-1 / 3 + 0.5, rel=1e-10)


def test_epsilon_floor_refinement_stable():
    reg = lambda z: 1 / (z + 0.02)  # nearly singular, forces panel refinement
    f = lambda z: UNIT * z ** -4 + reg(z)
    spec = SingularitySpec("left", ((4, UNIT),))
    coarse = pf_endpoint_integral(f, spec, 0.0, 1.0, tol=1e-6, regular=reg)
    fine = pf_endpoint_integral(f, spec, 0.0, 1.0, tol=1e-13, regular=reg)
    assert fine.epsilon_floor <= coarse.epsilon_floor / 2
    assert fine.value == pytest.approx(coarse.value, rel=1e-10)


def test_identity_polynomial():
    z = sp.Symbol("z")
    phi = z ** 4 * (1 - z) ** 4
    res = pf_derivative_identity_check(phi)
    assert res.passed
    # ordinary integrals here: <z^-4, phi> = 1/5, <z^-2, phi''> = 6/5
    assert res.rhs == pytest.approx(6 * sp.integrate((1 - z) ** 4, (z, 0, 1)), rel=1e-12)
    assert res.lhs == pytest.approx(float(sp.integrate(sp.diff(phi, z, 2) / z ** 2, (z, 0, 1))),
                                    rel=1e-12)


def test_identity_genuine_finite_parts():
    # phi'''(0) = 0 keeps both pairings free of logarithms; symbolic value -30
    res = pf_derivative_identity_check("z**2*(1 + 4*z)*(1 - z)**4")
    assert res.passed
    assert res.lhs == pytest.approx(-30.0, rel=1e-12)


def test_identity_compact_support():
    z = sp.Symbol("z")
    bump = sp.Piecewise((sp.exp(-1 / ((z - sp.Rational(3, 10)) * (sp.Rational(7, 10) - z))),
                         (z > sp.Rational(3, 10)) & (z < sp.Rational(7, 10))), (0, True))
    res = pf_derivative_identity_check(bump, tol=1e-8)
    assert res.passed
    f = sp.lambdify(z, bump / z ** 4, "math")
    q, _ = integrate.quad(f, 0.3, 0.7, epsabs=0, epsrel=1e-12)
    assert res.rhs == pytest.approx(6 * q, rel=1e-8)


def test_identity_logarithmic_case_rejected():
    with pytest.raises(CapabilityError):
        pf_derivative_identity_check("z**2*(1 - z)**4")
    with pytest.raises(DomainError):
        pf_derivative_identity_check("z**4")
