import math

import pytest

from casimir_plates.counterterm import (counterterm, renormalized_energy_per_area,
                                        surface_density)
from casimir_plates.errors import DomainError
from casimir_plates.eulermac import decompose_energy
from casimir_plates.modesum import PlateGeometry, energy_per_area_direct
from casimir_plates.regulator import BUILTINS, EXPONENTIAL, GAUSSIAN, RATIONAL

EPS_F = -math.pi ** 2 / 1440
DIR = PlateGeometry(1.0)
PER = PlateGeometry(1.0, "periodic")


def test_surface_density_examples():
    assert surface_density(1.0, EXPONENTIAL) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert surface_density(0.5, EXPONENTIAL) == pytest.approx(1.2732395, abs=1e-7)
    assert surface_density(1.0, RATIONAL) == pytest.approx(0.0265258, abs=1e-7)
    ct = counterterm(0.5, GAUSSIAN)
    assert ct.per_plate_density > 0 and ct.lam == 0.5


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_homogeneity(name):
    reg = BUILTINS[name]
    ref = surface_density(1.0, reg)
    for lam in (1e-3, 0.02, 0.7, 3.0):
        assert surface_density(lam, reg) * lam ** 3 == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_counterterm_cancels_divergence(name):
    reg = BUILTINS[name]
    dec = decompose_energy(DIR, reg, (0.02, 0.01), fit=False)
    lam = 0.01
    assert 0.5 * surface_density(lam, reg) == pytest.approx(-dec.c_div / lam ** 3, rel=1e-8)


def test_renormalized_examples():
    r1 = renormalized_energy_per_area(DIR, 0.01, EXPONENTIAL)
    assert r1 == pytest.approx(-6.854e-3, abs=2e-4 * abs(EPS_F))
    r2 = renormalized_energy_per_area(DIR, 0.02, EXPONENTIAL)
    assert (r2 - EPS_F) / (r1 - EPS_F) == pytest.approx(4.0, rel=0.15)
    p = renormalized_energy_per_area(PER, 0.01, EXPONENTIAL)
    assert p == pytest.approx(-0.109662, abs=2e-4)


def test_sign_of_counterterm():
    # the counterterm is added: direct energy is large and negative
    lam = 0.05
    direct = energy_per_area_direct(DIR, lam, EXPONENTIAL)
    ren = renormalized_energy_per_area(DIR, lam, EXPONENTIAL)
    assert direct < 0
    assert ren == pytest.approx(direct + 0.5 * surface_density(lam, EXPONENTIAL), rel=1e-9)


def test_periodic_untouched():
    assert renormalized_energy_per_area(PER, 0.05, GAUSSIAN) == pytest.approx(
        energy_per_area_direct(PER, 0.05, GAUSSIAN), rel=1e-15)


def test_regulator_independence_small_cutoff():
    vals = {
        "exp": renormalized_energy_per_area(DIR, 1e-3, EXPONENTIAL),
        "gauss": renormalized_energy_per_area(DIR, 1e-3, GAUSSIAN),
        "rational": renormalized_energy_per_area(DIR, 1e-3, RATIONAL, method="euler_maclaurin"),
    }
    for v in vals.values():
        assert v == pytest.approx(EPS_F, rel=1e-4)
    assert max(vals.values()) - min(vals.values()) < 1e-4 * abs(EPS_F)


@pytest.mark.parametrize("geom", [DIR, PER], ids=["dirichlet", "periodic"])
def test_methods_agree(geom):
    a = renormalized_energy_per_area(geom, 0.02, EXPONENTIAL)
    b = renormalized_energy_per_area(geom, 0.02, EXPONENTIAL, method="euler_maclaurin")
    assert a == pytest.approx(b, rel=1e-10)


def test_preconditions():
    with pytest.raises(DomainError):
        renormalized_energy_per_area(DIR, 0.2, EXPONENTIAL)
    with pytest.raises(DomainError):
        renormalized_energy_per_area(DIR, 0.01, EXPONENTIAL, method="closed")
