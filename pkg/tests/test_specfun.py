import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anneal_phases import specfun
from anneal_phases.errors import LambertConvergenceError, QuadratureError
from anneal_phases.specfun import QuadratureSpec, gamma_complex, lambert_w_minus1


# -- Lambert W ---------------------------------------------------------------

def test_lambert_branch_point():
    assert lambert_w_minus1(-math.exp(-1.0)) == pytest.approx(-1.0, abs=1e-7)


def test_lambert_real_value():
    w = lambert_w_minus1(-0.1)
    assert isinstance(w, float)
    assert w == pytest.approx(-3.577152063957297, rel=1e-13)
    assert abs(w * math.exp(w) + 0.1) < 1e-13


def test_lambert_real_segment_is_below_minus_one():
    for x in np.linspace(-math.exp(-1) + 1e-12, -1e-300, 200):
        w = lambert_w_minus1(x)
        assert w <= -1.0
        assert abs(w * math.exp(w) - x) <= 1e-12 * abs(x) + 1e-300


def test_lambert_minus_pi_over_8():
    w = lambert_w_minus1(-math.pi / 8)
    assert w.real == pytest.approx(-0.9564, abs=5e-4)
    assert w.imag < 0
    assert -w.real / (2 * math.pi) == pytest.approx(0.152, abs=1e-3)


def test_lambert_continuity_below_branch_point():
    # left of -1/e the real axis belongs to the upper half plane side of the cut
    a = lambert_w_minus1(complex(-0.5, 1e-12))
    b = lambert_w_minus1(-0.5)
    assert abs(a - b) < 1e-9


def test_lambert_matches_scipy():
    from scipy.special import lambertw

    rng = np.random.default_rng(0)
    r = 10 ** rng.uniform(-2, 1, 2000)
    phi = rng.uniform(-math.pi, math.pi, 2000)
    for z in r * np.exp(1j * phi):
        assert abs(lambert_w_minus1(z) - lambertw(z, -1)) < 1e-10 * max(1, abs(lambertw(z, -1)))


def test_lambert_zero_rejected():
    with pytest.raises(ValueError):
        lambert_w_minus1(0.0)


def test_lambert_non_convergence_reports_iterate():
    with pytest.raises(LambertConvergenceError) as info:
        lambert_w_minus1(complex(3.0, 1.0), max_iter=1, tol=0.0)
    assert info.value.last_iterate is not None


@settings(max_examples=300, deadline=None)
@given(r=st.floats(0.01, 10.0), phi=st.floats(-math.pi, math.pi))
def test_lambert_residual_property(r, phi):
    z = cmath.rect(r, phi)
    w = lambert_w_minus1(z)
    assert abs(w * cmath.exp(w) - z) <= 1e-12 * abs(z)


# -- Gamma -------------------------------------------------------------------

def test_gamma_examples():
    assert gamma_complex(0.5).real == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert gamma_complex(5).real == pytest.approx(24.0, rel=1e-13)
    g = gamma_complex(1 + 1j)
    assert abs(g) ** 2 == pytest.approx(math.pi / math.sinh(math.pi), rel=1e-12)
    assert abs(g) ** 2 == pytest.approx(0.2720, abs=1e-4)


def test_gamma_strip_moduli():
    for y in np.linspace(0, 30, 61):
        assert abs(gamma_complex(complex(0.5, y))) ** 2 == pytest.approx(
            math.pi / math.cosh(math.pi * y), rel=1e-10)


def test_gamma_matches_scipy():
    from scipy.special import gamma as sp_gamma

    rng = np.random.default_rng(1)
    z = rng.uniform(-8, 8, 500) + 1j * rng.uniform(-8, 8, 500)
    for zz in z:
        ref = sp_gamma(zz)
        assert abs(gamma_complex(zz) - ref) <= 1e-12 * abs(ref)


def test_gamma_poles():
    for z in (0, -1, -7):
        with pytest.raises(ValueError):
            gamma_complex(z)
        with pytest.raises(ValueError):
            specfun.loggamma_complex(z)


def test_loggamma_exponentiates_to_gamma():
    for z in (0.3 + 2j, 4 - 1j, -2.5 + 0.5j):
        assert cmath.exp(specfun.loggamma_complex(z)) == pytest.approx(gamma_complex(z),
                                                                      rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(x=st.floats(1e-3, 10.0), y=st.floats(-9.9, 9.9))
def test_gamma_recurrence_property(x, y):
    z = complex(x, y)
    if abs(z) > 10:
        return
    lhs = gamma_complex(z + 1)
    rhs = z * gamma_complex(z)
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


# -- quadrature --------------------------------------------------------------

def test_integrate_examples():
    assert specfun.integrate(lambda x: math.sin(x) ** 2, 0, math.pi) == pytest.approx(
        math.pi / 2, rel=1e-12)
    assert specfun.integrate(lambda x: math.exp(-math.pi * x * x), 0, math.inf) == pytest.approx(
        0.5, rel=1e-12)


def test_integrate_reports_bound():
    value, bound = specfun.integrate(math.cos, 0, 1, full_output=True)
    assert value == pytest.approx(math.sin(1.0), rel=1e-14)
    assert bound <= 1e-10 * abs(value)


def test_integrate_failure_carries_estimate():
    spec = QuadratureSpec(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=2)
    with pytest.raises(QuadratureError) as info:
        specfun.integrate(lambda x: math.sin(1 / x) if x else 0.0, 0, 1, spec)
    assert info.value.estimate is not None and info.value.bound is not None


def test_integrate_stable_under_more_subdivisions():
    f = lambda x: 1.0 / (1.0 + x**4)  # noqa: E731
    a, ea = specfun.integrate(f, 0, math.inf, QuadratureSpec(max_subdivisions=50), True)
    b, _ = specfun.integrate(f, 0, math.inf, QuadratureSpec(max_subdivisions=100), True)
    assert abs(a - b) <= ea


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)
