import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from qeuclid.coeff import ONE, Q, FieldElem
from qeuclid.ncalg import NCExpr
from qeuclid.radial import (
    RadialError,
    RadialFn,
    apply_partial,
    derive_radial_constants,
    monomial_window,
    nu_multiplier_numeric,
    nu_multiplier_samples,
    polynomial_crosscheck,
    radial_induction_report,
)

QV = 1.2


def test_constants_n3():
    rc = derive_radial_constants(3)
    assert rc.k == ONE + Q.inverse()
    assert rc.c == Q * Q
    assert rc.shift == 1


def test_constants_n4():
    rc = derive_radial_constants(4)
    assert rc.k == ONE + Q**-2
    assert rc.c == Q * Q


@pytest.mark.parametrize("N", [3, 4])
def test_induction_and_classical_limit(N):
    assert radial_induction_report(N).passed


def test_crosscheck_against_the_algebra():
    rep = polynomial_crosscheck(3, 6)
    assert rep.passed and rep.checks


families = st.builds(
    RadialFn.rational,
    st.sampled_from([1, 3, 6]),
    st.sampled_from([0, Fraction(1, 2), -1, 2]),
    st.integers(1, 3),
    st.integers(-1, 2),
)


@given(families)
def test_qdiff_matches_direct_evaluation(f):
    rc = derive_radial_constants(3)
    df = f.qdiff(rc)
    for r in (0.3, 1.1, 2.7):
        direct = (f(r, QV) - f(QV * r, QV)) / ((1 - QV**2) * r**2)
        assert abs(df(r, QV) - direct) <= 1e-10 * (1 + abs(direct))


@given(families, st.sampled_from([Fraction(1), Fraction(-1, 2), Fraction(2)]))
def test_dilate(f, a):
    for r in (0.5, 1.7):
        assert abs(f.dilate(a)(r, QV) - f(QV ** float(a) * r, QV)) <= 1e-12 * (1 + abs(f(QV ** float(a) * r, QV)))


@given(families)
def test_family_closed_under_qdiff(f):
    assert f.qdiff(derive_radial_constants(3)).pole_lattices() == f.pole_lattices()


def test_exact_orders_after_cancellation():
    f = RadialFn.rational(3)
    df = f.qdiff(derive_radial_constants(3))
    assert f.order_at_zero() == 0 and f.order_at_infinity() == -3
    assert df.order_at_zero() == 1
    assert df.order_at_infinity() == -5


def test_apply_partial_on_constant():
    # d_a f(r) = k x_a (D f): no term from differentiating the polynomial
    terms = apply_partial(0, NCExpr.scalar(ONE, 3), RadialFn.rational(3), 3)
    assert len(terms) == 1


def test_multiplier_against_heat_kernel():
    # nu~'^-2 acts on psi(y) = e^{3y/2} f(e^y) as convolution with a Gaussian of variance ln q
    f = RadialFn.rational(3, 0, 2)
    s = nu_multiplier_numeric(f, -2, QV, 3)
    var = math.log(QV)
    psi = lambda y: math.exp(1.5 * y) * f(math.exp(y), QV).real
    for y0 in (-1.0, 0.0, 1.5):
        i = int(np.argmin(np.abs(s.y - y0)))
        y = s.y[i]
        want = integrate.quad(
            lambda t: psi(y - t) * math.exp(-t * t / (2 * var)) / math.sqrt(2 * math.pi * var), -40, 40, limit=200
        )[0]
        assert abs(s.weighted[i] - want) <= 1e-9 * abs(want) + s.error


@pytest.mark.parametrize("m", [-2, 0, 1, 2])
@pytest.mark.parametrize("l", [0, 1, 2])
def test_multiplier_on_monomials(m, l):
    s = nu_multiplier_numeric(RadialFn.monomial(m), -2, QV, 3, l, window=monomial_window(m, 3, l, QV))
    mid = np.abs(s.y) < 1
    exact = QV ** ((l + m + 1.5) ** 2 / 2)
    assert np.max(np.abs(s.values[mid] / np.exp(m * s.y[mid]) - exact)) / exact < 1e-6


def test_multiplier_positive_and_invertible():
    f = RadialFn.rational(3)
    s = nu_multiplier_numeric(f, -2, QV, 3)
    assert np.all(s.weighted.real > -s.error)
    back = nu_multiplier_samples(s, 2, QV, 3)
    assert np.max(np.abs(back.weighted - f.on_log_grid(s.y, QV, 1.5))) <= back.error


def test_not_square_integrable_is_refused():
    with pytest.raises(RadialError):
        nu_multiplier_numeric(RadialFn.monomial(0), -2, QV, 3)


def test_odd_power_refused():
    with pytest.raises(ValueError):
        nu_multiplier_numeric(RadialFn.rational(3), 1, QV, 3)


def test_coefficient_fields():
    f = RadialFn.rational(3, coeff=FieldElem.parse("i"))
    assert f.conj()(1.0, QV) == pytest.approx(-1j * 0.5)
