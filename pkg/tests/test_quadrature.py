import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate as spi

from qeuclid.calculus import xi_basis
from qeuclid.coeff import ONE, Q, qpow
from qeuclid.quadrature import (
    FormWaveFunction,
    Measure,
    WaveFunction,
    admissibility,
    gram_positivity,
    hermiticity_check,
    hodge_pairing,
    integrate,
    jackson_sum,
    kinetic_action,
    scalar_product,
    scalar_product_forms,
    stokes_check,
)
from qeuclid.radial import RadialFn
from qeuclid.suites import hermiticity_family

R = RadialFn.rational


def test_measure_parsing():
    assert Measure.parse("uniform", 1.2).kind == "uniform"
    m = Measure.parse("jackson:beta=0.5,window=30", 1.2)
    assert (m.beta, m.n_min, m.n_max) == (0.5, -30, 30)
    assert Measure.parse(f"jackson:r0={1.2 ** 0.5}", 1.2).beta == 0.5
    for bad in ("jackson:beta=0.3", "gauss", "jackson:foo=1", f"jackson:beta=0,r0={1.2 ** 0.5}"):
        with pytest.raises(ValueError):
            Measure.parse(bad, 1.2)
    with pytest.raises(ValueError):
        Measure("jackson", 1.0)


def test_uniform_integral_against_closed_form():
    # int_0^inf r^2 / (1 + r^3)^2 dr = 1/3
    res = integrate(WaveFunction.harmonic(0, 0, R(3, 0, 2)), Measure("uniform", 1.2))
    assert abs(res.value - 1 / 3) < 1e-12


@pytest.mark.parametrize("q", [0.9, 1.2])
@pytest.mark.parametrize("beta", [0.0, 0.5])
def test_jackson_against_plain_loop(q, beta):
    f = R(3, 0, 2)
    m = Measure("jackson", q, beta)
    res = integrate(WaveFunction.harmonic(0, 0, f), m)
    loop = 0.0
    for n in range(-400, 401):
        r = q ** (n + beta)
        loop += abs(q - 1) * r**3 * f(r, q).real
    assert abs(res.value - loop) < 1e-13 * abs(loop)


def test_jackson_approximates_uniform():
    f = WaveFunction.harmonic(0, 0, R(3, 0, 2))
    q = 1.2
    jack = integrate(f, Measure("jackson", q)).value
    uni = integrate(f, Measure("uniform", q)).value
    assert abs(jack - uni * abs(q - 1) / math.log(q)) < 1e-6


def test_lattice_shift_covariance():
    f = R(6)
    m = Measure("jackson", 1.2)
    base = jackson_sum(f, m, 3, -60, 60)
    assert abs(jackson_sum(f.dilate(1), m, 3, -61, 59) - base * 1.2**-3) < 1e-15 * abs(base)


@pytest.mark.parametrize("q", [0.9, 1.2])
@pytest.mark.parametrize("beta", [0.0, 0.5])
@pytest.mark.parametrize("a", [-1, 0, 1])
def test_stokes(q, beta, a):
    f = WaveFunction.harmonic(1, 1, R(3, 0, 2)) + WaveFunction.harmonic(0, 0, R(6, Fraction(1, 2)))
    rep = stokes_check(f, a, Measure("jackson", q, beta))
    assert rep.passed and rep.checks[0].status == "pass"


def test_stokes_uniform():
    f = WaveFunction.harmonic(2, 0, R(3, 0, 3))
    assert stokes_check(f, 1, Measure("uniform", 1.2)).checks[0].status == "pass"


def test_stokes_needs_decay():
    rep = stokes_check(WaveFunction.harmonic(0, 0, R(1, 0, 1)), 0, Measure("jackson", 1.2))
    assert rep.checks[0].status == "inapplicable"


def test_divergent_integral_refused():
    with pytest.raises(Exception):
        integrate(WaveFunction.harmonic(0, 0, RadialFn.monomial(0)), Measure("uniform", 1.2))


@pytest.mark.parametrize("beta", [0.0, 0.5])
@pytest.mark.parametrize("op", ["momentum", "laplacian"])
def test_hermiticity(beta, op):
    fam = hermiticity_family(3, beta)
    m = Measure("jackson", 1.2, beta)
    for alpha in (1, 2, 3) if op == "momentum" else (1,):
        rep = hermiticity_check(fam[0], fam[2], op, m, alpha=alpha)
        assert rep.passed and rep.checks[0].status == "pass"


def test_hermiticity_uniform():
    fam = hermiticity_family(3, 0.0)
    rep = hermiticity_check(fam[1], fam[3], "momentum", Measure("uniform", 1.2), alpha=2)
    assert rep.checks[0].status == "pass"


def test_scalar_product_is_hermitian_and_positive():
    fam = hermiticity_family(3, 0.0)
    m = Measure("jackson", 1.2)
    a = scalar_product(fam[0], fam[1], m).value
    b = scalar_product(fam[1], fam[0], m).value
    assert abs(a - b.conjugate()) < 1e-12 * max(abs(a), 1e-300)
    G, lam = gram_positivity(fam, m)
    assert lam > 0 and np.allclose(G, G.conj().T, atol=1e-12)


def test_admissibility_gate():
    m = Measure("jackson", 1.2, 0.0)
    assert admissibility(WaveFunction.harmonic(0, 0, R(3, 0, 2)), m)[0]
    assert not admissibility(WaveFunction.harmonic(0, 0, R(3, Fraction(1, 2), 2)), m)[0]
    assert not admissibility(WaveFunction.harmonic(0, 0, R(2, 0, 2)), m)[0]
    assert admissibility(WaveFunction.harmonic(0, 0, R(2, 0, 2)), Measure("uniform", 1.2))[0]


def test_hodge_pairing_values():
    _, p1 = hodge_pairing(3, 1)
    assert [p1[i][i] for i in range(3)] == [qpow(-2), qpow(-3), qpow(-4)]
    for p in range(4):
        basis, mat = hodge_pairing(3, p)
        assert len(basis) == len(xi_basis(3, p))
        for i, row in enumerate(mat):
            for j, v in enumerate(row):
                assert v == mat[j][i].conj()
                assert v.at_classical() == (ONE if i == j else ONE - ONE)


def test_form_laplacian_hermitian():
    fam = hermiticity_family(3, 0.0)
    (A, B) = xi_basis(3, 1)[:2]
    alpha = FormWaveFunction(1, {A: fam[0], B: fam[1]})
    beta = FormWaveFunction(1, {A: fam[2], B: fam[3]})
    rep = hermiticity_check(alpha, beta, "laplacian", Measure("jackson", 1.2))
    assert rep.checks[0].status == "pass"


def test_kinetic_action_classical_limit():
    # q -> 1: (Delta a, a) = int |a'|^2 r^2 dr for a = (1 + r^2)^-2; mass term M^2 pi/32
    # 1/(1 + r^2)^2 has its poles at r = e^{i pi/2}: the n = 2 family
    a = WaveFunction.harmonic(0, 0, R(2, 0, 2))
    out = kinetic_action(a, 2.0, Measure("uniform", 1 + 1e-5))
    kin = spi.quad(lambda r: 16 * r**4 / (1 + r * r) ** 6, 0, np.inf)[0]
    assert abs(out["mass_term"] - math.pi / 8) < 1e-4
    assert abs(out["value"] - (kin + math.pi / 8)) < 1e-5 * (kin + math.pi / 8)


def test_forms_scalar_product_degree_mismatch():
    f = FormWaveFunction.function(WaveFunction.harmonic(0, 0, R(3, 0, 2)))
    g = FormWaveFunction(1, {xi_basis(3, 1)[0]: WaveFunction.harmonic(0, 0, R(3, 0, 2))})
    assert scalar_product_forms(f, g, Measure("jackson", 1.2)).value == 0
