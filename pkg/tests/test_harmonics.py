from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qeuclid.calculus import act, monomials
from qeuclid.coeff import ONE, Q, FieldElem, qpow
from qeuclid.harmonics import (
    Q0,
    angular_pairing,
    build_Vl,
    decompose,
    gram_matrix,
    harmonics_json,
    nu_prime_eigenvalue,
    nu_tilde_factor,
    nu_tilde_pow,
)
from qeuclid.ncalg import NCExpr, dot_dd, get_rules, normal_order, parse_expr

R3 = get_rules(3)


@pytest.mark.parametrize("l", range(5))
def test_dimension_and_harmonicity(l):
    hs = build_Vl(3, l)
    assert len(hs) == 2 * l + 1
    for h in hs:
        assert act(dot_dd(3), h.poly, R3).is_zero()
        assert len({len(w) for w in h.poly.terms}) == 1


def test_weights_cover_minus_l_to_l():
    for l in range(4):
        assert sorted(h.weight for h in build_Vl(3, l)) == list(range(-l, l + 1))


@pytest.mark.parametrize("l", range(4))
def test_normalized_gram_is_identity(l):
    G = gram_matrix(3, l, Q0, normalized=True)
    assert np.allclose(G, np.eye(2 * l + 1), atol=1e-12)


def test_gram_exact_and_positive_for_other_q():
    for q in (0.7, 1.5, 2.0):
        for l in range(3):
            G = np.array(gram_matrix(3, l, q))
            assert np.allclose(G, np.diag(np.diag(G)))
            assert np.all(np.diag(G).real > 0)


def test_level_orthogonality():
    for l in range(3):
        for l2 in range(l + 1, 4):
            for a in build_Vl(3, l):
                for b in build_Vl(3, l2):
                    assert angular_pairing(a.poly, b.poly).is_zero()


def test_level_two_zero_weight_harmonic():
    h = next(h for h in build_Vl(3, 2) if h.weight == 0)
    assert h.poly == normal_order(parse_expr("x[0]^2 - s^4*x[-1]*x[1]"), R3)
    assert h.norm2 == Q**3 / (Q**4 + Q**3 + Q**2 + Q + ONE)
    # q = 1: S = z^2 - (u^2 + v^2)/2 in Euclidean coordinates, pairing = sphere average of S^2
    t, w = np.polynomial.legendre.leggauss(8)
    avg = float(np.sum(w * ((3 * t**2 - 1) / 2) ** 2) / 2)
    assert abs(h.norm2.eval_numeric(1.0).real - avg) < 1e-14


def test_decompose_x0_squared():
    e = decompose(parse_expr("x[0]^2"), 3)
    s0 = e.components[(0, 0, 2)]
    assert s0 == Q / (Q**2 + Q + ONE)
    assert e.levels() == {0, 2}


MONOS = [m for d in range(5) for m in monomials(3, d)]
polys = st.lists(
    st.tuples(st.sampled_from(MONOS), st.integers(-3, 3).filter(bool).map(FieldElem.rational)), min_size=1, max_size=4
).map(lambda ts: sum((m * c for m, c in ts), start=NCExpr(N=3)))


@given(polys)
def test_decompose_reconstruct(f):
    assert decompose(f, 3).reconstruct() == normal_order(f, R3)


def test_nu_prime():
    for l in range(5):
        assert nu_prime_eigenvalue(l) == qpow(Fraction(-l * (l + 1), 4))
        assert nu_prime_eigenvalue(l) * nu_prime_eigenvalue(l, k=-1) == ONE
    assert nu_tilde_factor(0, 0, 3, 2) == qpow(Fraction(-9, 8))


@given(polys)
def test_nu_tilde_inverse_pair(f):
    e = decompose(f, 3)
    assert nu_tilde_pow(nu_tilde_pow(e, -2), 2).components == e.components


def test_odd_power_rejected():
    with pytest.raises(ValueError):
        nu_tilde_pow(decompose(parse_expr("x[0]"), 3), 1)


def test_json_export():
    data = harmonics_json(3, 2)
    assert [lv["dim"] for lv in data["levels"]] == [1, 3, 5]
    assert data["levels"][1]["gram"][0][1] == "0"
