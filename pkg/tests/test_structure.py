import json

import numpy as np
import pytest

from qeuclid.coeff import ONE, Q, qpow
from qeuclid.structure import (
    build_structure,
    classical,
    labels,
    perturbed_rhat,
    tensor_from_json,
    verify_structure,
)

QV = 1.3


def numeric_rhat(N, q=QV):
    L = labels(N)
    pos = {a: i for i, a in enumerate(L)}
    n = len(L)
    M = np.zeros((n * n, n * n), dtype=complex)
    for (a, b, c, d), v in build_structure(N).rhat.entries.items():
        M[pos[a] * n + pos[b], pos[c] * n + pos[d]] = v.eval_numeric(q)
    return M


@pytest.mark.parametrize("N", [3, 4, 5])
def test_exact_battery_passes(N):
    rep = verify_structure(build_structure(N))
    assert rep.passed, [c.check_id for c in rep.failures]


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_braid_equation_numeric(N):
    # float route, independent of the exact tensor contractions
    R = numeric_rhat(N)
    n = N
    one = np.eye(n)
    R12, R23 = np.kron(R, one), np.kron(one, R)
    assert np.allclose(R12 @ R23 @ R12, R23 @ R12 @ R23, atol=1e-10)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_spectrum_numeric(N):
    ev = np.linalg.eigvals(numeric_rhat(N))
    want = {QV: N * (N + 1) // 2 - 1, -1 / QV: N * (N - 1) // 2, QV ** (1 - N): 1}
    for lam, mult in want.items():
        assert np.sum(np.abs(ev - lam) < 1e-8) == mult


@pytest.mark.parametrize("N", [3, 4])
def test_classical_limit_is_the_flip(N):
    R = classical(build_structure(N).rhat)
    L = labels(N)
    assert R.entries == {(a, b, b, a): ONE for a in L for b in L}


@pytest.mark.parametrize("N", [3, 4, 5])
def test_metric(N):
    pack = build_structure(N)
    for a in pack.labels:
        for b in pack.labels:
            want = pack.g(a, -a) if b == -a else None
            assert (pack.g(a, b) == want) if want is not None else pack.g(a, b).is_zero()
    # g^{ab} g_{bc} = delta
    for a in pack.labels:
        for c in pack.labels:
            acc = sum((pack.ginv(a, b) * pack.g(b, c) for b in pack.labels), start=ONE - ONE)
            assert acc == (ONE if a == c else ONE - ONE)


def test_n3_metric_values():
    pack = build_structure(3)
    assert pack.g(1, -1) == qpow(0.5)
    assert pack.g(-1, 1) == qpow(-0.5)
    assert pack.g(0, 0) == ONE


def test_fault_injection_is_detected():
    pack = build_structure(3)
    bad = perturbed_rhat(pack, (1, -1, 0, 0), Q)
    rep = verify_structure(pack, bad)
    assert not rep.passed
    failing = rep.failures[0]
    assert failing.counterexample is not None


def test_json_round_trip():
    pack = build_structure(3)
    data = json.loads(pack.to_json())
    assert tensor_from_json(data[0]).entries == pack.rhat.entries
    assert data[0]["N"] == 3 and data[0]["name"] == "rhat"


def test_rejects_small_N():
    with pytest.raises(ValueError):
        build_structure(2)
