import math

import numpy as np
import pytest

from fockline import oracle
from fockline.scheme import CoincidenceMode, SchemeConfig, run_scheme


def test_permanent_of_ones():
    for n in (1, 2, 3):
        assert oracle._permanents(np.ones((n, n)))[()] == pytest.approx(math.factorial(n))
    ones = [[np.ones(1) for _ in range(4)] for _ in range(4)]
    assert oracle._permanents_4(ones)[0] == pytest.approx(24)


def test_basis_dimension():
    states, index = oracle.basis()
    # sum_{n<=4} C(12 + n - 1, n)
    assert len(states) == sum(math.comb(11 + n, n) for n in range(5)) == 1820
    assert index[()] == 0


def test_lifted_beamsplitter_is_unitary():
    m = oracle.lift(oracle._bs(0, 2))
    assert np.allclose(m.conj().T @ m, np.eye(len(m)), atol=1e-12)


def test_lifted_hom():
    states, index = oracle.basis()
    m = oracle.lift(oracle._bs(0, 1))
    vec = np.zeros(len(states), dtype=complex)
    vec[index[(0, 2)]] = 1  # one H photon on each of lines 0 and 1
    out = m @ vec
    assert abs(out[index[(0, 2)]]) < 1e-15
    assert abs(out[index[(0, 0)]]) ** 2 == pytest.approx(0.5)


def test_total_probability_is_one():
    assert oracle.total_probability(0.1, 0.6) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("eps,eta", [(0.05, 1.0), (0.1, 0.5), (0.2, 0.8)])
@pytest.mark.parametrize("mode", list(CoincidenceMode))
def test_sparse_simulator_matches_dense_reference(eps, eta, mode):
    p_ref, f_ref = oracle.coincidence(eps, eta, strict=mode is CoincidenceMode.STRICT)
    r = run_scheme(SchemeConfig(eps, eta, mode), with_components=False)
    assert r.p_coincidence == pytest.approx(p_ref, rel=1e-9, abs=1e-15)
    assert r.fidelity == pytest.approx(f_ref, abs=1e-10)
