import numpy as np
import pytest

from hdtorus.errors import SizeError
from hdtorus.oracle import Graph, exact_observables
from hdtorus.spectral import convolve
from hdtorus.torus import TorusSpec

from conftest import ham, nn


def cycle4_closed_forms(p):
    t1 = p + (1 - p) * p ** 3
    t2 = 2 * p ** 2 - p ** 4
    return np.array([1, t1, t2, t1]), p ** 4


def test_cycle4_half():
    rep = exact_observables(TorusSpec.cycle(4), 0.5)
    assert np.allclose(rep.tau, [1, 9 / 16, 7 / 16, 9 / 16], atol=1e-15)
    assert rep.chi == pytest.approx(41 / 16, abs=1e-15)
    assert np.allclose(rep.pi0, [0, 1 / 16, 1 / 16, 1 / 16], atol=1e-15)
    assert rep.nabla0 == pytest.approx(17626 / 4096, abs=1e-12)
    assert rep.tail[2] == pytest.approx(0.75)
    assert rep.cmax_mean == pytest.approx(2.8125)


@pytest.mark.parametrize("p", [0.1, 0.37, 0.8])
def test_cycle4_polynomials(p):
    rep = exact_observables(TorusSpec.cycle(4), p)
    tau, pi = cycle4_closed_forms(p)
    assert np.abs(rep.tau - tau).max() < 1e-14
    assert np.abs(rep.pi0[1:] - pi).max() < 1e-14
    chi = 1 + 2 * (p + (1 - p) * p ** 3) + 2 * p ** 2 - p ** 4
    assert rep.chi == pytest.approx(chi, abs=1e-14)


@pytest.mark.parametrize("spec", [TorusSpec.cycle(4), TorusSpec.cycle(6), ham(2, 3), ham(4, 1)], ids=str)
def test_p_zero_and_invariants(spec):
    rep = exact_observables(spec, 0.0)
    assert np.array_equal(rep.tau, np.eye(1, spec.V)[0])
    assert rep.chi == 1 and rep.nabla0 == 1 and np.all(rep.pi0 == 0)
    rep = exact_observables(spec, 0.6)
    assert rep.chi == pytest.approx(rep.tau.sum())
    for arr in (rep.tau, rep.pi0[1:], rep.tail):
        assert np.all((arr >= -1e-12) & (arr <= 1 + 1e-12))
    assert np.all(np.diff(rep.tail[1:]) <= 1e-12) and rep.tail[1] == pytest.approx(1.0)
    # nabla(0,0) from the all-pairs matrix equals the triple convolution at 0
    assert rep.nabla0 == pytest.approx(convolve(rep.tau, rep.tau, spec, rep.tau)[0], rel=1e-10)
    # double connection implies connection
    assert np.all(rep.pi0[1:] <= rep.tau[1:] + 1e-15)


def test_general_graph():
    # a triangle with a pendant vertex: 0-1-2-0, 2-3
    g = Graph(4, ((0, 1), (1, 2), (0, 2), (2, 3)))
    p = 0.5
    rep = exact_observables(g, p)
    t01 = p + (1 - p) * p * p
    assert rep.tau[1] == pytest.approx(t01)
    assert rep.tau[3] == pytest.approx(t01 * p)
    assert rep.pi0[1] == pytest.approx(p ** 3)
    assert rep.pi0[3] == 0


def test_size_cap():
    with pytest.raises(SizeError):
        exact_observables(nn(3, 3), 0.5)  # 81 bonds
