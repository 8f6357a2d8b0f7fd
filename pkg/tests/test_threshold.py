import numpy as np
import pytest

from hdtorus.errors import DomainError
from hdtorus.oracle import exact_observables
from hdtorus.threshold import (
    ThresholdResult,
    default_epsilons,
    find_pc,
    pc_asymptotics_check,
    window_scan,
)
from hdtorus.torus import TorusSpec

from conftest import ham

CYCLE4 = TorusSpec.cycle(4)
LAM_C4 = 2 / 4 ** (1 / 3)  # lambda V^(1/3) = 2


def exact_chi(p):
    return exact_observables(CYCLE4, p).chi, 0.0


def cycle4_root():
    # chi(p) - 2 = -1 + 2p + 2p^2 + 2p^3 - 3p^4
    roots = np.roots([-3, 2, 2, 2, -1])
    real = roots[np.isreal(roots)].real
    return float(real[(real > 0) & (real < 1)][0])


def test_cycle4_oracle_root():
    res = find_pc(CYCLE4, LAM_C4, chi_fn=exact_chi, p_tol=1e-8)
    assert res.p_c == pytest.approx(0.353, abs=0.005)
    assert abs(res.p_c - cycle4_root()) < 1e-6
    assert res.interval[0] <= res.p_c <= res.interval[1]
    assert res.target == pytest.approx(2.0)


def test_bracketing_invariant():
    res = find_pc(CYCLE4, LAM_C4, chi_fn=exact_chi, p_tol=1e-6)
    lo_chi, hi_chi = 1.0, float(CYCLE4.V)
    for p, chi, se in res.evaluations[:-1]:
        assert lo_chi - 2 * se <= res.target <= hi_chi + 2 * se
        if chi < res.target:
            lo_chi = chi
        else:
            hi_chi = chi


def test_domain_errors():
    with pytest.raises(DomainError):
        find_pc(CYCLE4, 0.5 / 4 ** (1 / 3))
    with pytest.raises(DomainError):
        find_pc(CYCLE4, 4.0)  # target >= V
    with pytest.raises(DomainError):
        find_pc(ham(2, 8), 0.5, mc_budget=999)
    with pytest.raises(DomainError):
        window_scan(ham(2, 6), 0.5, [np.inf], 1000, 0, p_c=0.1)


def test_mc_solver_properties():
    s = ham(2, 8)
    a = find_pc(s, 0.5, 1000, seed=4)
    b = find_pc(s, 1.0, 1000, seed=4)
    assert b.p_c > a.p_c
    again = find_pc(s, 0.5, 1000, seed=4)
    assert again.evaluations == a.evaluations and again.p_c == a.p_c
    for res in (a, b):
        assert abs(res.chi_at_pc - res.target) <= 0.05 * res.target


def test_pc_asymptotics():
    s = ham(2, 14)
    res = ThresholdResult(1.07 / 14, (0.07, 0.08), 6.3, 0.1, [], 0.25, 0.25 * s.V ** (1 / 3))
    out = pc_asymptotics_check(res, s, c1=1.0, c2=1.0)
    assert out["pOmega"] == pytest.approx(1.07) and out["dev"] == pytest.approx(0.07)
    assert out["within"] and out["applicable"]
    c4 = find_pc(CYCLE4, LAM_C4, chi_fn=exact_chi, p_tol=1e-8)
    out = pc_asymptotics_check(c4, CYCLE4)
    assert out["pOmega"] == pytest.approx(0.706, abs=0.01) and not out["applicable"]


def test_complete_graph_limit():
    devs = []
    for N in (16, 64, 216):
        s = ham(N, 1)
        res = find_pc(s, 1.0, 1000, seed=1)
        devs.append(pc_asymptotics_check(res, s)["dev"])
    assert devs[0] > devs[1] > devs[2]


def test_window_scan():
    s = ham(2, 10)
    lam = 2.0  # large enough that p_c - eps0 / Omega stays positive
    pc = find_pc(s, lam, 2000, seed=3)
    eps0 = 10 / (lam * s.V ** (1 / 3))
    rows = window_scan(s, lam, [1.0, 0.0, -eps0, -50.0], 2000, 3, p_c=pc)
    assert [r.epsilon for r in rows] == sorted(r.epsilon for r in rows)
    by = {r.epsilon: r for r in rows}
    assert abs(by[0.0].chi - pc.target) <= max(2 * by[0.0].chi_se, 0.02 * pc.target) + 1e-12
    assert not by[-eps0].clamped
    assert 1 / (2 * eps0) <= by[-eps0].chi <= 2 / eps0
    assert by[1.0].cmax <= 21 * s.V + 7 * s.V ** (2 / 3)
    assert by[-50.0].clamped and by[-50.0].p == 0.0 and by[-50.0].chi == 1.0
    assert "2" in by[1.0].tail


def test_default_epsilons():
    s = ham(2, 12)
    eps = default_epsilons(s, 0.25)
    assert eps == sorted(eps) and 0.0 in eps and -1.0 in eps and 1.0 in eps
    assert len(eps) == 9
    assert max(abs(e) for e in eps if abs(e) != 1) == pytest.approx(4 * s.V ** (-1 / 3) / 0.5)
