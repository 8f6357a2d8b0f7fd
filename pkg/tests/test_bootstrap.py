import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdtorus.bootstrap import (
    bootstrap_f,
    chain_rule_residual,
    cosine_split_bound,
    d_minus,
    d_plus,
    discrete_calc,
    extract_pi_hat,
    laplacian,
    mu_of_p,
    tau_asymptotics_check,
    tau_hat_from_pi,
)
from hdtorus.diagrams import cos_kx
from hdtorus.errors import DomainError, SingularityError
from hdtorus.oracle import exact_observables
from hdtorus.spectral import dft, dhat, dual_index, rw_two_point_field
from hdtorus.torus import TorusSpec

from conftest import ham, nn, so, symmetric_field

CYCLE4 = TorusSpec.cycle(4)


def random_g_hat(spec, rng, radius=0.5):
    g = symmetric_field(spec, rng) - 0.5
    g_hat = dft(g, spec)
    return radius * 0.99 * g_hat / np.abs(g_hat).max()


def test_extract_examples(rng):
    s = ham(2, 5)
    assert np.allclose(extract_pi_hat(np.ones(s.V), 0.0, s), 0.0)
    th = 1 + rng.random(s.V)
    pi = extract_pi_hat(th, 0.13, s)
    assert np.abs(tau_hat_from_pi(pi, 0.13, s) - th).max() < 1e-12
    th = dft(np.array([1, 9 / 16, 7 / 16, 9 / 16]), CYCLE4)
    k = dual_index(CYCLE4, [np.pi])
    assert th[k] == pytest.approx(5 / 16)
    assert extract_pi_hat(th, 0.5, CYCLE4)[k] == pytest.approx(-6 / 11, abs=1e-14)


def test_extract_singular():
    s = CYCLE4
    th = np.array([1.0, 1.0, 1.0, 1.0])  # 1 + p Omega D_hat(pi) tau_hat = 1 - 1 at p = 1/2
    with pytest.raises(SingularityError) as err:
        extract_pi_hat(th, 0.5, s)
    assert err.value.k == 2


def test_mu_examples():
    s = nn(5, 3)  # V = 125, lambda = 1 puts the ceiling at 0.9
    assert mu_of_p(0.0, 0.0, 1.0, s.V, s) == 0.0
    assert mu_of_p(0.1, -1 - 1 / 3, 1.0, s.V, s) == 0.0
    assert mu_of_p(0.25, 0.0, 1.0, s.V, s) * s.omega == pytest.approx(0.9)
    assert mu_of_p(0.1, 0.0, 1.0, s.V, s) * s.omega == pytest.approx(0.6)
    with pytest.raises(DomainError):
        mu_of_p(0.1, 0.0, 0.25, 4, CYCLE4)
    with pytest.raises(DomainError):
        mu_of_p(0.1, 0.0, 0.0, 4, CYCLE4)


@pytest.mark.parametrize("s", [CYCLE4, ham(2, 1), ham(2, 6), ham(4, 2), nn(3, 3), so(5, 2, 1), so(7, 2, 3)], ids=str)
def test_f_at_zero(s):
    lam = 0.25 if 0.25 * s.V ** (1 / 3) > 0.5 else 1.0
    rep = bootstrap_f(np.ones(s.V), 0.0, s, lam)
    assert rep.f == 1.0 and rep.f1 == 0.0 and rep.f3 == 0.0
    assert rep.capped is None and rep.mu == 0.0


def test_f_components():
    s = ham(2, 6)
    rep = bootstrap_f(np.full(s.V, 1.7), 0.7 / 6, s, 1.0)
    assert rep.f1 == pytest.approx(0.7) and rep.f3 == 0.0
    C0 = rw_two_point_field(s, rep.mu)[0]
    assert rep.f2 >= 1.7 / C0
    ceiling = 1 - 0.5 / s.V ** (1 / 3)
    assert 0 <= rep.mu_omega <= ceiling


def test_f_caps():
    s = ham(2, 6)
    th = dft(exact_observables(CYCLE4, 0.5).tau, CYCLE4)
    rep = bootstrap_f(th, 0.5, CYCLE4, 2.0)
    assert rep.capped is None
    big = bootstrap_f(np.full(s.V, 50.0), 0.9 / 6, s, 1.0)
    assert big.capped == "ceiling"


def test_f3_matches_definition():
    s = TorusSpec.cycle(3)
    th = dft(exact_observables(s, 0.4).tau, s)
    rep = bootstrap_f(th, 0.4, s, 2.0)
    C = rw_two_point_field(s, rep.mu)
    D = dhat(s)
    best = 0.0
    for k in range(1, s.V):
        for l in range(s.V):
            lp, lm = s.add(l, k), s.sub(l, k)
            num = abs(th[l] - 0.5 * (th[lm] + th[lp]))
            den = C[lm] * C[l] + C[l] * C[lp] + C[lm] * C[lp]
            best = max(best, num / den / (8 * (1 - D[k])))
    assert rep.f3 == pytest.approx(best, rel=1e-12)


def test_f_continuous_on_oracle():
    h = 1e-4
    for p in (0.1, 0.3, 0.5, 0.7):
        f = [bootstrap_f(dft(exact_observables(CYCLE4, q).tau, CYCLE4), q, CYCLE4, 2.0).f for q in (p, p + h)]
        assert abs(f[1] - f[0]) <= 1e3 * h


def test_discrete_calc_examples(rng):
    s = nn(3, 2)
    const = np.full(s.V, 2.5)
    for k in range(s.V):
        assert np.allclose(laplacian(const, s, k), 0)
    g_hat = random_g_hat(s, rng)
    zero = discrete_calc(g_hat, s, 0)
    assert np.allclose(zero["gcos"], g_hat) and np.allclose(zero["gsin"], 0)
    assert np.allclose(chain_rule_residual(g_hat, s, 0), 0)
    one = discrete_calc(g_hat, s, 4, l=2)
    assert one["laplacian"] == pytest.approx(g_hat[s.add(2, 4)] - 2 * g_hat[2] + g_hat[s.sub(2, 4)])


def test_laplacian_is_cosine_weight(rng):
    for s in (nn(3, 2), ham(2, 4), nn(4, 2)):
        g = symmetric_field(s, rng)
        g_hat = dft(g, s)
        for k in range(s.V):
            assert np.array_equal(laplacian(g_hat, s, k), d_minus(d_plus(g_hat, s, k), s, k))
            rhs = dft((1 - cos_kx(s, k)) * g, s)
            assert np.abs(-0.5 * laplacian(g_hat, s, k) - rhs).max() < 1e-10


def test_chain_rule_identity(rng):
    for s in (nn(3, 2), ham(2, 4)):
        for _ in range(100):
            g_hat = random_g_hat(s, rng)
            for k in range(s.V):
                assert np.abs(chain_rule_residual(g_hat, s, k)).max() < 1e-12
    with pytest.raises(SingularityError):
        chain_rule_residual(np.ones(4), CYCLE4, 1)


def test_cosine_split_examples(rng):
    b = cosine_split_bound(np.zeros(4))
    assert b.lhs == 0 and b.rhs == 0 and b.ok
    b = cosine_split_bound([np.pi])
    assert b.lhs == pytest.approx(2) and b.rhs == pytest.approx(6) and b.ok
    for _ in range(10_000):
        J = int(rng.integers(2, 8))
        assert cosine_split_bound(rng.uniform(-np.pi, np.pi, J)).ok
    with pytest.raises(DomainError):
        cosine_split_bound([])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-np.pi, np.pi), min_size=1, max_size=7))
def test_cosine_split_property(t):
    assert cosine_split_bound(t).ok


def test_tau_asymptotics_examples():
    s = ham(2, 9)
    lam, p_c = 0.25, 0.08
    p = 0.06
    mw = 1 - s.omega * (p_c - p) - 1 / (lam * s.V ** (1 / 3))
    C = rw_two_point_field(s, mw / s.omega)
    chk = tau_asymptotics_check(C, p, p_c, lam, s)
    assert chk.max_dev == pytest.approx(0, abs=1e-12)
    chk = tau_asymptotics_check(C, p_c, p_c, lam, s)
    assert chk.m_p_omega == pytest.approx(1 - 1 / (lam * s.V ** (1 / 3)))
    with pytest.raises(DomainError):
        tau_asymptotics_check(C, 0.09, p_c, lam, s)
    with pytest.raises(DomainError):
        tau_asymptotics_check(C, 0.0, p_c, lam, s)  # m_p Omega < 0
