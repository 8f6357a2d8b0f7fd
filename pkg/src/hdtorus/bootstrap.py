"""Bootstrap functions, discrete calculus on the dual torus, and the
comparison of ``tau_hat`` with a random-walk two-point function."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .spectral import SINGULAR_TOL, dft, dhat, rw_two_point_field
from .torus import TorusSpec

DEFAULT_LAMBDA = 0.25
F3_EXHAUSTIVE_MAX_V = 4096
F3_RANDOM_PAIRS = 1_000_000


# -- Pi_hat and mu ---------------------------------------------------------------


def extract_pi_hat(tau_hat, p, spec: TorusSpec, D_hat=None):
    """Invert ``tau_hat = (1 + Pi) / (1 - p Omega D_hat (1 + Pi))`` for ``Pi_hat``."""
    D_hat = dhat(spec) if D_hat is None else D_hat
    tau_hat = np.asarray(tau_hat, dtype=float)
    denom = 1.0 + p * spec.omega * D_hat * tau_hat
    bad = np.flatnonzero(np.abs(denom) < SINGULAR_TOL)
    if bad.size:
        raise SingularityError(f"1 + p Omega D_hat tau_hat vanishes at dual index {bad[0]}", k=int(bad[0]))
    return tau_hat / denom - 1.0


def tau_hat_from_pi(pi_hat, p, spec: TorusSpec, D_hat=None):
    D_hat = dhat(spec) if D_hat is None else D_hat
    one = 1.0 + np.asarray(pi_hat, dtype=float)
    return one / (1.0 - p * spec.omega * D_hat * one)


def mu_ceiling(lam, V):
    """``1 - lambda^-1 V^-1/3 / 2``: the largest admissible ``mu Omega``."""
    if lam <= 0 or V < 1:
        raise DomainError("need lambda > 0 and V >= 1")
    c = 1.0 - 0.5 / (lam * V ** (1 / 3))
    if c < 0:
        raise DomainError(f"lambda V^(1/3) = {lam * V ** (1 / 3):.3g} is too small: mu ceiling {c:.3g} < 0")
    return c


def _mu_omega(p, pi_hat0, lam, V, spec):
    ceiling = mu_ceiling(lam, V)
    raw = p * spec.omega * (1.0 + pi_hat0)
    if raw <= 0:
        return 0.0, "floor" if raw < 0 else None
    if raw >= ceiling:
        return ceiling, "ceiling"
    return raw, None


def mu_of_p(p, pi_hat0, lam, V, spec: TorusSpec) -> float:
    """``mu`` with ``mu Omega = min(ceiling, (p Omega [1 + Pi_hat(0)])^+)``."""
    return _mu_omega(p, pi_hat0, lam, V, spec)[0] / spec.omega


# -- discrete calculus -----------------------------------------------------------


def _shift(spec, k, sign):
    """Index map ``l -> l + sign * k`` over the whole dual torus."""
    l = np.arange(spec.V)
    kc = spec.coords(int(k))
    return spec.index(spec.coords(l) + sign * kc)


def d_plus(g_hat, spec, k):
    g_hat = np.asarray(g_hat)
    return g_hat[_shift(spec, k, +1)] - g_hat


def d_minus(g_hat, spec, k):
    g_hat = np.asarray(g_hat)
    return g_hat - g_hat[_shift(spec, k, -1)]


def laplacian(g_hat, spec, k):
    """``Delta_k g_hat = d_minus d_plus g_hat``."""
    return d_minus(d_plus(g_hat, spec, k), spec, k)


def g_cos(g_hat, spec, k):
    g_hat = np.asarray(g_hat)
    return 0.5 * (g_hat[_shift(spec, k, -1)] + g_hat[_shift(spec, k, +1)])


def g_sin(g_hat, spec, k):
    g_hat = np.asarray(g_hat)
    return 0.5 * (g_hat[_shift(spec, k, -1)] - g_hat[_shift(spec, k, +1)])


def discrete_calc(g_hat, spec: TorusSpec, k, l=None):
    """Forward/backward differences, Laplacian and cos/sin splittings along ``k``.

    Values are arrays over ``l`` unless a single dual index ``l`` is given.
    """
    out = {
        "forward": d_plus(g_hat, spec, k),
        "backward": d_minus(g_hat, spec, k),
        "laplacian": laplacian(g_hat, spec, k),
        "gcos": g_cos(g_hat, spec, k),
        "gsin": g_sin(g_hat, spec, k),
    }
    if l is not None:
        out = {key: float(v[int(l)]) for key, v in out.items()}
    return out


def chain_rule_residual(g_hat, spec: TorusSpec, k):
    """Residual over all ``l`` of the discrete chain rule for ``G = 1/(1 - g)``.

    ``-Delta_k G / 2 = (G(l-k) + G(l+k)) G(l) (g(l) - gcos) / 2
    - G(l-k) G(l) G(l+k) gsin^2``.
    """
    g_hat = np.asarray(g_hat, dtype=float)
    denom = 1.0 - g_hat
    if np.min(np.abs(denom)) < SINGULAR_TOL:
        raise SingularityError("1 - g_hat vanishes")
    G = 1.0 / denom
    minus, plus = _shift(spec, k, -1), _shift(spec, k, +1)
    lhs = -0.5 * laplacian(G, spec, k)
    gc = g_cos(g_hat, spec, k)
    gs = g_sin(g_hat, spec, k)
    rhs = 0.5 * (G[minus] + G[plus]) * G * (g_hat - gc) - G[minus] * G * G[plus] * gs ** 2
    return lhs - rhs


@dataclass(frozen=True)
class CosineSplit:
    lhs: float
    rhs: float

    @property
    def ok(self):
        return self.lhs <= self.rhs + 1e-12


def cosine_split_bound(t) -> CosineSplit:
    """``1 - cos(sum t_j) <= (2J + 1) sum_j [1 - cos t_j]``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size < 1:
        raise DomainError("need at least one angle")
    return CosineSplit(float(1.0 - np.cos(t.sum())), float((2 * t.size + 1) * np.sum(1.0 - np.cos(t))))


# -- bootstrap functions ---------------------------------------------------------


@dataclass
class BootstrapReport:
    p: float
    mu: float
    mu_omega: float
    pi_hat0: float
    f1: float
    f2: float
    f2_argmax: int
    f3: float
    f3_argmax: tuple
    f3_exhaustive: bool
    capped: str | None
    f_stderr: float = np.nan
    ratio_profile: np.ndarray | None = None
    ratio_max_dev: float | None = None

    @property
    def f(self):
        return max(self.f1, self.f2, self.f3)

    def to_dict(self):
        return {
            "p": self.p,
            "mu": self.mu,
            "mu_omega": self.mu_omega,
            "pi_hat0": self.pi_hat0,
            "f": self.f,
            "f1": self.f1,
            "f2": self.f2,
            "f2_argmax": self.f2_argmax,
            "f3": self.f3,
            "f3_argmax": list(self.f3_argmax),
            "f3_exhaustive": self.f3_exhaustive,
            "capped": self.capped,
            "f_stderr": None if not np.isfinite(self.f_stderr) else self.f_stderr,
            "f_le_3": bool(self.f <= 3),
            "ratio_max_dev": self.ratio_max_dev,
        }


def _f3_terms(th, C, C_rw, spec, k, l_idx, coords, radix):
    kc = coords[k]
    lc = coords[l_idx]
    plus = ((lc + kc) % spec.r) @ radix
    minus = ((lc - kc) % spec.r) @ radix
    num = np.abs(th[l_idx] - 0.5 * (th[minus] + th[plus]))
    den = C[minus] * C[l_idx] + C[l_idx] * C[plus] + C[minus] * C[plus]
    return C_rw[k] / 8.0 * num / den


def _f3(th, C, C_rw, spec, rng_seed=0):
    V = spec.V
    coords = spec.coords(np.arange(V))
    radix = spec.r ** np.arange(spec.n, dtype=np.int64)
    best, arg = 0.0, (1, 0) if V > 1 else (0, 0)
    if V <= F3_EXHAUSTIVE_MAX_V:
        l_all = np.arange(V)
        for k in range(1, V):
            vals = _f3_terms(th, C, C_rw, spec, k, l_all, coords, radix)
            i = int(np.argmax(vals))
            if vals[i] > best:
                best, arg = float(vals[i]), (k, i)
        return best, arg, True
    # l in {0} and multiples of k for every k, then random (k, l) pairs
    for k in range(1, V):
        mult = (np.arange(spec.r)[:, None] * coords[k][None, :]) % spec.r @ radix
        l_idx = np.unique(np.concatenate([[0], mult]))
        vals = _f3_terms(th, C, C_rw, spec, k, l_idx, coords, radix)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), (k, int(l_idx[i]))
    rng = np.random.default_rng(rng_seed)
    ks = rng.integers(1, V, F3_RANDOM_PAIRS)
    ls = rng.integers(0, V, F3_RANDOM_PAIRS)
    for start in range(0, F3_RANDOM_PAIRS, 1 << 16):
        kk = ks[start:start + (1 << 16)]
        ll = ls[start:start + (1 << 16)]
        plus = ((coords[ll] + coords[kk]) % spec.r) @ radix
        minus = ((coords[ll] - coords[kk]) % spec.r) @ radix
        num = np.abs(th[ll] - 0.5 * (th[minus] + th[plus]))
        den = C[minus] * C[ll] + C[ll] * C[plus] + C[minus] * C[plus]
        vals = C_rw[kk] / 8.0 * num / den
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), (int(kk[i]), int(ll[i]))
    return best, arg, False


def bootstrap_f(tau_hat, p, spec: TorusSpec, lam=DEFAULT_LAMBDA, tau_stderr=None, p_c=None) -> BootstrapReport:
    """Evaluate ``f1 = p Omega``, ``f2 = max_k tau_hat / C_hat_mu`` and ``f3``.

    ``mu`` comes from ``Pi_hat(0)`` extracted from ``tau_hat``.  When
    ``tau_stderr`` (per-site standard errors of tau) is given, a linearised
    standard error of ``f`` at its maximiser is attached.  When ``p_c`` is
    given the ratio profile against ``C_hat_{m_p}`` is attached as well.
    """
    V = spec.V
    if V < 2:
        raise DomainError("bootstrap functions need V >= 2")
    th = np.asarray(tau_hat, dtype=float)
    D_hat = dhat(spec)
    pi0 = float(extract_pi_hat(th[:1], p, spec, D_hat[:1])[0])
    mw, capped = _mu_omega(p, pi0, lam, V, spec)
    mu = mw / spec.omega
    C = rw_two_point_field(spec, mu, D_hat)
    ratio = th / C
    k2 = int(np.argmax(ratio))
    f2 = float(ratio[k2])
    C_rw = rw_two_point_field(spec, 1.0 / spec.omega, D_hat, exclude_origin=True)
    f3, arg3, exhaustive = _f3(th, C, C_rw, spec)
    f1 = float(p * spec.omega)
    rep = BootstrapReport(
        p=float(p), mu=mu, mu_omega=mw, pi_hat0=pi0, f1=f1, f2=f2, f2_argmax=k2,
        f3=f3, f3_argmax=arg3, f3_exhaustive=exhaustive, capped=capped,
    )
    if tau_stderr is not None:
        rep.f_stderr = _f_stderr(rep, np.asarray(tau_stderr, float), C, C_rw, spec)
    if p_c is not None:
        chk = tau_asymptotics_check(th, p, p_c, lam, spec)
        rep.ratio_profile = chk.profile
        rep.ratio_max_dev = chk.max_dev
    return rep


def _f_stderr(rep, sigma, C, C_rw, spec):
    """Standard error of the largest of f2, f3 from independent per-site errors.

    ``f1`` is exact.  The dependence of ``mu`` on ``tau_hat(0)`` is ignored.
    """
    from .diagrams import cos_kx

    var = sigma ** 2
    if rep.f2 >= rep.f3:
        c = cos_kx(spec, rep.f2_argmax)
        return float(np.sqrt(np.sum(var * c ** 2)) / C[rep.f2_argmax]) if rep.f2 > rep.f1 else 0.0
    k, l = rep.f3_argmax
    w = (1.0 - cos_kx(spec, k)) * cos_kx(spec, l)
    plus = _shift(spec, k, +1)[l]
    minus = _shift(spec, k, -1)[l]
    den = C[minus] * C[l] + C[l] * C[plus] + C[minus] * C[plus]
    se = C_rw[k] / 8.0 * np.sqrt(np.sum(var * w ** 2)) / den
    return float(se) if rep.f3 > rep.f1 else 0.0


# -- comparison with the random walk at m_p --------------------------------------


@dataclass
class AsymptoticsCheck:
    m_p: float
    m_p_omega: float
    max_dev: float
    argmax: int
    profile: np.ndarray


def tau_asymptotics_check(tau_hat, p, p_c, lam, spec: TorusSpec, V=None) -> AsymptoticsCheck:
    """``max_k |tau_hat(k) / C_hat_{m_p}(k) - 1|`` with
    ``m_p Omega = 1 - Omega (p_c - p) - lambda^-1 V^-1/3``."""
    V = spec.V if V is None else V
    if p > p_c:
        raise DomainError(f"p = {p} exceeds p_c = {p_c}")
    mw = 1.0 - spec.omega * (p_c - p) - 1.0 / (lam * V ** (1 / 3))
    if mw >= 1.0 or mw < 0.0:
        raise DomainError(f"m_p Omega = {mw:.6g} outside [0, 1)")
    C = rw_two_point_field(spec, mw / spec.omega)
    profile = np.asarray(tau_hat, dtype=float) / C
    dev = np.abs(profile - 1.0)
    i = int(np.argmax(dev))
    return AsymptoticsCheck(mw / spec.omega, mw, float(dev[i]), i, profile)


def tau_hat_of(tau, spec):
    return dft(tau, spec)
