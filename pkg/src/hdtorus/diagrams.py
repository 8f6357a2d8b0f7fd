"""Triangle-type diagrams built from a two-point field.

All inputs are symmetric fields ``tau`` on the torus (exact or Monte Carlo).
Quantities with two representations (position-space sums and dual-torus
sums) expose both so the pair can be checked against each other.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SizeError
from .spectral import convolve, convolve_direct, dft, dhat, idft, rw_two_point_field
from .torus import TorusSpec, step_distribution

H_EXACT_MAX_V = 256
DUALITY_TOL = 1e-9


@dataclass
class PreparedTau:
    tau: np.ndarray
    negative_modes: int
    min_tau_hat: float


def prepare_tau(tau, spec: TorusSpec) -> PreparedTau:
    """Symmetrise, clamp to [0, 1] and pin ``tau(0) = 1``.

    Negative Fourier modes (possible for noisy estimates) are counted, not
    clamped: clamping in the dual domain would break Parseval.
    """
    tau = np.asarray(tau, dtype=float)
    tau = 0.5 * (tau + tau[spec.negation])
    tau = np.clip(tau, 0.0, 1.0)
    tau[0] = 1.0
    th = dft(tau, spec)
    return PreparedTau(tau, int(np.count_nonzero(th < 0)), float(th.min()))


def tilde_tau(tau, p, spec: TorusSpec):
    """``p Omega (D * tau)``: one occupied step followed by a connection."""
    D = step_distribution(spec)
    return p * spec.omega * convolve(D, tau, spec)


def _k_index(spec, k):
    if np.ndim(k) == 0:
        idx = int(k)
        if not 0 <= idx < spec.V:
            raise DomainError(f"dual index {idx} outside [0, {spec.V})")
        return idx
    j = np.rint(np.asarray(k, float) * spec.r / (2 * np.pi)).astype(np.int64)
    return int(spec.index(j))


def cos_kx(spec: TorusSpec, k):
    """``cos(k . x)`` for every vertex ``x``."""
    j = spec.coords(_k_index(spec, k))
    phase = 2 * np.pi / spec.r * (spec.coords(np.arange(spec.V)) @ j)
    return np.cos(phase)


def weighted_by_cos(f, spec, k):
    """``[1 - cos(k . x)] f(x)``."""
    return (1.0 - cos_kx(spec, k)) * f


# -- triangle ------------------------------------------------------------------


def triangle(tau, spec: TorusSpec):
    """``(tau * tau * tau)(x)`` as ``V^-1 sum_k tau_hat(k)^3 exp(-i k.x)``."""
    return idft(dft(tau, spec) ** 3, spec)


def triangle_direct(tau, spec: TorusSpec):
    return convolve_direct(convolve_direct(tau, tau, spec), tau, spec)


@dataclass
class TriangleCheck:
    ok: bool
    margin: float
    argmin: int
    bound_offdiag: float

    def to_dict(self):
        return {"ok": bool(self.ok), "margin": self.margin, "argmin": self.argmin,
                "bound_offdiag": self.bound_offdiag}


def check_triangle_condition(nabla, beta, chi, V, slack=0.0) -> TriangleCheck:
    """Test ``nabla(x) <= delta_{x,0} + 13 beta + 10 chi^3 / V`` at every x.

    ``slack`` (scalar or per-x array) is added to the right side, e.g. a
    multiple of a propagated standard error.
    """
    nabla = np.asarray(nabla, dtype=float)
    if not np.all(np.isfinite(nabla)) or not np.isfinite(chi) or not beta > 0:
        raise DomainError("triangle check needs finite inputs and beta > 0")
    bound = 13.0 * beta + 10.0 * chi ** 3 / V
    rhs = np.full(nabla.shape, bound) + slack
    rhs[0] += 1.0
    gap = rhs - nabla
    i = int(np.argmin(gap))
    return TriangleCheck(bool(gap[i] >= 0), float(gap[i]), i, float(bound))


def triangle_stderr(tau, tau_stderr, spec: TorusSpec):
    """Linearised standard error of ``tau * tau * tau`` from per-site errors.

    Treats the per-site errors as independent: each of the three factors
    contributes ``(tau * tau) * dtau``.
    """
    tt = convolve(tau, tau, spec)
    var = 9.0 * convolve(tt ** 2, np.asarray(tau_stderr) ** 2, spec)
    return np.sqrt(np.clip(var, 0.0, None))


# -- open triangles ------------------------------------------------------------


@dataclass
class OpenTriangles:
    T_field: np.ndarray
    T: float
    T_argmax: int
    Tprime: float
    Tprime_argmax: int
    T2: float
    S: dict = field(default_factory=dict)


def open_triangles(tau, p, spec: TorusSpec, mu=None, alphas=(0.0, 1.5, 2.0)) -> OpenTriangles:
    """``T_p(x) = (tau * tau * tilde_tau)(x)`` with its maxima and the sums T2, S.

    ``S[alpha] = V^-1 sum_k |D_hat(k)|^alpha C_hat_mu(k)^3`` is evaluated
    only when ``mu`` is given.
    """
    th = dft(tau, spec)
    D_hat = dhat(spec)
    pw = p * spec.omega
    T_field = idft(th * th * pw * D_hat * th, spec)
    nabla = idft(th ** 3, spec)
    i, j = int(np.argmax(T_field)), int(np.argmax(nabla))
    S = {}
    if mu is not None:
        C3 = rw_two_point_field(spec, mu, D_hat) ** 3
        for a in alphas:
            S[float(a)] = float(np.sum(np.abs(D_hat) ** a * C3) / spec.V)
    return OpenTriangles(
        T_field=T_field,
        T=float(T_field[i]),
        T_argmax=i,
        Tprime=float(nabla[j]),
        Tprime_argmax=j,
        T2=float(np.sum(D_hat ** 2 * th ** 3) / spec.V),
        S=S,
    )


def T_field_direct(tau, p, spec: TorusSpec):
    D = step_distribution(spec)
    tt = p * spec.omega * convolve_direct(D, tau, spec)
    return convolve_direct(convolve_direct(tau, tau, spec), tt, spec)


# -- W -------------------------------------------------------------------------


@dataclass
class WResult:
    W_field: np.ndarray
    W0: float
    W: float
    argmax_y: int


def wp(tau, p, spec: TorusSpec, k) -> WResult:
    """``W_p(y; k) = sum_x [1 - cos(k.x)] tilde_tau(x) tau(x + y)`` for all y.

    The sum is the correlation of ``g = [1 - cos(k.x)] tilde_tau`` with tau,
    which for symmetric fields is the convolution ``g * tau``.
    """
    g = weighted_by_cos(tilde_tau(tau, p, spec), spec, k)
    W_field = idft(dft(g, spec) * dft(tau, spec), spec)
    y = int(np.argmax(W_field))
    return WResult(W_field, float(W_field[0]), float(W_field[y]), y)


def wp_direct(tau, p, spec: TorusSpec, k):
    D = step_distribution(spec)
    tt = p * spec.omega * convolve_direct(D, tau, spec)
    g = weighted_by_cos(tt, spec, k)
    x = np.arange(spec.V)
    return np.array([np.dot(g, tau[spec.add(x, y)]) for y in range(spec.V)])


# -- H -------------------------------------------------------------------------


def _diff_table(spec):
    x = np.arange(spec.V)
    return spec.sub(x[None, :], x[:, None])  # [a, b] -> b - a


def h_matrix_position(tau, p, spec: TorusSpec, k):
    """``H_p(a1, a2; k)`` for all ``a1, a2`` from position-space sums.

    Writing out the two B1 factors and the second B2 term,
    ``H = sum_{u,s,t,a,v} [1-cos(k.(t-u))] tilde_tau(s-a1) tau(u) tau(a-s)
    tau(u-a) tau(t-a) tau(t-u) tilde_tau(v+a2-t) tau(v-s)``.  The v sum is
    ``G(s+a2-t)`` with ``G = tau * tilde_tau``; the rest is contracted as
    matrices so the cost is O(V^3).
    """
    V = spec.V
    tau = np.asarray(tau, float)
    tt = tilde_tau(tau, p, spec)
    tau_k = weighted_by_cos(tau, spec, k)
    G = convolve_direct(tau, tt, spec)
    diff = _diff_table(spec)
    T = tau[diff]  # T[x, a] = tau(a - x)
    K = tau_k[diff.T]  # K[t, u] = tau_k(t - u)
    Z = (K * tau[None, :]) @ T  # Z[t, a] = sum_u tau(u) tau_k(t-u) tau(a-u)... (symmetric tau)
    Q = T @ (T * Z).T  # Q[s, t] = sum_a tau(a-s) tau(t-a) Z[t, a]
    x = np.arange(V)
    R = np.empty((V, V))
    for s in range(V):
        # R[s, a2] = sum_t Q[s, t] G(s + a2 - t)
        idx = diff[:, spec.add(s, x)]  # [t, a2] -> (s + a2) - t
        R[s] = Q[s] @ G[idx]
    Tt = tt[diff]  # Tt[a1, s] = tilde_tau(s - a1)
    return Tt @ R


def h_matrix_dual(tau, p, spec: TorusSpec, k):
    """``H_p(a1, a2; k)`` for all ``a1, a2`` from the triple dual sum.

    ``V^-3 (p Omega)^2 sum_{l1,l2,l3} e^{-i l1.a1} e^{-i l2.a2}
    D_hat(l1) tau_hat(l1)^2 D_hat(l2) tau_hat(l2)^2 tau_k_hat(l3)
    tau_hat(l1-l2) tau_hat(l2-l3) tau_hat(l1-l3)``.
    """
    V = spec.V
    th = dft(tau, spec)
    D_hat = dhat(spec)
    tk = dft(weighted_by_cos(np.asarray(tau, float), spec, k), spec)
    diff = _diff_table(spec)
    Th = th[diff]  # Th[l1, l3] = tau_hat(l1 - l3), symmetric
    A = D_hat * th ** 2
    P = (Th * tk[None, :]) @ Th.T  # P[l1, l2] = sum_l3 tau_hat(l1-l3) tk(l3) tau_hat(l2-l3)
    M = np.outer(A, A) * Th * P
    jx = spec.coords(np.arange(V))
    E = np.exp(-2j * np.pi / spec.r * (jx @ jx.T))  # E[a, l]
    H = E @ M @ E.T
    return (p * spec.omega) ** 2 * H.real / V ** 3


@dataclass
class HResult:
    value: float
    argmax: tuple
    position_value: float
    dual_value: float
    mode: str = "exact"


def hp(tau, p, spec: TorusSpec, k, mode="exact", mu=None, surrogate=False) -> HResult:
    """``H_p(k) = max_{a1,a2} H_p(a1, a2; k)`` or its spectral upper bound.

    ``mode="exact"`` evaluates both representations over the full
    ``(a1, a2)`` grid and requires them to agree to 1e-9 (V <= 256).
    ``mode="bound"`` returns ``[1 - D_hat(k)] (S0)^(5/3) (S3/2)^(4/3)`` for
    the supplied ``mu``; with ``surrogate`` the cheaper
    ``(S2)^(3/4) (S0)^(1/4)`` replaces ``S3/2``.
    """
    kidx = _k_index(spec, k)
    if mode == "bound":
        if mu is None:
            raise DomainError("bound mode needs mu")
        D_hat = dhat(spec)
        C3 = rw_two_point_field(spec, mu, D_hat) ** 3
        S0 = float(np.sum(C3) / spec.V)
        if surrogate:
            S2 = float(np.sum(D_hat ** 2 * C3) / spec.V)
            S32 = S2 ** 0.75 * S0 ** 0.25
        else:
            S32 = float(np.sum(np.abs(D_hat) ** 1.5 * C3) / spec.V)
        val = (1.0 - D_hat[kidx]) * S0 ** (5 / 3) * S32 ** (4 / 3)
        return HResult(float(val), (), np.nan, np.nan, mode="bound")
    if mode != "exact":
        raise DomainError(f"unknown H mode {mode!r}")
    if spec.V > H_EXACT_MAX_V:
        raise SizeError(f"exact H needs V <= {H_EXACT_MAX_V} (V = {spec.V}); use mode='bound'")
    Hpos = h_matrix_position(tau, p, spec, kidx)
    Hdual = h_matrix_dual(tau, p, spec, kidx)
    scale = max(1.0, float(np.max(np.abs(Hpos))))
    gap = float(np.max(np.abs(Hpos - Hdual)))
    if gap > DUALITY_TOL * scale:
        raise AssertionError(f"H position/dual mismatch {gap:.3g}")
    a1, a2 = np.unravel_index(int(np.argmax(Hpos)), Hpos.shape)
    return HResult(float(Hpos[a1, a2]), (int(a1), int(a2)), float(Hpos[a1, a2]), float(Hdual[a1, a2]))


# -- bounds on the expansion coefficients -------------------------------------


@dataclass
class PiBound:
    N: int
    sum_bound: float
    cos_bound: float
    cos_bound_general: float
    cos_bound_alt: float = np.nan


def pi_bound_eval(N, T, Tprime, W, W0, H, p, spec: TorusSpec) -> PiBound:
    """Diagrammatic upper bounds on ``sum_x Pi^N(x)`` and its cosine-weighted sum.

    For N = 1 both available cosine bounds are computed and the smaller is
    reported as ``cos_bound``.
    """
    if N < 0:
        raise DomainError("N must be >= 0")
    vals = dict(T=T, Tprime=Tprime, W=W, W0=W0, H=H, p=p)
    for name, v in vals.items():
        if v is None or not np.isfinite(v) or v < 0:
            raise DomainError(f"{name} must be finite and non-negative, got {v}")
    if N == 0:
        return PiBound(0, float(T), float(W0), float(W0))
    pw = p * spec.omega
    loop = 2.0 * T * Tprime
    sum_bound = Tprime * loop ** N
    first = Tprime * W * (2 * T + (1 + pw) * N * Tprime) * loop ** (N - 1)
    second = 0.0
    if N >= 2:
        second = (N - 1) * (T ** 2 * W + H) * Tprime ** 2 * loop ** (N - 2)
    general = (4 * N + 3) * (first + second)
    if N == 1:
        alt = W0 + 31.0 * T * Tprime * W
        return PiBound(1, float(sum_bound), float(min(general, alt)), float(general), float(alt))
    return PiBound(N, float(sum_bound), float(general), float(general))


def remainder_bound(M, T, Tprime, p, spec: TorusSpec, chi):
    """``sum_x |R_M(x)| <= (bound on sum_x Pi^M) * p Omega * chi``.

    For M >= 1 this decays geometrically in M whenever ``2 T T' < 1``.
    """
    b = pi_bound_eval(M, T, Tprime, 0.0, 0.0, 0.0, p, spec)
    return b.sum_bound * p * spec.omega * chi


# -- report --------------------------------------------------------------------


@dataclass
class DiagramReport:
    p: float
    nabla: np.ndarray
    nabla_max_offdiag: float
    nabla_argmax_offdiag: int
    T_field: np.ndarray
    T: float
    T_argmax: int
    Tprime: float
    T2: float
    S: dict
    W: dict
    W0: dict
    W_argmax: dict
    H: dict
    pi_bounds: list
    negative_modes: int = 0

    def to_dict(self):
        return {
            "p": self.p,
            "nabla0": float(self.nabla[0]),
            "nabla_max_offdiag": self.nabla_max_offdiag,
            "nabla_argmax_offdiag": self.nabla_argmax_offdiag,
            "T": self.T,
            "T_argmax": self.T_argmax,
            "Tprime": self.Tprime,
            "T2": self.T2,
            "S": {str(a): v for a, v in self.S.items()},
            "W": {str(k): v for k, v in self.W.items()},
            "W0": {str(k): v for k, v in self.W0.items()},
            "W_argmax": {str(k): v for k, v in self.W_argmax.items()},
            "H": {str(k): v for k, v in self.H.items()},
            "pi_bounds": [b.__dict__ for b in self.pi_bounds],
            "negative_modes": self.negative_modes,
        }


def diagram_report(tau, p, spec: TorusSpec, ks=None, mu=None, max_N=3, h_mode=None) -> DiagramReport:
    """Evaluate every diagram quantity at ``p``.

    ``ks`` are dual indices (default: up to 8 evenly spaced non-zero ones).
    H is exact for V <= 64, a bound (needs ``mu``) otherwise, or skipped.
    """
    prep = prepare_tau(tau, spec)
    tau = prep.tau
    V = spec.V
    if ks is None:
        ks = sorted(set(np.linspace(1, V - 1, min(8, V - 1)).astype(int).tolist())) if V > 1 else []
    ot = open_triangles(tau, p, spec, mu=mu)
    nabla = triangle(tau, spec)
    off = nabla.copy()
    off[0] = -np.inf
    j = int(np.argmax(off)) if V > 1 else 0
    if h_mode is None:
        h_mode = "exact" if V <= 64 else ("bound" if mu is not None else "skip")
    Wd, W0d, Wa, Hd = {}, {}, {}, {}
    for k in ks:
        w = wp(tau, p, spec, k)
        Wd[int(k)], W0d[int(k)], Wa[int(k)] = w.W, w.W0, w.argmax_y
        if h_mode != "skip":
            Hd[int(k)] = hp(tau, p, spec, k, mode=h_mode, mu=mu).value
    bounds = []
    kref = ks[0] if ks else None
    for N in range(max_N + 1):
        W = Wd.get(kref, 0.0)
        W0 = W0d.get(kref, 0.0)
        H = Hd.get(kref, 0.0)
        bounds.append(pi_bound_eval(N, ot.T, ot.Tprime, W, W0, H, p, spec))
    return DiagramReport(
        p=float(p),
        nabla=nabla,
        nabla_max_offdiag=float(off[j]) if V > 1 else float("nan"),
        nabla_argmax_offdiag=j,
        T_field=ot.T_field,
        T=ot.T,
        T_argmax=ot.T_argmax,
        Tprime=ot.Tprime,
        T2=ot.T2,
        S=ot.S,
        W=Wd,
        W0=W0d,
        W_argmax=Wa,
        H=Hd,
        pi_bounds=bounds,
        negative_modes=prep.negative_modes,
    )
