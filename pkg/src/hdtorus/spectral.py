"""Fourier analysis on the dual torus.

The transform convention is ``f_hat(k) = sum_x f(x) exp(i k.x)`` with inverse
``f(x) = V**-1 sum_k f_hat(k) exp(-i k.x)``.  Dual vertex ``k`` carries the same
mixed-radix index as the vertex whose coordinates are its frequency numbers
``j`` (``k_j = 2 pi j / r``), so index 0 is ``k = 0`` and dual addition is the
same index arithmetic as vertex addition.  Components are reported in the
centred range ``(-pi, pi]``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionError, DomainError, SingularityError, UnsupportedFamilyError
from .torus import Family, TorusSpec, step_distribution

SINGULAR_TOL = 1e-14
_IMAG_TOL = 1e-9
_MU_SLACK = 1e-12


def _check_len(f, spec):
    f = np.asarray(f)
    if f.shape != (spec.V,):
        raise DimensionError(f"field has shape {f.shape}, expected ({spec.V},)")
    return f


def dft(f, spec: TorusSpec, real=True):
    """Fourier transform of a field on the torus.

    Parameters
    ----------
    f : (V,) array
        Values in vertex-index order.
    spec : TorusSpec
    real : bool
        Return the real part, checking that the imaginary residue is
        negligible (true for every symmetric field).  Pass ``False`` for a
        general complex transform.
    """
    f = _check_len(f, spec)
    F = np.fft.ifftn(f.reshape(spec.shape)).ravel() * spec.V
    if not real:
        return F
    if __debug__:
        scale = max(1.0, float(np.max(np.abs(F.real), initial=0.0)))
        resid = float(np.max(np.abs(F.imag), initial=0.0))
        assert resid <= _IMAG_TOL * scale, f"imaginary residue {resid:.3g}; field not symmetric?"
    return F.real.copy()


def idft(F, spec: TorusSpec, real=True):
    F = _check_len(F, spec)
    f = np.fft.fftn(F.reshape(spec.shape)).ravel() / spec.V
    if not real:
        return f
    if __debug__:
        scale = max(1.0, float(np.max(np.abs(f.real), initial=0.0)))
        resid = float(np.max(np.abs(f.imag), initial=0.0))
        assert resid <= _IMAG_TOL * scale, f"imaginary residue {resid:.3g}"
    return f.real.copy()


def convolve(f, g, spec: TorusSpec, *more):
    """``(f * g * ...)(x)`` computed as a pointwise product of transforms."""
    F = dft(f, spec, real=False) * dft(g, spec, real=False)
    for h in more:
        F = F * dft(h, spec, real=False)
    out = np.fft.fftn(F.reshape(spec.shape)).ravel() / spec.V
    return out.real.copy()


def convolve_direct(f, g, spec: TorusSpec):
    """Position-space convolution ``sum_y f(y) g(x - y)``; O(V^2), for checks."""
    f = _check_len(np.asarray(f, float), spec)
    g = _check_len(np.asarray(g, float), spec)
    V = spec.V
    x = np.arange(V)
    out = np.zeros(V)
    for y in np.flatnonzero(f):
        out += f[y] * g[spec.sub(x, y)]
    return out


def centred(j, r):
    """Map frequency numbers in ``[0, r)`` to ``{-floor((r-1)/2), ..., ceil((r-1)/2)}``."""
    j = np.asarray(j) % r
    return np.where(j <= math.ceil((r - 1) / 2), j, j - r)


def dual_points(spec: TorusSpec) -> np.ndarray:
    """Dual torus points ``k`` in ``(-pi, pi]^n``, shape ``(V, n)``."""
    return 2 * np.pi / spec.r * centred(spec.coords(np.arange(spec.V)), spec.r)


def dual_index(spec: TorusSpec, k) -> int:
    """Index of the dual vertex with components ``k`` (any representative mod 2 pi)."""
    j = np.rint(np.asarray(k, float) * spec.r / (2 * np.pi)).astype(np.int64)
    return int(spec.index(j))


def nonzero_count(spec: TorusSpec) -> np.ndarray:
    """``m(k)``: number of non-zero components of each dual vertex."""
    return np.rint(_axis_sum(spec, (np.arange(spec.r) != 0).astype(float))).astype(np.int64)


def k_norm2(spec: TorusSpec) -> np.ndarray:
    """``|k|^2`` of each dual vertex, with components taken in ``(-pi, pi]``."""
    c = 2 * np.pi / spec.r * centred(np.arange(spec.r), spec.r)
    one_d = c ** 2
    return _axis_sum(spec, one_d)


def _axis_sum(spec, one_d):
    # sum_j g(k_j) over the n coordinates, built by broadcasting along axes
    out = np.zeros(spec.shape)
    for axis in range(spec.n):
        shape = [1] * spec.n
        shape[axis] = spec.r
        out = out + one_d.reshape(shape)
    return out.ravel()


def _axis_prod(spec, one_d):
    out = np.ones(spec.shape)
    for axis in range(spec.n):
        shape = [1] * spec.n
        shape[axis] = spec.r
        out = out * one_d.reshape(shape)
    return out.ravel()


def dhat_closed_form(spec: TorusSpec, k=None):
    """Closed-form ``D_hat(k)`` for the Hamming and nearest-neighbour tori.

    With ``k`` omitted the whole dual torus is returned in index order.
    """
    if spec.family is Family.SPREAD_OUT:
        raise UnsupportedFamilyError("spread-out torus has no closed form for D_hat; use dft")
    n, r = spec.n, spec.r
    if k is not None:
        k = np.asarray(k, float)
        if spec.family is Family.HAMMING:
            m = np.count_nonzero(~np.isclose(np.cos(k), 1.0, atol=1e-12, rtol=0))
            return 1.0 - r / (r - 1) * m / n
        return float(np.mean(np.cos(k)))
    if spec.family is Family.HAMMING:
        return 1.0 - r / (r - 1) * nonzero_count(spec) / n
    c = np.cos(2 * np.pi * np.arange(r) / r)
    return _axis_sum(spec, c) / n


def dhat(spec: TorusSpec) -> np.ndarray:
    """``D_hat`` on the whole dual torus.

    The spread-out step distribution is (ball indicator - delta) / Omega and
    the ball is a product of 1-d intervals, so its transform is a product of
    1-d transforms; this is the exact DFT without forming an r**n FFT.
    """
    if spec.family is not Family.SPREAD_OUT:
        return dhat_closed_form(spec)
    s = np.arange(-spec.L, spec.L + 1)
    one_d = np.cos(np.outer(2 * np.pi * np.arange(spec.r) / spec.r, s)).sum(axis=1)
    return (_axis_prod(spec, one_d) - 1.0) / spec.omega


def _mu_omega(spec, mu):
    mw = float(mu) * spec.omega
    if mw < 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    if mw > 1 + _MU_SLACK:
        raise DomainError(f"mu * Omega = {mw} exceeds 1")
    return min(mw, 1.0)


def rw_two_point(spec: TorusSpec, mu, k):
    """Random-walk two-point function ``1 / (1 - mu Omega D_hat(k))`` at one dual vertex.

    ``k`` is either a dual index (int) or a vector of components.
    """
    if np.ndim(k) == 0:
        idx = int(k)
    else:
        idx = dual_index(spec, k)
    d = _dhat_at(spec, idx)
    denom = 1.0 - float(mu) * spec.omega * d
    if abs(denom) < SINGULAR_TOL:
        raise SingularityError(f"1 - mu Omega D_hat(k) vanishes at dual index {idx}", k=idx)
    return 1.0 / denom


def _dhat_at(spec, idx):
    k = 2 * np.pi / spec.r * spec.coords(idx)
    if spec.family is not Family.SPREAD_OUT:
        return dhat_closed_form(spec, k)
    s = np.arange(-spec.L, spec.L + 1)
    return (np.prod(np.cos(np.outer(k, s)).sum(axis=1)) - 1.0) / spec.omega


def rw_two_point_field(spec: TorusSpec, mu, D_hat=None, exclude_origin=False):
    """``C_hat_mu(k)`` for every dual vertex.

    With ``exclude_origin`` the k = 0 entry is set to ``nan`` instead of
    being evaluated (it is infinite at ``mu Omega = 1``).
    """
    D_hat = dhat(spec) if D_hat is None else D_hat
    denom = 1.0 - float(mu) * spec.omega * D_hat
    check = denom[1:] if exclude_origin else denom
    bad = np.flatnonzero(np.abs(check) < SINGULAR_TOL)
    if bad.size:
        idx = int(bad[0]) + (1 if exclude_origin else 0)
        raise SingularityError(f"1 - mu Omega D_hat(k) vanishes at dual index {idx}", k=idx)
    with np.errstate(divide="ignore"):
        C = 1.0 / denom
    if exclude_origin:
        C[0] = np.nan
    return C


@dataclass(frozen=True)
class TriangleSums:
    mu_omega: float
    beta_sup: float
    beta_triangle: float
    open_triangle: float

    @property
    def consequence_ok(self):
        return self.open_triangle <= 1 + 6 * self.beta_triangle

    def to_dict(self):
        d = asdict(self)
        d["consequence_ok"] = bool(self.consequence_ok)
        return d


def rw_triangle_sums(spec: TorusSpec, mu, D_hat=None) -> TriangleSums:
    """Random-walk triangle sums over ``k != 0``.

    ``beta_triangle = V^-1 sum_{k != 0} D_hat^2 / (1 - mu Omega D_hat)^3`` and
    ``open_triangle`` is the same sum without the ``D_hat^2`` weight.
    """
    mw = _mu_omega(spec, mu)
    D_hat = dhat(spec) if D_hat is None else D_hat
    d = D_hat[1:]
    denom = 1.0 - mw * d
    if d.size and np.min(np.abs(denom)) < SINGULAR_TOL:
        raise SingularityError("singular random-walk denominator at k != 0")
    inv3 = denom ** -3.0
    V = spec.V
    return TriangleSums(
        mu_omega=mw,
        beta_sup=1.0 / spec.omega,
        beta_triangle=float(np.sum(d * d * inv3) / V),
        open_triangle=float(np.sum(inv3) / V),
    )


def infrared_lower_bound(spec: TorusSpec) -> np.ndarray:
    """The family's lower bound on ``1 - D_hat(k)`` (entry 0 is 0)."""
    if spec.family is Family.HAMMING:
        return nonzero_count(spec) / spec.n
    k2 = k_norm2(spec)
    if spec.family is Family.NEAREST_NEIGHBOR:
        return 2 / np.pi ** 2 * k2 / spec.n
    return np.minimum(1.0, spec.L ** 2 * k2)


@dataclass(frozen=True)
class InfraredMargin:
    margin: float
    argmin: int

    def to_dict(self):
        return asdict(self)


def infrared_margin(spec: TorusSpec, D_hat=None) -> InfraredMargin:
    """``min_{k != 0} (1 - D_hat(k)) / lowerbound(k)``.

    For the spread-out torus this is the empirical ``eta`` of its infrared
    bound; for the other two families it is at least 1.
    """
    D_hat = dhat(spec) if D_hat is None else D_hat
    if spec.V == 1:
        return InfraredMargin(math.inf, 0)
    ratio = (1.0 - D_hat[1:]) / infrared_lower_bound(spec)[1:]
    i = int(np.argmin(ratio))
    return InfraredMargin(float(ratio[i]), i + 1)


@dataclass(frozen=True)
class ReturnProbability:
    i: int
    lhs: float
    bound: float

    @property
    def ok(self):
        return self.lhs <= self.bound

    def to_dict(self):
        d = asdict(self)
        d["ok"] = bool(self.ok)
        return d


def return_probability_check(spec: TorusSpec, i: int) -> ReturnProbability:
    """Compare the 2i-step return probability with ``e 2^i i^(2i) / Omega^i``."""
    if spec.family is not Family.NEAREST_NEIGHBOR or spec.r < 3:
        raise UnsupportedFamilyError("return-probability bound is for the nearest-neighbour torus with r >= 3")
    if i < 1:
        raise DomainError("i must be >= 1")
    D_hat = dhat(spec)
    lhs = float(np.sum(D_hat ** (2 * i)) / spec.V)
    bound = math.e * 2 ** i * float(i) ** (2 * i) / spec.omega ** i
    return ReturnProbability(i, lhs, bound)


def parseval_gap(f, g, spec: TorusSpec) -> float:
    """``sum_x f g - V^-1 sum_k f_hat g_hat`` for real symmetric ``f``, ``g``."""
    lhs = float(np.dot(f, g))
    rhs = float(np.dot(dft(f, spec), dft(g, spec)) / spec.V)
    return lhs - rhs


def dhat_via_dft(spec: TorusSpec) -> np.ndarray:
    return dft(step_distribution(spec), spec)
