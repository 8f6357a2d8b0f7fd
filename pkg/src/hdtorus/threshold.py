"""Critical threshold ``chi(p_c) = lambda V^(1/3)`` and scaling-window scans."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bootstrap import DEFAULT_LAMBDA
from .errors import DomainError
from .percolation import estimate_cluster_stats
from .torus import Family, TorusSpec

MIN_BUDGET = 1000
DEFAULT_TAIL_KS = (2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)


@dataclass
class ThresholdResult:
    p_c: float
    interval: tuple
    chi_at_pc: float
    chi_stderr: float
    evaluations: list
    lam: float
    target: float
    reason: str = ""
    samples: int = 0
    seed: int = 0

    def to_dict(self):
        return {
            "p_c": self.p_c,
            "interval": list(self.interval),
            "chi_at_pc": self.chi_at_pc,
            "chi_stderr": self.chi_stderr,
            "lambda": self.lam,
            "target": self.target,
            "reason": self.reason,
            "samples": self.samples,
            "seed": self.seed,
            "evaluations": [list(e) for e in self.evaluations],
        }


def target_chi(spec: TorusSpec, lam):
    t = lam * spec.V ** (1 / 3)
    if not 1.0 < t < spec.V:
        raise DomainError(f"target lambda V^(1/3) = {t:.6g} must lie in (1, V = {spec.V})")
    return t


def find_pc(spec: TorusSpec, lam=DEFAULT_LAMBDA, mc_budget=10_000, seed=0, *,
            chi_fn=None, p_tol=None, workers=None, max_iter=200) -> ThresholdResult:
    """Bisection for ``chi(p) = lambda V^(1/3)``.

    Every Monte Carlo evaluation reuses the same per-edge uniforms, so the
    estimated ``chi`` is monotone in ``p``.  A step stops early once the
    target lies within two standard errors of the estimate; otherwise the
    bracket is halved until it is narrower than ``p_tol`` (``1e-5 / Omega``
    by default).

    ``chi_fn(p) -> (chi, stderr)`` replaces the Monte Carlo estimator, e.g.
    with exact enumeration on a tiny graph.
    """
    target = target_chi(spec, lam)
    if chi_fn is None:
        if mc_budget < MIN_BUDGET:
            raise DomainError(f"mc_budget must be >= {MIN_BUDGET} samples per evaluation")

        def chi_fn(p):
            st = estimate_cluster_stats(spec, p, mc_budget, seed=seed, workers=workers, tail=False)
            return st.chi, st.chi_stderr

    p_tol = 1e-5 / spec.omega if p_tol is None else float(p_tol)
    lo, hi = 0.0, 1.0
    evals = []
    reason = "bracket"
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        chi, se = chi_fn(mid)
        se = 0.0 if not np.isfinite(se) else float(se)
        evals.append((mid, float(chi), se))
        resid = abs(chi - target)
        if resid <= 2 * se and resid <= max(2 * se, 0.02 * target):
            return ThresholdResult(mid, (lo, hi), float(chi), se, evals, lam, target, "band",
                                   mc_budget, seed)
        if chi < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < p_tol:
            break
    else:
        reason = "max_iter"
    mid = 0.5 * (lo + hi)
    chi, se = chi_fn(mid)
    se = 0.0 if not np.isfinite(se) else float(se)
    evals.append((mid, float(chi), se))
    return ThresholdResult(mid, (lo, hi), float(chi), se, evals, lam, target, reason, mc_budget, seed)


def theory_applicable(spec: TorusSpec) -> bool:
    """Whether the high-dimensional regime is plausible for ``spec``.

    Nearest-neighbour and spread-out tori need ``n >= 7`` (the spread-out
    case formally needs large ``L`` as well).  Hamming graphs always qualify.
    """
    if spec.family is Family.HAMMING:
        return True
    return spec.n >= 7


def pc_asymptotics_check(result: ThresholdResult, spec: TorusSpec, c1=None, c2=None):
    """``p_c Omega`` and its distance from 1, compared with ``c1/Omega + c2/(lambda V^(1/3))``
    when both constants are supplied."""
    pw = result.p_c * spec.omega
    dev = abs(pw - 1.0)
    out = {"pOmega": pw, "dev": dev, "applicable": theory_applicable(spec)}
    if c1 is not None and c2 is not None:
        allowed = c1 / spec.omega + c2 / (result.lam * spec.V ** (1 / 3))
        out["allowed"] = allowed
        out["within"] = bool(dev <= allowed)
    return out


@dataclass
class WindowRow:
    epsilon: float
    p: float
    chi: float
    chi_se: float
    cmax: float
    cmax_se: float
    tail: dict = field(default_factory=dict)
    tail_se: dict = field(default_factory=dict)
    clamped: bool = False

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "p": self.p,
            "chi": self.chi,
            "chi_se": self.chi_se,
            "cmax": self.cmax,
            "cmax_se": self.cmax_se,
            "tail": self.tail,
            "tail_se": self.tail_se,
            "clamped": self.clamped,
        }


def default_epsilons(spec: TorusSpec, lam=DEFAULT_LAMBDA):
    """``{-4, -2, -1, 0, 1, 2, 4} V^(-1/3) / (2 lambda)`` plus ``-1`` and ``+1``."""
    unit = spec.V ** (-1 / 3) / (2 * lam)
    eps = {float(m * unit) for m in (-4, -2, -1, 0, 1, 2, 4)} | {-1.0, 1.0}
    return sorted(eps)


def window_scan(spec: TorusSpec, lam, epsilons, mc_budget, seed, *, p_c=None,
                workers=None, tail_ks=DEFAULT_TAIL_KS):
    """Cluster observables at ``p = p_c + epsilon / Omega`` for each epsilon.

    ``p_c`` is a :class:`ThresholdResult` or a float; when omitted
    :func:`find_pc` runs first with the same budget and seed.  Values of
    ``p`` outside ``[0, 1]`` are clamped and the row is flagged.
    """
    eps = [float(e) for e in epsilons]
    if not all(np.isfinite(eps)):
        raise DomainError("epsilons must be finite")
    if p_c is None:
        p_c = find_pc(spec, lam, mc_budget, seed, workers=workers)
    if isinstance(p_c, ThresholdResult):
        p_c = p_c.p_c
    ks = [k for k in tail_ks if k <= spec.V]
    rows = []
    for e in sorted(eps):
        p = p_c + e / spec.omega
        clamped = not 0.0 <= p <= 1.0
        p = min(1.0, max(0.0, p))
        st = estimate_cluster_stats(spec, p, mc_budget, seed=seed, workers=workers, tail=True)
        rows.append(WindowRow(
            e, p, st.chi, st.chi_stderr, st.cmax_mean, st.cmax_stderr,
            {str(k): float(st.tail[k]) for k in ks},
            {str(k): float(st.tail_stderr[k]) for k in ks},
            clamped,
        ))
    return rows
