"""Monte Carlo bond percolation on a torus.

Replica ``i`` owns one 64-bit word per edge, read from a single Philox
stream keyed by ``SeedSequence(seed)`` at counter offset ``i * ceil(E / 4)``
(Philox is counter based, so any worker can jump straight to replica ``i``).
Configurations at different ``p`` are coupled: edge ``e`` is occupied at
``p`` iff ``u_e < p`` with ``u_e = (word >> 11) * 2**-53``.

Estimators are translation-averaged.  For each sample, every ordered pair
``(x, y)`` in a common cluster contributes to displacement ``y - x``, which
gives ``tau`` from ``sum |C|^2`` pairs per sample instead of one.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DomainError
from .torus import TorusSpec, edge_list

BATCH = 64


# -- kernels -------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _occupied(words, threshold):
    occ = np.empty(words.size, dtype=np.bool_)
    for e in range(words.size):
        occ[e] = (words[e] >> np.uint64(11)) < threshold
    return occ


@njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _components(V, eu, ev, mask):
    """Label vertices by cluster; returns (labels in [0, nc), sizes)."""
    parent = np.arange(V)
    size = np.ones(V, dtype=np.int64)
    for e in range(eu.size):
        if not mask[e]:
            continue
        a = _find(parent, eu[e])
        b = _find(parent, ev[e])
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
    labels = np.full(V, -1, dtype=np.int64)
    sizes = np.zeros(V, dtype=np.int64)
    nc = 0
    for v in range(V):
        root = _find(parent, v)
        if labels[root] == -1:
            labels[root] = nc
            nc += 1
        labels[v] = labels[root]
        sizes[labels[v]] += 1
    return labels, sizes[:nc]


@njit(cache=True, nogil=True)
def _pair_displacements(labels, sizes, coords, radix, r, out):
    """Add 1 to ``out[y - x]`` for every ordered pair ``x, y`` sharing a label."""
    V = labels.size
    nc = sizes.size
    start = np.zeros(nc + 1, dtype=np.int64)
    for c in range(nc):
        start[c + 1] = start[c] + sizes[c]
    fill = start[:-1].copy()
    members = np.empty(V, dtype=np.int64)
    for v in range(V):
        members[fill[labels[v]]] = v
        fill[labels[v]] += 1
    n = coords.shape[1]
    for c in range(nc):
        lo = start[c]
        hi = start[c + 1]
        if hi - lo == 1:
            out[0] += 1.0
            continue
        for a in range(lo, hi):
            x = members[a]
            for b in range(lo, hi):
                y = members[b]
                d = 0
                for j in range(n):
                    t = coords[y, j] - coords[x, j]
                    if t < 0:
                        t += r
                    d += t * radix[j]
                out[d] += 1.0


@njit(cache=True, nogil=True)
def _bridges(V, eu, ev, mask):
    """Bridges of the occupied subgraph by one iterative lowlink DFS."""
    E = eu.size
    deg = np.zeros(V + 1, dtype=np.int64)
    for e in range(E):
        if mask[e]:
            deg[eu[e] + 1] += 1
            deg[ev[e] + 1] += 1
    for v in range(V):
        deg[v + 1] += deg[v]
    offs = deg
    fill = offs[:-1].copy()
    adj = np.empty(offs[V], dtype=np.int64)
    adj_e = np.empty(offs[V], dtype=np.int64)
    for e in range(E):
        if mask[e]:
            a = eu[e]
            b = ev[e]
            adj[fill[a]] = b
            adj_e[fill[a]] = e
            fill[a] += 1
            adj[fill[b]] = a
            adj_e[fill[b]] = e
            fill[b] += 1
    disc = np.full(V, -1, dtype=np.int64)
    low = np.zeros(V, dtype=np.int64)
    pedge = np.full(V, -1, dtype=np.int64)
    it = offs[:-1].copy()
    stack = np.empty(V, dtype=np.int64)
    bridge = np.zeros(E, dtype=np.bool_)
    timer = 0
    for s in range(V):
        if disc[s] != -1 or offs[s + 1] == offs[s]:
            continue
        disc[s] = timer
        low[s] = timer
        timer += 1
        sp = 0
        stack[sp] = s
        sp += 1
        while sp > 0:
            v = stack[sp - 1]
            if it[v] < offs[v + 1]:
                j = it[v]
                it[v] += 1
                w = adj[j]
                e = adj_e[j]
                if e == pedge[v]:
                    continue
                if disc[w] == -1:
                    disc[w] = timer
                    low[w] = timer
                    timer += 1
                    pedge[w] = e
                    stack[sp] = w
                    sp += 1
                elif disc[w] < low[v]:
                    low[v] = disc[w]
            else:
                sp -= 1
                if sp > 0:
                    u = stack[sp - 1]
                    if low[v] < low[u]:
                        low[u] = low[v]
                    if low[v] > disc[u]:
                        bridge[pedge[v]] = True
    return bridge


@njit(cache=True, nogil=True)
def _batch_kernel(words, threshold, V, eu, ev, coords, radix, r,
                  want_tau, want_pi0, want_tail, tau, pi0, tail, cmax):
    """Run every replica of a batch; returns (sum of chi, sum of occupied edges)."""
    E = eu.size
    chi = 0.0
    occupied = 0.0
    weight = np.zeros(V + 1)
    for i in range(words.shape[0]):
        mask = _occupied(words[i, :E], threshold)
        occupied += np.count_nonzero(mask)
        labels, sizes = _components(V, eu, ev, mask)
        sq = 0.0
        big = 0
        for c in range(sizes.size):
            sq += sizes[c] * sizes[c]
            if sizes[c] > big:
                big = sizes[c]
        chi += sq / V
        cmax[i] = big
        if want_tail:
            weight[:] = 0.0
            for c in range(sizes.size):
                weight[sizes[c]] += sizes[c]
            acc = 0.0
            for k in range(V, -1, -1):
                acc += weight[k]
                tail[k] += acc / V
        if want_tau:
            _pair_displacements(labels, sizes, coords, radix, r, tau)
        if want_pi0:
            bridge = _bridges(V, eu, ev, mask)
            lab2, sz2 = _components(V, eu, ev, mask & ~bridge)
            _pair_displacements(lab2, sz2, coords, radix, r, pi0)
    return chi, occupied


# -- results -------------------------------------------------------------------


@dataclass
class PercolationSample:
    """One configuration: occupied-edge mask plus cluster labels and sizes."""

    occupied: np.ndarray
    labels: np.ndarray
    sizes: np.ndarray

    def connected(self, x, y):
        return self.labels[x] == self.labels[y]


@dataclass
class TwoPointEstimate:
    tau: np.ndarray
    stderr: np.ndarray
    samples: int
    p: float
    seed: int


@dataclass
class ClusterStats:
    """Cluster-size observables.  ``tail[k]`` estimates P(|C(0)| >= k), k = 0..V."""

    chi: float
    chi_stderr: float
    tail: np.ndarray
    tail_stderr: np.ndarray
    cmax_mean: float
    cmax_stderr: float
    cmax_samples: np.ndarray = field(repr=False)

    def to_dict(self, tail_ks=None):
        V = self.tail.size - 1
        if tail_ks is None:
            tail_ks = sorted({k for k in (1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024) if k <= V})
        return {
            "chi": self.chi,
            "chi_stderr": self.chi_stderr,
            "cmax_mean": self.cmax_mean,
            "cmax_stderr": self.cmax_stderr,
            "tail": {str(k): float(self.tail[k]) for k in tail_ks},
            "tail_stderr": {str(k): float(self.tail_stderr[k]) for k in tail_ks},
        }


@dataclass
class DoubleConnectionEstimate:
    """``prob[x]`` estimates P(0 <=> x); ``pi0 = prob - delta_0``."""

    prob: np.ndarray
    stderr: np.ndarray
    samples: int
    p: float
    seed: int

    @property
    def pi0(self):
        out = self.prob.copy()
        out[0] -= 1.0
        return out


# -- engine --------------------------------------------------------------------


class _Geometry:
    __slots__ = ("spec", "eu", "ev", "coords", "radix")

    def __init__(self, spec):
        edges = edge_list(spec)
        self.spec = spec
        self.eu = np.ascontiguousarray(edges[:, 0])
        self.ev = np.ascontiguousarray(edges[:, 1])
        self.coords = np.ascontiguousarray(spec.coords(np.arange(spec.V)))
        self.radix = spec.r ** np.arange(spec.n, dtype=np.int64)


_GEOMETRY_CACHE: dict = {}


def _geometry(spec):
    g = _GEOMETRY_CACHE.get(spec)
    if g is None:
        if len(_GEOMETRY_CACHE) > 8:
            _GEOMETRY_CACHE.clear()
        g = _GEOMETRY_CACHE[spec] = _Geometry(spec)
    return g


def _blocks(n_edges):
    # Philox4x64 emits four words per counter step
    return -(-int(n_edges) // 4)


def batch_words(seed, first, count, n_edges):
    """Words of replicas ``first .. first + count - 1``, one row per replica."""
    bg = np.random.Philox(np.random.SeedSequence(int(seed)))
    b = _blocks(n_edges)
    if first:
        bg.advance(int(first) * b)
    return bg.random_raw(int(count) * 4 * b).reshape(int(count), 4 * b)[:, :n_edges]


def replica_words(seed, replica, n_edges):
    """The 64-bit words of replica ``replica``; edge e uses word e."""
    return batch_words(seed, replica, 1, n_edges)[0]


def _threshold(p):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    # u < p  <=>  (word >> 11) < ceil(p * 2**53) for the 53-bit integer (word >> 11)
    return np.uint64(min(math.ceil(p * 2.0 ** 53), 2 ** 53 + 1))


def sample_configuration(spec: TorusSpec, p, seed=0, replica=0) -> PercolationSample:
    """Draw one configuration (replica ``replica`` of stream ``seed``)."""
    g = _geometry(spec)
    occ = _occupied(replica_words(seed, replica, g.eu.size), _threshold(p))
    labels, sizes = _components(spec.V, g.eu, g.ev, occ)
    return PercolationSample(occ, labels, sizes)


def _resolve_workers(workers):
    if workers is None:
        workers = int(os.environ.get("HDTORUS_WORKERS", "1") or 1)
    return max(1, int(workers))


def _batch_size(samples):
    if samples >= 16 * BATCH:
        return BATCH
    return max(1, samples // 16)


class _Moments:
    """Mean and stderr from per-batch sums, merged in batch order."""

    def __init__(self, shape=()):
        self.total = np.zeros(shape)
        self.batch_means = []
        self.batch_counts = []

    def add_batch(self, batch_sum, count):
        self.total = self.total + batch_sum
        self.batch_means.append(np.asarray(batch_sum, dtype=float) / count)
        self.batch_counts.append(count)

    def result(self):
        N = sum(self.batch_counts)
        mean = self.total / N
        nb = len(self.batch_counts)
        if nb < 2:
            return mean, np.full(np.shape(mean), np.nan)
        w = np.asarray(self.batch_counts, dtype=float) / N
        dev = np.stack(self.batch_means) - mean
        w = w.reshape((-1,) + (1,) * np.ndim(mean))
        var = np.sum((w * dev) ** 2, axis=0) * nb / (nb - 1)
        return mean, np.sqrt(var)


def _run_batch(spec, p, seed, first, count, want_tau, want_pi0, want_tail):
    g = _geometry(spec)
    V = spec.V
    words = np.ascontiguousarray(batch_words(seed, first, count, g.eu.size))
    out = {
        "cmax": np.zeros(count),
        "tau": np.zeros(V if want_tau else 1),
        "pi0": np.zeros(V if want_pi0 else 1),
        "tail": np.zeros(V + 1 if want_tail else 1),
    }
    out["chi"], out["occupied"] = _batch_kernel(
        words, _threshold(p), V, g.eu, g.ev, g.coords, g.radix, spec.r,
        want_tau, want_pi0, want_tail, out["tau"], out["pi0"], out["tail"], out["cmax"],
    )
    for key, wanted in (("tau", want_tau), ("pi0", want_pi0), ("tail", want_tail)):
        if not wanted:
            out[key] = None
    if want_tau:
        out["tau"] /= V
    if want_pi0:
        out["pi0"] /= V
    return out


def _simulate(spec, p, samples, seed, want_tau, want_pi0, want_tail=True, workers=None):
    if samples < 1:
        raise DomainError("samples must be >= 1")
    p = float(p)
    _threshold(p)
    B = _batch_size(samples)
    starts = list(range(0, samples, B))
    jobs = [(s, min(B, samples - s)) for s in starts]
    run = lambda job: _run_batch(spec, p, seed, job[0], job[1], want_tau, want_pi0, want_tail)
    workers = _resolve_workers(workers)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    V = spec.V
    acc = {
        "chi": _Moments(),
        "cmax": _Moments(),
        "occupied": _Moments(),
        "tau": _Moments(V) if want_tau else None,
        "pi0": _Moments(V) if want_pi0 else None,
        "tail": _Moments(V + 1) if want_tail else None,
    }
    for (_, count), res in zip(jobs, results):
        acc["chi"].add_batch(res["chi"], count)
        acc["cmax"].add_batch(res["cmax"].sum(), count)
        acc["occupied"].add_batch(res["occupied"], count)
        for key in ("tau", "pi0", "tail"):
            if acc[key] is not None:
                acc[key].add_batch(res[key], count)
    cmax_samples = np.concatenate([res["cmax"] for res in results])
    return acc, cmax_samples


def _cluster_stats(acc, cmax_samples, V):
    chi, chi_se = acc["chi"].result()
    cmax, cmax_se = acc["cmax"].result()
    if acc["tail"] is not None:
        tail, tail_se = acc["tail"].result()
    else:
        tail = tail_se = np.full(V + 1, np.nan)
    return ClusterStats(
        chi=float(chi),
        chi_stderr=float(chi_se),
        tail=tail,
        tail_stderr=tail_se,
        cmax_mean=float(cmax),
        cmax_stderr=float(cmax_se),
        cmax_samples=cmax_samples,
    )


def _symmetrize(field, stderr, spec):
    neg = spec.negation
    return 0.5 * (field + field[neg]), np.sqrt(0.5 * (stderr ** 2 + stderr[neg] ** 2))


def estimate_cluster_stats(spec: TorusSpec, p, samples, seed=0, workers=None, tail=True) -> ClusterStats:
    """chi, E|C_max| and the cluster-size tail without the two-point function."""
    acc, cmax_samples = _simulate(spec, p, samples, seed, False, False, tail, workers)
    return _cluster_stats(acc, cmax_samples, spec.V)


def estimate_observables(spec: TorusSpec, p, samples, seed=0, workers=None):
    """Estimate the two-point function and cluster statistics at ``p``.

    Returns
    -------
    (TwoPointEstimate, ClusterStats)
        ``tau`` is symmetrised over ``x -> -x`` and has ``tau[0] == 1``.
        ``sum(tau)`` equals ``chi`` up to rounding because both count the
        same ordered pairs.
    """
    acc, cmax_samples = _simulate(spec, p, samples, seed, True, False, True, workers)
    tau, tau_se = acc["tau"].result()
    tau, tau_se = _symmetrize(tau, np.nan_to_num(tau_se), spec)
    tau[0] = 1.0
    tau_se[0] = 0.0
    est = TwoPointEstimate(np.clip(tau, 0.0, 1.0), tau_se, samples, float(p), int(seed))
    return est, _cluster_stats(acc, cmax_samples, spec.V)


def estimate_double_connection(spec: TorusSpec, p, samples, seed=0, workers=None) -> DoubleConnectionEstimate:
    """Estimate P(0 <=> x): two bond-disjoint occupied paths.

    Two vertices are doubly connected iff no bridge of the occupied subgraph
    separates them, i.e. iff they lie in one 2-edge-connected component.
    Those components are the clusters left after deleting every bridge.
    """
    acc, _ = _simulate(spec, p, samples, seed, False, True, False, workers)
    prob, se = acc["pi0"].result()
    prob, se = _symmetrize(prob, np.nan_to_num(se), spec)
    prob[0] = 1.0
    se[0] = 0.0
    return DoubleConnectionEstimate(prob, se, samples, float(p), int(seed))


def mean_occupied_edges(spec: TorusSpec, p, samples, seed=0):
    acc, _ = _simulate(spec, p, samples, seed, False, False, False)
    return acc["occupied"].result()
