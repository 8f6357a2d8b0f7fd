"""The torus Z_r^n with its three symmetric edge families.

Vertices are stored as integers in ``[0, V)`` using mixed-radix encoding with
coordinate 0 least significant, so ``index = sum_j x_j * r**j``.  A field on
the torus is a flat ``float64`` array of length ``V`` in that order; reshaping
it to ``(r,) * n`` puts coordinate ``j`` on axis ``n - 1 - j``.

Edges are never stored per vertex for large tori.  The support of the step
distribution (the neighbours of the origin) generates them on demand.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError

_MAX_INDEX = np.iinfo(np.int64).max


class Family(str, enum.Enum):
    NEAREST_NEIGHBOR = "nearest_neighbor"
    HAMMING = "hamming"
    SPREAD_OUT = "spread_out"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "nn": cls.NEAREST_NEIGHBOR,
            "nearestneighbor": cls.NEAREST_NEIGHBOR,
            "nearest_neighbour": cls.NEAREST_NEIGHBOR,
            "ncube": cls.HAMMING,
            "spreadout": cls.SPREAD_OUT,
            "so": cls.SPREAD_OUT,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown torus family {name!r}") from None


@dataclass(frozen=True)
class TorusSpec:
    """Torus family, width ``r``, dimension ``n`` and (spread-out only) range ``L``."""

    family: Family
    r: int
    n: int
    L: int = 1

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        for name in ("r", "n", "L"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.r < 2:
            raise ConfigError(f"r must be >= 2, got {self.r}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.L < 1:
            raise ConfigError(f"L must be >= 1, got {self.L}")
        if self.family is Family.SPREAD_OUT and self.r < 2 * self.L + 1:
            raise ConfigError(
                f"spread-out torus needs r >= 2L+1 (r={self.r}, L={self.L})"
            )
        if self.r ** self.n > _MAX_INDEX:
            raise ConfigError(f"V = {self.r}^{self.n} exceeds the int64 index range")

    @classmethod
    def ncube(cls, n):
        return cls(Family.HAMMING, 2, n)

    @classmethod
    def cycle(cls, r):
        return cls(Family.NEAREST_NEIGHBOR, r, 1)

    @property
    def V(self) -> int:
        return self.r ** self.n

    @property
    def omega(self) -> int:
        """Vertex degree."""
        if self.family is Family.NEAREST_NEIGHBOR:
            return 2 * self.n if self.r >= 3 else self.n
        if self.family is Family.HAMMING:
            return (self.r - 1) * self.n
        return (2 * self.L + 1) ** self.n - 1

    @property
    def shape(self):
        return (self.r,) * self.n

    def to_dict(self):
        d = {"family": self.family.value, "r": self.r, "n": self.n}
        if self.family is Family.SPREAD_OUT:
            d["L"] = self.L
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - {"family", "r", "n", "L"}
        if unknown:
            raise ConfigError(f"unknown spec key(s): {sorted(unknown)}")
        for key in ("family", "r", "n"):
            if key not in d:
                raise ConfigError(f"spec is missing {key!r}")
        family = Family.parse(d["family"])
        if "L" in d and family is not Family.SPREAD_OUT:
            raise ConfigError("L is only meaningful for the spread-out family")
        return cls(family, d["r"], d["n"], d.get("L", 1))

    def __str__(self):
        extra = f", L={self.L}" if self.family is Family.SPREAD_OUT else ""
        return f"{self.family.value}(r={self.r}, n={self.n}{extra})"

    @cached_property
    def _radix(self):
        return self.r ** np.arange(self.n, dtype=np.int64)

    # -- vertex arithmetic ---------------------------------------------------

    def coords(self, index):
        """Coordinates of vertex ``index`` (scalar or array) as ``(..., n)`` ints."""
        index = np.asarray(index, dtype=np.int64)
        return (index[..., None] // self._radix) % self.r

    def index(self, coords):
        coords = np.asarray(coords, dtype=np.int64) % self.r
        if coords.shape[-1] != self.n:
            raise ConfigError(f"expected {self.n} coordinates, got {coords.shape[-1]}")
        return coords @ self._radix

    def add(self, x, y):
        return self.index(self.coords(x) + self.coords(y))

    def sub(self, x, y):
        return self.index(self.coords(x) - self.coords(y))

    def neg(self, x):
        return self.index(-self.coords(x))

    @cached_property
    def negation(self):
        """Permutation ``x -> -x`` over all vertex indices."""
        return self.neg(np.arange(self.V, dtype=np.int64))

    # -- edge set ------------------------------------------------------------

    @cached_property
    def support(self):
        """Sorted indices of the neighbours of the origin (the support of D)."""
        n, r = self.n, self.r
        if self.family is Family.SPREAD_OUT:
            steps = np.array(
                list(itertools.product(range(-self.L, self.L + 1), repeat=n)),
                dtype=np.int64,
            )
            steps = steps[np.any(steps != 0, axis=1)]
        else:
            values = [1, r - 1] if self.family is Family.NEAREST_NEIGHBOR else range(1, r)
            values = sorted(set(values))
            steps = np.zeros((n * len(values), n), dtype=np.int64)
            for j in range(n):
                for s_i, s in enumerate(values):
                    steps[j * len(values) + s_i, j] = s
        support = np.unique(self.index(steps))
        assert support.size == self.omega
        return support


def torus_metric(a, r):
    """Distance on Z_r: ``min(a mod r, r - a mod r)``."""
    a = np.asarray(a) % r
    return np.minimum(a, r - a)


def neighbors(spec: TorusSpec, x) -> np.ndarray:
    """Sorted vertex indices adjacent to ``x``."""
    x = int(x)
    if not 0 <= x < spec.V:
        raise ValueError(f"vertex {x} outside [0, {spec.V})")
    return np.sort(spec.add(x, spec.support))


def step_distribution(spec: TorusSpec) -> np.ndarray:
    """One-step transition probabilities ``D(x) = 1/Omega`` on the neighbours of 0."""
    D = np.zeros(spec.V)
    D[spec.support] = 1.0 / spec.omega
    return D


def verify_symmetry(spec: TorusSpec, D=None) -> bool:
    """Whether the generating set is closed under ``x -> -x``.

    With ``D`` omitted the family's own support is checked.  Translation
    invariance holds by construction since edges are generated from D.
    """
    if D is None:
        support = spec.support
    else:
        D = np.asarray(D, dtype=float)
        if D.shape != (spec.V,):
            raise ValueError(f"D must have {spec.V} entries")
        if D[0] != 0:
            return False
        support = np.flatnonzero(D)
        if not np.allclose(D[support], D[spec.neg(support)]):
            return False
    return set(spec.neg(support).tolist()) == set(support.tolist())


def edge_directions(spec: TorusSpec) -> np.ndarray:
    """One representative ``s`` of each pair ``{s, -s}`` in the support."""
    s = spec.support
    return s[s <= spec.neg(s)]


def edge_list(spec: TorusSpec) -> np.ndarray:
    """All ``V * Omega / 2`` undirected edges as an ``(E, 2)`` array.

    Ordered by (vertex index, direction index).  A self-inverse direction
    (``s == -s``) generates each of its edges from two endpoints, so only the
    copy with the smaller endpoint first is kept.
    """
    dirs = edge_directions(spec)
    self_inverse = dirs == spec.neg(dirs)
    V = spec.V
    v = np.arange(V, dtype=np.int64)
    targets = spec.index(spec.coords(v)[:, None, :] + spec.coords(dirs)[None, :, :])
    keep = np.ones((V, dirs.size), dtype=bool)
    keep[:, self_inverse] = v[:, None] < targets[:, self_inverse]
    src = np.broadcast_to(v[:, None], targets.shape)[keep]
    edges = np.stack([src, targets[keep]], axis=1)
    assert edges.shape[0] * 2 == V * spec.omega
    return edges
