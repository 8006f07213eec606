"""Haar and periodised Daubechies wavelets on a dyadic grid.

Coefficients are stored level by level, ``details[i]`` holding level
``-M + i`` with shape ``(L,) + (n_j,) * d`` where ``L = 2**d - 1`` species and
``n_j = 2**(j + M)``.  The root scaling coefficient is kept separately.  A
flat "slot" view orders coefficients by (level, index, species), which is
also the deterministic tie-break used by the greedy ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .weights import DyadicCube, DyadicGrid, DyadicWeight, read_grid_file
from .young import YoungFunction

__all__ = [
    "GridFunction",
    "WaveletExpansion",
    "SlotTable",
    "slot_table",
    "daubechies_filter",
    "analyze",
    "synthesize",
    "square_function",
    "square_function_grid",
    "atom_norm",
    "atom_norms",
    "atom",
    "make_function",
]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Piecewise-constant function: one real value per finest cell."""

    grid: DyadicGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values have shape {v.shape}, grid needs {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", v)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other):
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - other.values)

    def l2_norm_sq(self):
        return math.fsum((self.values**2).ravel()) * self.grid.cell_volume


# ---- filters --------------------------------------------------------------


@lru_cache(maxsize=None)
def daubechies_filter(N: int) -> np.ndarray:
    """Low-pass filter of the orthonormal Daubechies wavelet with N vanishing
    moments (length 2N, sum sqrt(2)); N = 1 is Haar."""
    if not 1 <= N <= 20:
        raise ValueError("Daubechies order must lie in 1..20")
    if N == 1:
        c = 1 / math.sqrt(2)
        return np.array([c, c])
    # spectral factorisation of P(y) = sum_k C(N-1+k, k) y^k, y = sin^2(w/2)
    P = [math.comb(N - 1 + k, k) for k in range(N)][::-1]
    yroots = np.roots(P)
    q = np.poly1d([1.0])
    for y in yroots:
        part = 2 * np.sqrt(y * (y - 1))
        const = 1 - 2 * y
        z = const + part
        if abs(z) > 1:
            z = const - part
        q = q * np.poly1d([1.0, -z])
    h = (np.poly1d([1.0, 1.0]) ** N * np.real(q)).c[::-1]
    h = h / h.sum() * math.sqrt(2)
    return np.asarray(h, dtype=float)


def _family_filter(family: str):
    if family == "haar":
        return daubechies_filter(1)
    kind, _, order = family.partition(":")
    if kind == "daubechies" and order.isdigit():
        return daubechies_filter(int(order))
    raise ValueError(f"unsupported wavelet family {family!r}")


def _analysis_1d(a, h, axis):
    """One periodised analysis step along ``axis``: returns (low, high)."""
    a = np.moveaxis(a, axis, 0)
    n = a.shape[0]
    L = len(h)
    g = np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])
    k2 = np.arange(0, n, 2)
    low = np.zeros((n // 2,) + a.shape[1:])
    high = np.zeros_like(low)
    for t in range(L):
        src = a[(k2 + t) % n]
        low += h[t] * src
        high += g[t] * src
    return np.moveaxis(low, 0, axis), np.moveaxis(high, 0, axis)


def _synthesis_1d(low, high, h, axis):
    low = np.moveaxis(low, axis, 0)
    high = np.moveaxis(high, axis, 0)
    m = low.shape[0]
    n = 2 * m
    L = len(h)
    g = np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])
    out = np.zeros((n,) + low.shape[1:])
    k2 = np.arange(0, n, 2)
    for t in range(L):
        np.add.at(out, (k2 + t) % n, h[t] * low + g[t] * high)
    return np.moveaxis(out, 0, axis)


# ---- expansions -------------------------------------------------------------


@dataclass(frozen=True)
class SlotTable:
    """Flat enumeration of all wavelet slots of a grid, in tie-break order."""

    level: np.ndarray
    index: np.ndarray
    species: np.ndarray
    volume: np.ndarray
    offsets: tuple

    @property
    def size(self):
        return self.level.size

    def cube(self, k) -> DyadicCube:
        return DyadicCube(int(self.level[k]), tuple(self.index[k]))


@lru_cache(maxsize=32)
def slot_table(grid: DyadicGrid) -> SlotTable:
    d = grid.d
    L = 2**d - 1
    levels, idx, spec, vol, offsets = [], [], [], [], [0]
    for j in range(-grid.M, grid.J):
        n = grid.per_axis(j)
        grids = np.meshgrid(*([np.arange(n)] * d), indexing="ij")
        cells = np.stack([g.ravel() for g in grids], axis=1)
        count = cells.shape[0] * L
        levels.append(np.full(count, j))
        idx.append(np.repeat(cells, L, axis=0))
        spec.append(np.tile(np.arange(1, L + 1), cells.shape[0]))
        vol.append(np.full(count, 2.0 ** (-j * d)))
        offsets.append(offsets[-1] + count)
    table = SlotTable(
        np.concatenate(levels),
        np.concatenate(idx),
        np.concatenate(spec),
        np.concatenate(vol),
        tuple(offsets),
    )
    for a in (table.level, table.index, table.species, table.volume):
        a.setflags(write=False)
    return table


@dataclass(frozen=True, eq=False)
class WaveletExpansion:
    grid: DyadicGrid
    family: str
    scaling: float
    details: tuple

    @classmethod
    def zeros(cls, grid: DyadicGrid, family="haar"):
        L = 2**grid.d - 1
        det = tuple(np.zeros((L,) + (grid.per_axis(j),) * grid.d) for j in range(-grid.M, grid.J))
        return cls(grid, family, 0.0, det)

    @classmethod
    def from_flat(cls, grid: DyadicGrid, values, scaling=0.0, family="haar"):
        values = np.asarray(values, dtype=float)
        tab = slot_table(grid)
        if values.shape != (tab.size,):
            raise ValueError(f"expected {tab.size} coefficients, got {values.shape}")
        L = 2**grid.d - 1
        det = []
        for i, j in enumerate(range(-grid.M, grid.J)):
            n = grid.per_axis(j)
            block = values[tab.offsets[i] : tab.offsets[i + 1]].reshape((n,) * grid.d + (L,))
            det.append(np.moveaxis(block, -1, 0).copy())
        return cls(grid, family, float(scaling), tuple(det))

    @classmethod
    def from_coefficients(cls, grid: DyadicGrid, coeffs: dict, scaling=0.0, family="haar"):
        """Build from ``{(DyadicCube, species): value}``; species defaults to 1."""
        E = cls.zeros(grid, family)
        for key, val in coeffs.items():
            Q, l = key if isinstance(key, tuple) else (key, 1)
            grid.check_cube(Q, max_level=grid.J - 1)
            E.details[Q.level + grid.M][(l - 1,) + Q.index] = val
        return WaveletExpansion(grid, family, float(scaling), E.details)

    def flat(self) -> np.ndarray:
        return np.concatenate([np.moveaxis(a, 0, -1).ravel() for a in self.details])

    def with_flat(self, values, scaling=None):
        return WaveletExpansion.from_flat(
            self.grid, values, self.scaling if scaling is None else scaling, self.family
        )

    def coefficient(self, Q: DyadicCube, species=1) -> float:
        self.grid.check_cube(Q, max_level=self.grid.J - 1)
        return float(self.details[Q.level + self.grid.M][(species - 1,) + Q.index])

    def items(self):
        """Nonzero coefficients as ``((DyadicCube, species), value)`` pairs."""
        tab = slot_table(self.grid)
        vals = self.flat()
        for k in np.flatnonzero(vals):
            yield (tab.cube(k), int(tab.species[k])), float(vals[k])

    def nonzero_count(self):
        return int(np.count_nonzero(self.flat()))

    def scale(self, c):
        return WaveletExpansion(self.grid, self.family, self.scaling * c, tuple(a * c for a in self.details))


def analyze(f: GridFunction, family="haar") -> WaveletExpansion:
    """Orthonormal wavelet coefficients of f on levels -M .. J-1.

    Daubechies families are periodised on the domain ``[0, 2**M)**d``.
    """
    h = _family_filter(family)
    g = f.grid
    d = g.d
    a = f.values * math.sqrt(g.cell_volume)
    details = []
    for _ in range(g.J + g.M):
        if d == 1:
            a, hi = _analysis_1d(a, h, 0)
            details.append(hi[None, :])
        else:
            lo0, hi0 = _analysis_1d(a, h, 0)
            ll, lh = _analysis_1d(lo0, h, 1)
            hl, hh = _analysis_1d(hi0, h, 1)
            a = ll
            details.append(np.stack([hl, lh, hh]))
    details.reverse()
    return WaveletExpansion(g, family, float(a.ravel()[0]), tuple(details))


def synthesize(E: WaveletExpansion) -> GridFunction:
    """Inverse of :func:`analyze` (exact for the orthonormal transforms)."""
    h = _family_filter(E.family)
    g = E.grid
    a = np.full((1,) * g.d, E.scaling)
    for det in E.details:
        if g.d == 1:
            a = _synthesis_1d(a, det[0], h, 0)
        else:
            lo0 = _synthesis_1d(a, det[1], h, 1)
            hi0 = _synthesis_1d(det[0], det[2], h, 1)
            a = _synthesis_1d(lo0, hi0, h, 0)
    return GridFunction(g, a / math.sqrt(g.cell_volume))


def atom(grid: DyadicGrid, Q: DyadicCube, species=1, family="haar") -> GridFunction:
    """The wavelet psi_Q^species sampled on the grid."""
    return synthesize(WaveletExpansion.from_coefficients(grid, {(Q, species): 1.0}, family=family))


def square_function_grid(E: WaveletExpansion) -> np.ndarray:
    """(sum_Q sum_l s_{Q,l}^2 chi_Q / |Q|)^(1/2) on every finest cell."""
    g = E.grid
    acc = np.zeros(g.shape)
    for i, det in enumerate(E.details):
        j = i - g.M
        level_sq = (det**2).sum(axis=0) * 2.0 ** (j * g.d)
        rep = 2 ** (g.J - j)
        for ax in range(g.d):
            level_sq = np.repeat(level_sq, rep, axis=ax)
        acc += level_sq
    return np.sqrt(acc)


def square_function(E: WaveletExpansion, at) -> float:
    """Square function at one finest cell (index tuple), by walking its tower."""
    g = E.grid
    cell = DyadicCube(g.J, tuple(at) if np.ndim(at) else (int(at),))
    g.check_cube(cell)
    total = 0.0
    for j in range(-g.M, g.J):
        Q = cell.ancestor(j)
        det = E.details[j + g.M]
        sq = sum(float(det[(l,) + Q.index]) ** 2 for l in range(det.shape[0]))
        total += sq / Q.volume
    return math.sqrt(total)


def atom_norm(W: DyadicWeight, F: YoungFunction, Q: DyadicCube) -> float:
    """Square-function size of psi_Q in L^Phi(w): phi(w(Q)) / |Q|^(1/2).

    For Haar atoms |psi_Q| = |Q|^(-1/2) chi_Q, so this is the exact
    Luxemburg norm.
    """
    m = W.mass(Q)
    if m <= 0:
        raise ValueError(f"cube {Q} has zero weight; its atom has no finite normalisation")
    return float(F.phi(m)) / math.sqrt(Q.volume)


def atom_norms(W: DyadicWeight, F: YoungFunction) -> np.ndarray:
    """:func:`atom_norm` for every slot of ``W.grid`` in flat order."""
    g = W.grid
    L = 2**g.d - 1
    masses = np.concatenate([np.repeat(W.level_masses(j).ravel(), L) for j in range(-g.M, g.J)])
    out = np.full(masses.shape, np.inf)
    pos = masses > 0
    out[pos] = F.phi(masses[pos]) / np.sqrt(slot_table(g).volume[pos])
    return out


# ---- generators -------------------------------------------------------------


def make_function(spec: str, grid: DyadicGrid) -> GridFunction:
    """``random:seed=..``, ``bump``, ``sawtooth``, ``example`` or ``file:<path>``."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    X = grid.cell_centers()
    size = 2.0**grid.M
    if kind == "random":
        opts = dict(p.split("=", 1) for p in rest.split(",") if p.strip())
        rng = np.random.default_rng(int(opts.get("seed", 0)))
        return GridFunction(grid, rng.standard_normal(grid.shape))
    if kind == "bump":
        r2 = sum(((x - size / 2) / (size / 2)) ** 2 for x in X)
        with np.errstate(divide="ignore", over="ignore"):
            v = np.where(r2 < 1, np.exp(-1.0 / (1.0 - np.minimum(r2, 1 - 1e-300))), 0.0)
        return GridFunction(grid, v)
    if kind == "sawtooth":
        return GridFunction(grid, np.mod(X[0], 1.0) - 0.5)
    if kind == "example":
        from importlib.resources import files

        path = files("orlicz_greedy").joinpath("data/example.grid")
        g, v = read_grid_file(path)
        if g != grid:
            raise ValueError(f"bundled example lives on grid {g}, not {grid}")
        return GridFunction(g, v)
    if kind == "file":
        g, v = read_grid_file(rest)
        if g != grid:
            raise ValueError(f"function file grid {g} does not match {grid}")
        return GridFunction(g, v)
    raise ValueError(f"unknown function generator {kind!r}")
