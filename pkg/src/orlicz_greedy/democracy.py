"""Normalised bricks 1~_Gamma, the shade/light decomposition and empirical
democracy functions.

A family Gamma is a set of (DyadicCube, species) slots.  Set arithmetic is
done on the distinct cubes of Gamma, at the resolution of the finest cube.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .greedy import ResidualEngine
from .orlicz_norms import fast_norm
from .wavelets import WaveletExpansion, atom_norm, slot_table
from .weights import (
    DomainExhausted,
    DyadicCube,
    DyadicGrid,
    DyadicWeight,
    TauOutOfRange,
    select_disjoint_cubes,
)
from .young import YoungFunction, dilation

__all__ = [
    "CubeFamily",
    "Decomposition",
    "decompose",
    "BrickNorm",
    "brick_expansion",
    "brick_norm",
    "square_at",
    "linearized_square",
    "disjoint_modular",
    "tau_grid",
    "extremal_tau",
    "democracy_families",
    "ProbeRow",
    "democracy_probe",
    "GENERATORS",
]

GENERATORS = ("a", "b", "c")
TAU_POINTS = 32


class GridTooSmall(ValueError):
    """The grid cannot hold a family of the requested size."""


@dataclass(frozen=True)
class CubeFamily:
    """A finite set of (cube, species) slots on a grid."""

    grid: DyadicGrid
    members: tuple

    def __post_init__(self):
        seen = []
        for m in self.members:
            Q, l = m if isinstance(m, tuple) and isinstance(m[0], DyadicCube) else (m, 1)
            self.grid.check_cube(Q, max_level=self.grid.J - 1)
            if not 1 <= l <= 2**self.grid.d - 1:
                raise ValueError(f"species {l} out of range for d={self.grid.d}")
            seen.append((Q, int(l)))
        if len(set(seen)) != len(seen):
            raise ValueError("a family cannot repeat a (cube, species) slot")
        object.__setattr__(self, "members", tuple(seen))

    def __len__(self):
        return len(self.members)

    @cached_property
    def cubes(self):
        return tuple(sorted({Q for Q, _ in self.members}))


@dataclass(frozen=True, eq=False)
class Decomposition:
    family: CubeFamily
    level: int
    shade: dict
    light: dict
    gamma_min: tuple
    gamma_lighted: tuple
    gamma_shaded: tuple

    def measure(self, mask):
        """Lebesgue measure of a cell mask at the decomposition level."""
        return int(np.count_nonzero(mask)) * 2.0 ** (-self.level * self.family.grid.d)

    def union_mask(self):
        g = self.family.grid
        out = np.zeros((g.per_axis(self.level),) * g.d, dtype=bool)
        for Q in self.family.cubes:
            out[_slices(Q, self.level)] = True
        return out


def _slices(Q: DyadicCube, level):
    m = 2 ** (level - Q.level)
    return tuple(slice(k * m, (k + 1) * m) for k in Q.index)


def decompose(gamma: CubeFamily) -> Decomposition:
    """Shade(Q): union of the family's cubes strictly inside Q; Light(Q) =
    Q minus Shade(Q).  Gamma_min: cubes with non-empty light.  A cube is
    shaded when |Shade(Q)| > (2^d - 1)/2^d |Q| and lighted otherwise."""
    g = gamma.grid
    cubes = gamma.cubes
    if not cubes:
        raise ValueError("empty family")
    L = max(Q.level for Q in cubes)
    d = g.d
    shade, light = {}, {}
    for Q in cubes:
        m = 2 ** (L - Q.level)
        sh = np.zeros((m,) * d, dtype=bool)
        for R in cubes:
            if R != Q and Q.contains(R):
                rel = DyadicCube(R.level, tuple(r - q * 2 ** (R.level - Q.level) for r, q in zip(R.index, Q.index)))
                sh[_slices(rel, L)] = True
        shade[Q] = sh
        light[Q] = ~sh
    gmin = tuple(Q for Q in cubes if light[Q].any())
    frac = (2**d - 1) / 2**d
    shaded = tuple(Q for Q in cubes if shade[Q].mean() > frac)
    lighted = tuple(Q for Q in cubes if not shade[Q].mean() > frac)
    return Decomposition(gamma, L, shade, light, gmin, lighted, shaded)


# ---- brick norms ------------------------------------------------------------------


@dataclass(frozen=True)
class BrickNorm:
    norm: float
    surrogate: float


def brick_expansion(gamma, W: DyadicWeight, F: YoungFunction, family="haar") -> WaveletExpansion:
    """sum over Gamma of psi_Q / ||psi_Q||."""
    if not isinstance(gamma, CubeFamily):
        gamma = CubeFamily(W.grid, tuple(gamma))
    coeffs = {(Q, l): 1.0 / atom_norm(W, F, Q) for Q, l in gamma.members}
    return WaveletExpansion.from_coefficients(W.grid, coeffs, family=family)


def brick_norm(gamma, W: DyadicWeight, F: YoungFunction) -> BrickNorm:
    """Luxemburg norm of 1~_Gamma and of its square function
    (sum_Gamma chi_Q / phi(w(Q))^2)^(1/2)."""
    if not isinstance(gamma, CubeFamily):
        gamma = CubeFamily(W.grid, tuple(gamma))
    E = brick_expansion(gamma, W, F)
    eng = ResidualEngine(E, W, F, include_scaling=False)
    value = eng.norm([])
    L = eng.res_level
    sq = np.zeros(eng.mass.shape)
    for Q, _ in gamma.members:
        sq[_slices(Q, L)] += 1.0 / float(F.phi(W.mass(Q))) ** 2
    sur = fast_norm(np.sqrt(sq), eng.mass, F)
    return BrickNorm(value, sur)


def _cell_cube(grid, at):
    at = tuple(at) if np.ndim(at) else (int(at),)
    Q = DyadicCube(grid.J, at)
    grid.check_cube(Q)
    return Q


def square_at(gamma: CubeFamily, W, F, at) -> float:
    """S_Gamma at one finest cell."""
    cell = _cell_cube(gamma.grid, at)
    return math.sqrt(
        math.fsum(1.0 / float(F.phi(W.mass(Q))) ** 2 for Q, _ in gamma.members if Q.contains(cell))
    )


def linearized_square(gamma: CubeFamily, W, F, at) -> float:
    """chi_{Q_x}/phi(w(Q_x)) with Q_x the smallest cube of Gamma containing
    the cell, 0 outside the union."""
    cell = _cell_cube(gamma.grid, at)
    inside = [Q for Q in gamma.cubes if Q.contains(cell)]
    if not inside:
        return 0.0
    Qx = max(inside, key=lambda Q: Q.level)
    return 1.0 / float(F.phi(W.mass(Qx)))


def disjoint_modular(cubes, W, F, lam) -> float:
    """sum_j Phi(1 / (lam phi(w(Q_j)))) w(Q_j) for disjoint cubes."""
    m = np.array([W.mass(Q) for Q in cubes])
    return math.fsum((F(1.0 / (lam * F.phi(m))) * m).tolist())


# ---- family generators ------------------------------------------------------------


def tau_grid(W: DyadicWeight, count: int, points=TAU_POINTS):
    """Log-spaced mass levels between the smallest positive cell mass and
    total/count."""
    pos = W.cell_mass[W.cell_mass > 0]
    lo = float(pos.min())
    hi = W.total_mass / count
    if hi <= lo:
        raise GridTooSmall(f"no mass level fits {count} disjoint cubes on this grid")
    return np.logspace(math.log10(lo), math.log10(hi), points)


def _disjoint_at(W, tau, count):
    try:
        return select_disjoint_cubes(W, tau, count, max_level=W.grid.J - 1)
    except (TauOutOfRange, DomainExhausted):
        return None


def extremal_tau(W, F, N, mode="sup", count=None, points=TAU_POINTS):
    """The tau on the grid that maximises (``sup``) or minimises (``inf``)
    phi(N tau)/phi(tau) among those admitting ``count`` disjoint cubes."""
    count = N if count is None else count
    best = None
    for tau in tau_grid(W, count, points):
        cubes = _disjoint_at(W, tau, count)
        if cubes is None:
            continue
        r = float(F.phi(N * tau) / F.phi(tau))
        if best is None or (r > best[0] if mode == "sup" else r < best[0]):
            best = (r, float(tau), cubes)
    if best is None:
        raise GridTooSmall(f"no tau on the grid admits {count} disjoint cubes")
    return best[1], best[2]


def _random_species(rng, d):
    return int(rng.integers(1, 2**d))


def _towers(grid: DyadicGrid, N, rng):
    d = grid.d
    depth = grid.J + grid.M
    for _ in range(100):
        ell = int(rng.integers(1, min(N, depth) + 1))
        k = -(-N // ell)
        r_min = max(-grid.M, math.ceil(math.log2(k) / d) - grid.M) if k > 1 else -grid.M
        if r_min + ell - 1 <= grid.J - 1:
            break
    else:
        raise GridTooSmall(f"no tower layout holds {N} cubes")
    root = int(rng.integers(r_min, grid.J - ell + 1))
    n_root = grid.per_axis(root) ** d
    picks = rng.choice(n_root, size=k, replace=False)
    members = []
    for t, flat in enumerate(picks):
        idx = np.unravel_index(int(flat), (grid.per_axis(root),) * d)
        Q = DyadicCube(root, tuple(int(i) for i in idx))
        length = min(ell, N - len(members))
        for _ in range(length):
            members.append((Q, _random_species(rng, d)))
            ch = Q.children()
            Q = ch[int(rng.integers(len(ch)))]
    return members


def _random_family(grid: DyadicGrid, N, rng):
    d = grid.d
    total = slot_table(grid).size
    if N > total:
        raise GridTooSmall(f"grid has only {total} wavelet slots")
    members = set()
    levels = np.arange(-grid.M, grid.J)
    while len(members) < N:
        j = int(rng.choice(levels))
        n = grid.per_axis(j)
        Q = DyadicCube(j, tuple(int(x) for x in rng.integers(0, n, size=d)))
        members.add((Q, _random_species(rng, d)))
    return sorted(members)


def democracy_families(W, F, N, trials=20, seed=0, generators=GENERATORS):
    """Families of N slots from the three generators, as (gen, members).

    a: disjoint cubes of mass in (C tau, tau] for every feasible tau of the
       32-point tau grid (which includes the extremisers of phi(N tau)/phi(tau));
    b: ``trials`` random towers of nested chains;
    c: ``trials`` uniformly random slots (uniform level, then position).
    Randomness is drawn from ``default_rng([seed, N, generator, trial])``.
    """
    out = []
    for gen in generators:
        if gen == "a":
            try:
                taus = tau_grid(W, N)
            except GridTooSmall:
                taus = []
            for tau in taus:
                cubes = _disjoint_at(W, tau, N)
                if cubes is not None:
                    out.append(("a", [(Q, 1) for Q in cubes]))
        elif gen in ("b", "c"):
            code = 1 if gen == "b" else 2
            for t in range(trials):
                rng = np.random.default_rng([seed, N, code, t])
                fam = _towers(W.grid, N, rng) if gen == "b" else _random_family(W.grid, N, rng)
                out.append((gen, fam))
        else:
            raise ValueError(f"unknown generator {gen!r}")
    if not out:
        raise GridTooSmall(f"no family of {N} cubes could be generated")
    return out


@dataclass(frozen=True)
class ProbeRow:
    N: int
    gen: str
    norm: float
    surrogate: float
    h_minus: float
    h_plus: float


def _threads():
    try:
        return max(1, int(os.environ.get("ORLICZ_GREEDY_THREADS", "1")))
    except ValueError:
        return 1


def democracy_probe(W, F, N_list, trials=20, seed=0, generators=GENERATORS, threads=None):
    """Brick norms of generated families for every N, with h_phi^-(N) and
    h_phi^+(N).  The output order does not depend on the thread count."""
    threads = _threads() if threads is None else threads

    def run(N):
        hm = float(dilation(F, N, "inf"))
        hp = float(dilation(F, N, "sup"))
        rows = []
        for gen, fam in democracy_families(W, F, N, trials, seed, generators):
            b = brick_norm(fam, W, F)
            rows.append(ProbeRow(N, gen, b.norm, b.surrogate, hm, hp))
        return rows

    # fill the dilation cache once, outside the workers
    dilation(F, np.array(N_list, dtype=float), "sup")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            chunks = list(ex.map(run, N_list))
    else:
        chunks = [run(N) for N in N_list]
    return [row for chunk in chunks for row in chunk]
