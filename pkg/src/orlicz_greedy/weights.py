"""Dyadic cubes and piecewise-constant weights on a finite dyadic grid.

The domain is ``[0, 2**M)**d`` split into cells of side ``2**-J``.  A weight
is stored as the exact mass of every finest cell; the masses of all coarser
dyadic cubes are aggregated once into a pyramid, so ``w(Q)`` is a lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "DyadicCube",
    "DyadicGrid",
    "DyadicWeight",
    "Regularity",
    "TowerReport",
    "TauOutOfRange",
    "DomainExhausted",
    "weight_of_cube",
    "ap_constant",
    "tower_limits",
    "crossing_cubes",
    "select_disjoint_cubes",
    "coarsen",
    "parse_weight",
    "read_grid_file",
    "write_grid_file",
]


class TauOutOfRange(ValueError):
    """The requested mass level cannot be bracketed on this grid."""


class DomainExhausted(RuntimeError):
    """Fewer disjoint cubes exist than were requested.

    ``found`` holds the cubes that were found.
    """

    def __init__(self, message, found):
        super().__init__(message)
        self.found = found


@dataclass(frozen=True, order=True)
class DyadicCube:
    """The cube ``2**-level * ([0, 1)**d + index)``."""

    level: int
    index: tuple

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(int(k) for k in self.index))

    @property
    def d(self):
        return len(self.index)

    @property
    def side(self):
        return 2.0 ** (-self.level)

    @property
    def volume(self):
        return 2.0 ** (-self.level * self.d)

    def parent(self):
        return DyadicCube(self.level - 1, tuple(k >> 1 for k in self.index))

    def children(self):
        d = self.d
        out = []
        for bits in range(2**d):
            off = tuple((bits >> (d - 1 - a)) & 1 for a in range(d))
            out.append(DyadicCube(self.level + 1, tuple(2 * k + o for k, o in zip(self.index, off))))
        return out

    def ancestor(self, level):
        if level > self.level:
            raise ValueError("ancestor level must not exceed the cube level")
        shift = self.level - level
        return DyadicCube(level, tuple(k >> shift for k in self.index))

    def contains(self, other: "DyadicCube") -> bool:
        return other.level >= self.level and other.ancestor(self.level) == self

    def disjoint(self, other: "DyadicCube") -> bool:
        return not (self.contains(other) or other.contains(self))

    def corner(self):
        return tuple(k * self.side for k in self.index)


@dataclass(frozen=True)
class DyadicGrid:
    """Geometry of ``[0, 2**M)**d`` with finest cells of side ``2**-J``."""

    d: int
    J: int
    M: int = 0

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if self.J + self.M < 1:
            raise ValueError("grid needs J + M >= 1")

    @property
    def n(self):
        """Cells per axis."""
        return 2 ** (self.J + self.M)

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def cell_volume(self):
        return 2.0 ** (-self.J * self.d)

    @property
    def levels(self):
        return range(-self.M, self.J + 1)

    def per_axis(self, level):
        return 2 ** (level + self.M)

    def check_cube(self, Q: DyadicCube, max_level=None):
        max_level = self.J if max_level is None else max_level
        if Q.d != self.d:
            raise ValueError(f"cube dimension {Q.d} does not match grid dimension {self.d}")
        if not (-self.M <= Q.level <= max_level):
            raise ValueError(f"cube level {Q.level} outside [{-self.M}, {max_level}]")
        n = self.per_axis(Q.level)
        if any(k < 0 or k >= n for k in Q.index):
            raise ValueError(f"cube {Q} lies outside the domain [0, 2^{self.M})^{self.d}")

    def cell_slices(self, Q: DyadicCube):
        """Index slices of the finest cells covered by Q."""
        w = 2 ** (self.J - Q.level)
        return tuple(slice(k * w, (k + 1) * w) for k in Q.index)

    def cell_centers(self):
        h = 2.0 ** (-self.J)
        axis = (np.arange(self.n) + 0.5) * h
        return np.meshgrid(*([axis] * self.d), indexing="ij")


def coarsen(a, d):
    """Sum 2**d sibling blocks; exact pairwise order, axis by axis."""
    for ax in range(d):
        sl_even = [slice(None)] * d
        sl_odd = [slice(None)] * d
        sl_even[ax] = slice(0, None, 2)
        sl_odd[ax] = slice(1, None, 2)
        a = a[tuple(sl_even)] + a[tuple(sl_odd)]
    return a


def _upsample(a, factor, d):
    for ax in range(d):
        a = np.repeat(a, factor, axis=ax)
    return a


@dataclass(frozen=True)
class Regularity:
    """Fitted constants of C1 (|A|/|Q|)^p_hat <= w(A)/w(Q) <= C2 (|A|/|Q|)^delta_hat."""

    p_hat: float
    delta_hat: float
    c1: float
    c2: float
    rho_min: tuple
    rho_max: tuple

    def selection_constant(self, d):
        """The lower-bound factor C1 2^(-d p_hat) for cubes picked at a crossing."""
        return self.c1 * 2.0 ** (-d * self.p_hat)


@dataclass(frozen=True)
class TowerReport:
    ascent: list
    descent: list
    consistent: bool


@dataclass(frozen=True, eq=False)
class DyadicWeight:
    grid: DyadicGrid
    cell_mass: np.ndarray
    ap_exponent: float | None = None
    label: str = "custom"
    pyramid: tuple = field(init=False, repr=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.cell_mass, dtype=float)
        if m.shape != self.grid.shape:
            raise ValueError(f"cell masses have shape {m.shape}, grid needs {self.grid.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValueError("cell masses must be finite and non-negative")
        if not np.any(m > 0):
            raise ValueError("weight is identically zero")
        m.setflags(write=False)
        object.__setattr__(self, "cell_mass", m)
        levels = [m]
        for _ in range(self.grid.J + self.grid.M):
            levels.append(coarsen(levels[-1], self.grid.d))
        levels.reverse()
        for a in levels:
            a.setflags(write=False)
        object.__setattr__(self, "pyramid", tuple(levels))

    # ---- construction -------------------------------------------------
    @classmethod
    def constant(cls, grid: DyadicGrid, c=1.0):
        return cls(grid, np.full(grid.shape, c * grid.cell_volume), label="const")

    @classmethod
    def from_density(cls, grid: DyadicGrid, density, label="density"):
        """Midpoint rule: cell mass = density(center) * cell volume."""
        centers = grid.cell_centers()
        return cls(grid, np.asarray(density(*centers), dtype=float) * grid.cell_volume, label=label)

    @classmethod
    def power(cls, grid: DyadicGrid, gamma, center=0.0):
        """|x - center|**gamma.  Exact cell integrals in d = 1, midpoint rule in d = 2."""
        if grid.d == 1:
            if gamma <= -1:
                raise ValueError("|x|^gamma is not locally integrable for gamma <= -1 in d=1")
            h = 2.0 ** (-grid.J)
            edges = np.arange(grid.n + 1) * h - center
            anti = np.sign(edges) * np.abs(edges) ** (gamma + 1) / (gamma + 1)
            mass = np.diff(anti)
        else:
            if gamma <= -grid.d:
                raise ValueError("|x|^gamma is not locally integrable for gamma <= -d")
            c = np.broadcast_to(np.asarray(center, dtype=float), (grid.d,))
            X = grid.cell_centers()
            r = np.sqrt(sum((x - ci) ** 2 for x, ci in zip(X, c)))
            if np.any(r == 0):
                raise ValueError("power weight center coincides with a cell midpoint")
            mass = r**gamma * grid.cell_volume
        return cls(grid, mass, label=f"power:gamma={gamma:g},center={center}")

    @classmethod
    def product(cls, factors):
        """Tensor product of 1-d weights: w(x, y) = w1(x) w2(y)."""
        if len(factors) != 2 or any(f.grid.d != 1 for f in factors):
            raise ValueError("product weights take exactly two one-dimensional factors")
        g0, g1 = factors[0].grid, factors[1].grid
        if (g0.J, g0.M) != (g1.J, g1.M):
            raise ValueError("product factors must share J and M")
        grid = DyadicGrid(2, g0.J, g0.M)
        # cell mass of w1(x)w2(y) is the product of the 1-d cell masses
        mass = np.outer(factors[0].cell_mass, factors[1].cell_mass)
        return cls(grid, mass, label="product")

    @classmethod
    def from_file(cls, path):
        grid, values = read_grid_file(path)
        return cls(grid, values, label=f"file:{path}")

    def to_file(self, path):
        write_grid_file(path, self.grid, self.cell_mass)

    def power_of(self, delta):
        """The weight w**delta (cellwise on the piecewise-constant density)."""
        dens = self.density
        return DyadicWeight(self.grid, dens**delta * self.grid.cell_volume, label=f"({self.label})^{delta:g}")

    # ---- queries ------------------------------------------------------
    @property
    def density(self):
        return self.cell_mass / self.grid.cell_volume

    @property
    def total_mass(self):
        return float(self.pyramid[0].ravel()[0])

    def level_masses(self, level):
        return self.pyramid[level + self.grid.M]

    def mass(self, Q: DyadicCube):
        self.grid.check_cube(Q)
        return float(self.pyramid[Q.level + self.grid.M][Q.index])

    def mass_of_cells(self, mask):
        return math.fsum(self.cell_mass[np.asarray(mask, dtype=bool)].ravel())

    @cached_property
    def regularity(self) -> Regularity:
        """Fit the A_infinity sandwich over every nested pair of dyadic cubes."""
        g = self.grid
        d = g.d
        nlev = g.J + g.M
        rho_min, rho_max = [], []
        with np.errstate(divide="ignore", invalid="ignore"):
            for gap in range(1, nlev + 1):
                lo, hi = np.inf, 0.0
                for i in range(0, nlev + 1 - gap):
                    parent = _upsample(self.pyramid[i], 2**gap, d)
                    child = self.pyramid[i + gap]
                    ok = parent > 0
                    r = child[ok] / parent[ok]
                    lo = min(lo, float(r.min()))
                    hi = max(hi, float(r.max()))
                rho_min.append(lo)
                rho_max.append(hi)
        gaps = np.arange(1, nlev + 1)
        rmin = np.array(rho_min)
        rmax = np.array(rho_max)
        with np.errstate(divide="ignore"):
            p_hat = float(np.max(-np.log2(rmin) / (gaps * d)))
            delta_hat = float(np.min(-np.log2(rmax) / (gaps * d)))
        if math.isfinite(p_hat):
            c1 = float(min(1.0, np.min(rmin * 2.0 ** (gaps * d * p_hat))))
        else:
            c1 = 0.0
        c2 = float(max(1.0, np.max(rmax * 2.0 ** (gaps * d * delta_hat))))
        return Regularity(p_hat, delta_hat, c1, c2, tuple(rho_min), tuple(rho_max))


def weight_of_cube(W: DyadicWeight, Q: DyadicCube) -> float:
    """w(Q) as the exact sum of the covered cell masses."""
    return W.mass(Q)


def ap_constant(W: DyadicWeight, p: float, max_level: int | None = None) -> float:
    """Dyadic, discretised A_p characteristic: max over dyadic cubes of
    avg(w) * avg(w^(-1/(p-1)))^(p-1).  A lower bound for the true constant."""
    if not p > 1:
        raise ValueError("A_p needs p > 1")
    g = W.grid
    max_level = g.J if max_level is None else min(max_level, g.J)
    zero = np.argwhere(W.cell_mass <= 0)
    if zero.size:
        raise ValueError(f"cell {tuple(int(k) for k in zero[0])} has zero mass; w^(-1/(p-1)) undefined")
    dual = W.density ** (-1.0 / (p - 1)) * g.cell_volume
    dual_levels = [dual]
    for _ in range(g.J - max_level):
        dual_levels.append(coarsen(dual_levels[-1], g.d))
    best = 0.0
    a = dual_levels[-1]
    for level in range(max_level, -g.M - 1, -1):
        vol = 2.0 ** (-level * g.d)
        prod = (W.level_masses(level) / vol) * (a / vol) ** (p - 1)
        best = max(best, float(prod.max()))
        if level > -g.M:
            a = coarsen(a, g.d)
    return best


def tower_limits(W: DyadicWeight, base: DyadicCube) -> TowerReport:
    """Masses along the tower through ``base``: ascending to the domain root and
    descending (towards the lower corner) to the finest level."""
    g = W.grid
    g.check_cube(base)
    ascent = [(lvl, W.mass(base.ancestor(lvl))) for lvl in range(base.level, -g.M - 1, -1)]
    descent = []
    Q = base
    while Q.level <= g.J:
        descent.append((Q.level, W.mass(Q)))
        Q = Q.children()[0]
    reg = W.regularity
    w0 = ascent[0][1]
    consistent = all(b >= a for (_, a), (_, b) in zip(ascent, ascent[1:]))
    consistent &= all(b <= a for (_, a), (_, b) in zip(descent, descent[1:]))
    for k, (_, m) in enumerate(ascent):
        bound = w0 * 2.0 ** (k * g.d * reg.delta_hat) / reg.c2
        consistent &= m >= bound * (1 - 1e-12)
    return TowerReport(ascent, descent, bool(consistent))


def _sweep_key(Q: DyadicCube, J):
    # smallest k with Q inside the origin tower cube [0, 2^k)^d, then position
    top = max(Q.index) + 1
    k = math.ceil(math.log2(top)) - Q.level if top > 1 else -Q.level
    corner = tuple(i << (J - Q.level) for i in Q.index)
    return (k, corner, Q.level)


def crossing_cubes(W: DyadicWeight, tau: float, max_level: int | None = None):
    """All dyadic cubes R with C tau < w(R) <= tau < w(parent R), ordered by the
    ascending origin tower and then position.

    Two such cubes are never nested (the smaller one's parent would sit inside
    the larger one and weigh at most tau), so the family is pairwise disjoint.
    """
    g = W.grid
    max_level = g.J if max_level is None else max_level
    if not (0 < tau < W.total_mass):
        raise TauOutOfRange(f"tau={tau:g} must lie in (0, total mass {W.total_mass:g})")
    positive = W.cell_mass[W.cell_mass > 0]
    if tau < positive.min():
        raise TauOutOfRange(f"tau={tau:g} is below the smallest cell mass {positive.min():g}")
    c_hat = W.regularity.selection_constant(g.d)
    found = []
    for level in range(-g.M + 1, max_level + 1):
        m = W.level_masses(level)
        parent = _upsample(W.level_masses(level - 1), 2, g.d)
        hit = (m <= tau) & (parent > tau) & (m > c_hat * tau) & (m > 0)
        for idx in np.argwhere(hit):
            found.append(DyadicCube(level, tuple(idx)))
    found.sort(key=lambda Q: _sweep_key(Q, g.J))
    return found


def select_disjoint_cubes(W: DyadicWeight, tau: float, N: int, max_level: int | None = None):
    """N pairwise disjoint dyadic cubes with C tau < w(R_j) <= tau.

    Follows the constructive argument: the first cube is the crossing cube of
    the origin tower, later ones are crossing cubes found by descending into
    the sibling regions Q_k minus Q_(k-1) of that tower.
    """
    pool = crossing_cubes(W, tau, max_level)
    if len(pool) < N:
        raise DomainExhausted(
            f"only {len(pool)} disjoint cubes with mass in (C tau, tau] exist for tau={tau:g}; "
            f"{N} requested",
            pool,
        )
    return pool[:N]


# ---- files and config strings ------------------------------------------


def read_grid_file(path):
    """Header ``d J M`` followed by 2^((J+M)d) values in row-major order."""
    text = Path(path).read_text()
    tokens = text.split()
    if len(tokens) < 3:
        raise ValueError(f"{path}: missing 'd J M' header")
    try:
        d, J, M = (int(t) for t in tokens[:3])
    except ValueError as exc:
        raise ValueError(f"{path}: header must be three integers 'd J M'") from exc
    grid = DyadicGrid(d, J, M)
    values = np.array([float(t) for t in tokens[3:]])
    if values.size != grid.n**d:
        raise ValueError(f"{path}: expected {grid.n**d} values after the header, got {values.size}")
    return grid, values.reshape(grid.shape)


def write_grid_file(path, grid: DyadicGrid, values):
    values = np.asarray(values, dtype=float).reshape(grid.shape)
    lines = [f"{grid.d} {grid.J} {grid.M}"]
    flat = values.ravel()
    for i in range(0, flat.size, 8):
        lines.append(" ".join(f"{v:.17g}" for v in flat[i : i + 8]))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_weight(spec: str, grid: DyadicGrid) -> DyadicWeight:
    """``const``, ``power:gamma=0.5,center=0`` or ``file:<path>``."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    if kind == "const":
        return DyadicWeight.constant(grid, float(rest) if rest else 1.0)
    if kind == "power":
        opts = dict(part.split("=", 1) for part in rest.split(",") if part.strip())
        gamma = float(opts.get("gamma", 0.5))
        center = float(opts.get("center", 0.0))
        return DyadicWeight.power(grid, gamma, center)
    if kind == "file":
        W = DyadicWeight.from_file(rest)
        if W.grid != grid:
            raise ValueError(f"weight file grid {W.grid} does not match {grid}")
        return W
    raise ValueError(f"unknown weight kind {kind!r}")
