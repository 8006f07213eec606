"""The greedy algorithm G_N, N-term errors sigma_N and approximation-space
norms in L^Phi(w).

Coefficients are ranked by their atom-weighted size |s_Q| * ||psi_Q||; ties
are broken by the flat slot order (level, index, species).  The scaling
coefficient of the finite domain is never selected: residuals either carry
it (``include_scaling=True``, so that ``G_0 f = 0`` leaves ``f``) or drop it
(the wavelet part alone, used by the sequence-space experiments).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .orlicz_norms import fast_norm, luxemburg_norm_values
from .seq_lorentz import AlphaHMinus, AlphaHPlus, lorentz_norm, marcinkiewicz_norm
from .wavelets import WaveletExpansion, atom_norms, slot_table, synthesize
from .weights import DyadicWeight
from .young import YoungFunction

__all__ = [
    "RankedExpansion",
    "greedy_step",
    "greedy_error",
    "greedy_error_curve",
    "scaling_remainder",
    "ResidualEngine",
    "sigma_N_oracle",
    "sigma_curve",
    "approx_space_norm",
    "JacksonReport",
    "jackson_check",
    "BernsteinReport",
    "bernstein_check",
    "dyadic_range",
    "ExhaustiveTooLarge",
]

EXHAUSTIVE_CAP = 20
SUPPORT_BUDGET = 5000


class ExhaustiveTooLarge(ValueError):
    """Exhaustive sigma_N was requested for more than 20 nonzero coefficients."""


def dyadic_range(n_max):
    """1, 2, 4, ... up to n_max."""
    out, n = [], 1
    while n <= n_max:
        out.append(n)
        n *= 2
    return out


@dataclass(frozen=True, eq=False)
class RankedExpansion:
    expansion: WaveletExpansion
    weight: DyadicWeight
    young: YoungFunction

    def __post_init__(self):
        if self.expansion.grid != self.weight.grid:
            raise ValueError("expansion and weight live on different grids")

    @cached_property
    def coefficients(self):
        return self.expansion.flat()

    @cached_property
    def atom_norms(self):
        return atom_norms(self.weight, self.young)

    @cached_property
    def sizes(self):
        """|s_Q| * ||psi_Q|| in flat slot order (0 for zero coefficients)."""
        c = self.coefficients
        out = np.zeros_like(c)
        nz = c != 0
        if np.any(np.isinf(self.atom_norms[nz])):
            raise ValueError("a nonzero coefficient sits on a zero-weight cube")
        out[nz] = np.abs(c[nz]) * self.atom_norms[nz]
        return out

    @cached_property
    def ranking(self):
        """All slots, largest size first; stable, so ties keep slot order."""
        r = np.argsort(-self.sizes, kind="stable")
        r.setflags(write=False)
        return r

    @property
    def nonzero_count(self):
        return int(np.count_nonzero(self.coefficients))

    def top(self, N):
        return self.ranking[: min(max(N, 0), self.nonzero_count)]


def greedy_step(R: RankedExpansion, N: int) -> WaveletExpansion:
    """G_N: keep the N largest atom-weighted terms (all of them if N is larger)."""
    keep = R.top(N)
    vals = np.zeros_like(R.coefficients)
    vals[keep] = R.coefficients[keep]
    return R.expansion.with_flat(vals, scaling=0.0)


# ---- residual evaluation ------------------------------------------------------


class ResidualEngine:
    """Norms of ``f - sum_{k in S} c_k psi_k`` for many subsets S.

    For Haar expansions the residual is constant on cubes one level below
    the finest populated level, so it is evaluated on that coarser partition
    with the exact aggregated cube masses.
    """

    def __init__(self, E: WaveletExpansion, W: DyadicWeight, F: YoungFunction, include_scaling=True):
        self.E = E
        self.W = W
        self.F = F
        self.include_scaling = include_scaling
        g = E.grid
        coeffs = E.flat()
        self.coefficients = coeffs
        self.support = np.flatnonzero(coeffs)
        tab = slot_table(g)
        self.haar = E.family == "haar"
        if self.haar:
            top = int(tab.level[self.support].max()) + 1 if self.support.size else -g.M
            self.res_level = min(g.J, max(top, -g.M))
            self.mass = W.level_masses(self.res_level)
        else:
            self.res_level = g.J
            self.mass = W.cell_mass
        base = E if include_scaling else E.with_flat(coeffs, scaling=0.0)
        self.base = self._synth(base)
        # what is left once every wavelet term is removed, without round-off
        if include_scaling and E.scaling != 0:
            self.floor = self._synth(E.with_flat(np.zeros_like(coeffs)))
        else:
            self.floor = np.zeros_like(self.base)
        self._atoms = {}

    def _synth(self, E):
        full = synthesize(E).values
        if self.res_level == self.E.grid.J:
            return full
        step = 2 ** (self.E.grid.J - self.res_level)
        return full[(slice(None, None, step),) * self.E.grid.d].copy()

    def atom_block(self, slot):
        """(slices, values) of psi at ``slot`` on the residual partition."""
        if slot in self._atoms:
            return self._atoms[slot]
        g = self.E.grid
        tab = slot_table(g)
        if self.haar:
            j = int(tab.level[slot])
            m = 2 ** (self.res_level - j)
            idx = tab.index[slot]
            l = int(tab.species[slot])
            axes = {1: (0,), 2: (1,), 3: (0, 1)}[l] if g.d == 2 else (0,)
            block = np.full((m,) * g.d, 2.0 ** (j * g.d / 2))
            half = np.where(np.arange(m) < m // 2, 1.0, -1.0)
            for ax in axes:
                shape = [1] * g.d
                shape[ax] = m
                block = block * half.reshape(shape)
            sl = tuple(slice(int(k) * m, (int(k) + 1) * m) for k in idx)
            out = (sl, block)
        else:
            vals = np.zeros(tab.size)
            vals[slot] = 1.0
            out = ((slice(None),) * g.d, synthesize(self.E.with_flat(vals, scaling=0.0)).values)
        self._atoms[slot] = out
        return out

    def residual(self, keep, coeffs=None):
        if coeffs is None and len(keep) >= self.support.size and set(map(int, keep)) >= set(self.support.tolist()):
            return self.floor.copy()
        r = self.base.copy()
        for i, k in enumerate(keep):
            c = self.coefficients[k] if coeffs is None else coeffs[i]
            sl, block = self.atom_block(int(k))
            r[sl] -= c * block
        return r

    def norm_of(self, values):
        return fast_norm(values, self.mass, self.F)

    def norm(self, keep, coeffs=None):
        return self.norm_of(self.residual(keep, coeffs))


def scaling_remainder(E: WaveletExpansion, W: DyadicWeight, F: YoungFunction) -> float:
    """Norm of the scaling content of E (the part no wavelet can remove)."""
    only = WaveletExpansion.zeros(E.grid, E.family)
    only = WaveletExpansion(E.grid, E.family, E.scaling, only.details)
    return luxemburg_norm_values(synthesize(only).values, W.cell_mass, F)


def greedy_error_curve(R: RankedExpansion, Ns, include_scaling=True) -> np.ndarray:
    """||f - G_N f|| for every N in ``Ns``, removing atoms incrementally."""
    Ns = [int(n) for n in Ns]
    if any(n < 0 for n in Ns):
        raise ValueError("N must be non-negative")
    eng = ResidualEngine(R.expansion, R.weight, R.young, include_scaling)
    order = R.top(max(Ns, default=0))
    wanted = {}
    r = eng.base.copy()
    targets = sorted(set(Ns))
    pos = 0
    for n in targets:
        while pos < min(n, order.size):
            k = int(order[pos])
            sl, block = eng.atom_block(k)
            r[sl] -= R.coefficients[k] * block
            pos += 1
        wanted[n] = eng.norm_of(eng.floor if pos >= eng.support.size else r)
    return np.array([wanted[n] for n in Ns])


def greedy_error(R: RankedExpansion, N: int, include_scaling=True) -> float:
    """||f - G_N f||_{L^Phi(w)}; with the scaling content unless told otherwise."""
    return float(greedy_error_curve(R, [N], include_scaling)[0])


# ---- sigma_N ------------------------------------------------------------------


def _support_exact(eng, N, sizes_order):
    K = eng.support.size
    best = eng.norm([])
    best_set = ()
    for m in range(1, min(N, K) + 1):
        for S in itertools.combinations(eng.support, m):
            v = eng.norm(S)
            if v < best:
                best, best_set = v, S
    return best, best_set


def _support_local(eng, N, order, sizes, window=6, rounds=4):
    """1-swap local search started from the greedy set and from the
    largest-|s| set; an upper bound on the support-restricted sigma_N."""
    K = order.size
    N = min(N, K)
    starts = [list(order[:N])]
    by_coef = eng.support[np.argsort(-np.abs(eng.coefficients[eng.support]), kind="stable")][:N]
    if set(by_coef) != set(starts[0]):
        starts.append(list(by_coef))
    best, best_set = math.inf, ()
    for S in starts:
        cur = eng.norm(S)
        for _ in range(rounds):
            improved = False
            inside = sorted(S, key=lambda k: sizes[k])[:window]
            outside = [k for k in order if k not in set(S)][:window]
            for i in inside:
                for j in outside + [None]:
                    T = [k for k in S if k != i] + ([j] if j is not None else [])
                    v = eng.norm(T)
                    if v < cur * (1 - 1e-13):
                        S, cur, improved = T, v, True
                        break
                if improved:
                    break
            if not improved:
                break
        if cur < best:
            best, best_set = cur, tuple(S)
    return best, best_set


def _golden(fun, a, b, tol):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(200):
        if abs(b - a) <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def _coordinate_descent(eng, S, atom_sizes, sweeps=32):
    coeffs = np.array([eng.coefficients[k] for k in S], dtype=float)
    cur = eng.norm(S, coeffs)
    r0 = cur
    for _ in range(sweeps):
        start = cur
        for i, k in enumerate(S):
            half = 2 * r0 / atom_sizes[k]

            def f(c, i=i):
                trial = coeffs.copy()
                trial[i] = c
                return eng.norm(S, trial)

            c, v = _golden(f, coeffs[i] - half, coeffs[i] + half, 1e-10 * (abs(coeffs[i]) + half))
            if v < cur:
                coeffs[i], cur = c, v
        if start - cur <= 1e-13 * max(start, 1e-300):
            break
    return cur


def sigma_N_oracle(
    E: WaveletExpansion,
    N: int,
    W: DyadicWeight,
    F: YoungFunction,
    mode="support",
    include_scaling=True,
    budget=SUPPORT_BUDGET,
    refine=4,
) -> float:
    """Upper estimate of the best N-term error sigma_N(E) in L^Phi(w).

    ``support``: best residual over subsets (size <= N) of the support with
    the original coefficients; exact enumeration when at most ``budget``
    subsets exist, 1-swap local search from the greedy set otherwise.
    ``exhaustive``: all subsets of at most 20 nonzeros, then coordinate
    descent (32 sweeps, golden section) on the ``refine`` best subsets of
    size min(N, #support).  ``greedy``: the greedy error itself.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    R = RankedExpansion(E, W, F)
    eng = ResidualEngine(E, W, F, include_scaling)
    K = eng.support.size
    if mode == "greedy":
        return greedy_error(R, N, include_scaling)
    if N == 0 or K == 0:
        return eng.norm([])
    if mode == "support":
        n_sets = sum(math.comb(K, m) for m in range(0, min(N, K) + 1))
        if n_sets <= budget:
            return _support_exact(eng, N, R.ranking)[0]
        return _support_local(eng, N, R.top(K), R.sizes)[0]
    if mode == "exhaustive":
        if K > EXHAUSTIVE_CAP:
            raise ExhaustiveTooLarge(f"exhaustive sigma_N allows at most {EXHAUSTIVE_CAP} nonzeros, got {K}")
        best, _ = _support_exact(eng, N, R.ranking)
        m = min(N, K)
        scored = sorted(
            ((eng.norm(S), S) for S in itertools.combinations(eng.support, m)), key=lambda t: t[0]
        )
        for v, S in scored[:refine]:
            best = min(best, v, _coordinate_descent(eng, list(S), R.atom_norms))
        return best
    raise ValueError(f"unknown sigma mode {mode!r}")


def sigma_curve(E, W, F, Ns, mode="support", include_scaling=False, budget=SUPPORT_BUDGET):
    """sigma_N for every N in ``Ns`` (``mode="greedy"`` uses one sweep)."""
    if mode == "greedy":
        return greedy_error_curve(RankedExpansion(E, W, F), Ns, include_scaling)
    return np.array(
        [sigma_N_oracle(E, n, W, F, mode, include_scaling, budget) for n in Ns]
    )


def approx_space_norm(
    E, alpha, q, W, F, sigma_mode="support", shift=False, budget=SUPPORT_BUDGET
) -> float:
    """(sum_{N=1}^{K} (N^alpha sigma_N)^q / N)^(1/q), or sup_N N^alpha sigma_N.

    K is the number of nonzero coefficients, beyond which sigma_N = 0.  With
    ``shift=True`` the N-th term uses sigma_{N-1}, so the first term is the
    norm of the function itself.  The scaling coefficient is ignored.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not q > 0:
        raise ValueError("q must be positive")
    K = int(np.count_nonzero(E.flat()))
    if K == 0:
        return 0.0
    N = np.arange(1, K + 1)
    sig = sigma_curve(E, W, F, (N - 1) if shift else N, sigma_mode, False, budget)
    terms = N.astype(float) ** alpha * sig
    if math.isinf(q):
        return float(terms.max())
    scale = terms.max()
    if scale == 0:
        return 0.0
    return float(scale * math.fsum(((terms / scale) ** q / N).tolist()) ** (1.0 / q))


# ---- Jackson and Bernstein ------------------------------------------------------


@dataclass(frozen=True)
class JacksonReport:
    Ns: tuple
    errors: tuple
    constants: tuple
    marcinkiewicz: float
    slope: float

    @property
    def max_constant(self):
        return max(self.constants)

    @property
    def spread(self):
        """max/median of the positive constants."""
        c = np.array([x for x in self.constants if x > 0])
        return float(c.max() / np.median(c)) if c.size else 0.0


def _loglog_slope(Ns, vals):
    Ns = np.asarray(Ns, dtype=float)
    vals = np.asarray(vals, dtype=float)
    ok = vals > 0
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(Ns[ok]), np.log(vals[ok]), 1)[0])


def jackson_check(E, alpha, W, F, Ns=None) -> JacksonReport:
    """C(N) = ||f - G_{N-1} f|| N^alpha / ||f||_M with M the Marcinkiewicz
    space of eta(k) = k^alpha h_phi^+(k); wavelet part only."""
    R = RankedExpansion(E, W, F)
    K = R.nonzero_count
    if Ns is None:
        Ns = dyadic_range(max(K, 1))
    Ns = [int(n) for n in Ns]
    m = marcinkiewicz_norm(R.sizes, AlphaHPlus(alpha, F))
    errs = greedy_error_curve(R, [n - 1 for n in Ns], include_scaling=False)
    C = [float(e * n**alpha / m) if m > 0 else 0.0 for e, n in zip(errs, Ns)]
    return JacksonReport(tuple(Ns), tuple(float(e) for e in errs), tuple(C), m, _loglog_slope(Ns, errs))


@dataclass(frozen=True)
class BernsteinReport:
    Ns: tuple
    ratios: tuple

    @property
    def max_ratio(self):
        return max(self.ratios)

    @property
    def spread(self):
        r = np.array(self.ratios)
        return float(r.max() / np.median(r))


def bernstein_ratio(E, alpha, W, F) -> float:
    """||f||_{Lambda_{k^alpha h-(k)}} / (N^alpha ||f||) for f with N terms."""
    R = RankedExpansion(E, W, F)
    N = R.nonzero_count
    if N == 0:
        raise ValueError("the zero function has no Bernstein ratio")
    lam = lorentz_norm(R.sizes, AlphaHMinus(alpha, F), 1.0)
    nrm = ResidualEngine(E, W, F, include_scaling=False).norm([])
    return lam / (N**alpha * nrm)


def bernstein_check(W, F, alpha, Ns, trials=8, seed=0, family="haar") -> BernsteinReport:
    """Worst Bernstein ratio over random members of Sigma_N for each N."""
    g = W.grid
    tab = slot_table(g)
    pos = np.isfinite(atom_norms(W, F))
    slots = np.flatnonzero(pos)
    ratios = []
    for n in Ns:
        worst = 0.0
        for t in range(trials):
            rng = np.random.default_rng([seed, n, t])
            pick = rng.choice(slots, size=min(n, slots.size), replace=False)
            vals = np.zeros(tab.size)
            vals[pick] = rng.standard_normal(pick.size)
            E = WaveletExpansion.from_flat(g, vals, family=family)
            worst = max(worst, bernstein_ratio(E, alpha, W, F))
        ratios.append(worst)
    return BernsteinReport(tuple(int(n) for n in Ns), tuple(ratios))
