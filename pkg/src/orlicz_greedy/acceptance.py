"""Acceptance checks shared by the test suite and ``orlicz-greedy selftest``.

Every check is deterministic and returns a :class:`Check` holding a verdict
and the recorded metrics; no timings enter the metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .besov import besov_identification_check, weight_power_check
from .democracy import brick_expansion, democracy_families, democracy_probe, extremal_tau
from .greedy import (
    RankedExpansion,
    bernstein_check,
    dyadic_range,
    greedy_error_curve,
    jackson_check,
    sigma_N_oracle,
)
from .orlicz_norms import indicator_norm, luxemburg_norm, power_norm
from .seq_lorentz import embedding_check, optimality_witness
from .wavelets import GridFunction, WaveletExpansion, analyze, atom_norms, make_function, slot_table
from .weights import (
    DomainExhausted,
    DyadicGrid,
    DyadicWeight,
    TauOutOfRange,
    select_disjoint_cubes,
)
from .young import Power, ZygmundLog, boyd_indices, dilation

__all__ = ["Check", "CHECKS", "run_all"]


@dataclass
class Check:
    criterion: int
    title: str
    passed: bool = True
    metrics: dict = field(default_factory=dict)

    def record(self, name, value):
        self.metrics[name] = float(value)

    def require(self, cond):
        self.passed = self.passed and bool(cond)

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.criterion}: {self.title}"


def _rng(*key):
    return np.random.default_rng(list(key))


# 1 ---------------------------------------------------------------------------------


def check_exact_norms(seed=0, pairs=100) -> Check:
    c = Check(1, "Luxemburg solver equals closed-form weighted l^p; indicator norms equal phi(w(E))")
    g = DyadicGrid(1, 10, 0)
    worst_p, worst_ind = 0.0, 0.0
    for i in range(pairs):
        rng = _rng(seed, 1, i)
        mass = rng.lognormal(0.0, 1.0, g.shape) * g.cell_volume
        W = DyadicWeight(g, mass)
        f = GridFunction(g, rng.standard_normal(g.shape) * 10 ** rng.uniform(-3, 3))
        p = float(rng.uniform(1.1, 6.0))
        a = luxemburg_norm(f, W, Power(p))
        b = power_norm(f.values, W.cell_mass, p)
        worst_p = max(worst_p, abs(a - b) / b)
        E = rng.random(g.shape) < rng.uniform(0.01, 0.9)
        if not E.any():
            E[0] = True
        for F in (Power(p), ZygmundLog(float(rng.uniform(1.1, 4)), float(rng.uniform(0, 2)))):
            exact = indicator_norm(W, F, E)
            solved = luxemburg_norm(GridFunction(g, E.astype(float)), W, F)
            worst_ind = max(worst_ind, abs(exact - solved) / exact)
        closed = W.mass_of_cells(E) ** (1 / p)
        worst_ind = max(worst_ind, abs(indicator_norm(W, Power(p), E) - closed) / closed)
    c.record("max_rel_err_power", worst_p)
    c.record("max_rel_err_indicator", worst_ind)
    c.require(worst_p <= 1e-9 and worst_ind <= 1e-9)
    return c


# 2 ---------------------------------------------------------------------------------


def check_boyd() -> Check:
    c = Check(2, "Boyd indices: Power(p) -> 1/p within 1e-3, ZygmundLog(2,1) -> 0.5 within 1e-2")
    worst = 0.0
    for p in (1.25, 1.5, 2.0, 3.0, 4.0):
        lo, hi = boyd_indices(Power(p))
        worst = max(worst, abs(lo - 1 / p), abs(hi - 1 / p))
    lo, hi = boyd_indices(ZygmundLog(2, 1))
    c.record("power_max_err", worst)
    c.record("zygmund_lower", lo)
    c.record("zygmund_upper", hi)
    c.require(worst <= 1e-3 and abs(lo - 0.5) <= 1e-2 and abs(hi - 0.5) <= 1e-2)
    return c


# 3 ---------------------------------------------------------------------------------


def check_disjoint_cubes(seed=0) -> Check:
    c = Check(3, "disjoint cube constructor: disjoint and C*tau < w(R) <= tau on every success")
    g = DyadicGrid(1, 10, 2)
    weights = {
        "const": DyadicWeight.constant(g),
        "sqrt": DyadicWeight.power(g, 0.5),
        "inv_sqrt": DyadicWeight.power(g, -0.5),
    }
    ok_all, successes, failures = True, 0, 0
    for name, W in weights.items():
        rng = _rng(seed, 3, len(name))
        lo = float(W.cell_mass[W.cell_mass > 0].min())
        taus = np.exp(rng.uniform(math.log(lo), math.log(W.total_mass), 20))
        Ns = rng.choice([1, 2, 4, 8, 16, 32, 64], size=20)
        chat = W.regularity.selection_constant(g.d)
        for tau, N in zip(taus, Ns):
            try:
                cubes = select_disjoint_cubes(W, float(tau), int(N))
            except (TauOutOfRange, DomainExhausted):
                failures += 1
                continue
            successes += 1
            m = np.array([W.mass(Q) for Q in cubes])
            disjoint = all(a.disjoint(b) for i, a in enumerate(cubes) for b in cubes[i + 1 :])
            ok_all &= disjoint and len(cubes) == N and bool(np.all((m > chat * tau) & (m <= tau)))
        c.record(f"{name}_c_hat", chat)
    c.record("successes", successes)
    c.record("documented_failures", failures)
    c.require(ok_all and successes > 0)
    return c


# 4, 5 ------------------------------------------------------------------------------

DEMOCRACY_NS = tuple(dyadic_range(256))


def _probe_summary(W, F, trials, seed):
    rows = democracy_probe(W, F, list(DEMOCRACY_NS), trials=trials, seed=seed)
    N = np.array([r.N for r in rows])
    norm = np.array([r.norm for r in rows])
    hp = np.array([r.h_plus for r in rows])
    hm = np.array([r.h_minus for r in rows])
    return rows, N, norm, hp, hm


def check_democracy_zygmund(seed=7, trials=20) -> Check:
    c = Check(4, "Zygmund democracy sandwich: bands < 10 and growing non-democracy gap")
    g = DyadicGrid(1, 8, 8)
    F = ZygmundLog(2, 1)
    for name, W in (("const", DyadicWeight.constant(g)), ("sqrt", DyadicWeight.power(g, 0.5))):
        rows, N, norm, hp, hm = _probe_summary(W, F, trials, seed)
        up, down = norm / hp, norm / hm
        band_plus = up.max() / up.min()
        band_minus = down.max() / down.min()
        gap = {n: norm[N == n].max() / norm[N == n].min() for n in (4, 256)}
        fewest = min(int((N == n).sum()) for n in DEMOCRACY_NS)
        c.record(f"{name}_band_plus", band_plus)
        c.record(f"{name}_band_minus", band_minus)
        c.record(f"{name}_c2", up.max())
        c.record(f"{name}_c1", down.min())
        c.record(f"{name}_gap_N4", gap[4])
        c.record(f"{name}_gap_N256", gap[256])
        c.record(f"{name}_min_families", fewest)
        c.require(band_plus < 10 and band_minus < 10 and gap[256] > gap[4] and fewest >= 50)
    return c


def check_democracy_power(seed=7, trials=20) -> Check:
    c = Check(5, "L^p(w) democracy: brick norms within [c1, c2] N^(1/p), c2/c1 < 4")
    g = DyadicGrid(1, 10, 2)
    W = DyadicWeight.power(g, 0.5)
    for p in (1.5, 2.0, 3.0):
        rows, N, norm, hp, hm = _probe_summary(W, Power(p), trials, seed)
        r = norm / N ** (1 / p)
        c.record(f"p{p:g}_c1", r.min())
        c.record(f"p{p:g}_c2", r.max())
        c.record(f"p{p:g}_band", r.max() / r.min())
        c.require(r.max() / r.min() < 4)
    return c


# 6 ---------------------------------------------------------------------------------


def _random_mean_zero(g, rng):
    f = GridFunction(g, rng.standard_normal(g.shape))
    E = analyze(f)
    return WaveletExpansion(g, "haar", 0.0, E.details)


def check_greedy_optimality(seed=0, functions=50) -> Check:
    c = Check(6, "greedy equals sigma_N in L^2; greedy/sigma_N bounded and stable in L^3(|x|^1/2)")
    g = DyadicGrid(1, 7, 0)
    W1 = DyadicWeight.constant(g)
    Wp = DyadicWeight.power(g, 0.5)
    Ns = dyadic_range(64)
    worst_l2 = 0.0
    ratios = np.zeros((functions, len(Ns)))
    for i in range(functions):
        E = _random_mean_zero(g, _rng(seed, 6, i))
        R = RankedExpansion(E, W1, Power(2))
        err = greedy_error_curve(R, Ns)
        tail = np.sort(E.flat() ** 2)[::-1]
        for k, n in enumerate(Ns):
            sig = sigma_N_oracle(E, n, W1, Power(2))
            parseval = math.sqrt(math.fsum(tail[n:]))
            worst_l2 = max(worst_l2, abs(err[k] - sig), abs(sig - parseval))
        R3 = RankedExpansion(E, Wp, Power(3))
        err3 = greedy_error_curve(R3, Ns)
        for k, n in enumerate(Ns):
            ratios[i, k] = err3[k] / sigma_N_oracle(E, n, Wp, Power(3))
    C = ratios.max(axis=0)
    c.record("l2_max_abs_diff", worst_l2)
    c.record("lp_C_max", C.max())
    c.record("lp_C_median", float(np.median(C)))
    c.require(worst_l2 <= 1e-9 and C.max() <= 2 * np.median(C) and ratios.min() >= 1 - 1e-12)
    return c


# 7 ---------------------------------------------------------------------------------


def power_law_expansion(W, F, beta, rng, level=None):
    """Coefficients on disjoint cubes of one level with atom-weighted sizes
    k^(-beta), placed in random order."""
    g = W.grid
    level = g.J - 1 if level is None else level
    tab = slot_table(g)
    slots = np.flatnonzero((tab.level == level) & (tab.species == 1))
    norms = atom_norms(W, F)[slots]
    ok = np.isfinite(norms)
    slots, norms = slots[ok], norms[ok]
    perm = rng.permutation(slots.size)
    k = np.arange(1, slots.size + 1, dtype=float)
    vals = np.zeros(tab.size)
    signs = rng.choice([-1.0, 1.0], size=slots.size)
    vals[slots[perm]] = signs * np.power(k, -beta) / norms[perm]
    return WaveletExpansion.from_flat(g, vals)


def sized_expansion(W, F, sizes, rng, level=None):
    g = W.grid
    level = g.J - 1 if level is None else level
    tab = slot_table(g)
    slots = np.flatnonzero((tab.level == level) & (tab.species == 1))
    norms = atom_norms(W, F)[slots]
    perm = rng.permutation(slots.size)[: len(sizes)]
    vals = np.zeros(tab.size)
    vals[slots[perm]] = np.asarray(sizes) / norms[perm]
    return WaveletExpansion.from_flat(g, vals)


def check_jackson_bernstein(seed=0) -> Check:
    c = Check(7, "Jackson/Bernstein: power-law slopes within 0.05; Zygmund C(N) max/median < 3")
    beta = 1.5
    g = DyadicGrid(1, 12, 0)
    W = DyadicWeight.constant(g)
    Ns = [n for n in dyadic_range(256) if n >= 8]
    worst_slope = 0.0
    for p in (1.5, 2.0, 3.0):
        E = power_law_expansion(W, Power(p), beta, _rng(seed, 7, int(10 * p)))
        R = RankedExpansion(E, W, Power(p))
        errs = greedy_error_curve(R, Ns, include_scaling=False)
        slope = float(np.polyfit(np.log(Ns), np.log(errs), 1)[0])
        c.record(f"p{p:g}_slope", slope)
        c.record(f"p{p:g}_predicted", -beta + 1 / p)
        worst_slope = max(worst_slope, abs(slope - (-beta + 1 / p)))
    c.record("max_slope_err", worst_slope)
    c.require(worst_slope <= 0.05)

    F = ZygmundLog(2, 1)
    alpha = 0.5
    gz = DyadicGrid(1, 10, 0)
    Ns = dyadic_range(256)
    worst = 0.0
    for wname, Wz in (("const", DyadicWeight.constant(gz)), ("sqrt", DyadicWeight.power(gz, 0.5))):
        k = np.arange(1, 2 ** (gz.J - 1) + 1, dtype=float)
        sizes = k ** (-alpha) / dilation(F, k, "sup")
        fams = [
            ("marcinkiewicz", sized_expansion(Wz, F, sizes, _rng(seed, 7, 1))),
            ("random", _random_mean_zero(gz, _rng(seed, 7, 2))),
        ]
        for fname, E in fams:
            rep = jackson_check(E, alpha, Wz, F, Ns)
            c.record(f"{wname}_{fname}_C_max", rep.max_constant)
            c.record(f"{wname}_{fname}_C_spread", rep.spread)
            worst = max(worst, rep.spread)
        b = bernstein_check(Wz, F, alpha, Ns, trials=4, seed=seed)
        c.record(f"{wname}_bernstein_max", b.max_ratio)
        c.record(f"{wname}_bernstein_spread", b.spread)
        worst = max(worst, b.spread)
    c.record("zygmund_max_spread", worst)
    c.require(worst < 3)
    return c


# 8 ---------------------------------------------------------------------------------


def check_embeddings(seed=0, alpha=0.5, q=1.0) -> Check:
    c = Check(8, "embedding chain on witness families; optimality witnesses track h+ and h-")
    g = DyadicGrid(1, 8, 8)
    Ns = dyadic_range(32)
    lp_ok = True
    for fname, F in (("p2", Power(2)), ("p3", Power(3)), ("zyg", ZygmundLog(2, 1))):
        for wname, W in (("const", DyadicWeight.constant(g)), ("sqrt", DyadicWeight.power(g, 0.5))):
            ml, rm = [], []
            lower, upper = [], []
            for N in Ns:
                tau, cubes = extremal_tau(W, F, N, "sup", count=2 * N)
                E = brick_expansion([(Q, 1) for Q in cubes], W, F)
                rep = embedding_check(E, alpha, q, W, F, sigma_mode="greedy")
                ml.append(rep.middle_over_left)
                rm.append(rep.right_over_middle)
                fams = democracy_families(W, F, N, trials=8, seed=seed)
                wit = optimality_witness(W, F, alpha, q, N, seed=seed, families=fams)
                lower.append(wit.lower_over_h_plus)
                upper.append(wit.upper_over_h_minus)
            key = f"{fname}_{wname}"
            c.record(f"{key}_max_middle_over_left", max(ml))
            c.record(f"{key}_max_right_over_middle", max(rm))
            c.record(f"{key}_lower_over_hplus_min", min(lower))
            c.record(f"{key}_lower_over_hplus_max", max(lower))
            c.record(f"{key}_upper_over_hminus_min", min(upper))
            c.record(f"{key}_upper_over_hminus_max", max(upper))
            c.require(max(ml) <= 4 and max(rm) <= 4)
            c.require(max(lower) / min(lower) < 4 and max(upper) / min(upper) < 4)
            if fname != "zyg":
                both = np.array(lower + upper)
                lp_ok &= both.max() / both.min() < 4
    c.require(lp_ok)
    return c


# 9 ---------------------------------------------------------------------------------


def check_besov(gamma=0.25, p=2.0) -> Check:
    c = Check(9, "Besov identification: exact collapse, ratio bands stable in J, Jensen cube-wise")
    worst_exact = 0.0
    for d, J in ((1, 10), (2, 5)):
        g = DyadicGrid(d, J, 0)
        E = _random_mean_zero(g, _rng(0, 9, d))
        r = besov_identification_check(E, d / 2, 2.0, DyadicWeight.constant(g))
        worst_exact = max(worst_exact, abs(r.norm_a - r.norm_b) / r.norm_a)
    c.record("exact_rel_diff", worst_exact)
    c.require(worst_exact <= 1e-12)

    bands = {}
    jensen = True
    for J in (8, 10, 12):
        g = DyadicGrid(1, J, 0)
        W = DyadicWeight.power(g, 0.5)
        reports = [besov_identification_check(analyze(make_function(fn, g)), gamma, p, W) for fn in ("bump", "sawtooth")]
        for pair in ("b/a", "c/a", "c/b"):
            vals = [r.ratios[pair] for r in reports]
            bands.setdefault(pair, []).append((min(vals), max(vals)))
        wp = weight_power_check(W, 2.0, reports[0].tau / p)
        jensen &= wp.jensen_holds
        for wname, Wj in (("sqrt", W), ("inv_sqrt", DyadicWeight.power(g, -0.5))):
            jensen &= weight_power_check(Wj, 2.0, 0.5).jensen_holds
    drift = 0.0
    for pair, b in bands.items():
        lo0, hi0 = b[0]
        for lo, hi in b[1:]:
            drift = max(drift, abs(lo / lo0 - 1), abs(hi / hi0 - 1))
        c.record(f"{pair}_J8_min", b[0][0])
        c.record(f"{pair}_J8_max", b[0][1])
        c.record(f"{pair}_J12_min", b[-1][0])
        c.record(f"{pair}_J12_max", b[-1][1])
    c.record("band_drift", drift)
    c.record("jensen_holds", jensen)
    c.require(drift < 0.2 and jensen)
    return c


# 10 --------------------------------------------------------------------------------


def check_determinism(seed=7) -> Check:
    """Two probe runs, one threaded, must agree bit for bit."""
    c = Check(10, "determinism: repeated runs give identical results")
    g = DyadicGrid(1, 8, 2)
    W = DyadicWeight.power(g, 0.5)
    F = ZygmundLog(2, 1)
    a = democracy_probe(W, F, [1, 4, 16], trials=5, seed=seed, threads=1)
    b = democracy_probe(W, F, [1, 4, 16], trials=5, seed=seed, threads=3)
    c.record("rows", len(a))
    c.require(a == b)
    return c


CHECKS = {
    1: check_exact_norms,
    2: check_boyd,
    3: check_disjoint_cubes,
    4: check_democracy_zygmund,
    5: check_democracy_power,
    6: check_greedy_optimality,
    7: check_jackson_bernstein,
    8: check_embeddings,
    9: check_besov,
    10: check_determinism,
}


def run_all(only=None):
    return [CHECKS[k]() for k in sorted(CHECKS) if only is None or k in only]
