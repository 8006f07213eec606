import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orlicz_greedy.greedy import (
    ExhaustiveTooLarge,
    RankedExpansion,
    approx_space_norm,
    bernstein_check,
    bernstein_ratio,
    dyadic_range,
    greedy_error,
    greedy_error_curve,
    greedy_step,
    jackson_check,
    sigma_N_oracle,
)
from orlicz_greedy.orlicz_norms import luxemburg_norm
from orlicz_greedy.wavelets import GridFunction, WaveletExpansion, analyze, synthesize
from orlicz_greedy.weights import DyadicCube, DyadicGrid, DyadicWeight
from orlicz_greedy.young import Power, ZygmundLog


def _disjoint_expansion(g, values):
    """Coefficients on disjoint cubes of the finest detail level."""
    j = g.J - 1
    coeffs = {(DyadicCube(j, (k,)), 1): v for k, v in enumerate(values)}
    return WaveletExpansion.from_coefficients(g, coeffs)


def _random_expansion(g, rng, k=None):
    v = np.zeros(WaveletExpansion.zeros(g).flat().size)
    idx = rng.choice(v.size, size=k or v.size, replace=False)
    v[idx] = rng.standard_normal(idx.size)
    return WaveletExpansion.from_flat(g, v)


def test_dyadic_range():
    assert dyadic_range(64) == [1, 2, 4, 8, 16, 32, 64]
    assert dyadic_range(5) == [1, 2, 4]


def test_greedy_step_unweighted_sizes():
    g = DyadicGrid(1, 3, 0)
    E = _disjoint_expansion(g, [3.0, 2.0, 1.0])
    R = RankedExpansion(E, DyadicWeight.constant(g), Power(2))
    kept = greedy_step(R, 2)
    assert sorted(np.abs(kept.flat()[kept.flat() != 0])) == [2.0, 3.0]
    assert np.array_equal(greedy_step(R, 3).flat(), E.flat())
    assert np.all(greedy_step(R, 0).flat() == 0)


def test_greedy_weighted_order_differs_from_coefficient_order():
    # w(A) = 100 w(B) on equal cubes, so the atom norms differ by a factor 10 in L^2(w)
    g = DyadicGrid(1, 2, 0)
    W = DyadicWeight(g, np.array([50.0, 50.0, 0.5, 0.5]))
    A, B = DyadicCube(1, (0,)), DyadicCube(1, (1,))
    E = WaveletExpansion.from_coefficients(g, {(A, 1): 1.0, (B, 1): 5.0})
    R = RankedExpansion(E, W, Power(2))
    kept = greedy_step(R, 1)
    assert kept.coefficient(A) == 1.0 and kept.coefficient(B) == 0.0


def test_tie_break_is_slot_order():
    g = DyadicGrid(1, 4, 0)
    E = _disjoint_expansion(g, [1.0] * 8)
    R = RankedExpansion(E, DyadicWeight.constant(g), Power(2))
    top = R.top(8)
    assert list(top) == sorted(top)


@given(seed=st.integers(0, 2**32 - 1), c=st.floats(1e-3, 1e3))
def test_ranking_invariant_under_scaling(seed, c):
    g = DyadicGrid(1, 5, 0)
    E = _random_expansion(g, np.random.default_rng(seed))
    W = DyadicWeight.power(g, 0.5)
    R1 = RankedExpansion(E, W, ZygmundLog(2, 1))
    R2 = RankedExpansion(E.scale(c), W, ZygmundLog(2, 1))
    assert np.array_equal(R1.ranking, R2.ranking)


def test_ranking_sorted_and_permutation(rng):
    g = DyadicGrid(2, 3, 0)
    E = _random_expansion(g, rng)
    R = RankedExpansion(E, DyadicWeight.power(g, 0.5), Power(3))
    assert sorted(R.ranking) == list(range(R.sizes.size))
    assert np.all(np.diff(R.sizes[R.ranking]) <= 0)


def test_greedy_error_parseval_tail():
    g = DyadicGrid(1, 4, 0)
    vals = 1.0 / np.arange(1, 9)
    E = _disjoint_expansion(g, vals)
    R = RankedExpansion(E, DyadicWeight.constant(g), Power(2))
    assert greedy_error(R, 4) == pytest.approx(math.sqrt(sum(k**-2 for k in range(5, 9))), rel=1e-12)
    assert greedy_error(R, 0) == pytest.approx(luxemburg_norm(synthesize(E), DyadicWeight.constant(g), Power(2)))
    assert greedy_error(R, 8) == pytest.approx(0, abs=1e-14)


def test_greedy_error_matches_direct_synthesis(rng):
    g = DyadicGrid(1, 6, 1)
    W = DyadicWeight.power(g, 0.5)
    F = ZygmundLog(2, 1)
    f = GridFunction(g, rng.standard_normal(g.shape))
    E = analyze(f)
    R = RankedExpansion(E, W, F)
    for N in (0, 3, 17):
        direct = luxemburg_norm(f - synthesize(greedy_step(R, N)), W, F)
        assert greedy_error(R, N) == pytest.approx(direct, rel=1e-9)


def test_greedy_error_daubechies(rng):
    g = DyadicGrid(1, 6, 0)
    W = DyadicWeight.power(g, 0.5)
    f = GridFunction(g, rng.standard_normal(g.shape))
    E = analyze(f, "daubechies:2")
    R = RankedExpansion(E, W, Power(3))
    direct = luxemburg_norm(f - synthesize(greedy_step(R, 10)), W, Power(3))
    assert greedy_error(R, 10) == pytest.approx(direct, rel=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_sigma_equals_greedy_in_l2(seed):
    rng = np.random.default_rng(seed)
    g = DyadicGrid(1, 6, 0)
    E = _random_expansion(g, rng)
    W = DyadicWeight.constant(g)
    R = RankedExpansion(E, W, Power(2))
    tail = np.sort(E.flat() ** 2)[::-1]
    for N in (1, 5, 20):
        sig = sigma_N_oracle(E, N, W, Power(2), include_scaling=False)
        assert sig == pytest.approx(math.sqrt(math.fsum(tail[N:])), rel=1e-9)
        assert greedy_error(R, N, include_scaling=False) == pytest.approx(sig, rel=1e-9)


def test_sigma_support_dominates_exhaustive(rng):
    g = DyadicGrid(1, 5, 0)
    W = DyadicWeight.constant(g)
    F = Power(3)
    E = _random_expansion(g, rng, k=10)
    for N in (1, 3, 6):
        sup = sigma_N_oracle(E, N, W, F, "support")
        exh = sigma_N_oracle(E, N, W, F, "exhaustive")
        assert exh <= sup * (1 + 1e-12)


def test_support_exact_matches_brute_force(rng):
    g = DyadicGrid(1, 4, 0)
    W = DyadicWeight.power(g, 0.5)
    F = ZygmundLog(2, 1)
    E = _random_expansion(g, rng, k=7)
    nz = np.flatnonzero(E.flat())
    for N in (1, 2, 4):
        best = math.inf
        for S in itertools.combinations(nz, N):
            v = np.zeros_like(E.flat())
            v[list(S)] = E.flat()[list(S)]
            resid = synthesize(E) - synthesize(E.with_flat(v))
            best = min(best, luxemburg_norm(resid, W, F))
        assert sigma_N_oracle(E, N, W, F, "support") == pytest.approx(best, rel=1e-9)


def test_exhaustive_cap():
    g = DyadicGrid(1, 6, 0)
    E = _random_expansion(g, np.random.default_rng(0), k=30)
    with pytest.raises(ExhaustiveTooLarge):
        sigma_N_oracle(E, 2, DyadicWeight.constant(g), Power(3), "exhaustive")


def test_sigma_monotone(rng):
    g = DyadicGrid(1, 6, 0)
    W = DyadicWeight.power(g, 0.5)
    E = _random_expansion(g, rng)
    vals = [sigma_N_oracle(E, N, W, Power(3)) for N in range(0, 12)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_greedy_curve_non_increasing_in_l2(rng):
    g = DyadicGrid(1, 6, 0)
    E = _random_expansion(g, rng)
    R = RankedExpansion(E, DyadicWeight.constant(g), Power(2))
    curve = greedy_error_curve(R, range(0, 64))
    assert np.all(np.diff(curve) <= 1e-12)


def test_sigma_of_brick_matches_half_brick():
    g = DyadicGrid(1, 6, 0)
    W = DyadicWeight.constant(g)
    F = ZygmundLog(2, 1)
    from orlicz_greedy.democracy import brick_expansion, brick_norm

    cubes = [(DyadicCube(5, (k,)), 1) for k in range(8)]
    E = brick_expansion(cubes, W, F)
    sig = sigma_N_oracle(E, 4, W, F, include_scaling=False)
    assert sig == pytest.approx(brick_norm(cubes[:4], W, F).norm, rel=1e-9)


def test_approx_norm_single_atom_is_zero():
    g = DyadicGrid(1, 4, 0)
    E = _disjoint_expansion(g, [2.0])
    assert approx_space_norm(E, 0.7, math.inf, DyadicWeight.constant(g), Power(2)) == 0


def test_approx_norm_geometric_closed_form():
    g = DyadicGrid(1, 5, 0)
    vals = 2.0 ** -np.arange(1, 11)
    E = _disjoint_expansion(g, vals)
    got = approx_space_norm(E, 0.5, math.inf, DyadicWeight.constant(g), Power(2))
    want = max(math.sqrt(N) * math.sqrt(sum(4.0**-k for k in range(N + 1, 11))) for N in range(1, 11))
    assert got == pytest.approx(want, rel=1e-9)


def test_approx_norm_monotone_in_alpha(rng):
    g = DyadicGrid(1, 5, 0)
    E = _random_expansion(g, rng, k=12)
    W = DyadicWeight.constant(g)
    vals = [approx_space_norm(E, a, 1.0, W, Power(3)) for a in (0.25, 0.5, 1.0)]
    assert vals[0] < vals[1] < vals[2]


def test_approx_norm_rejects_bad_parameters():
    g = DyadicGrid(1, 3, 0)
    E = _disjoint_expansion(g, [1.0])
    with pytest.raises(ValueError):
        approx_space_norm(E, 0, 1, DyadicWeight.constant(g), Power(2))
    with pytest.raises(ValueError):
        approx_space_norm(E, 1, -1, DyadicWeight.constant(g), Power(2))


def test_jackson_single_atom_constant_vanishes():
    g = DyadicGrid(1, 5, 0)
    E = _disjoint_expansion(g, [1.5])
    rep = jackson_check(E, 0.5, DyadicWeight.constant(g), Power(2), [2, 4, 8])
    assert all(c == 0 for c in rep.constants)


@pytest.mark.parametrize("p", [1.5, 2, 3])
def test_jackson_power_law_slope(p):
    g = DyadicGrid(1, 12, 0)
    W = DyadicWeight.constant(g)
    # finest-level atoms have equal norms, so sizes are proportional to coefficients
    from orlicz_greedy.wavelets import atom_norm

    beta = 1.5
    j = g.J - 1
    scale = atom_norm(W, Power(p), DyadicCube(j, (0,)))
    E = _disjoint_expansion(g, np.arange(1, 2**j + 1, dtype=float) ** -beta / scale)
    rep = jackson_check(E, beta - 1 / p, W, Power(p), [8, 16, 32, 64, 128, 256])
    assert rep.slope == pytest.approx(-beta + 1 / p, abs=0.05)
    assert rep.spread < 2


def test_bernstein_single_atom_ratio_one():
    g = DyadicGrid(1, 5, 0)
    W = DyadicWeight.power(g, 0.5)
    E = _disjoint_expansion(g, [2.0])
    assert bernstein_ratio(E, 0.5, W, ZygmundLog(2, 1)) == pytest.approx(1, rel=1e-9)


def test_bernstein_bounded():
    g = DyadicGrid(1, 8, 0)
    rep = bernstein_check(DyadicWeight.power(g, 0.5), Power(2), 0.5, [1, 4, 16, 64], trials=3, seed=1)
    assert rep.max_ratio < 10 and rep.spread < 3
