import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orlicz_greedy.besov import (
    besov_identification_check,
    besov_wavelet_norm,
    identification_tau,
    weight_power_check,
)
from orlicz_greedy.wavelets import GridFunction, WaveletExpansion, analyze, slot_table
from orlicz_greedy.weights import DyadicCube, DyadicGrid, DyadicWeight


def _double_loop(E, alpha, p, q, W):
    g = E.grid
    d = g.d
    tab = slot_table(g)
    vals = E.flat()
    total = 0.0
    for l in range(1, 2**d):
        levels = []
        for j in range(-g.M, g.J):
            acc = 0.0
            for k in range(tab.size):
                if tab.level[k] != j or tab.species[k] != l or vals[k] == 0:
                    continue
                Q = tab.cube(k)
                acc += (Q.volume ** (-alpha / d - 0.5) * abs(vals[k]) * W.mass(Q) ** (1 / p)) ** p
            levels.append(acc ** (1 / p))
        total += sum(v**q for v in levels) ** (1 / q)
    return total


def test_l2_parseval_case(rng):
    g = DyadicGrid(1, 6, 0)
    E = analyze(GridFunction(g, rng.standard_normal(g.shape)))
    assert besov_wavelet_norm(E, 0, 2, 2, DyadicWeight.constant(g)) == pytest.approx(
        math.sqrt(float(np.sum(E.flat() ** 2))), rel=1e-12
    )


def test_single_atom():
    g = DyadicGrid(1, 6, 0)
    W = DyadicWeight.power(g, 0.5)
    Q = DyadicCube(3, (5,))
    E = WaveletExpansion.from_coefficients(g, {(Q, 1): -2.0})
    alpha, p = 0.7, 3.0
    want = 2 ** (3 * (alpha + 0.5)) * 2.0 * W.mass(Q) ** (1 / p)
    assert besov_wavelet_norm(E, alpha, p, 1.5, W) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("d,J", [(1, 5), (2, 3)])
def test_double_loop_oracle(d, J, rng):
    g = DyadicGrid(d, J, 1)
    W = DyadicWeight.power(g, 0.5)
    E = analyze(GridFunction(g, rng.standard_normal(g.shape)))
    for alpha, p, q in ((0.3, 2.0, 1.0), (1.0, 1.5, 3.0)):
        assert besov_wavelet_norm(E, alpha, p, q, W) == pytest.approx(_double_loop(E, alpha, p, q, W), rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_homogeneity(seed, c):
    g = DyadicGrid(1, 5, 0)
    W = DyadicWeight.power(g, 0.5)
    E = analyze(GridFunction(g, np.random.default_rng(seed).standard_normal(g.shape)))
    rep1 = besov_identification_check(E, 0.25, 2.0, W)
    rep2 = besov_identification_check(E.scale(c), 0.25, 2.0, W)
    for a, b in ((rep1.norm_a, rep2.norm_a), (rep1.norm_b, rep2.norm_b), (rep1.norm_c, rep2.norm_c)):
        assert b == pytest.approx(c * a, rel=1e-9)


def test_tau_exact():
    assert identification_tau(0.5, 2, 1) == 1.0
    assert identification_tau(0.25, 2, 1) == float(Fraction(4, 3))


def test_weight_power_constant():
    rep = weight_power_check(DyadicWeight.constant(DyadicGrid(1, 6, 1)), 2, 0.5)
    assert rep.ratio_min == pytest.approx(1) and rep.ratio_max == pytest.approx(1) and rep.jensen_holds


def test_weight_power_stable_in_J():
    bands = [weight_power_check(DyadicWeight.power(DyadicGrid(1, J, 0), 0.5), 2, 0.5).band for J in (6, 8, 10)]
    assert max(bands) / min(bands) < 1.05
    rep = weight_power_check(DyadicWeight.power(DyadicGrid(1, 8, 0), 0.5), 2, 0.5)
    assert rep.jensen_holds and math.isfinite(rep.ap_u)


def test_weight_power_errors():
    W = DyadicWeight.constant(DyadicGrid(1, 3, 0))
    with pytest.raises(ValueError):
        weight_power_check(W, 2, 1.5)
    with pytest.raises(ValueError):
        weight_power_check(W, 0.5, 0.5)


@pytest.mark.parametrize("d,J", [(1, 8), (2, 4)])
def test_exponent_collapse(d, J, rng):
    g = DyadicGrid(d, J, 0)
    E = analyze(GridFunction(g, rng.standard_normal(g.shape)))
    rep = besov_identification_check(E, d / 2, 2.0, DyadicWeight.constant(g))
    assert rep.tau == 1.0
    assert rep.norm_b == pytest.approx(rep.norm_a, rel=1e-12)


def test_single_atom_identification():
    g = DyadicGrid(1, 6, 0)
    W = DyadicWeight.power(g, 0.5)
    E = WaveletExpansion.from_coefficients(g, {(DyadicCube(2, (1,)), 1): 1.0})
    rep = besov_identification_check(E, 0.25, 2.0, W)
    assert rep.norm_c == pytest.approx(rep.norm_a, rel=1e-9)
    assert rep.cube_ratio_min <= rep.norm_b / rep.norm_a <= rep.cube_ratio_max * (1 + 1e-12)


def test_cube_ratio_within_band(rng):
    g = DyadicGrid(1, 8, 0)
    W = DyadicWeight.power(g, 0.5)
    E = analyze(GridFunction(g, rng.standard_normal(g.shape)))
    rep = besov_identification_check(E, 0.25, 2.0, W)
    band = weight_power_check(W, 2.0, rep.tau / 2.0).band
    assert rep.cube_ratio_max <= 1 + 1e-12
    assert rep.cube_ratio_min >= band ** (-1 / 2.0) * (1 - 1e-12)
    assert rep.cube_ratio_min <= rep.norm_b / rep.norm_a <= rep.cube_ratio_max * (1 + 1e-12)
