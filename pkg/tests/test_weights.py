import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orlicz_greedy.weights import (
    DomainExhausted,
    DyadicCube,
    DyadicGrid,
    DyadicWeight,
    TauOutOfRange,
    ap_constant,
    parse_weight,
    read_grid_file,
    select_disjoint_cubes,
    tower_limits,
    weight_of_cube,
    write_grid_file,
)


def test_cube_geometry():
    Q = DyadicCube(2, (1, 3))
    assert Q.volume == 2.0**-4
    kids = Q.children()
    assert len(kids) == 4 and all(c.level == 3 and c.parent() == Q for c in kids)
    assert all(Q.contains(c) for c in kids)


@given(st.integers(0, 6), st.integers(0, 63), st.integers(0, 6), st.integers(0, 63))
def test_cubes_nested_or_disjoint(j1, k1, j2, k2):
    A = DyadicCube(j1, (k1 % 2**j1,))
    B = DyadicCube(j2, (k2 % 2**j2,))
    assert A.disjoint(B) != (A.contains(B) or B.contains(A))


def test_weight_of_cube_lebesgue():
    g = DyadicGrid(2, 4, 1)
    W = DyadicWeight.constant(g)
    assert weight_of_cube(W, DyadicCube(0, (0, 0))) == pytest.approx(1)
    for j in range(-1, 5):
        assert W.mass(DyadicCube(j, (0, 0))) == pytest.approx(2.0 ** (-2 * j))


def test_tree_consistency(sqrt_weight):
    W = sqrt_weight
    g = W.grid
    for j in range(-g.M, g.J):
        parent = W.level_masses(j)
        kids = W.level_masses(j + 1)
        assert np.allclose(parent, kids.reshape(-1, 2).sum(axis=1), rtol=1e-13)


@pytest.mark.parametrize("J", [2, 6, 10])
def test_power_weight_cells_integrate_exactly(J):
    W = DyadicWeight.power(DyadicGrid(1, J, 0), 0.5)
    assert W.mass(DyadicCube(0, (0,))) == pytest.approx(2 / 3, rel=1e-13)


def test_power_weight_midpoint_2d_converges():
    # reference: the same weight on a much finer grid
    ref = DyadicWeight.power(DyadicGrid(2, 9, 0), 0.5).total_mass
    errs = [abs(DyadicWeight.power(DyadicGrid(2, J, 0), 0.5).total_mass - ref) for J in (3, 5, 7)]
    assert errs[0] > errs[1] > errs[2]


def test_ap_constant_examples():
    g = DyadicGrid(1, 8, 2)
    assert ap_constant(DyadicWeight.constant(g), 2) == pytest.approx(1)
    vals = [ap_constant(DyadicWeight.power(DyadicGrid(1, J, 2), 0.5), 2) for J in (6, 8, 10)]
    assert max(vals) / min(vals) < 1.1
    spikes = []
    for J in (4, 6, 8):
        gg = DyadicGrid(1, J, 0)
        m = np.full(gg.shape, 1e-3) * gg.cell_volume
        m[0] = 1.0
        spikes.append(ap_constant(DyadicWeight(gg, m), 2))
    assert spikes[0] < spikes[1] < spikes[2]


def test_tower_limits():
    g = DyadicGrid(1, 4, 3)
    rep = tower_limits(DyadicWeight.constant(g), DyadicCube(0, (0,)))
    assert [m for _, m in rep.ascent] == pytest.approx([1, 2, 4, 8])
    desc = [m for _, m in rep.descent]
    assert all(b < a for a, b in zip(desc, desc[1:]))
    assert rep.consistent
    rep2 = tower_limits(DyadicWeight.power(g, 0.5), DyadicCube(0, (0,)))
    asc = [m for _, m in rep2.ascent]
    assert all(b > a for a, b in zip(asc, asc[1:]))


def test_select_unit_intervals():
    W = DyadicWeight.constant(DyadicGrid(1, 4, 3))
    cubes = select_disjoint_cubes(W, 1.0, 4)
    assert len(cubes) == 4 and all(W.mass(Q) == pytest.approx(1) for Q in cubes)
    assert all(a.disjoint(b) for a, b in itertools.combinations(cubes, 2))
    chat = W.regularity.selection_constant(1)
    for Q in select_disjoint_cubes(W, 1.5, 2):
        assert chat * 1.5 < W.mass(Q) <= 1.5


def test_select_power_weight(sqrt_weight):
    W = sqrt_weight
    chat = W.regularity.selection_constant(1)
    cubes = select_disjoint_cubes(W, 0.1, 8)
    assert all(chat * 0.1 < W.mass(Q) <= 0.1 for Q in cubes)
    assert all(a.disjoint(b) for a, b in itertools.combinations(cubes, 2))


def test_select_errors(sqrt_weight):
    with pytest.raises(TauOutOfRange):
        select_disjoint_cubes(sqrt_weight, 10 * sqrt_weight.total_mass, 1)
    with pytest.raises(DomainExhausted) as info:
        select_disjoint_cubes(sqrt_weight, sqrt_weight.total_mass / 3, 50)
    assert len(info.value.found) < 50


def test_grid_file_round_trip(tmp_path, rng):
    g = DyadicGrid(2, 3, 1)
    v = rng.random(g.shape)
    write_grid_file(tmp_path / "w.grid", g, v)
    g2, v2 = read_grid_file(tmp_path / "w.grid")
    assert g2 == g and np.array_equal(v, v2)
    W = parse_weight(f"file:{tmp_path / 'w.grid'}", g)
    assert W.total_mass == pytest.approx(float(v.sum()))


def test_grid_file_errors(tmp_path):
    p = tmp_path / "bad.grid"
    p.write_text("1 2 0\n1 2 3\n")
    with pytest.raises(ValueError, match="expected 4 values"):
        read_grid_file(p)


def test_regularity_sandwich(sqrt_weight):
    W = sqrt_weight
    reg = W.regularity
    g = W.grid
    for j in range(-g.M, g.J - 1):
        for k in range(0, 2 ** (j + g.M), max(1, 2 ** (j + g.M) // 4)):
            Q = DyadicCube(j, (k,))
            for A in (Q.children()[0], Q.children()[0].children()[1]):
                ratio = W.mass(A) / W.mass(Q)
                rel = A.volume / Q.volume
                assert reg.c1 * rel**reg.p_hat * (1 - 1e-9) <= ratio <= reg.c2 * rel**reg.delta_hat * (1 + 1e-9)
