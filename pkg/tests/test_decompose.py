import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lift_spectra.decompose import (
    expected_bilinear,
    fiber_dyadic_profile,
    heavy_light_split,
    lattice_ball_size,
    lattice_round,
    lattice_step,
    light_variance_bound,
    light_variance_quantity,
    solve_zlogz,
    vector_dyadic_profile,
    w_star,
    zlogz_rhs,
)
from lift_spectra.errors import InputError
from lift_spectra.graphs import bouquet, catalog, lambda_of, petersen
from lift_spectra.lift import random_lift


def unit(rng, size):
    v = rng.standard_normal(size)
    return v / np.linalg.norm(v)


def unit_perp(rng, size):
    v = rng.standard_normal(size)
    v -= v.mean()
    return v / np.linalg.norm(v)


# -- heavy / light ---------------------------------------------------------

def test_split_of_flat_vectors_is_all_light():
    h = random_lift(petersen(), 10, 1)
    x = np.ones(100) / 10
    s = heavy_light_split(h, 2, x, x)
    assert s.r_heavy == 0 and s.r_light == pytest.approx(3)
    assert s.heavy_count == 0 and s.light_count == 2 * 3 * 100 // 2


def test_split_of_adjacent_indicators():
    h = random_lift(petersen(), 10, 1)
    v, w = h.edge_list()[5].tolist()
    x = np.zeros(100)
    y = np.zeros(100)
    x[v] = 1
    y[w] = 1
    s = heavy_light_split(h, 100, x, y)
    assert s.r_heavy == 1 and s.r_light == 0


def test_threshold_ties_go_heavy():
    h = random_lift(petersen(), 2, 1)
    v, w = h.edge_list()[0].tolist()
    x = np.zeros(20)
    y = np.zeros(20)
    x[v] = 0.5
    y[w] = 0.25
    # 2.5 / 20 == 0.5 * 0.25 exactly
    s = heavy_light_split(h, 2.5, x, y)
    assert s.threshold == 0.125
    assert s.r_heavy == 0.125 and s.r_light == 0


def test_split_rejects_bad_input():
    h = random_lift(petersen(), 2, 1)
    with pytest.raises(InputError):
        heavy_light_split(h, 0, np.zeros(20), np.zeros(20))
    with pytest.raises(InputError):
        heavy_light_split(h, 1, np.zeros(19), np.zeros(20))


@pytest.mark.parametrize("name", ["petersen", "k4", "bouquet(2)"])
def test_partition_identity_over_many_pairs(name):
    h = random_lift(catalog(name), 20, 3)
    A = h.dense_adjacency()
    rng = np.random.default_rng(0)
    lam = max(lambda_of(h.base), 1.0)
    for _ in range(1000):
        x = unit(rng, h.order)
        y = unit(rng, h.order)
        s = heavy_light_split(h, lam, x, y)
        assert abs(s.r_heavy + s.r_light - x @ A @ y) <= 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 50), st.floats(0.01, 50))
@settings(max_examples=60, deadline=None)
def test_raising_lam_never_loses_light_pairs(seed, lam1, lam2):
    lo, hi = sorted((lam1, lam2))
    rng = np.random.default_rng(seed)
    h = random_lift(petersen(), 6, seed)
    x, y = unit(rng, 60), unit(rng, 60)
    a = heavy_light_split(h, lo, x, y)
    b = heavy_light_split(h, hi, x, y)
    assert b.light_count >= a.light_count
    assert a.light_count + a.heavy_count == b.light_count + b.heavy_count


# -- dyadic profiles -------------------------------------------------------

def test_vector_profile_boundary_and_empty():
    lam, mn = 2.0, 40
    x = np.zeros(mn)
    x[7] = math.sqrt(lam / mn)
    p = vector_dyadic_profile(x, lam, mn)
    assert list(p.levels) == [0] and p.levels[0].tolist() == [7]
    assert vector_dyadic_profile(np.zeros(5), 1.0, 5).levels == {}


def _level_oracle(value, lam, mn, side):
    # floor(log2 t) by walking from a float estimate, checked with exact powers of two
    t = abs(value) / math.sqrt(lam / mn)
    l = math.floor(math.log2(t))
    while math.ldexp(1.0, l) > t:
        l -= 1
    while math.ldexp(1.0, l + 1) <= t:
        l += 1
    return l if side == "heavy" else -l


@given(
    hnp.arrays(np.float64, st.integers(1, 40), elements=st.floats(-10, 10, allow_subnormal=False)),
    st.floats(0.1, 10),
    st.sampled_from(["heavy", "light"]),
)
@settings(max_examples=100, deadline=None)
def test_vector_profile_partitions_support(x, lam, side):
    mn = x.size
    p = vector_dyadic_profile(x, lam, mn, side)
    assert p.support().tolist() == np.flatnonzero(x).tolist()
    for level, idx in p.levels.items():
        for i in idx:
            assert _level_oracle(x[i], lam, mn, side) == level
    assert p.l2_mass_bound() <= float(x @ x) * (1 + 1e-12)


def test_fiber_profile_examples():
    p = fiber_dyadic_profile(range(8, 16), 8)
    assert p.classes == {0: (frozenset({1}), 1, 1.0)}
    q = fiber_dyadic_profile([3 * 8 + 5], 8)
    assert list(q.classes) == [3]
    assert q.classes[3][2] == 1 / 8


@given(st.integers(1, 40), st.integers(1, 8), st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_fiber_profile_sandwich(n, m, seed):
    rng = np.random.default_rng(seed)
    A = np.flatnonzero(rng.random(m * n) < rng.random())
    assume(A.size > 0)
    p = fiber_dyadic_profile(A, n)
    counts = np.bincount(A // n, minlength=m)
    for i, (S, s, alpha) in p.classes.items():
        assert s == len(S)
        for v in S:
            assert 2.0 ** (-i - 1) < counts[v] / n <= 2.0 ** -i
    assert sum(len(S) for S, _, _ in p.classes.values()) == np.count_nonzero(counts)
    assert p.sandwich_holds()


# -- lattice ---------------------------------------------------------------

def test_lattice_round_examples():
    d, mn = 3, 10
    eps = lattice_step(d, mn)
    x = np.zeros(mn)
    x[[0, 3]] = [2 * eps, -5 * eps]
    xt, k = lattice_round(x, d, mn)
    np.testing.assert_allclose(xt, x, atol=1e-15)
    assert k.tolist()[:4] == [2, 0, 0, -5]
    y = np.zeros(mn)
    y[0] = 1.4 * eps
    yt, k = lattice_round(y, d, mn)
    assert k[0] == 1 and yt[0] == pytest.approx(eps)


def test_lattice_round_rejects_long_vectors():
    with pytest.raises(InputError):
        lattice_round(np.full(4, 0.6), 3, 4)


def test_lattice_repair_keeps_unit_ball():
    # every coordinate rounds up: 0.5 + 0.4 eps per coordinate on a unit vector
    d, mn = 2, 4
    x = np.full(mn, 0.5)
    xt, k = lattice_round(x, d, mn)
    assert int(k @ k) <= d * d * mn
    assert np.max(np.abs(xt - x)) <= lattice_step(d, mn) + 1e-15


@given(st.integers(2, 6), st.integers(1, 60), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_lattice_round_properties(d, mn, seed, scale):
    rng = np.random.default_rng(seed)
    x = unit(rng, mn) * scale
    xt, k = lattice_round(x, d, mn)
    eps = lattice_step(d, mn)
    assert np.max(np.abs(x - xt)) <= eps * (1 + 1e-12)
    assert int(k @ k) <= d * d * mn
    assert np.linalg.norm(xt) <= 1 + 1e-12
    assert np.linalg.norm(x - xt) <= 1 / d * (1 + 1e-12)


def test_lattice_cardinality_small_dimension():
    d, mn = 3, 2
    r = d * math.isqrt(mn) + d
    brute = sum(1 for k in itertools.product(range(-r, r + 1), repeat=mn) if sum(c * c for c in k) <= d * d * mn)
    assert lattice_ball_size(d, mn) == brute == 61
    assert brute <= (4 * math.sqrt(2) * d) ** mn


@pytest.mark.parametrize("d,mn", [(2, 1), (2, 3), (3, 3), (4, 2)])
def test_lattice_ball_size_matches_enumeration(d, mn):
    r = math.isqrt(d * d * mn)
    brute = sum(1 for k in itertools.product(range(-r, r + 1), repeat=mn) if sum(c * c for c in k) <= d * d * mn)
    assert lattice_ball_size(d, mn) == brute


# -- expectation -----------------------------------------------------------

def test_expected_bilinear_examples():
    g = petersen()
    n = 10
    x = np.ones(100) / 10
    assert expected_bilinear(g, n, x, x) == pytest.approx(3)
    y = np.zeros(100)
    y[20], y[21] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    assert expected_bilinear(g, n, y, y) == 0


def test_expected_bilinear_rejects_loops_and_bad_lengths():
    with pytest.raises(InputError):
        expected_bilinear(bouquet(2), 5, np.zeros(5), np.zeros(5))
    with pytest.raises(InputError):
        expected_bilinear(petersen(), 5, np.zeros(49), np.zeros(50))


def test_expected_bilinear_against_monte_carlo():
    g, n = petersen(), 10
    rng = np.random.default_rng(42)
    x, y = unit_perp(rng, 100), unit_perp(rng, 100)
    samples = np.array([x @ random_lift(g, n, s).dense_adjacency() @ y for s in range(200)])
    se = samples.std(ddof=1) / math.sqrt(len(samples))
    assert abs(samples.mean() - expected_bilinear(g, n, x, y)) <= 3 * se


@pytest.mark.parametrize("name", ["k4", "petersen", "dodecahedral", "cycle(7)"])
def test_expected_bilinear_bounded_by_lambda(name):
    g = catalog(name)
    n = 7
    lam = lambda_of(g)
    rng = np.random.default_rng(1)
    for _ in range(1000):
        x, y = unit_perp(rng, g.m * n), unit_perp(rng, g.m * n)
        assert expected_bilinear(g, n, x, y) <= lam + 1e-9


# -- z log z ---------------------------------------------------------------

def test_zlogz_exact_hits():
    assert solve_zlogz(2) == 2.0
    assert solve_zlogz(8) == 4.0
    assert solve_zlogz(24) == 8.0


def test_zlogz_grid():
    for b in np.geomspace(1.01, 1e6, 10_000):
        z = solve_zlogz(b)
        assert z > 1
        assert abs(z * math.log2(z) - b) <= 1e-12 * max(1.0, b)
        assert z < 2 * b / math.log2(b)


@given(st.floats(1e-9, 1e12))
@settings(max_examples=300)
def test_zlogz_residual_and_monotone(b):
    z = solve_zlogz(b)
    assert z > 1
    assert abs(z * math.log2(z) - b) <= 1e-12 * max(1.0, b)
    assert solve_zlogz(b * 1.01) >= z


def test_zlogz_rejects_nonpositive():
    for b in (0, -1, float("nan"), float("inf")):
        with pytest.raises(InputError):
            solve_zlogz(b)


def test_w_star_branches():
    # alpha chosen so the right-hand side is exactly 2, then exactly 8
    assert zlogz_rhs(1, 0, 0, 8.75, 0.0, 16) == 2.0
    assert w_star(1, 0, 0, 8.75, 0.0, 16) == pytest.approx(18)
    assert zlogz_rhs(1, 0, 0, 35.75, 0.0, 16) == 8.0
    assert w_star(1, 0, 0, 35.75, 0.0, 16) == pytest.approx(36)
    # tiny b: z below 2 is clamped
    assert w_star(1000, 0, 0, 0.0, 0.0, 10**8) == 9 * 1000 * 2
    with pytest.raises(InputError):
        w_star(0, 0, 0, 0.1, 0.1, 4)


@given(st.integers(1, 10**6), st.integers(0, 20), st.integers(0, 20), st.floats(0, 1), st.floats(0, 1), st.integers(1, 10**6))
@settings(max_examples=200)
def test_w_star_at_least_twice_prefactor(e, i, j, a, b, n):
    w = w_star(e, i, j, a, b, n)
    assert w * 2.0 ** (i + j) / (9 * e) >= 2 * (1 - 1e-15)


# -- light variance --------------------------------------------------------

def _light_variance_oracle(g, n, lam, x, y):
    mn = g.m * n
    total = 0.0
    A = g.adjacency()
    for a in range(mn):
        for b in range(mn):
            w = A[a // n, b // n]
            if w and abs(x[a] * y[b]) < lam / mn:
                total += w * x[a] ** 2 * y[b] ** 2
    return total


def test_light_variance_flat_vectors():
    g, n = petersen(), 4
    x = np.ones(40) / math.sqrt(40)
    val = light_variance_quantity(g, n, 2, x, x)
    assert val == pytest.approx(g.d / g.m)
    assert val == pytest.approx(_light_variance_oracle(g, n, 2, x, x))
    assert light_variance_quantity(g, n, 2, np.zeros(40), x) == 0


@pytest.mark.parametrize("name", ["petersen", "k4", "bouquet(2)"])
def test_light_variance_matches_pair_enumeration(name):
    g = catalog(name)
    n = 4
    rng = np.random.default_rng(3)
    for lam in (0.5, 2.0):
        x, y = unit(rng, g.m * n), unit(rng, g.m * n)
        assert light_variance_quantity(g, n, lam, x, y) == pytest.approx(_light_variance_oracle(g, n, lam, x, y), rel=1e-12)


def test_light_variance_bound_on_random_pairs():
    g, n, lam = petersen(), 10, 2.0
    bound = light_variance_bound(lam, g.d, g.m)
    assert bound == pytest.approx(50 * 4 * math.log2(3) / 10)
    rng = np.random.default_rng(11)
    for _ in range(1000):
        assert light_variance_quantity(g, n, lam, unit(rng, 100), unit(rng, 100)) <= bound


def test_light_variance_rejects_long_vectors():
    with pytest.raises(InputError):
        light_variance_quantity(petersen(), 2, 2, np.ones(20), np.zeros(20))
