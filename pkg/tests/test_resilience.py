import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsrc.codec import CodeParameterError
from hsrc.galois import get_field, rank_over_base
from hsrc.resilience import (
    AvailabilityModel,
    _batch_rank,
    _coordinate_matrix,
    p_obj_hsrc,
    p_obj_mds,
    rank_count,
    rank_table,
    retrieval_profile,
    rho,
    rho_x,
    simulate_p_obj,
)


def full_rows(q, d):
    """Every nonzero vector of F_q^d as an element of F_{q^d}."""
    t = q.bit_length() - 1
    f = get_field(t, d) if t * d >= 2 else get_field(1, 2)
    rows = [f.from_coordinates(c) for c in itertools.product(range(q), repeat=d) if any(c)]
    return rows, f


def brute_counts(q, d):
    """R(x, d, r) by enumerating every x-subset; each counts x! orderings."""
    rows, f = full_rows(q, d)
    counts = {}
    for x in range(len(rows) + 1):
        for subset in itertools.combinations(rows, x):
            r = rank_over_base(subset, f)
            counts[(x, r)] = counts.get((x, r), 0) + math.factorial(x)
    return counts


@pytest.mark.parametrize("q,d", [(2, 2), (2, 3), (2, 4), (4, 2)])
def test_rank_count_matches_enumeration(q, d):
    counts = brute_counts(q, d)
    for x in range(q**d):
        for r in range(d + 2):
            assert rank_count(x, d, r, q) == counts.get((x, r), 0), (x, r)


def test_rank_count_examples():
    assert rank_count(2, 2, 2, 2) == 6
    assert rank_count(3, 2, 2, 2) == 6
    assert all(rank_count(x, 5, 0, 2) == 0 for x in range(1, 32))
    assert rank_count(0, 5, 0, 2) == 1
    assert rank_count(40, 5, 3, 2) == 0
    assert rank_count(3, 3, 3, 2) == 7 * 6 * 4


@pytest.mark.parametrize("q,d", [(2, 3), (2, 5), (2, 6), (4, 3), (8, 2)])
def test_rank_table_invariants(q, d):
    table = rank_table(q, d)
    rows = q**d - 1
    for x in range(rows + 1):
        assert sum(table.count(x, r) for r in range(d + 1)) == math.perm(rows, x)
        for r in range(d + 1):
            if r > x or (x > 0 and r == 0):
                assert table.count(x, r) == 0
        if x <= d:
            assert table.count(x, x) == math.prod(q**d - q**i for i in range(x))


def test_rho_basics():
    assert rho(2, 2, 2, 2) == 1
    assert rho(3, 5, 7, 2) == 0
    for x in range(32):
        assert sum(rho(x, 5, r, 2) for r in range(6)) == 1
    assert all(rho_x(x, 5, 5, 2) == 0 for x in range(5))


@pytest.mark.parametrize("q,d,k", [(2, 5, 5), (2, 5, 3), (2, 6, 4), (4, 3, 2)])
def test_rho_x_monotone(q, d, k):
    vals = [rho_x(x, d, k, q) for x in range(q**d)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == 1


def test_rho_values_31_5():
    assert round(float(1 - rho_x(5, 5, 5, 2)), 4) == 0.5096
    assert round(float(1 - rho_x(7, 5, 5, 2)), 4) == 0.0757
    # 15 nonzero vectors of a hyperplane span only 4 dimensions
    assert rho_x(15, 5, 5, 2) < 1
    assert all(rho_x(x, 5, 5, 2) == 1 for x in range(16, 32))
    assert 1 - rho_x(13, 5, 5, 2) == Fraction(31 * math.comb(15, 13), math.comb(31, 13))


def test_profile():
    prof = retrieval_profile(31, 5, 2)
    assert len(prof.rows) == 32
    assert prof.decodable_subsets == 31 * 30 * 28 * 24 * 16 // 120
    assert all(r.rho_x == 0 for r in prof.rows[:5])
    assert [r.mds for r in prof.rows] == [int(x >= 5) for x in range(32)]
    with pytest.raises(CodeParameterError):
        retrieval_profile(30, 5, 2)


def test_decodable_subsets_by_enumeration():
    rows, f = full_rows(2, 4)
    count = sum(1 for s in itertools.combinations(rows, 3) if rank_over_base(s, f) == 3)
    assert retrieval_profile(15, 3, 2).decodable_subsets == count


def test_model_validation():
    with pytest.raises(ValueError):
        AvailabilityModel(1.5, 31, 5)
    with pytest.raises(CodeParameterError):
        AvailabilityModel(0.5, 30, 5)
    assert AvailabilityModel(0.5, 63, 2, 4).d == 3


@pytest.mark.parametrize("n,k,q", [(31, 5, 2), (15, 3, 2), (15, 2, 4), (63, 3, 4)])
def test_p_obj_extremes_and_modes(n, k, q):
    assert p_obj_hsrc(AvailabilityModel(1.0, n, k, q)) == 1
    assert p_obj_hsrc(AvailabilityModel(0.0, n, k, q)) == 0
    for p in (0.1, 0.35, 0.5, 0.75, 0.95):
        m = AvailabilityModel(p, n, k, q)
        exact = p_obj_hsrc(m, exact=True)
        assert 0 <= exact <= 1
        assert abs(float(exact) - p_obj_hsrc(m)) < 1e-12
        assert abs(float(p_obj_mds(n, k, p, exact=True)) - p_obj_mds(n, k, p)) < 1e-12


def test_p_obj_mds_examples():
    assert p_obj_mds(5, 5, 0.5, exact=True) == Fraction(1, 32)
    assert p_obj_mds(31, 5, 1.0) == 1
    direct = sum(Fraction(math.comb(31, i), 2**31) for i in range(5, 32))
    assert p_obj_mds(31, 5, 0.5, exact=True) == direct


@settings(max_examples=50, deadline=None)
@given(p=st.floats(0, 1), shape=st.sampled_from([(31, 5, 2), (15, 3, 2), (15, 2, 4), (7, 3, 2)]))
def test_mds_dominates(p, shape):
    n, k, q = shape
    m = AvailabilityModel(p, n, k, q)
    assert p_obj_hsrc(m, exact=True) <= p_obj_mds(n, k, p, exact=True)


def test_p_obj_brute_force_small():
    """Sum over all 2^7 availability patterns of HSRC(7,3)."""
    rows, f = full_rows(2, 3)
    p = Fraction(3, 5)
    total = Fraction(0)
    for mask in range(1 << 7):
        live = [rows[i] for i in range(7) if mask >> i & 1]
        if rank_over_base(live, f) >= 3:
            total += p ** len(live) * (1 - p) ** (7 - len(live))
    assert p_obj_hsrc(AvailabilityModel(p, 7, 3, 2), exact=True) == total


@pytest.mark.parametrize("q,e", [(2, 5), (4, 3), (8, 2)])
def test_batch_rank_matches_field_rank(q, e):
    n = q**e - 1
    model = AvailabilityModel(0.5, n, 2, q)
    coords, mul = _coordinate_matrix(model)
    inverse = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inverse[a] = int(np.nonzero(mul[a] == 1)[0][0])
    t = q.bit_length() - 1
    f = get_field(t, e) if t * e >= 2 else get_field(1, 2)
    points = [f.from_coordinates([int(v) for v in row]) for row in coords]
    rng = np.random.default_rng(4)
    alive = rng.random((300, n)) < 0.3
    rows = np.where(alive[:, :, None], coords[None], 0)
    ranks = _batch_rank(rows, mul, inverse)
    for trial in range(300):
        live = [points[i] for i in np.nonzero(alive[trial])[0]]
        assert ranks[trial] == rank_over_base(live, f)


def test_simulation_edges():
    m = AvailabilityModel(1.0, 31, 5)
    est = simulate_p_obj(m, 1000)
    assert est.estimate == 1 and est.stderr == 0
    assert simulate_p_obj(AvailabilityModel(0.0, 31, 5), 1000).estimate == 0
    with pytest.raises(ValueError):
        simulate_p_obj(m, 0)


def test_simulation_deterministic_and_thread_independent():
    m = AvailabilityModel(0.3, 31, 5)
    a = simulate_p_obj(m, 25_000, seed=9, threads=1)
    b = simulate_p_obj(m, 25_000, seed=9, threads=4)
    assert a == b
    assert simulate_p_obj(m, 25_000, seed=10) != a


@pytest.mark.parametrize(
    "p,n,k,q",
    [(0.2, 31, 5, 2), (0.3, 31, 5, 2), (0.5, 31, 5, 2), (0.7, 31, 5, 2), (0.9, 31, 5, 2), (0.3, 15, 3, 2), (0.25, 15, 2, 4)],
)
def test_simulation_agrees_with_analysis(p, n, k, q):
    m = AvailabilityModel(p, n, k, q)
    exact = p_obj_hsrc(m)
    trials = 100_000
    est = simulate_p_obj(m, trials, seed=12345)
    se = math.sqrt(exact * (1 - exact) / trials)
    assert abs(est.estimate - exact) <= 3 * se + 1e-12
