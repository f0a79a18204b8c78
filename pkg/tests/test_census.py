import math

import numpy as np
import pytest

from suplab.arith import is_square
from suplab.census import (
    CountSplit, EnumWindow, bound_mstar, bound_mu, bound_para, brute_oracle, census_table,
    count_split, enumerate_window, oracle_box, parabolic_stream, parabolic_sum, parabolic_u_sum,
    window_array,
)
from suplab.hyperbolic import IntMat, MatClass, classify, u_value

S = IntMat(0, -1, 1, 0)


def random_windows(n, seed, lmax=12, nmax=8, covered=True):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        N = int(rng.integers(1, nmax + 1))
        l = int(rng.integers(1, lmax + 1))
        z = complex(rng.uniform(-1, 1), rng.uniform(0.35, 1.5))
        delta = 2 * math.sqrt(l) + rng.uniform(0, 3.5)
        if covered and max(oracle_box(z, N, l, delta)) > 40:
            continue
        out.append((z, N, l, delta))
    return out


def test_enum_window_validation():
    with pytest.raises(ValueError):
        EnumWindow(1j, 0, 1, 2.0)
    with pytest.raises(ValueError):
        EnumWindow(1j, 1, 0, 2.0)
    with pytest.raises(ValueError):
        EnumWindow(1j, 1, 1, 2e6)


def test_enumerate_window_examples():
    assert enumerate_window(1j, 1, 1, 1.99) == []
    mats = enumerate_window(1j, 1, 1, 2.0)
    expected = sorted([IntMat(1, 0, 0, 1), IntMat(-1, 0, 0, -1), S, IntMat(0, 1, -1, 0)],
                      key=IntMat.sort_key)
    assert mats == expected
    assert mats == brute_oracle(1j, 1, 1, 2.0, 8)
    # +-S has trace 0, so it is generic; +-I is parabolic
    assert count_split(1j, 1, 1, 2.0) == CountSplit(2, 0, 2)
    assert count_split(1j, 5, 1, 2.5).m_star == 0


def test_split_matches_oracle_classification():
    z, N, l, delta = 1 / 3 + 0.8j, 2, 4, 4.2
    oracle = brute_oracle(z, N, l, delta, oracle_box(z, N, l, delta))
    split = count_split(z, N, l, delta)
    assert split.total == len(oracle)
    assert split.m_parab == sum(1 for m in oracle if abs(m.trace) == 4)
    assert split.m_star == sum(1 for m in oracle if classify(m, l) is MatClass.GENERIC)


def test_brute_oracle_examples():
    assert IntMat(2, 0, 0, 2) in brute_oracle(1j, 1, 4, 4.0, 6)
    assert IntMat(-2, 0, 0, -2) in brute_oracle(1j, 1, 4, 4.0, 6)
    assert brute_oracle(1j, 1, 4, 3.99, 6) == []
    with pytest.raises(ValueError):
        brute_oracle(1j, 1, 1, 2.0, 61)


@pytest.mark.parametrize("seed", range(4))
def test_oracle_equivalence(seed):
    for z, N, l, delta in random_windows(55, seed):
        box = oracle_box(z, N, l, delta)
        assert enumerate_window(z, N, l, delta) == brute_oracle(z, N, l, delta, box), (z, N, l, delta)


def test_census_empty_below_two_sqrt_l():
    rng = np.random.default_rng(11)
    done = 0
    while done < 200:
        N, l = int(rng.integers(1, 16)), int(rng.integers(1, 26))
        z = complex(rng.uniform(-1, 1), rng.uniform(0.2, 2))
        delta = 2 * math.sqrt(l) - 1e-6
        if max(oracle_box(z, N, l, delta)) > 60:
            continue
        done += 1
        assert count_split(z, N, l, delta) == CountSplit()
        assert brute_oracle(z, N, l, delta, oracle_box(z, N, l, delta)) == []


def test_window_invariants():
    for z, N, l, delta in random_windows(60, 99, covered=False):
        mats = enumerate_window(z, N, l, delta)
        split = count_split(z, N, l, delta)
        assert split.total == len(mats)
        if 2 * delta < N * z.imag:
            assert split.m_star == 0
        for m in mats:
            assert m.det == l and m.c % N == 0
            assert abs(u_value(m, z)) <= delta + 1e-9
            # Pell form of the determinant condition
            assert (m.a - m.d) ** 2 + 4 * m.b * m.c == m.trace**2 - 4 * l
        arr = window_array(z, N, l, delta)
        assert sorted((IntMat(*map(int, r)) for r in arr), key=IntMat.sort_key) == mats


def test_census_table_matches_per_l_counts():
    for z, N, delta in [(0.1 + 0.7j, 1, 7.0), (0.31 + 0.25j, 5, 9.0), (-0.2 + 0.12j, 6, 8.0)]:
        table = census_table(z, N, delta)
        assert max(table) == math.floor(delta**2 / 4)
        for l, split in table.items():
            assert split == count_split(z, N, l, delta), (z, N, l)


def test_parabolic_stream_examples():
    items = list(parabolic_stream(1j, 1, 1, 1))
    p0, u0 = items[0]
    assert p0.t == 0 and abs(u0) == pytest.approx(2)
    got = {(p.a, p.c, p.t): u for p, u in items[1:]}
    for key in [(1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)]:
        assert abs(got[key]) ** 2 == pytest.approx(5)
    scalar = next(iter(parabolic_stream(0.3 + 2j, 3, 4, 1)))
    assert abs(scalar[1]) == pytest.approx(4)
    with pytest.raises(ValueError):
        next(iter(parabolic_stream(1j, 1, 2, 1)))


@pytest.mark.parametrize("z,N,l", [(1j, 1, 1), (0.2 + 0.5j, 5, 4), (-0.4 + 0.3j, 6, 9), (0.1 + 0.05j, 15, 1)])
def test_parabolic_stream_matrices(z, N, l):
    q = math.isqrt(l)
    for p, u in parabolic_stream(z, N, l, 6):
        m = p.matrix
        assert m.det == l and m.trace == 2 * q
        assert m.c % N == 0
        assert math.gcd(p.a, p.c) == 1
        if p.t:
            assert p.c > 0 or (p.a, p.c) == (1, 0)
        assert abs(u_value(m, z) - u) <= 1e-12 * max(1, abs(u))
        ref = complex(p.t * abs(p.c * z - p.a) ** 2, 2 * q * z.imag) / z.imag
        assert abs(abs(u) - abs(ref)) <= 1e-12 * abs(u)


def test_parabolic_stream_finds_every_parabolic_window_matrix():
    z, N, l, delta = 0.27 + 0.4j, 3, 4, 9.0
    win = {m for m in enumerate_window(z, N, l, delta) if m.trace**2 == 4 * l}
    stream = set()
    for p, u in parabolic_stream(z, N, l, 60, radius=10):
        if abs(u) <= delta:
            m = p.matrix
            stream |= {m, IntMat(-m.a, -m.b, -m.c, -m.d)}
    assert stream == win


def test_parabolic_sum_examples():
    assert parabolic_sum(1j, 1, 2, 4) == (0.0, 0.0)
    v = parabolic_sum(1j, 1, 1, 12)
    assert v.value >= 2.0**-12
    with pytest.raises(ValueError):
        parabolic_sum(1j, 1, 1, 5)
    with pytest.raises(ValueError):
        parabolic_sum(1j, 1, 1, 2)


@pytest.mark.parametrize("z,N,l,k", [
    (1j * math.sqrt(3) / 10, 5, 1, 4), (0.2 + 0.05j, 7, 4, 4), (0.33 + 0.6j, 6, 1, 8), (1j, 1, 9, 4),
])
def test_parabolic_tail_is_honest(z, N, l, k):
    coarse = parabolic_sum(z, N, l, k, 1e-6)
    fine = parabolic_sum(z, N, l, k, 1e-13)
    assert coarse.tail_bound <= 1e-6
    assert fine.value >= coarse.value - 1e-15
    assert fine.value - coarse.value <= coarse.tail_bound + 1e-14


def test_parabolic_u_sum_bounded_by_abs_sum():
    for z, N, l, k in [(0.1 + 0.4j, 5, 1, 4), (0.3 + 0.2j, 6, 4, 6)]:
        s = parabolic_u_sum(z, N, l, k)
        a = parabolic_sum(z, N, l, k)
        assert abs(s.value) <= a.value + 1e-15


def test_bound_examples():
    assert bound_para(1, 1, 1, 4, eps=0) == pytest.approx(0.25)
    assert bound_para(5, 0.3, 2, 4) == 0.0
    for l in (1, 4, 9):
        assert bound_para(5, 0.3, l, 6) == pytest.approx(bound_para(5, 0.3, l, 4) / (4 * l))
    b1, b2 = bound_mstar(5, 0.2, 10, "general"), bound_mstar(5, 0.2, 20, "general")
    assert 4 * b1 <= b2 <= 16 * b1
    for mode in ("square", "fixed-l1-times-square"):
        assert bound_mstar(5, 0.2, 10, mode) <= b1
    assert bound_mu(7, 0.4, 0, 30, "single-prime") == pytest.approx(7**0.1)
    assert bound_mu(7, 0.4, 5, 30, "two-prime") == pytest.approx(30 * bound_mu(7, 0.4, 5, 30, "single-prime"))
    with pytest.raises(ValueError):
        bound_mstar(5, 0.2, 10, "bogus")


def test_mu_census_at_i_fits_single_constant():
    # sum of M_u over prime l <= 25 at z = i, N = 1 against the single-prime bound
    table = census_table(1j, 1, 10.0, 25)
    primes = [l for l in table if l > 1 and all(l % p for p in range(2, l))]
    total = sum(table[l].m_upper for l in primes)
    assert total > 0
    ratio = total / bound_mu(1, 1.0, 10.0, 25, "single-prime")
    assert 0 < ratio < 10


def test_square_census_sums():
    table = census_table(0.1 + 0.3j, 5, 12.0)
    sq = sum(s.m_parab for l, s in table.items() if not is_square(l))
    assert sq == 0
