import json
import math

import numpy as np
import pytest

from suplab.arith import divisor_counts, primes_upto
from suplab.catalog import get_form
from suplab.qseries import (
    EtaQuotient, HeckeCheckError, QSeries, TruncationError, certified_length, coset_reps,
    cusp_translations, deligne_ok, dump_coeff_table, eta_expand, eval_form, eval_many, hecke_check,
    lam, load_coeff_table, p1_reps, petersson_integral, psi, weighted_abs,
)


def pentagonal_delta(M):
    """q prod (1 - q^n)^24 via the pentagonal series and repeated polynomial products."""
    L = M - 1
    euler = [0] * (L + 1)
    k = 0
    while True:
        hit = False
        for j in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2):
            if j <= L:
                euler[j] = (-1) ** k
                hit = True
        if not hit:
            break
        k += 1
    prod = [1] + [0] * L
    for _ in range(24):
        new = [0] * (L + 1)
        for i, a in enumerate(prod):
            if a:
                for j in range(L + 1 - i):
                    if euler[j]:
                        new[i + j] += a * euler[j]
        prod = new
    return prod


DELTA = eta_expand(EtaQuotient.parse("1:24"), 300, 1, "1.12.a")


def test_eta_quotient_metadata():
    q = EtaQuotient.parse("1:4,5:4")
    assert (q.weight, q.order_at_infinity, q.natural_level) == (4, 1, 5)
    with pytest.raises(ValueError):
        EtaQuotient.parse("1:5").order_at_infinity
    with pytest.raises(ValueError):
        eta_expand(EtaQuotient.parse("1:-24"), 10)
    with pytest.raises(ValueError):
        eta_expand(EtaQuotient.parse("1:24"), 100_001)


def test_delta_matches_pentagonal_oracle():
    assert list(DELTA.coeffs) == pentagonal_delta(300)
    assert DELTA.coeffs[:3] == (1, -24, 252)
    assert DELTA.k == 12 and DELTA.N == 1


def test_truncation_is_consistent():
    q = EtaQuotient.parse("1:2,2:2,3:2,6:2")
    assert eta_expand(q, 400).coeffs[:150] == eta_expand(q, 150).coeffs


@pytest.mark.parametrize("label", ["1.12.a", "5.4.a", "6.4.a", "7.4.a", "11.2.a"])
def test_catalog_forms_are_certified(label):
    f = get_form(label)
    assert f.a(1) == 1 and f.M == 2000
    rep = hecke_check(f)
    assert rep.ok, rep.as_dict()
    assert deligne_ok(f)
    for p in primes_upto(int(math.isqrt(f.M))):
        if f.N % p:
            assert lam(f, p) ** 2 - lam(f, p * p) == pytest.approx(1, abs=1e-10)
        else:
            assert f.a(p) ** 2 == p ** (f.k - 2)


def test_hecke_examples():
    assert hecke_check(DELTA.truncate(200)).ok
    f5 = get_form("5.4.a")
    assert f5.a(5) ** 2 == 25
    bad = list(DELTA.truncate(200).coeffs)
    bad[5] += 1
    rep = hecke_check(QSeries(tuple(bad), 12, 1))
    assert not rep.multiplicative_ok and rep.first_failure == 6
    assert not rep.ok


def test_psi_and_lam():
    assert lam(DELTA, 1) == 1
    assert lam(DELTA, 2) == pytest.approx(-24 / 2**5.5)
    assert lam(DELTA, 2) ** 2 - lam(DELTA, 4) == pytest.approx(1, abs=1e-12)
    with pytest.raises(IndexError):
        psi(DELTA, 301)


def test_deligne_is_exact():
    tau = divisor_counts(DELTA.M)
    for n in range(1, DELTA.M + 1):
        assert abs(psi(DELTA, n)) <= tau[n] + 1e-12
    worse = QSeries((1, 100) + DELTA.coeffs[2:], 12, 1)
    assert not deligne_ok(worse)


def test_eval_tail_honesty():
    rng = np.random.default_rng(5)
    forms = [get_form(lab) for lab in ("1.12.a", "5.4.a", "6.4.a", "7.4.a")]
    for _ in range(100):
        f = forms[int(rng.integers(len(forms)))]
        z = complex(rng.uniform(-1, 1), rng.uniform(math.sqrt(3) / (2 * f.N), 1.5))
        tol = 10.0 ** rng.uniform(-13, -6)
        val, tail = eval_form(f, z, tol)
        n0, _ = certified_length(f, z.imag, tol)
        n = np.arange(1, min(2 * n0, f.M) + 1)
        ref = np.sum(np.array(f.coeffs[: n.size], dtype=float) * np.exp(2j * np.pi * n * z))
        assert tail <= tol
        assert abs(val - ref) <= tail + 1e-13 * max(1.0, abs(ref))


def test_eval_examples():
    val, tail = eval_form(DELTA, 1j)
    assert tail <= 1e-12
    assert certified_length(DELTA, 1.0, 1e-12)[0] <= 15
    n = np.arange(1, 16)
    direct = np.sum(np.array(DELTA.coeffs[:15], dtype=float) * np.exp(-2 * np.pi * n))
    assert val == pytest.approx(direct, rel=1e-12)
    zs = np.array([0.1 + 0.3j, -0.4 + 0.7j])
    a, _ = eval_many(get_form("5.4.a"), zs)
    b, _ = eval_many(get_form("5.4.a"), zs + 1)
    assert np.allclose(a, b, rtol=1e-12, atol=0)
    y = 10.0
    lead = y**6 * math.exp(-2 * math.pi * y)
    assert abs(weighted_abs(DELTA, [1j * y])[0] / lead - 1) < 1e-8


def test_eval_rejects_uncertifiable_points():
    with pytest.raises(TruncationError):
        eval_form(DELTA.truncate(20), 0.01j)
    with pytest.raises(ValueError):
        eval_many(DELTA, [-1j])


@pytest.mark.parametrize("N,index", [(1, 1), (5, 6), (6, 12), (7, 8), (15, 24)])
def test_coset_representatives(N, index):
    reps = coset_reps(N)
    assert len(reps) == len(p1_reps(N)) == len(cusp_translations(N)) == index
    seen = set()
    for A, B, C, D in reps:
        assert A * D - B * C == 1
        # distinct right cosets: the bottom rows are distinct in P^1(Z/N)
        units = [u for u in range(1, N + 1) if math.gcd(u, N) == 1]
        key = min(((u * C) % N, (u * D) % N) for u in units)
        assert key not in seen
        seen.add(key)


def test_cusp_translations_reproduce_the_form():
    f = get_form("6.4.a")
    rng = np.random.default_rng(2)
    zs = rng.uniform(-0.5, 0.5, 20) + 1j * rng.uniform(0.9, 1.5, 20)
    for (A, B, C, D), (r, n) in zip(coset_reps(6), cusp_translations(6)):
        moved = (A * zs + B) / (C * zs + D)
        assert np.allclose(weighted_abs(f, moved), weighted_abs(f, (zs + n) / r), rtol=1e-9)


def test_petersson_delta():
    res = petersson_integral(DELTA, 1e-8)
    finer = petersson_integral(DELTA, 1e-9)
    assert res.value > 0 and res.n_cells == 1
    assert abs(res.value - finer.value) <= 1e-8 * finer.value
    doubled = petersson_integral(DELTA.scaled(2), 1e-8)
    assert doubled.value == pytest.approx(4 * res.value, rel=1e-8)


@pytest.mark.parametrize("label,cells", [("5.4.a", 6), ("6.4.a", 12)])
def test_petersson_levels(label, cells):
    f = get_form(label)
    res = petersson_integral(f, 1e-6)
    finer = petersson_integral(f, 1e-7)
    assert res.n_cells == cells
    assert abs(res.value - finer.value) <= 1e-6 * finer.value


def test_coefficient_table_round_trip(tmp_path):
    p = tmp_path / "delta.json"
    dump_coeff_table(DELTA, p)
    back = load_coeff_table(p)
    assert back.coeffs == DELTA.coeffs and (back.k, back.N) == (12, 1)
    # a(1) = -1 tables are normalised
    neg = tmp_path / "neg.json"
    neg.write_text(json.dumps({"level": 1, "weight": 12, "coeffs": [-a for a in DELTA.coeffs]}))
    assert load_coeff_table(neg).coeffs == DELTA.coeffs


def test_coefficient_table_rejections(tmp_path):
    bad = list(DELTA.coeffs)
    bad[5] += 1
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"level": 1, "weight": 12, "coeffs": bad}))
    with pytest.raises(HeckeCheckError) as exc:
        load_coeff_table(p)
    assert exc.value.report.first_failure == 6
    for payload in ({"level": 1, "weight": 12, "coeffs": [1, 2.5]},
                    {"level": 1, "weight": 12, "coeffs": [2, 4]},
                    {"weight": 12, "coeffs": [1]}):
        p.write_text(json.dumps(payload))
        with pytest.raises(ValueError):
            load_coeff_table(p)
