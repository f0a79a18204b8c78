import itertools
import math

import pytest

from suplab.amplifier import (
    AmpSupport, AmpVector, amp_lower, amplifier, build_support, build_x, convolve_y,
    support_classes, y_arrays,
)
from suplab.catalog import get_form
from suplab.qseries import lam

SCANNABLE = ("1.12.a", "5.4.a", "6.4.a", "7.4.a")


def fake(N, primes):
    return AmpSupport(2.0, N, tuple(primes))


def test_build_support_examples():
    assert build_support(3, 7).primes == (3, 5)
    assert build_support(3, 5).primes == (3,)
    assert build_support(10, 1).primes == (11, 13, 17, 19)
    assert build_support(2.5, 1).primes == (3,)
    with pytest.raises(ValueError):
        build_support(1.5, 1)


def test_build_x_examples():
    sup = build_support(3, 5)
    amp = build_x({3: -0.5, 9: -0.75}.__getitem__, sup)
    assert amp.x == {3: -1, 9: -1}
    amp = build_x({3: 0.0, 9: -1.0}.__getitem__, sup)
    assert amp.x == {3: 1, 9: -1}
    sup = build_support(3, 1)
    amp = build_x(lambda l: 0.3, sup)
    assert set(amp.x) == {3, 5, 9, 25} and set(amp.x.values()) == {1}


def test_convolution_examples():
    for signs in itertools.product((-1, 1), repeat=4):
        x = dict(zip((3, 5, 9, 25), signs))
        y = convolve_y(AmpVector(fake(1, (3, 5)), x)).y
        assert y[1] == 4
        assert y[9] == x[3] ** 2 + x[9] ** 2 == 2
        assert y[15] == 2 * x[3] * x[5]


def test_amp_lower_examples():
    sup = build_support(3, 7)
    assert amp_lower(lambda l: 0.0 if l in (3, 5) else -1.0, sup) == pytest.approx(2)
    one = build_support(3, 5)
    v = amp_lower({3: 1 / math.sqrt(2), 9: -0.5}.__getitem__, one)
    assert v == pytest.approx(1 / math.sqrt(2) + 0.5)
    delta = get_form("1.12.a")
    sup = build_support(10, 1)
    assert amp_lower(lambda n: lam(delta, n), sup) >= len(sup.primes) / 2


@pytest.mark.parametrize("label", SCANNABLE)
@pytest.mark.parametrize("L", [3, 5, 10, 20])
def test_amp_lower_holds_for_catalog(label, L):
    f = get_form(label)
    sup = build_support(L, f.N)
    assert amp_lower(lambda n: lam(f, n), sup) >= len(sup.primes) / 2


@pytest.mark.parametrize("size", range(1, 7))
def test_y_support_classification_is_exhaustive(size):
    primes = (3, 5, 7, 11, 13, 17)[:size]
    sup = fake(1, primes)
    classes = support_classes(sup)
    xs = sup.x_support
    for signs in itertools.product((-1, 1), repeat=len(xs)):
        amp = convolve_y(AmpVector(sup, dict(zip(xs, signs))))
        assert set(amp.y) == classes
        assert amp.y[1] == len(xs)
        assert all(abs(v) <= 2 for l, v in amp.y.items() if l != 1)


@pytest.mark.parametrize("label", SCANNABLE)
def test_y_reproduces_squared_amplifier(label):
    # Hecke multiplicativity turns sum_l y_l lambda(l) into (sum_l x_l lambda(l))^2
    f = get_form(label)
    amp = amplifier(lambda n: lam(f, n), 3, f.N)
    ls, ys = y_arrays(amp)
    lhs = sum(int(v) * lam(f, int(l)) for l, v in zip(ls, ys))
    a = math.fsum(v * lam(f, l) for l, v in amp.x.items())
    assert lhs == pytest.approx(a * a, rel=1e-10)


def test_level_five_example():
    f = get_form("5.4.a")
    amp = amplifier(lambda n: lam(f, n), 3, 5)
    assert amp.support.primes == (3,)
    assert amp.y[1] == 2 and amp.y[9] == 2
    d = amp.as_dict()
    assert d["primes"] == [3] and set(d["x"]) == {"3", "9"}
    with pytest.raises(ValueError):
        y_arrays(build_x(lambda n: 1.0, amp.support))
