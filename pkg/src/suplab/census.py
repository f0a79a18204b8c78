"""Matrix censuses over G_l(N) = {(a, b; c, d) integral : N | c, det = l}.

``enumerate_window`` lists the matrices with ``|u(z)| <= delta`` using the
search ranges

    c in N Z,  |c| y <= 2 delta;   |c z + d| <= 2 delta;   |a + d| <= delta,

with b solved from the determinant (c != 0), or a d = l and b from the
window ``|(d - a) x - b| <= y sqrt(delta^2 - (a + d)^2)`` (c = 0).
``brute_oracle`` is the independent quadruple loop used to check it.

Parabolic matrices of determinant l = q^2 are parametrised by a cusp a/c
and a step t:

    alpha = (q - a c t, a^2 t; -c^2 t, q + a c t),   N | c^2 t,

with ``|u_alpha(z)| = |2 q y i + t |c z - a|^2| / y``.  Each such alpha
stands for the pair {alpha, -alpha}; both are members of G_l(N).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from scipy.special import zeta

from .arith import is_square
from .hyperbolic import (
    GEOM_TOL,
    HPoint,
    IntMat,
    Lattice2,
    MatClass,
    classify,
    gauss_reduce,
    u_closed,
    u_general,
)

#: default epsilon in the N^eps factors of the counting bounds
EPS = 0.1
DELTA_GUARD = 1e6
ORACLE_BOX_GUARD = 60


@dataclass(frozen=True)
class EnumWindow:
    z: HPoint
    N: int
    l: int
    delta: float

    def __post_init__(self):
        if not isinstance(self.z, HPoint):
            object.__setattr__(self, "z", HPoint.from_complex(complex(self.z)))
        if self.N <= 0 or self.l <= 0:
            raise ValueError("N and l must be positive")
        if not (0 <= self.delta <= DELTA_GUARD):
            raise ValueError(f"delta must lie in [0, {DELTA_GUARD:g}]")


@dataclass(frozen=True)
class CountSplit:
    m_star: int = 0
    m_upper: int = 0
    m_parab: int = 0

    @property
    def total(self) -> int:
        return self.m_star + self.m_upper + self.m_parab

    def __add__(self, other: "CountSplit") -> "CountSplit":
        return CountSplit(
            self.m_star + other.m_star,
            self.m_upper + other.m_upper,
            self.m_parab + other.m_parab,
        )


def _window(w_or_z, N=None, l=None, delta=None) -> EnumWindow:
    if isinstance(w_or_z, EnumWindow):
        return w_or_z
    return EnumWindow(w_or_z, N, l, delta)


def _rows_generic(x, y, N, l, delta):
    """(a, b, c, d) arrays for c != 0, filtered by |u| <= delta."""
    out = []
    dl = delta + GEOM_TOL
    r2 = x * x + y * y
    cmax = int(math.floor(2 * dl / y))
    tmax = int(math.floor(dl))
    tau = np.arange(-tmax, tmax + 1, dtype=np.int64)
    for c in range(N, cmax + 1, N):
        for cs in (-c, c):
            h = math.sqrt(max(4 * dl * dl - (c * y) ** 2, 0.0))
            dlo, dhi = math.ceil(-cs * x - h), math.floor(-cs * x + h)
            if dhi < dlo:
                continue
            d = np.arange(dlo, dhi + 1, dtype=np.int64)
            D, T = np.meshgrid(d, tau, indexing="ij")
            A = T - D
            num = A * D - l
            ok = num % cs == 0
            A, D, num = A[ok], D[ok], num[ok]
            B = num // cs
            re, im = u_closed(A, B, cs, D, x, y)
            keep = np.hypot(re, im) <= dl
            n = int(keep.sum())
            if n:
                out.append(np.stack([A[keep], B[keep], np.full(n, cs), D[keep]], axis=1))
    return out


def _rows_upper(x, y, l, delta):
    out = []
    dl = delta + GEOM_TOL
    for a in range(1, l + 1):
        if l % a:
            continue
        for sign in (1, -1):
            aa, dd = sign * a, sign * (l // a)
            tr = aa + dd
            if abs(tr) > dl:
                continue
            half = y * math.sqrt(max(dl * dl - tr * tr, 0.0))
            center = (dd - aa) * x
            b = np.arange(math.ceil(center - half), math.floor(center + half) + 1, dtype=np.int64)
            if b.size == 0:
                continue
            re, im = u_closed(aa, b, 0, dd, x, y)
            b = b[np.hypot(re, im) <= dl]
            if b.size:
                out.append(np.stack([np.full(b.size, aa), b, np.zeros(b.size, np.int64), np.full(b.size, dd)], axis=1))
    return out


def _to_mats(rows) -> list[IntMat]:
    if not rows:
        return []
    arr = np.concatenate(rows)
    mats = [IntMat(*map(int, r)) for r in arr]
    mats.sort(key=IntMat.sort_key)
    return mats


def enumerate_window(w: EnumWindow | HPoint | complex, N=None, l=None, delta=None) -> list[IntMat]:
    """All matrices of G_l(N) with |u(z)| <= delta, in canonical (c, d, a, b) order."""
    w = _window(w, N, l, delta)
    x, y = w.z.x, w.z.y
    if w.delta < 2 * math.sqrt(w.l) - GEOM_TOL:
        return []
    rows = _rows_generic(x, y, w.N, w.l, w.delta) + _rows_upper(x, y, w.l, w.delta)
    return _to_mats(rows)


def window_array(z, N: int, l: int, delta: float) -> np.ndarray:
    """Same matrices as :func:`enumerate_window` as an (n, 4) int64 array (unsorted)."""
    w = _window(z, N, l, delta)
    if w.delta < 2 * math.sqrt(w.l) - GEOM_TOL:
        return np.zeros((0, 4), dtype=np.int64)
    rows = _rows_generic(w.z.x, w.z.y, w.N, w.l, w.delta) + _rows_upper(w.z.x, w.z.y, w.l, w.delta)
    return np.concatenate(rows) if rows else np.zeros((0, 4), dtype=np.int64)


def split_of(mats, l: int) -> CountSplit:
    ms = mu = mp = 0
    for m in mats:
        cls = classify(m, l)
        if cls is MatClass.GENERIC:
            ms += 1
        elif cls is MatClass.UPPER_TRIANGULAR:
            mu += 1
        else:
            mp += 1
    return CountSplit(ms, mu, mp)


def count_split(w: EnumWindow | HPoint | complex, N=None, l=None, delta=None) -> CountSplit:
    w = _window(w, N, l, delta)
    return split_of(enumerate_window(w), w.l)


def oracle_box(z, N: int, l: int, delta: float) -> tuple[int, int, int, int]:
    """Per-entry bounds (|a|, |b|, |c|, |d|) that contain every matrix of the window."""
    z = z.z if isinstance(z, HPoint) else complex(z)
    x, y = abs(z.real), z.imag
    dl = delta + GEOM_TOL
    cmax = math.floor(2 * dl / y)
    cmax -= cmax % N
    dmax = max(math.floor(cmax * x + 2 * dl), l)
    amax = max(math.floor(dl + dmax), l)
    # Re u bounds b: |c|z|^2 + (d - a) x - b| <= delta y
    bmax = math.ceil(cmax * abs(z) ** 2 + (amax + dmax) * x + dl * y)
    return int(amax), int(bmax), int(cmax), int(dmax)


def brute_oracle(z, N: int, l: int, delta: float, box) -> list[IntMat]:
    """Naive scan of |a|, |b|, |c|, |d| <= box for members of G_l(N) with |u| <= delta.

    ``box`` is an int or a per-entry tuple (a, b, c, d) of bounds.
    """
    if isinstance(box, int):
        box = (box,) * 4
    if max(box) > ORACLE_BOX_GUARD:
        raise ValueError(f"oracle box {box} exceeds the guard {ORACLE_BOX_GUARD}")
    z = z.z if isinstance(z, HPoint) else complex(z)
    ab, bb, cb, db = box
    bs = np.arange(-bb, bb + 1)
    cs = np.arange(-cb, cb + 1)
    ds = np.arange(-db, db + 1)
    B, C, D = np.meshgrid(bs, cs, ds, indexing="ij")
    found = []
    for a in range(-ab, ab + 1):
        sel = (a * D - B * C == l) & (C % N == 0)
        if not sel.any():
            continue
        b, c, d = B[sel], C[sel], D[sel]
        u = u_general(float(a), b.astype(float), c.astype(float), d.astype(float), z)
        keep = np.abs(u) <= delta + GEOM_TOL
        found.extend(IntMat(a, int(bi), int(ci), int(di)) for bi, ci, di in zip(b[keep], c[keep], d[keep]))
    found.sort(key=IntMat.sort_key)
    return found


def census_table(z, N: int, delta: float, lmax: int | None = None) -> dict[int, CountSplit]:
    """Counts (M_*, M_u, M_p) for every 1 <= l <= lmax in one sweep.

    Unlike :func:`enumerate_window` the determinant is free here: for each
    (c, d, a + d) the admissible b form an interval from the Re u window.
    """
    z = z.z if isinstance(z, HPoint) else complex(z)
    x, y = z.real, z.imag
    dl = delta + GEOM_TOL
    if lmax is None:
        lmax = int(math.floor(dl * dl / 4))
    ms = np.zeros(lmax + 1, dtype=np.int64)
    mu = np.zeros(lmax + 1, dtype=np.int64)
    mp = np.zeros(lmax + 1, dtype=np.int64)
    if lmax < 1:
        return {}
    r2 = x * x + y * y
    tmax = int(math.floor(dl))
    tau = np.arange(-tmax, tmax + 1, dtype=np.int64)
    cmax = int(math.floor(2 * dl / y))
    for c in range(N, cmax + 1, N):
        for cs in (-c, c):
            h = math.sqrt(max(4 * dl * dl - (c * y) ** 2, 0.0))
            dlo, dhi = math.ceil(-cs * x - h), math.floor(-cs * x + h)
            if dhi < dlo:
                continue
            D, T = np.meshgrid(np.arange(dlo, dhi + 1, dtype=np.int64), tau, indexing="ij")
            D, T = D.ravel(), T.ravel()
            A = T - D
            half = y * np.sqrt(np.maximum(dl * dl - T * T, 0.0))
            center = cs * r2 + (D - A) * x
            lo = np.ceil(center - half).astype(np.int64)
            cnt = np.floor(center + half).astype(np.int64) - lo + 1
            cnt = np.maximum(cnt, 0)
            rep = np.repeat(np.arange(D.size), cnt)
            if rep.size == 0:
                continue
            start = np.repeat(np.cumsum(cnt) - cnt, cnt)
            Bv = lo[rep] + (np.arange(rep.size) - start)
            Av, Dv, Tv = A[rep], D[rep], T[rep]
            L = Av * Dv - Bv * cs
            ok = (L >= 1) & (L <= lmax)
            Av, Bv, Dv, Tv, L = Av[ok], Bv[ok], Dv[ok], Tv[ok], L[ok]
            re, im = u_closed(Av, Bv, cs, Dv, x, y)
            keep = np.hypot(re, im) <= dl
            L, Tv = L[keep], Tv[keep]
            par = Tv * Tv == 4 * L
            mp += np.bincount(L[par], minlength=lmax + 1)
            ms += np.bincount(L[~par], minlength=lmax + 1)
    amax = int(math.floor(dl))
    for a in range(-amax, amax + 1):
        for d in range(-amax, amax + 1):
            l = a * d
            if l < 1 or l > lmax or abs(a + d) > dl:
                continue
            half = y * math.sqrt(max(dl * dl - (a + d) ** 2, 0.0))
            center = (d - a) * x
            b = np.arange(math.ceil(center - half), math.floor(center + half) + 1)
            if b.size == 0:
                continue
            re, im = u_closed(a, b, 0, d, x, y)
            n = int((np.hypot(re, im) <= dl).sum())
            if a == d:
                mp[l] += n
            else:
                mu[l] += n
    return {l: CountSplit(int(ms[l]), int(mu[l]), int(mp[l])) for l in range(1, lmax + 1)}


# ---------------------------------------------------------------------------
# parabolic matrices


@dataclass(frozen=True)
class ParabolicParam:
    """Parameters (cusp a/c, step t) of the parabolic pair +-alpha of determinant l."""

    a: int
    c: int
    t: int
    l: int

    @property
    def matrix(self) -> IntMat:
        q = math.isqrt(self.l)
        a, c, t = self.a, self.c, self.t
        return IntMat(q - a * c * t, a * a * t, -c * c * t, q + a * c * t)


def _root_or_raise(l: int) -> int:
    if not is_square(l):
        raise ValueError(f"l={l} is not a perfect square: no parabolic matrices")
    return math.isqrt(l)


def _cusps(z: complex, radius: float):
    """Canonical primitive (a, c) with |c z - a| <= radius: c > 0, or (a, c) = (1, 0)."""
    x, y = z.real, z.imag
    out = [(1, 0)] if radius >= 1 else []
    cmax = int(math.floor(radius / y))
    for c in range(1, cmax + 1):
        h = math.sqrt(max(radius * radius - (c * y) ** 2, 0.0))
        for a in range(math.ceil(c * x - h), math.floor(c * x + h) + 1):
            if math.gcd(a, c) == 1:
                out.append((a, c))
    return out


def parabolic_stream(z, N: int, l: int, T: int, radius: float | None = None) -> Iterator[tuple[ParabolicParam, complex]]:
    """Parabolic pairs of G_l(N) with 0 < |t| <= T and cusp height |c z - a| <= radius.

    The scalar pair (t = 0) is yielded first, once.  ``radius`` defaults to T.
    """
    q = _root_or_raise(l)
    if T < 1:
        raise ValueError("T must be >= 1")
    zc = z.z if isinstance(z, HPoint) else complex(z)
    y = zc.imag
    yield ParabolicParam(1, 0, 0, l), complex(0.0, -2 * q)
    for a, c in _cusps(zc, T if radius is None else radius):
        m = abs(c * zc - a) ** 2
        step = N // math.gcd(N, c)
        for t in range(-T, T + 1):
            if t == 0 or t % step:
                continue
            yield ParabolicParam(a, c, t, l), complex(-t * m / y, -2 * q)


def _cusp_radius(zc: complex, k: int, budget: float) -> tuple[float, float]:
    """Radius rho and a bound <= budget for all t-terms of cusps beyond rho."""
    y = zc.imag
    red = gauss_reduce(Lattice2(1.0, zc))
    diam = abs(red.b1) + abs(red.b2)
    z2 = 2 * zeta(k)
    rho = max(2.0, 2 * diam)
    while True:
        # lattice points beyond rho: sum |v|^{-2k} <= 2k pi (1 + D/rho)^2 rho^{2-2k} / (y (2k - 2))
        far = 2 * k * math.pi * (1 + diam / rho) ** 2 * rho ** (2 - 2 * k) / (y * (2 * k - 2))
        if z2 * y**k * far <= budget:
            return rho, z2 * y**k * far
        rho *= 1.25


class ParabolicSum(NamedTuple):
    value: float
    tail_bound: float


def _cusp_arrays(zc: complex, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`_cusps`: arrays (a, c) in the same order."""
    x, y = zc.real, zc.imag
    A = [np.array([1])] if radius >= 1 else []
    C = [np.array([0])] if radius >= 1 else []
    for c in range(1, int(math.floor(radius / y)) + 1):
        h = math.sqrt(max(radius * radius - (c * y) ** 2, 0.0))
        a = np.arange(math.ceil(c * x - h), math.floor(c * x + h) + 1)
        a = a[np.gcd(a, c) == 1]
        A.append(a)
        C.append(np.full(a.size, c))
    if not A:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(A).astype(np.int64), np.concatenate(C).astype(np.int64)


def _parabolic_terms(zc: complex, N: int, l: int, k: int, tail_tol: float):
    q = math.isqrt(l)
    y = zc.imag
    beta = 2 * q * y
    rho, far = _cusp_radius(zc, k, tail_tol / 2)
    a, c = _cusp_arrays(zc, rho)
    budget = tail_tol / 2 / max(a.size, 1)
    m = np.abs(c * zc - a) ** 2
    step = N // np.gcd(N, c)
    g = y / (step * m)
    # per cusp: sum_{t > T} (y / (t s m))^k <= g^k T^(1-k) / (k - 1), for both signs of t
    T = np.maximum(1, np.ceil((2 * g**k / ((k - 1) * budget)) ** (1 / (k - 1)))).astype(np.int64)
    tail = float(np.sum(2 * g**k * T.astype(float) ** (1 - k) / (k - 1)))
    idx = np.repeat(np.arange(a.size), T)
    first = np.cumsum(T) - T
    t = (np.arange(idx.size) - first[idx] + 1) * step[idx]
    w = t * m[idx] + 1j * beta
    abs_terms = np.concatenate([[(2.0 * q) ** -k], 2 * (y / np.abs(w)) ** k])
    # (t m + i beta)^-k + (-t m + i beta)^-k = 2 Re (t m + i beta)^-k for even k
    signed_terms = np.concatenate([[(2.0 * q) ** -k * (-1) ** (k // 2)], 2 * (y**k * w ** (-k)).real])
    return abs_terms, signed_terms, tail + far


def _check_k(k: int) -> None:
    if k % 2 or k < 4:
        raise ValueError(f"weight k={k} must be even and >= 4")


def parabolic_sum(z, N: int, l: int, k: int, tail_tol: float = 1e-12) -> ParabolicSum:
    """Sum of |u_alpha(z)|^{-k} over parabolic pairs of G_l(N), with a certified tail.

    One term per pair +-alpha (the scalar pair counts once).  Non-square l
    gives exactly 0.
    """
    _check_k(k)
    if not is_square(l):
        return ParabolicSum(0.0, 0.0)
    zc = z.z if isinstance(z, HPoint) else complex(z)
    terms, _, tail = _parabolic_terms(zc, N, l, k, tail_tol)
    return ParabolicSum(math.fsum(terms), tail)


def parabolic_u_sum(z, N: int, l: int, k: int, tail_tol: float = 1e-12) -> ParabolicSum:
    """Signed sum of u_alpha(z)^{-k} over parabolic pairs (real for even k).

    The sum over all parabolic members of G_l(N) is twice this value.
    """
    _check_k(k)
    if not is_square(l):
        return ParabolicSum(0.0, 0.0)
    zc = z.z if isinstance(z, HPoint) else complex(z)
    _, terms, tail = _parabolic_terms(zc, N, l, k, tail_tol)
    return ParabolicSum(math.fsum(terms), tail)


# ---------------------------------------------------------------------------
# comparison bounds


def bound_mstar(N, y, delta, mode: str = "general", eps: float = EPS) -> float:
    """Right-hand sides for sums of M_* over l (general / square / fixed-l1-times-square)."""
    if mode == "general":
        val = delta**2 / (N * y) + delta**3 / math.sqrt(N) + delta**4 / N
    elif mode in ("square", "fixed-l1-times-square"):
        val = delta / (N * y) + delta**2 / math.sqrt(N) + delta**3 / N
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return val * N**eps


def bound_mu(N, y, delta, lam_range, mode: str = "single-prime", eps: float = EPS) -> float:
    """Right-hand sides for sums of M_u over prime-structured l."""
    base = 1 + delta * math.sqrt(N) * y + delta**2 * y
    if mode in ("single-prime", "both-squares"):
        val = base
    elif mode in ("two-prime", "prime-times-square"):
        val = lam_range * base
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return val * N**eps


def bound_para(N, y, l, k, eps: float = EPS) -> float:
    """theta(l) 2^-k l^((1-k)/2) (y + N^-1/3 y^1/3 + N^-5/3 y^-4/3 + N^-1) N^eps."""
    if not is_square(l):
        return 0.0
    shape = y + N ** (-1 / 3) * y ** (1 / 3) + N ** (-5 / 3) * y ** (-4 / 3) + 1 / N
    return 2.0**-k * l ** ((1 - k) / 2) * shape * N**eps
