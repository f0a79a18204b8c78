"""Truncated q-expansions of cusp forms.

Coefficients are exact Python integers ``a(1), ..., a(M)`` of
``f(z) = sum_n a(n) e(n z)``; for a normalised newform ``a(1) = 1`` and

    psi(n) = a(n) / n^((k-1)/2),    |psi(n)| <= tau(n)   (Deligne).

The Deligne bound certifies truncation tails: ``|a(n)| <= 2 |a(1)| n^(k/2)``.
"""
from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaincc, gamma

from .arith import divisor_counts, divisor_sums, egcd, prime_factors, primes_upto, psl2_index
from .hyperbolic import HPoint

MAX_TRUNCATION = 100_000


class TruncationError(ValueError):
    """The stored coefficients cannot certify the requested tail."""


class QuadratureError(RuntimeError):
    pass


class HeckeCheckError(ValueError):
    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class QSeries:
    """Cusp form of weight k and level N known through a(1..M)."""

    coeffs: tuple[int, ...]
    k: int
    N: int
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(a) for a in self.coeffs))
        if self.k < 2 or self.k % 2:
            raise ValueError(f"weight {self.k} must be even and >= 2")
        if self.N < 1:
            raise ValueError("level must be positive")
        if not self.coeffs:
            raise ValueError("empty coefficient list")

    @property
    def M(self) -> int:
        return len(self.coeffs)

    def a(self, n: int) -> int:
        if not 1 <= n <= self.M:
            raise IndexError(f"coefficient index {n} outside 1..{self.M}")
        return self.coeffs[n - 1]

    def scaled(self, c: int) -> "QSeries":
        return QSeries(tuple(c * a for a in self.coeffs), self.k, self.N, self.label)

    def truncate(self, M: int) -> "QSeries":
        return QSeries(self.coeffs[:M], self.k, self.N, self.label)

    @cached_property
    def _float_coeffs(self) -> np.ndarray:
        return np.array([float(a) for a in self.coeffs])


# ---------------------------------------------------------------------------
# eta quotients


@dataclass(frozen=True)
class EtaQuotient:
    """prod_d eta(d z)^e_d given as ((d, e_d), ...)."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        facs = tuple(sorted((int(d), int(e)) for d, e in self.factors if e))
        if not facs or any(d < 1 for d, _ in facs):
            raise ValueError("eta quotient needs positive d and nonzero exponents")
        object.__setattr__(self, "factors", facs)

    @classmethod
    def parse(cls, text: str) -> "EtaQuotient":
        """Parse ``"1:4,5:4"`` as eta(z)^4 eta(5z)^4."""
        return cls(tuple(tuple(int(v) for v in part.split(":")) for part in text.split(",")))

    @property
    def weight(self) -> int:
        total = sum(e for _, e in self.factors)
        if total % 2:
            raise ValueError("eta quotient has half-integral weight")
        return total // 2

    @property
    def order_at_infinity(self) -> int:
        s = sum(d * e for d, e in self.factors)
        if s % 24:
            raise ValueError(f"sum d*e = {s} is not divisible by 24")
        return s // 24

    @property
    def natural_level(self) -> int:
        return math.lcm(*(d for d, _ in self.factors))


def eta_power_series(factors, L: int) -> list[int]:
    """Coefficients g_0..g_L of prod_d prod_n (1 - q^(d n))^e_d.

    Uses the log-derivative recursion n g_n = sum_j h_j g_{n-j} with
    h_j = -sum_{d | j} e_d d sigma(j/d).
    """
    sig = divisor_sums(max(L, 1))
    h = [0] * (L + 1)
    for d, e in factors:
        for j in range(d, L + 1, d):
            h[j] -= e * d * sig[j // d]
    g = [1] + [0] * L
    for n in range(1, L + 1):
        s = sum(map(operator.mul, h[1 : n + 1], reversed(g[:n])))
        g[n] = s // n
    return g


def eta_expand(q: EtaQuotient, M: int, N: int | None = None, label: str | None = None) -> QSeries:
    """Exact coefficients a(1..M) of an eta quotient of integral weight."""
    if not 1 <= M <= MAX_TRUNCATION:
        raise ValueError(f"truncation M={M} outside 1..{MAX_TRUNCATION}")
    v = q.order_at_infinity
    if v < 1:
        raise ValueError(f"eta quotient has order {v} at infinity; not a cusp form")
    k = q.weight
    g = eta_power_series(q.factors, M - v)
    coeffs = [0] * (v - 1) + g
    return QSeries(tuple(coeffs[:M]), k, q.natural_level if N is None else N, label)


# ---------------------------------------------------------------------------
# Hecke certification


@dataclass(frozen=True)
class HeckeReport:
    multiplicative_ok: bool
    recursion_ok: bool
    bad_prime_ok: bool
    first_failure: int | None

    @property
    def ok(self) -> bool:
        return self.multiplicative_ok and self.recursion_ok and self.bad_prime_ok

    def as_dict(self) -> dict:
        return {
            "multiplicative_ok": self.multiplicative_ok,
            "recursion_ok": self.recursion_ok,
            "bad_prime_ok": self.bad_prime_ok,
            "first_failure": self.first_failure,
        }


def hecke_check(f: QSeries) -> HeckeReport:
    """Check the newform relations satisfied by a(n) up to M.

    * a(1) a(mn) = a(m) a(n) for coprime m, n
    * a(p^(j+1)) = a(p) a(p^j) - p^(k-1) a(1) a(p^(j-1)) for p not dividing N
    * a(p)^2 = p^(k-2) a(1)^2 and a(p^(j+1)) a(1) = a(p) a(p^j) for p | N
    """
    a, M, k, N = f.a, f.M, f.k, f.N
    a1 = a(1)
    if a1 == 0:
        raise ValueError("a(1) = 0")
    bad = {"mult": [], "rec": [], "badp": []}
    for m in range(2, M + 1):
        for n in range(m + 1, M // m + 1):
            if math.gcd(m, n) == 1 and a(m) * a(n) != a1 * a(m * n):
                bad["mult"].append(m * n)
    for p in primes_upto(M):
        if N % p:
            pj, prev, cur = p, a1, a(p)
            while pj * p <= M:
                nxt = a(pj * p)
                if a1 * nxt != cur * a(p) - p ** (k - 1) * a1 * prev:
                    bad["rec"].append(pj * p)
                pj, prev, cur = pj * p, cur, nxt
        else:
            if a(p) ** 2 != p ** (k - 2) * a1 * a1:
                bad["badp"].append(p)
            pj = p
            while pj * p <= M:
                if a1 * a(pj * p) != a(p) * a(pj):
                    bad["badp"].append(pj * p)
                pj *= p
    fails = [i for v in bad.values() for i in v]
    return HeckeReport(not bad["mult"], not bad["rec"], not bad["badp"], min(fails) if fails else None)


def deligne_ok(f: QSeries) -> bool:
    """Exact check of a(n)^2 <= tau(n)^2 n^(k-1) a(1)^2 for n <= M."""
    tau = divisor_counts(f.M)
    a1sq = f.a(1) ** 2
    return all(
        a * a <= int(tau[n]) ** 2 * n ** (f.k - 1) * a1sq for n, a in enumerate(f.coeffs, start=1)
    )


def psi(f: QSeries, n: int) -> float:
    """Normalised coefficient a(n) / (a(1) n^((k-1)/2))."""
    return f.a(n) / (f.a(1) * n ** ((f.k - 1) / 2))


def lam(f: QSeries, n: int) -> float:
    """Hecke eigenvalue of the normalised T_n; equals psi(n) for a newform."""
    return psi(f, n)


# ---------------------------------------------------------------------------
# evaluation


def _tail_bound(f: QSeries, y: float, n0: int) -> float:
    """Deligne majorant of sum_{n > n0} |a(n)| e^(-2 pi n y)."""
    rho = math.exp(-2 * math.pi * y)
    h = f.k / 2
    first = 2 * abs(f.a(1)) * (n0 + 1) ** h * rho ** (n0 + 1)
    ratio = ((n0 + 2) / (n0 + 1)) ** h * rho
    if ratio >= 1:
        return math.inf
    return first / (1 - ratio)


def certified_length(f: QSeries, y: float, tail_tol: float) -> tuple[int, float]:
    """Smallest n0 <= M whose tail beyond n0 is certified below tail_tol."""
    n0 = max(1, int(0.5 / y))
    while n0 <= f.M:
        t = _tail_bound(f, y, n0)
        if t <= tail_tol:
            return n0, t
        n0 = n0 + max(1, n0 // 8)
    raise TruncationError(
        f"{f.M} coefficients cannot certify tail {tail_tol:g} at y={y:g}"
    )


def eval_many(f: QSeries, zs, tail_tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """f at an array of points (Horner in q = e(z)); returns values and the tail bound."""
    zs = np.asarray(zs, dtype=complex)
    if zs.size == 0:
        return zs.copy(), 0.0
    ymin = float(zs.imag.min())
    if ymin <= 0:
        raise ValueError("points must lie in the upper half-plane")
    n0, tail = certified_length(f, ymin, tail_tol)
    q = np.exp(2j * np.pi * zs)
    coeffs = f._float_coeffs
    acc = np.zeros_like(q)
    for n in range(n0, 0, -1):
        acc = acc * q + coeffs[n - 1]
    return acc * q, tail


def eval_form(f: QSeries, z, tail_tol: float = 1e-12) -> tuple[complex, float]:
    """f(z) with a certified bound on the neglected tail."""
    zc = z.z if isinstance(z, HPoint) else complex(z)
    val, tail = eval_many(f, np.array([zc]), tail_tol)
    return complex(val[0]), tail


def weighted_abs(f: QSeries, zs, tail_tol: float = 1e-12) -> np.ndarray:
    """|Im(z)^(k/2) f(z)| on an array of points."""
    zs = np.asarray(zs, dtype=complex)
    vals, _ = eval_many(f, zs, tail_tol)
    return zs.imag ** (f.k / 2) * np.abs(vals)


# ---------------------------------------------------------------------------
# Petersson norm


def p1_reps(N: int) -> list[tuple[int, int]]:
    """Canonical representatives (c, d) of the projective line over Z/N."""
    units = [u for u in range(1, N + 1) if math.gcd(u, N) == 1]
    seen, out = set(), []
    for c in range(N):
        for d in range(N):
            if math.gcd(math.gcd(c, d), N) != 1:
                continue
            key = min(((u * c) % N, (u * d) % N) for u in units)
            if key not in seen:
                seen.add(key)
                out.append(key)
    return sorted(out)


def coset_reps(N: int) -> list[tuple[int, int, int, int]]:
    """Right coset representatives of Gamma_0(N) in SL2(Z), one per point of P^1(Z/N)."""
    reps = []
    for c, d in p1_reps(N):
        if N == 1:
            reps.append((1, 0, 0, 1))
            continue
        if c == 0:
            C, D = 0, 1
        else:
            C, D = c, d
            while math.gcd(C, D) != 1:
                D += N
        g, A, mB = egcd(D, C)
        # A D - B C = 1
        reps.append((A, -mB, C, D))
    return reps


def cusp_translations(N: int) -> list[tuple[int, int]]:
    """For each coset rep gamma, (r, n) with F(gamma z) = F((z + n) / r).

    F = |Im^(k/2) f| is invariant under Gamma_0(N) and the Atkin-Lehner
    operators, and the operator sending infinity to the cusp of gamma
    conjugates gamma to an upper-triangular map.
    """
    out = []
    for A, B, C, D in coset_reps(N):
        r = N // math.gcd(C, N)
        g, dp, bp = egcd(r * A, -C)
        assert g == 1
        # sigma = (sqrt r A, b'/sqrt r; sqrt r C, sqrt r d') with r A d' - C b' = 1
        out.append((r, r * dp * B - bp * D))
    return out


class PeterssonResult(NamedTuple):
    value: float
    n_cells: int
    nodes: int
    y_cut: float
    tail_bound: float


def _strip_tail(f: QSeries, scale: float, Y: float) -> float:
    """Bound for the integral over y > Y of one coset cell."""
    v0 = Y / scale
    e = np.exp(-2 * np.pi * (np.arange(f.M)) * v0)
    C = float(np.abs(f._float_coeffs) @ e) + _tail_bound(f, v0, f.M - 1) * math.exp(2 * np.pi * v0)
    k = f.k
    a = 4 * np.pi / scale
    # int_Y^inf (y/s)^k C^2 e^(-4 pi y / s) y^-2 dy
    return C * C * scale ** (-k) * gamma(k - 1) * gammaincc(k - 1, a * Y) / a ** (k - 1)


def _cell_quadrature(f: QSeries, cells, n: int, panels: int, tail_tol: float) -> float:
    xg, wg = leggauss(n)
    xs = 0.5 * xg
    wx = 0.5 * wg
    pts, wts = [], []
    for xi, wxi in zip(xs, wx):
        y0 = math.sqrt(1 - xi * xi)
        ys = y0 + (1 - y0) * 0.5 * (xg + 1)
        pts.append(xi + 1j * ys)
        wts.append(wxi * (1 - y0) * 0.5 * wg / ys**2)
        for p in range(panels):
            lo, hi = 2.0**p, 2.0 ** (p + 1)
            ys = lo + (hi - lo) * 0.5 * (xg + 1)
            pts.append(xi + 1j * ys)
            wts.append(wxi * (hi - lo) * 0.5 * wg / ys**2)
    z = np.concatenate(pts)
    w = np.concatenate(wts)
    total = 0.0
    for r, shift in cells:
        wz = (z + shift) / r
        total += math.fsum(w * weighted_abs(f, wz, tail_tol) ** 2)
    return total


def petersson_integral(f: QSeries, tol: float = 1e-6, max_nodes: int = 512) -> PeterssonResult:
    """<f, f> = int over Gamma_0(N)\\H of |f|^2 y^(k-2) dx dy.

    The quotient is tiled by the translates of the standard fundamental
    domain F under coset representatives; on each cell the integrand is
    evaluated through the affine map given by :func:`cusp_translations`.
    Gauss-Legendre panels (one arc panel, then dyadic panels in y) are
    doubled until successive estimates agree to ``tol`` (relative).
    Requires f to be a newform of square-free level.
    """
    cells = cusp_translations(f.N)
    assert len(cells) == psl2_index(f.N)
    scale = max(r for r, _ in cells)
    panels, prev, n = 3, None, 12
    while n <= max_nodes:
        est = _cell_quadrature(f, cells, n, panels, 1e-3 * tol * 1e-6)
        # extend the y range until the neglected strip is negligible
        while True:
            Y = 2.0**panels
            tail = sum(_strip_tail(f, r, Y) for r, _ in cells)
            if tail <= 1e-3 * tol * abs(est):
                break
            panels += 1
            est = _cell_quadrature(f, cells, n, panels, 1e-3 * tol * 1e-6)
        if prev is not None and abs(est - prev) <= tol * abs(est):
            return PeterssonResult(est, len(cells), n, Y, tail)
        prev, n = est, 2 * n
    raise QuadratureError(f"Petersson quadrature did not reach tol={tol:g} with {max_nodes} nodes")


def petersson_norm(f: QSeries, tol: float = 1e-6) -> float:
    return petersson_integral(f, tol).value


# ---------------------------------------------------------------------------
# coefficient tables


def to_table(f: QSeries) -> dict:
    return {"level": f.N, "weight": f.k, "coeffs": list(f.coeffs)}


def dump_coeff_table(f: QSeries, path) -> None:
    Path(path).write_text(json.dumps(to_table(f), sort_keys=True) + "\n")


def load_coeff_table(path, label: str | None = None) -> QSeries:
    """Read ``{"level", "weight", "coeffs": [a1, a2, ...]}`` and certify it."""
    data = json.loads(Path(path).read_text())
    try:
        N, k, coeffs = int(data["level"]), int(data["weight"]), data["coeffs"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed coefficient table {path}: {exc}") from exc
    if any(not isinstance(a, int) or isinstance(a, bool) for a in coeffs):
        raise ValueError("coefficients must be exact integers")
    if not coeffs:
        raise ValueError("empty coefficient list")
    a1 = coeffs[0]
    if a1 not in (1, -1):
        raise ValueError(f"a(1) = {a1}: only a(1) = +-1 tables can be normalised")
    f = QSeries(tuple(a * a1 for a in coeffs), k, N, label)
    report = hecke_check(f)
    if not report.ok:
        raise HeckeCheckError(f"coefficient table {path} fails the Hecke check", report)
    return f
