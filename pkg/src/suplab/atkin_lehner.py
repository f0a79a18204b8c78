"""Atkin-Lehner operators and reduction to the A_0(N) fundamental domain.

For square-free ``N`` the group generated by Gamma_0(N) and the Atkin-Lehner
involutions acts on the upper half-plane; an element with divisor ``r`` is

    sigma = (sqrt(r) a, b / sqrt(r); sqrt(r) s, sqrt(r) d),   r a d - s b = 1,

with ``N | r s``.  It sends ``z`` to a point of height ``y / (r |s z + d|^2)``,
so reducing a point is the search for the admissible bottom row ``(s, d)``
minimising ``r |s z + d|^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import divisors, egcd, is_squarefree
from .hyperbolic import HPoint, IntMat, Lattice2, gauss_reduce, moebius

#: maximal number of moves before :func:`al_reduce` gives up
MOVE_BUDGET = 10_000
#: a move must raise Im z by more than this to be taken
IM_GAIN_TOL = 1e-15
#: below this height moves are first proposed from short lattice vectors
FAST_Y = 0.02


class ReductionError(RuntimeError):
    """Raised when the move budget is exhausted; ``best`` holds the best point."""

    def __init__(self, msg, best):
        super().__init__(msg)
        self.best = best


def _require_squarefree(N: int) -> None:
    if not is_squarefree(N):
        raise ValueError(f"level N={N} is not square-free")


@dataclass(frozen=True)
class ALOperator:
    """Atkin-Lehner operator of level N and divisor r (unscaled entries a, b, s, d)."""

    N: int
    r: int
    a: int
    b: int
    s: int
    d: int

    def __post_init__(self):
        N, r = self.N, self.r
        if r < 1 or N % r:
            raise ValueError(f"r={r} does not divide N={N}")
        if (r * self.s) % N:
            raise ValueError(f"N={N} does not divide r*s={r * self.s}")
        if math.gcd(self.a, self.s) != 1:
            raise ValueError("gcd(a, s) != 1")
        if r * self.a * self.d - self.s * self.b != 1:
            raise ValueError("r a d - s b != 1")

    @property
    def matrix(self) -> np.ndarray:
        """The scaled real matrix, of determinant one."""
        rt = math.sqrt(self.r)
        return np.array([[rt * self.a, self.b / rt], [rt * self.s, rt * self.d]])

    @property
    def integral(self) -> IntMat:
        """``sqrt(r) * sigma``: an integral matrix of determinant r, same action."""
        r = self.r
        return IntMat(r * self.a, self.b, r * self.s, r * self.d)

    def act(self, z) -> HPoint:
        return moebius(self.integral, z)


def _al_candidates(N: int, r: int):
    m = N // r
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            if b == 0:
                # r a d = 1
                if r == 1 and a != 0:
                    yield (a, 0, 0, a)
                continue
            # r a d - m b s' = 1, solved for s' over a window of d
            for d in range(-m - 1, m + 2):
                num = r * a * d - 1
                if num % (m * b) == 0:
                    s = m * (num // (m * b))
                    if math.gcd(a, s) == 1:
                        yield (a, b, s, d)


def al_build(N: int, r: int) -> ALOperator:
    """Atkin-Lehner operator for the divisor r of N.

    Among the solutions, |b| is minimal, then |a|; remaining ties prefer
    s >= 0, then small |d|, then positive a and negative b.
    """
    _require_squarefree(N)
    if r < 1 or N % r:
        raise ValueError(f"r={r} does not divide N={N}")
    g, _, _ = egcd(r, N // r)
    assert g == 1
    cands = sorted(
        _al_candidates(N, r),
        key=lambda t: (abs(t[1]), abs(t[0]), t[2] < 0, abs(t[3]), abs(t[2]), t[0] < 0, t[1] > 0),
    )
    a, b, s, d = cands[0]
    return ALOperator(N, r, a, b, s, d)


def _complete_row(r: int, s: int, d: int) -> tuple[int, int]:
    """Solve ``r a d - s b = 1`` for (a, b), given gcd(r d, s) = 1."""
    g, u, v = egcd(r * d, -s)
    assert g == 1, (r, s, d)
    return u, v


# ---------------------------------------------------------------------------
# reduction


@dataclass(frozen=True)
class Move:
    """One step of a reduction word.

    ``kind`` is ``"translate"`` (z -> z + n), ``"gamma0"`` (an element of
    Gamma_0(N), r = 1) or ``"atkin_lehner"`` (r > 1).  ``matrix`` is the
    integral matrix of determinant r acting on z.
    """

    kind: str
    r: int
    matrix: IntMat


@dataclass(frozen=True)
class ReducedPoint:
    z: HPoint
    word: tuple[Move, ...] = field(default=())


def _best_moves(x: np.ndarray, y: np.ndarray, N: int):
    """Best improving bottom row per point.

    Returns arrays (value, r, s, d) where value = r |s z + d|^2 is minimal
    over admissible rows; value >= 1 means no move raises Im z.
    """
    best_v = np.full(x.shape, np.inf)
    best_r = np.zeros(x.shape, dtype=np.int64)
    best_s = np.zeros(x.shape, dtype=np.int64)
    best_d = np.zeros(x.shape, dtype=np.int64)
    ymin = float(y.min())
    for r in divisors(N):
        m = N // r
        smax = int(math.floor(1.0 / (m * ymin * math.sqrt(r)))) + 1
        for sp in range(-smax, smax + 1):
            s = m * sp
            if s == 0 or math.gcd(r, s) != 1:
                continue
            d0 = np.floor(-s * x)
            for off in (0, 1):
                d = (d0 + off).astype(np.int64)
                ok = np.gcd(d, s) == 1
                val = r * ((s * x + d) ** 2 + (s * y) ** 2)
                take = ok & (val < best_v)
                best_v = np.where(take, val, best_v)
                best_r = np.where(take, r, best_r)
                best_s = np.where(take, s, best_s)
                best_d = np.where(take, d, best_d)
    return best_v, best_r, best_s, best_d


def _short_move(x: float, y: float, N: int):
    """Cheap proposal for low points: short vectors of the lattices <1, (N/r) z>.

    Returns (value, r, s, d) of the best admissible row among small
    combinations of a reduced basis, or None.  Used only to accelerate;
    the exhaustive search in :func:`_best_moves` has the last word.
    """
    z = complex(x, y)
    best = None
    for r in divisors(N):
        m = N // r
        red = gauss_reduce(Lattice2(1.0, m * z))
        (d1, j1), (d2, j2) = red.coeffs
        for i in range(-2, 3):
            for j in range(-2, 3):
                d, s = i * d1 + j * d2, m * (i * j1 + j * j2)
                if s == 0 or math.gcd(r, s) != 1 or math.gcd(d, s) != 1:
                    continue
                val = r * abs(s * z + d) ** 2
                if best is None or val < best[0]:
                    best = (val, r, s, d)
    return best


def _fold_x(x):
    return x - np.floor(x + 0.5)


def al_reduce(z, N: int, budget: int = MOVE_BUDGET) -> ReducedPoint:
    """Move z into the A_0(N) fundamental domain by greedy Im-maximisation.

    Each step applies the Atkin-Lehner or Gamma_0(N) element that raises
    Im z the most, then translates x into [-1/2, 1/2).  The result has
    maximal height in its orbit, hence satisfies Im z >= sqrt(3)/(2N) and
    |c z + d|^2 >= 1/N for all (c, d) != (0, 0).
    """
    _require_squarefree(N)
    zc = z.z if isinstance(z, HPoint) else HPoint.from_complex(complex(z)).z
    word: list[Move] = []

    def translate(zc):
        n = -int(math.floor(zc.real + 0.5))
        if n:
            word.append(Move("translate", 1, IntMat(1, n, 0, 1)))
            zc = complex(zc.real + n, zc.imag)
        return zc

    zc = translate(zc)
    for _ in range(budget):
        fast = _short_move(zc.real, zc.imag, N) if zc.imag < FAST_Y else None
        if fast is not None and zc.imag / fast[0] - zc.imag > IM_GAIN_TOL:
            v, r, s, d = fast
        else:
            v, r, s, d = _best_moves(np.array([zc.real]), np.array([zc.imag]), N)
            v, r, s, d = float(v[0]), int(r[0]), int(s[0]), int(d[0])
        if not (zc.imag / v - zc.imag > IM_GAIN_TOL):
            return ReducedPoint(HPoint.from_complex(zc), tuple(word))
        a, b = _complete_row(r, s, d)
        mat = IntMat(r * a, b, r * s, r * d)
        word.append(Move("gamma0" if r == 1 else "atkin_lehner", r, mat))
        zc = translate(moebius(mat, zc).z)
    raise ReductionError(
        f"move budget {budget} exhausted", ReducedPoint(HPoint.from_complex(zc), tuple(word))
    )


def al_reduce_many(zs, N: int, budget: int = MOVE_BUDGET) -> np.ndarray:
    """Vectorised :func:`al_reduce` returning only the reduced points."""
    _require_squarefree(N)
    zs = np.asarray(zs, dtype=complex).ravel()
    x, y = _fold_x(zs.real.copy()), zs.imag.copy()
    if np.any(y <= 0):
        raise ValueError("points must lie in the upper half-plane")
    for i in np.flatnonzero(y < FAST_Y):
        for _ in range(budget):
            fast = _short_move(x[i], y[i], N)
            if fast is None or not (y[i] / fast[0] - y[i] > IM_GAIN_TOL) or y[i] >= FAST_Y:
                break
            _, r, s, d = fast
            a, b = _complete_row(r, s, d)
            zz = complex(x[i], y[i])
            w = (r * a * zz + b) / (r * s * zz + r * d)
            x[i], y[i] = _fold_x(w.real), w.imag
    active = np.arange(x.size)
    for _ in range(budget):
        if active.size == 0:
            return x + 1j * y
        xa, ya = x[active], y[active]
        v, r, s, d = _best_moves(xa, ya, N)
        move = ya / v - ya > IM_GAIN_TOL
        if not move.any():
            return x + 1j * y
        idx = active[move]
        xa, ya, r, s, d = xa[move], ya[move], r[move], s[move], d[move]
        # (r a z + b) / (r s z + r d) has imaginary part y / (r |s z + d|^2); the real
        # part is recovered from a solution of r a d - s b = 1.
        ab = np.array([_complete_row(int(ri), int(si), int(di)) for ri, si, di in zip(r, s, d)])
        zz = xa + 1j * ya
        w = (r * ab[:, 0] * zz + ab[:, 1]) / (r * s * zz + r * d)
        x[idx], y[idx] = _fold_x(w.real), w.imag
        active = idx
    raise ReductionError(f"move budget {budget} exhausted", x + 1j * y)


# ---------------------------------------------------------------------------
# gap properties


@dataclass(frozen=True)
class GapCheck:
    im_ok: bool
    min_norm: float
    #: min_norm >= 1/N (with slack)
    norm_ok: bool


def check_gap(z, N: int, slack: float = 1e-12) -> GapCheck:
    """Test Im z >= sqrt(3)/(2N) and min_{(c,d) != 0} |c z + d|^2 >= 1/N."""
    zc = z.z if isinstance(z, HPoint) else complex(z)
    im_ok = zc.imag >= math.sqrt(3) / (2 * N) - slack
    min_norm = gauss_reduce(Lattice2(1.0, zc)).lambda1 ** 2
    return GapCheck(bool(im_ok), min_norm, bool(min_norm >= 1.0 / N - slack))


def min_norm_exact(x: Fraction, y_sq: Fraction) -> tuple[Fraction, tuple[int, int]]:
    """Exact minimum of ``(c x + d)^2 + c^2 y^2`` over integer (c, d) != (0, 0)."""
    x, y_sq = Fraction(x), Fraction(y_sq)
    zf = complex(float(x), math.sqrt(float(y_sq)))
    # float reduction gives a safe search radius; the minimum itself is exact
    lam = gauss_reduce(Lattice2(1.0, zf)).lambda1
    bound = Fraction(lam * lam * (1 + 1e-6)) + Fraction(1, 10**9)
    cmax = math.isqrt(int(bound / y_sq) + 1) + 1
    best = None
    for c in range(0, cmax + 1):
        center = -c * x
        for d in range(math.floor(center) - 2, math.ceil(center) + 3):
            if c == 0 and d == 0:
                continue
            val = (c * x + d) ** 2 + c * c * y_sq
            if best is None or val < best[0]:
                best = (val, (c, d))
    return best
