"""Upper half-plane geometry, integral matrices and rank-2 lattices.

The u-invariant of a matrix ``m = (a, b; c, d)`` at ``z = x + iy`` is

    u_m(z) = j(m, z) * (conj(z) - m.z) / y,     j(m, z) = c z + d,

and for ``det m > 0`` it has the closed form

    u_m(z) = (c |z|^2 + (d - a) x - b) / y  -  i (a + d),

which is what the census code uses.  ``|u_m(z)| >= 2 sqrt(det m)`` always.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: absolute slack used for floating-point geometric comparisons
GEOM_TOL = 1e-9


@dataclass(frozen=True)
class HPoint:
    """A point ``x + iy`` of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)) or y <= 0:
            raise ValueError(f"not a point of the upper half-plane: x={x}, y={y}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def __complex__(self) -> complex:
        return self.z


def _as_complex(z) -> complex:
    return z.z if isinstance(z, HPoint) else complex(z)


@dataclass(frozen=True)
class IntMat:
    """Integral 2x2 matrix ``(a, b; c, d)``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if isinstance(v, (float, np.floating)):
                if v != int(v):
                    raise ValueError(f"entry {name}={v} is not integral")
            object.__setattr__(self, name, int(v))

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def sort_key(self) -> tuple[int, int, int, int]:
        """Canonical ordering: lexicographic on (c, d, a, b)."""
        return (self.c, self.d, self.a, self.b)

    def __neg__(self) -> "IntMat":
        return IntMat(-self.a, -self.b, -self.c, -self.d)

    def __matmul__(self, other: "IntMat") -> "IntMat":
        return IntMat(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def in_G(self, l: int, N: int) -> bool:
        """Membership in G_l(N): N | c and det = l."""
        return self.c % N == 0 and self.det == l

    @classmethod
    def identity(cls) -> "IntMat":
        return cls(1, 0, 0, 1)


class MatClass(enum.Enum):
    GENERIC = "generic"
    UPPER_TRIANGULAR = "upper_triangular"
    PARABOLIC = "parabolic"


def _check_det(m: IntMat) -> None:
    if m.det <= 0:
        raise ValueError(f"matrix {m.entries} has non-positive determinant {m.det}")


def moebius(m: IntMat, z) -> HPoint:
    """Fractional linear action ``(a z + b) / (c z + d)``."""
    _check_det(m)
    zc = _as_complex(z)
    return HPoint.from_complex((m.a * zc + m.b) / (m.c * zc + m.d))


def cocycle_j(m: IntMat, z) -> complex:
    return m.c * _as_complex(z) + m.d


def u_general(a, b, c, d, z):
    """u-invariant from the definition, for real (array) entries.

    Works for any real matrix with positive determinant; used for the
    conjugation-covariance checks and by the brute-force oracle.
    """
    z = np.asarray(z, dtype=complex)
    j = c * z + d
    gz = (a * z + b) / j
    return j * (np.conj(z) - gz) / z.imag


def u_value(m: IntMat, z) -> complex:
    _check_det(m)
    zc = _as_complex(z)
    return complex(u_general(m.a, m.b, m.c, m.d, zc))


def u_closed(a, b, c, d, x, y):
    """Closed form ``(Re u, Im u)`` for det > 0; vectorises over numpy arrays."""
    re = (c * (x * x + y * y) + (d - a) * x - b) / y
    return re, -(a + d)


def classify(m: IntMat, l: int) -> MatClass:
    if m.det != l:
        raise ValueError(f"det {m.det} != l = {l}")
    tr = m.trace
    if tr * tr == 4 * l:
        return MatClass.PARABOLIC
    if m.c == 0:
        if m.a != m.d:
            return MatClass.UPPER_TRIANGULAR
        # c = 0 and a = d force tr^2 = 4ad = 4l
        raise AssertionError(f"inconsistent classification for {m.entries}")
    return MatClass.GENERIC


# ---------------------------------------------------------------------------
# rank-2 lattices


@dataclass(frozen=True)
class Lattice2:
    """The lattice ``Z v1 + Z v2`` in the complex plane."""

    v1: complex
    v2: complex

    def __post_init__(self):
        object.__setattr__(self, "v1", complex(self.v1))
        object.__setattr__(self, "v2", complex(self.v2))
        scale = max(abs(self.v1), abs(self.v2)) ** 2
        if self.covolume <= 1e-14 * scale or scale == 0:
            raise ValueError("lattice basis is degenerate (collinear vectors)")

    @property
    def covolume(self) -> float:
        return abs((self.v1.conjugate() * self.v2).imag)

    @property
    def minima(self) -> tuple[float, float]:
        red = gauss_reduce(self)
        return red.lambda1, red.lambda2


class ReducedBasis(NamedTuple):
    lambda1: float
    lambda2: float
    b1: complex
    b2: complex
    #: integer coordinates of b1, b2 in the input basis
    coeffs: tuple[tuple[int, int], tuple[int, int]]


def gauss_reduce(lat: Lattice2, max_iter: int = 10_000) -> ReducedBasis:
    """Lagrange-Gauss reduction; the reduced vector lengths are the successive minima."""
    u, v = lat.v1, lat.v2
    cu, cv = (1, 0), (0, 1)
    nu, nv = abs(u) ** 2, abs(v) ** 2
    if nv < nu:
        u, v, cu, cv, nu, nv = v, u, cv, cu, nv, nu
    for _ in range(max_iter):
        mu = round((v * u.conjugate()).real / nu)
        if mu:
            v = v - mu * u
            cv = (cv[0] - mu * cu[0], cv[1] - mu * cu[1])
            nv = abs(v) ** 2
        if nv < nu:
            u, v, cu, cv, nu, nv = v, u, cv, cu, nv, nu
            continue
        break
    else:
        raise RuntimeError(f"Gauss reduction did not converge in {max_iter} steps")
    if nu == nv and cv < cu:
        u, v, cu, cv = v, u, cv, cu
    return ReducedBasis(math.sqrt(nu), math.sqrt(nv), u, v, (cu, cv))


def count_disc(lat: Lattice2, center: complex, R: float) -> int:
    """Exact number of lattice points in the closed disc ``|p - center| <= R``."""
    if R < 0:
        raise ValueError("radius must be non-negative")
    red = gauss_reduce(lat)
    b1, b2 = red.b1, red.b2
    center = complex(center)
    covol = lat.covolume
    n1 = abs(b1)
    # coordinate of center along b2 measured by the signed distance to the line R b1
    t = (b1.conjugate() * center).imag / (b1.conjugate() * b2).imag
    half = (R + GEOM_TOL) * n1 / covol
    count = 0
    rr = (R + GEOM_TOL) ** 2
    for n in range(math.floor(t - half), math.ceil(t + half) + 1):
        p = n * b2 - center
        # |m b1 + p|^2 <= rr  <=>  n1^2 m^2 + 2 m Re(b1 conj p) + |p|^2 - rr <= 0
        bq = (b1 * p.conjugate()).real
        disc = bq * bq - n1 * n1 * (abs(p) ** 2 - rr)
        # tangent rows can round to a slightly negative discriminant
        if disc < -GEOM_TOL:
            continue
        root = math.sqrt(max(disc, 0.0))
        lo = math.floor((-bq - root) / (n1 * n1)) - 1
        hi = math.ceil((-bq + root) / (n1 * n1)) + 1
        for m in range(lo, hi + 1):
            if abs(m * b1 + p) ** 2 <= rr:
                count += 1
    return count


def disc_bound(lat: Lattice2, R: float) -> float:
    """``1 + R/lambda1 + R^2/(lambda1 lambda2)``, the shape of the disc-count bound."""
    l1, l2 = lat.minima
    return 1.0 + R / l1 + R * R / (l1 * l2)


#: implied constant used with :func:`disc_bound`
C_DISC = 4.0
