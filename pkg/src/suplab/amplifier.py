"""Hecke amplifier built from primes L <= p < 2L coprime to the level.

For a target form with eigenvalues lambda(n) the signs are

    x_l = sign(lambda(l))  for l in Lambda and l in Lambda^2,  else 0,

and the convolved weights are y_l = sum over (l1, l2, d), d | (l1, l2),
l = l1 l2 / d^2 of x_l1 x_l2.  Because lambda(p)^2 - lambda(p^2) = 1, each
prime contributes at least 1/2 to sum_l x_l lambda(l).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .arith import divisors, primes_upto

#: keeps l1^2 l2^2 inside int64
L_GUARD = 10_000


@dataclass(frozen=True)
class AmpSupport:
    L: float
    N: int
    primes: tuple[int, ...]

    @property
    def squares(self) -> tuple[int, ...]:
        return tuple(p * p for p in self.primes)

    @property
    def x_support(self) -> tuple[int, ...]:
        return tuple(sorted(self.primes + self.squares))


@dataclass(frozen=True)
class AmpVector:
    support: AmpSupport
    x: Mapping[int, int]
    y: Mapping[int, int] | None = field(default=None)

    def as_dict(self) -> dict:
        out = {
            "L": self.support.L,
            "N": self.support.N,
            "primes": list(self.support.primes),
            "x": {str(l): v for l, v in sorted(self.x.items())},
        }
        if self.y is not None:
            out["y"] = {str(l): v for l, v in sorted(self.y.items())}
        return out


def build_support(L: float, N: int) -> AmpSupport:
    if L < 2:
        raise ValueError("amplifier length L must be >= 2")
    if L > L_GUARD:
        raise ValueError(f"L={L} exceeds the guard {L_GUARD}")
    lo = math.ceil(L)
    ps = [int(p) for p in primes_upto(math.ceil(2 * L) - 1) if p >= lo and p < 2 * L and N % p]
    return AmpSupport(float(L), int(N), tuple(ps))


def _sign(v: float) -> int:
    return -1 if v < 0 else 1


def build_x(lam: Callable[[int], float], support: AmpSupport) -> AmpVector:
    """Signs of the eigenvalues on Lambda and Lambda^2; sign(0) = +1."""
    return AmpVector(support, {l: _sign(lam(l)) for l in support.x_support})


def convolve_y(amp: AmpVector) -> AmpVector:
    y: dict[int, int] = {}
    for l1, x1 in amp.x.items():
        for l2, x2 in amp.x.items():
            for d in divisors(math.gcd(l1, l2)):
                l = l1 * l2 // (d * d)
                y[l] = y.get(l, 0) + x1 * x2
    y = {l: v for l, v in sorted(y.items()) if v}
    return AmpVector(amp.support, amp.x, y)


def support_classes(support: AmpSupport) -> set[int]:
    """1, l1, l1 l2, l1 l2^2 and l1^2 l2^2 for l1, l2 in Lambda."""
    ps = support.primes
    out = {1} if ps else set()
    for p in ps:
        out.add(p)
        for q in ps:
            out.update((p * q, p * q * q, p * p * q * q))
    return out


def amp_lower(lam: Callable[[int], float], support: AmpSupport) -> float:
    """sum_l x_l lambda(l) over Lambda and Lambda^2."""
    amp = build_x(lam, support)
    return math.fsum(v * lam(l) for l, v in amp.x.items())


def amplifier(lam: Callable[[int], float], L: float, N: int) -> AmpVector:
    return convolve_y(build_x(lam, build_support(L, N)))


def y_arrays(amp: AmpVector) -> tuple[np.ndarray, np.ndarray]:
    if amp.y is None:
        raise ValueError("amplifier has no y part; call convolve_y first")
    ls = np.array(sorted(amp.y), dtype=np.int64)
    return ls, np.array([amp.y[int(l)] for l in ls], dtype=np.int64)
