"""Exact censuses against the counting bounds, with one fitted constant per bound family.

For a configuration (z, N, delta) the census is summed over l the way each
bound is stated:

* generic matrices: all l; squares l = m^2; l = l1 m^2 for fixed l1 in {2, 3}
* upper-triangular: primes l1; products l1 l2; l1 l2^2; l1^2 l2^2 (primes)
* parabolic: sum of |u|^-k for l in {1, 4, 9} and k in {4, 8}

The range bound Lambda is the largest l with a non-empty census,
floor(delta^2 / 4).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import is_square, primes_upto
from .atkin_lehner import al_reduce_many
from .census import EPS, bound_mstar, bound_mu, bound_para, census_table, parabolic_sum

LEVELS = (5, 6, 7, 10, 14, 15)
DELTAS = (10.0, 20.0, 30.0, 40.0, 50.0)
PARA_L = (1, 4, 9)
PARA_K = (4, 8)
FIXED_L1 = (2, 3)


@dataclass(frozen=True)
class Config:
    z: complex
    N: int
    delta: float


@dataclass(frozen=True)
class Comparison:
    family: str
    mode: str
    config: Config
    census: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.census / self.bound


def acceptance_grid(seed: int = 20240607) -> list[Config]:
    """30 reduced configurations: 5 per level, one per delta."""
    rng = np.random.default_rng(seed)
    out = []
    for N in LEVELS:
        zs = rng.uniform(-0.5, 0.5, 5) + 1j * rng.uniform(0.02, 1.0, 5) / N
        red = al_reduce_many(zs, N)
        out.extend(Config(complex(z), N, d) for z, d in zip(red, DELTAS))
    return out


def _prime_products(lam: int):
    ps = [int(p) for p in primes_upto(max(lam, 2))]
    single = set(ps)
    two, sq, both = set(), set(), set()
    for i, p in enumerate(ps):
        for q in ps[i:]:
            if p * q > lam:
                break
            two.add(p * q)
        for q in ps:
            if p * q > lam:
                break
            sq.add(p * q * q)
            both.add(p * p * q * q)
    return single, two, sq, both


def compare(cfg: Config, eps: float = EPS) -> list[Comparison]:
    z, N, delta = cfg.z, cfg.N, cfg.delta
    y = z.imag
    lam = int(math.floor(delta * delta / 4))
    table = census_table(z, N, delta, lam)

    def tot(ls, attr):
        return sum(getattr(table[l], attr) for l in ls if l in table)

    out = [
        Comparison("mstar", "general", cfg, tot(table, "m_star"), bound_mstar(N, y, delta, "general", eps)),
        Comparison("mstar", "square", cfg, tot([l for l in table if is_square(l)], "m_star"),
                   bound_mstar(N, y, delta, "square", eps)),
    ]
    for l1 in FIXED_L1:
        ls = [l1 * m * m for m in range(1, math.isqrt(lam // l1) + 1)]
        out.append(Comparison("mstar", f"fixed-l1-times-square:{l1}", cfg, tot(ls, "m_star"),
                              bound_mstar(N, y, delta, "fixed-l1-times-square", eps)))
    single, two, sq, both = _prime_products(lam)
    for mode, ls in (("single-prime", single), ("two-prime", two),
                     ("prime-times-square", sq), ("both-squares", both)):
        out.append(Comparison("mu", mode, cfg, tot(sorted(ls), "m_upper"),
                              bound_mu(N, y, delta, lam, mode, eps)))
    for l in PARA_L:
        for k in PARA_K:
            # the pair {alpha, -alpha} is stored once; G_l(N) holds both
            val = 2 * parabolic_sum(z, N, l, k, 1e-12).value
            out.append(Comparison("para", f"l={l},k={k}", cfg, val, bound_para(N, y, l, k, eps)))
    return out


def fitted_constants(comparisons) -> dict[str, float]:
    """Smallest constant per family making census <= C * bound on every comparison."""
    consts: dict[str, float] = {}
    for c in comparisons:
        consts[c.family] = max(consts.get(c.family, 0.0), c.ratio)
    return consts


def run_grid(grid=None, eps: float = EPS) -> tuple[list[Comparison], dict[str, float]]:
    grid = acceptance_grid() if grid is None else grid
    comps = [c for cfg in grid for c in compare(cfg, eps)]
    return comps, fitted_constants(comps)
