"""Numerical sup of F(z) = y^{k/2} |f(z)| over the A_0(N) fundamental domain.

The scan samples a rectangle that covers the reduced domain in height
(from sqrt(3)/(2N) to a cutoff above which a Fourier majorant certifies
that F is smaller than what was already found), reduces every sample with
the Atkin-Lehner reduction, refines around the best cells and polishes the
winner with Nelder-Mead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .atkin_lehner import al_reduce_many, check_gap
from .hyperbolic import HPoint
from .qseries import QSeries, _tail_bound, petersson_norm, weighted_abs

EPS = 0.1
TOP_CELLS = 10
REFINE_SHRINK = 8
#: fraction of the probe sup below which the Fourier majorant must fall at the cutoff
CUTOFF_MARGIN = 1e-3


@dataclass(frozen=True)
class ScanReport:
    label: str | None
    N: int
    k: int
    sup_value: float
    argmax: HPoint
    region: str
    petersson: float
    normalized_sup: float
    sup_low: float
    sup_high: float
    high_branch: str
    y_split: float
    y_cut: float
    grid: tuple[int, int]
    refine: int
    evaluations: int

    def as_dict(self) -> dict:
        d = asdict(self)
        d["argmax"] = {"x": self.argmax.x, "y": self.argmax.y}
        d["grid"] = list(self.grid)
        return d


def fourier_majorant(f: QSeries, y: float) -> float:
    """Upper bound for y^{k/2} |f(x + iy)| valid for every x."""
    e = np.exp(-2 * np.pi * y * np.arange(1, f.M + 1))
    s = float(np.abs(f._float_coeffs) @ e) + _tail_bound(f, y, f.M)
    return y ** (f.k / 2) * s


def y_split(N: int) -> float:
    return N ** (-2 / 3)


def _cutoff(f: QSeries, floor_value: float) -> float:
    """Height above which F < CUTOFF_MARGIN * floor_value, by the majorant."""
    y = max(1.0, f.k / (4 * math.pi))
    while fourier_majorant(f, y) > CUTOFF_MARGIN * floor_value:
        y *= 1.25
    return y


class _Evaluator:
    def __init__(self, f: QSeries):
        self.f = f
        self.count = 0

    def __call__(self, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        red = al_reduce_many(zs, self.f.N)
        self.count += red.size
        return weighted_abs(self.f, red), red


def _top_cells(vals: np.ndarray, k: int) -> np.ndarray:
    k = min(k, vals.size)
    idx = np.argpartition(-vals, k - 1)[:k]
    return idx[np.argsort(-vals[idx], kind="stable")]


def scan_sup(f: QSeries, nx: int = 64, ny: int = 64, refine: int = 3,
             patch: tuple[float, float, float, float] | None = None,
             petersson: float | None = None, polish: bool = True) -> ScanReport:
    """Sup of y^{k/2}|f| over the reduced domain.

    ``patch = (x0, x1, y0, y1)`` replaces the default rectangle
    [0, 1) x [sqrt(3)/(2N), y_cut]; any patch whose reduction covers the
    domain gives the same sup.
    """
    if f.k <= 2:
        raise ValueError("sup-norm scans require weight k > 2")
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2 x 2 cells")
    ev = _Evaluator(f)
    N = f.N
    y_lo = math.sqrt(3) / (2 * N)
    if patch is None:
        probe_x = np.linspace(0, 1, 16, endpoint=False)
        probe, _ = ev(probe_x + 1j * max(y_lo, 0.5 / N) * 2)
        y_cut = _cutoff(f, float(probe.max()))
        x0, x1, y0, y1 = 0.0, 1.0, y_lo, y_cut
    else:
        x0, x1, y0, y1 = map(float, patch)
        if not (x1 > x0 and y1 > y0 > 0):
            raise ValueError("patch must be (x0, x1, y0, y1) with x1 > x0, y1 > y0 > 0")
        y_cut = y1

    # x uniform, y uniform in log scale (cells of comparable hyperbolic size)
    hx = (x1 - x0) / nx / 2
    hly = (math.log(y1) - math.log(y0)) / ny / 2
    xs = x0 + hx * (2 * np.arange(nx) + 1)
    lys = math.log(y0) + hly * (2 * np.arange(ny) + 1)
    X, LY = np.meshgrid(xs, lys, indexing="ij")
    vals, red = ev((X + 1j * np.exp(LY)).ravel())
    cx, cly = X.ravel(), LY.ravel()

    best_val, best_z = -1.0, None
    all_vals = [vals]
    all_red = [red]
    m = 2 * REFINE_SHRINK + 1
    offs = np.linspace(-1, 1, m)
    for i in _top_cells(vals, TOP_CELLS):
        px, ply, sx, sly = cx[i], cly[i], hx, hly
        for _ in range(refine):
            GX, GY = np.meshgrid(px + sx * offs, ply + sly * offs, indexing="ij")
            v, r = ev((GX + 1j * np.exp(GY)).ravel())
            all_vals.append(v)
            all_red.append(r)
            j = int(np.argmax(v))
            px, ply = GX.ravel()[j], GY.ravel()[j]
            sx, sly = sx / REFINE_SHRINK, sly / REFINE_SHRINK
    vals = np.concatenate(all_vals)
    red = np.concatenate(all_red)
    j = int(np.argmax(vals))
    best_val, best_z = float(vals[j]), complex(red[j])

    if polish:
        def neg(p):
            v, _ = ev(np.array([p[0] + 1j * math.exp(p[1])]))
            return -float(v[0])

        res = minimize(neg, [best_z.real, math.log(best_z.imag)], method="Nelder-Mead",
                       options={"xatol": 1e-11, "fatol": 1e-15 * best_val, "maxiter": 2000})
        if -res.fun > best_val:
            v, r = ev(np.array([res.x[0] + 1j * math.exp(res.x[1])]))
            best_val, best_z = float(v[0]), complex(r[0])
            vals = np.append(vals, v)
            red = np.append(red, r)

    ys = y_split(N)
    low = red.imag <= ys
    sup_low = float(vals[low].max()) if low.any() else 0.0
    sup_high = float(vals[~low].max()) if (~low).any() else 0.0
    branch = "dominated" if sup_high <= sup_low * (1 + 1e-6) else "attained"
    if petersson is None:
        petersson = petersson_norm(f, 1e-10)
    arg = HPoint.from_complex(best_z)
    assert check_gap(arg, N, slack=1e-9).norm_ok
    return ScanReport(
        label=f.label, N=N, k=f.k, sup_value=best_val, argmax=arg,
        region="low" if best_z.imag <= ys else "high",
        petersson=petersson, normalized_sup=best_val / math.sqrt(petersson),
        sup_low=sup_low, sup_high=sup_high, high_branch=branch, y_split=ys,
        y_cut=y_cut, grid=(nx, ny), refine=refine, evaluations=ev.count,
    )


def highy_bound(f: QSeries, y: float, petersson: float, eps: float = EPS) -> float:
    """Two-regime bound for y^{k/2}|f(z)|, switching at y = k/(4 pi).

    Returned in the scale of F itself, i.e. multiplied by N^{-1/2} <f, f>^{1/2}.
    """
    if y <= 0:
        raise ValueError("y must be positive")
    k = f.k
    first = k ** (0.25 + eps) * y**-0.5
    if y <= k / (4 * math.pi):
        second = y**0.5 * k ** (eps - 0.25)
    else:
        log2 = (k / 2) * math.log(2) + eps * math.log(k) + (k / 2 + eps) * math.log(2 * math.pi * y) \
            - 2 * math.pi * y - 0.5 * gammaln(k)
        second = math.exp(log2)
    return (first + second) * math.sqrt(petersson / f.N)


def fit_exponent(table) -> tuple[float, float, np.ndarray]:
    """Least-squares slope and intercept of log(sup) against log(N)."""
    arr = np.asarray(table, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or np.unique(arr[:, 0]).size < 2:
        raise ValueError("need at least two distinct levels")
    lx, ly = np.log(arr[:, 0]), np.log(arr[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept), ly - (slope * lx + intercept)


def scan_table(forms, nx: int = 64, ny: int = 64, refine: int = 3) -> list[ScanReport]:
    return [scan_sup(f, nx, ny, refine) for f in forms]
