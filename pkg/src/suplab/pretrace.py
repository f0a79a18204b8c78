"""Geometric side of the pre-trace formula and its spectral check.

At w = -conj(z) the holomorphic kernel becomes a sum of u-invariants,

    C_k^{-1} sum_{gamma in Gamma_0(N)} u_gamma(z)^{-k} = sum_f |y^{k/2} f(z)|^2 / <f, f>,

with C_k = (-1)^{k/2} pi / (2^{k-3} (k-1)) and the sum over an orthogonal
basis.  The sum runs over all matrices, gamma and -gamma separately.
Twisting by Hecke operators gives, for (l, N) = 1,

    C_k^{-1} l^{(k-1)/2} sum_{alpha in G_l(N)} u_alpha(z)^{-k}
        = sum_f lambda_f(l) |y^{k/2} f(z)|^2 / <f, f>,

which :func:`amplified_geometric` combines with the amplifier weights y_l.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .amplifier import AmpVector, amp_lower, build_support, convolve_y, build_x
from .arith import is_square
from .census import parabolic_u_sum, window_array
from .hyperbolic import HPoint, u_closed
from .qseries import QSeries, TruncationError, lam, petersson_norm, weighted_abs

#: factor between the literal matrix sum and the spectral side; pinned by tests
PM_FACTOR = 1
#: polynomial growth exponent of #{gamma in G_l(N) : |u| <= delta} used for tails
CENSUS_GROWTH = 2
#: (N, k) with dim S_k(Gamma_0(N)) = 1
ONE_DIMENSIONAL = frozenset({(1, 12), (5, 4), (6, 4), (7, 4)})


class KernelSum(NamedTuple):
    value: complex
    truncation: float
    tail_estimate: float
    count: int


class SpectralCheck(NamedTuple):
    geometric: float
    spectral: float
    residual: float


def c_k(k: int) -> float:
    if k % 2 or k < 4:
        raise ValueError(f"weight {k} must be even and >= 4")
    return (-1) ** (k // 2) * math.pi / (2 ** (k - 3) * (k - 1))


def _as_complex(z) -> complex:
    return z.z if isinstance(z, HPoint) else complex(z)


def _fsum_c(v: np.ndarray) -> complex:
    v = np.sort_complex(v)
    return complex(math.fsum(v.real), math.fsum(v.imag))


def census_tail(abs_u: np.ndarray, delta: float, k: int, growth: int = CENSUS_GROWTH) -> float:
    """Tail estimate for sum_{|u| > delta} |u|^-k from the census up to delta.

    Fits count(r) <= A + B r^growth on r in [delta/4, delta] (least squares
    for B, then A raised to an envelope) and integrates by parts:
    int_delta^inf k (A + B r^g) r^(-k-1) dr.
    """
    if k <= growth:
        raise ValueError(f"weight {k} too small for census growth {growth}")
    if delta <= 0:
        return math.inf
    rs = np.linspace(delta / 4, delta, 16)
    srt = np.sort(abs_u)
    counts = np.searchsorted(srt, rs, side="right").astype(float)
    X = rs**growth
    B = max(float(np.polyfit(X, counts, 1)[0]), 0.0)
    A = max(float(np.max(counts - B * X)), 0.0)
    return A * delta**-k + B * k * delta ** (growth - k) / (k - growth)


def geometric_sum_l(z, N: int, l: int, k: int, delta: float, parabolic: str = "window",
                    tail_tol: float = 1e-12) -> KernelSum:
    """sum of u_alpha(z)^-k over alpha in G_l(N) with |u| <= delta.

    With ``parabolic="exact"`` the parabolic matrices (square l) are
    replaced by their complete sum with certified tail.
    """
    c_k(k)
    if parabolic not in ("window", "exact"):
        raise ValueError("parabolic must be 'window' or 'exact'")
    zc = _as_complex(z)
    arr = window_array(zc, N, l, delta)
    a, b, c, d = (arr[:, i].astype(float) for i in range(4))
    re, im = u_closed(a, b, c, d, zc.real, zc.imag)
    u = re + 1j * np.broadcast_to(im, re.shape)
    tail_extra, extra = 0.0, 0j
    if parabolic == "exact" and is_square(l):
        tr = arr[:, 0] + arr[:, 3]
        u = u[tr * tr != 4 * l]
        ps = parabolic_u_sum(zc, N, l, k, tail_tol)
        extra, tail_extra = 2 * ps.value, 2 * ps.tail_bound
    value = _fsum_c(u ** (-k)) + extra
    tail = census_tail(np.abs(u), delta, k) + tail_extra
    return KernelSum(value, float(delta), tail, int(arr.shape[0]))


def geometric_h(z, N: int, k: int, delta_max: float, tol: float | None = None) -> KernelSum:
    """y^k h(z, -conj z) truncated to |u| <= delta_max (sum over Gamma_0(N))."""
    if delta_max < 2:
        raise ValueError("delta_max must be >= 2")
    ks = geometric_sum_l(z, N, 1, k, delta_max)
    if tol is not None and ks.tail_estimate > tol:
        raise TruncationError(f"tail estimate {ks.tail_estimate:.3g} exceeds tol {tol:.3g}")
    return ks


def amplified_geometric(z, N: int, k: int, amp: AmpVector, delta_max: float,
                        parabolic: str = "exact", relative: bool = False) -> KernelSum:
    """sum_l y_l l^{(k-1)/2} sum_{alpha in G_l(N)} u_alpha(z)^-k.

    Each inner sum is truncated at delta_max, or at delta_max sqrt(l) when
    ``relative`` is set (the natural scale since |u_alpha| >= 2 sqrt(l)).
    """
    if amp.y is None:
        raise ValueError("amplifier has no y part; call convolve_y first")
    total, tail, count = [], 0.0, 0
    for l, yl in sorted(amp.y.items()):
        delta = delta_max * math.sqrt(l) if relative else delta_max
        ks = geometric_sum_l(z, N, l, k, delta, parabolic)
        w = yl * l ** ((k - 1) / 2)
        total.append(w * ks.value)
        tail += abs(w) * ks.tail_estimate
        count += ks.count
    return KernelSum(_fsum_c(np.array(total, dtype=complex)), float(delta_max), tail, count)


def _check_one_dim(f: QSeries) -> None:
    if (f.N, f.k) not in ONE_DIMENSIONAL:
        raise ValueError(f"S_{f.k}(Gamma_0({f.N})) is not known to be one-dimensional")


def spectral_residual(f: QSeries, z, delta_max: float, petersson: float | None = None,
                      tol: float = 1e-4) -> SpectralCheck:
    """Relative gap between C_k^{-1} y^k h(z, -conj z) and |y^{k/2} f(z)|^2 / <f, f>."""
    _check_one_dim(f)
    zc = _as_complex(z)
    if petersson is None:
        petersson = petersson_norm(f, tol)
    geo = PM_FACTOR * geometric_h(zc, f.N, f.k, delta_max).value.real / c_k(f.k)
    spectral = float(weighted_abs(f, np.array([zc]))[0] ** 2) / petersson
    return SpectralCheck(geo, spectral, abs(geo - spectral) / spectral)


def amplified_residual(f: QSeries, z, L: float, delta_max: float, petersson: float | None = None,
                       tol: float = 1e-4) -> SpectralCheck:
    """Amplified version: the spectral side is (sum_l x_l lambda(l))^2 |y^{k/2} f|^2 / <f, f>."""
    _check_one_dim(f)
    zc = _as_complex(z)
    if petersson is None:
        petersson = petersson_norm(f, tol)
    lam_f = lambda n: lam(f, n)
    support = build_support(L, f.N)
    amp = convolve_y(build_x(lam_f, support))
    ks = amplified_geometric(zc, f.N, f.k, amp, delta_max, parabolic="exact", relative=True)
    geo = PM_FACTOR * ks.value.real / c_k(f.k)
    spectral = amp_lower(lam_f, support) ** 2 * float(weighted_abs(f, np.array([zc]))[0] ** 2) / petersson
    return SpectralCheck(geo, spectral, abs(geo - spectral) / spectral)
