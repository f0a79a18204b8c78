"""Built-in newforms.

Eta-quotient forms are expanded on demand; the level-7 weight-4 form is not
an eta quotient and ships as a coefficient table (regenerate it with
:func:`level7_weight4`).  Set ``SUPLAB_DATA_DIR`` to read tables from
another directory.
"""
from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

import numpy as np

from .qseries import EtaQuotient, QSeries, eta_expand, eta_power_series, load_coeff_table

DEFAULT_M = 2000

ETA_FORMS = {
    "1.12.a": ("1:24", 1),
    "5.4.a": ("1:4,5:4", 5),
    "6.4.a": ("1:2,2:2,3:2,6:2", 6),
    "11.2.a": ("1:2,11:2", 11),
}
TABLE_FORMS = {"7.4.a": "7.4.a.json"}

LABELS = tuple(sorted([*ETA_FORMS, *TABLE_FORMS]))


def data_dir() -> Path:
    env = os.environ.get("SUPLAB_DATA_DIR")
    return Path(env) if env else Path(__file__).parent / "data"


def theta_series(M: int, form=(1, 1, 2)) -> np.ndarray:
    """Representation numbers r(0..M) of the positive binary form a x^2 + b x y + c y^2."""
    a, b, c = form
    disc = 4 * a * c - b * b
    if a <= 0 or disc <= 0:
        raise ValueError("form must be positive definite")
    r = np.zeros(M + 1, dtype=np.int64)
    ymax = int(np.sqrt(4 * a * M / disc)) + 1
    xmax = int(np.sqrt(4 * c * M / disc)) + 1
    x = np.arange(-xmax, xmax + 1)
    for y in range(-ymax, ymax + 1):
        v = a * x * x + b * x * y + c * y * y
        np.add.at(r, v[v <= M], 1)
    return r


def level7_weight4(M: int = DEFAULT_M) -> QSeries:
    """eta(z)^3 eta(7z)^3 times the theta series of x^2 + x y + 2 y^2.

    Both factors carry the character (-7/.), so the product lies in the
    one-dimensional space of weight-4 cusp forms on Gamma_0(7).
    """
    g = eta_power_series(((1, 3), (7, 3)), M - 1)
    th = theta_series(M - 1)
    coeffs = [sum(g[j] * int(th[n - j]) for j in range(n + 1)) for n in range(M)]
    return QSeries(tuple(coeffs), 4, 7, "7.4.a")


@lru_cache(maxsize=None)
def get_form(label: str, M: int = DEFAULT_M) -> QSeries:
    """Catalogue newform truncated to M coefficients."""
    if label in ETA_FORMS:
        factors, N = ETA_FORMS[label]
        return eta_expand(EtaQuotient.parse(factors), M, N, label)
    if label in TABLE_FORMS:
        f = load_coeff_table(data_dir() / TABLE_FORMS[label], label)
        if f.M < M:
            raise ValueError(f"table for {label} has only {f.M} coefficients, {M} requested")
        return f.truncate(M)
    raise KeyError(f"unknown form label {label!r}; known: {', '.join(LABELS)}")
