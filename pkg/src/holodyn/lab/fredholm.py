"""The series ``F(t) = 1 + sum_{n>=1} t^n / Df^n(c)`` with an explicit tail bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import MapSpec, derivative_at, escape_radius
from ..errors import CoefficientBlowup

#: Envelope ratio must satisfy ``q |t| <= 1 - TAIL_MARGIN`` for a valid tail bound.
TAIL_MARGIN = 1e-3


@dataclass(frozen=True)
class Envelope:
    """Geometric majorant ``|coeff_n| <= A q^n`` fitted on ``n <= n_cut``."""

    A: float
    q: float
    exact_after_escape: bool = False

    def tail(self, t_abs: float, n_cut: int) -> float:
        """``sum_{n > n_cut} A (q |t|)^n``, or ``inf`` if the ratio is too close to 1."""
        ratio = self.q * t_abs
        if ratio >= 1 - TAIL_MARGIN:
            return math.inf
        if ratio == 0:
            return 0.0
        return self.A * ratio ** (n_cut + 1) / (1 - ratio)


def coefficients(map: MapSpec, n_cut: int):
    """``(coeffs, envelope)`` with ``coeffs[n-1] = 1/Df^n(c)`` for ``n = 1..n_cut``.

    For an escaping critical orbit the coefficients stop at the escape
    step; past it every factor satisfies ``|Df| >= d R^{d-1}``, which gives
    a rigorous geometric envelope for the remaining terms.
    """
    if not map.is_poly:
        raise ValueError("the Fredholm series is defined for the polynomial family only")
    if n_cut < 1:
        raise ValueError("n_cut must be >= 1")
    R = escape_radius(map)
    z = map.c
    inv = 1 + 0j
    coeffs = []
    escaped = False
    for n in range(1, n_cut + 1):
        df = derivative_at(map, z)
        if df == 0:
            raise CoefficientBlowup(f"Df^{n}(c) = 0: the critical orbit hits 0 at step {n - 1}")
        inv = inv / df
        coeffs.append(inv)
        z = map(z)
        if abs(z) > R:
            escaped = True
            break
    coeffs = np.array(coeffs, dtype=np.complex128)
    if escaped:
        q = 1.0 / (map.d * R ** (map.d - 1))
        m = len(coeffs)
        A = float(abs(coeffs[-1])) / q**m
        return coeffs, Envelope(A, q, exact_after_escape=True)
    return coeffs, fit_envelope(coeffs)


def fit_envelope(coeffs: np.ndarray) -> Optional[Envelope]:
    """Root-test envelope: ``q`` from the second half, ``A`` the least constant over all ``n``."""
    mags = np.abs(coeffs)
    if not np.all(mags > 0):
        return None
    n = np.arange(1, len(mags) + 1)
    logs = np.log(mags)
    half = len(mags) // 2
    log_q = float(np.max(logs[half:] / n[half:]))
    log_A = float(np.max(logs - n * log_q))
    return Envelope(math.exp(log_A), math.exp(log_q))


def _partial_sums(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    # Horner: 1 + t (c1 + t (c2 + ...))
    acc = np.zeros_like(t, dtype=np.complex128)
    for cn in coeffs[::-1]:
        acc = (acc + cn) * t
    return 1 + acc


def fredholm_eval(map: MapSpec, t: complex, n_cut: int = 200):
    """``(value, tail_bound)`` for ``F(t)`` truncated after ``n_cut`` terms.

    ``tail_bound`` is ``inf`` when no geometric envelope with ``q|t| < 1``
    fits the computed coefficients.
    """
    if abs(t) >= 1:
        raise ValueError("|t| must be < 1")
    coeffs, env = coefficients(map, n_cut)
    value = complex(_partial_sums(coeffs, np.array([complex(t)]))[0])
    tail = math.inf if env is None else env.tail(abs(t), len(coeffs))
    return value, tail


@dataclass(frozen=True, eq=False)
class FredholmSeries:
    coeffs: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    tail_bound: np.ndarray
    envelope: Optional[Envelope]

    @property
    def zero_scan(self) -> float:
        """``min |F(t)|`` over the grid."""
        return float(np.min(np.abs(self.values)))

    @property
    def certified_min(self) -> float:
        """``min (|F(t)| - tail(t))``: positive means no zero on the grid points."""
        return float(np.min(np.abs(self.values) - self.tail_bound))


def disk_grid(radius: float, points: int) -> np.ndarray:
    """At least ``points`` polar-grid points in the closed disk, boundary circle included."""
    rings = max(1, int(round(math.sqrt(points / math.pi))))
    per_ring = max(1, math.ceil(points / rings))
    radii = radius * np.arange(1, rings + 1) / rings
    angles = 2 * np.pi * np.arange(per_ring) / per_ring
    return (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()


def fredholm_series(map: MapSpec, t_grid: np.ndarray, n_cut: int = 200) -> FredholmSeries:
    t_grid = np.asarray(t_grid, dtype=np.complex128)
    if np.any(np.abs(t_grid) >= 1):
        raise ValueError("grid must lie in the open unit disk")
    coeffs, env = coefficients(map, n_cut)
    values = _partial_sums(coeffs, t_grid)
    if env is None:
        tails = np.full(len(t_grid), math.inf)
    else:
        tails = np.array([env.tail(abs(t), len(coeffs)) for t in t_grid])
    return FredholmSeries(coeffs, t_grid, values, tails, env)


def zero_scan(map: MapSpec, radius: float = 0.95, points: int = 1000, n_cut: int = 200) -> FredholmSeries:
    if not 0 < radius < 1:
        raise ValueError("radius must be in (0, 1)")
    return fredholm_series(map, disk_grid(radius, points), n_cut)
