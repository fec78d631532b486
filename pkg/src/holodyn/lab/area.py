"""Monte-Carlo area fractions of the sets ``E_n`` and the return-time statistic.

``E_n`` is the set of Julia-set points ``z`` with ``|f^n(z)| < exp(-2 alpha n)``.
Julia membership is the escape-time indicator: the orbit survives the
escape budget and is not captured by a detected attracting cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..core import Disk, MapSpec, escape_radius, iterate
from ..cycles import capture_radius, detect_attracting_cycle
from ..errors import AmbiguousConvergence
from ..exponents import recurrence_violations, window_lower_exponent
from .returns import julia_sample


@dataclass(frozen=True)
class ReturnTimeStat:
    eps: float
    min_gap: Optional[int]
    K_fit: Optional[float]


@dataclass(frozen=True, eq=False)
class AreaScan:
    alpha: float
    n_values: tuple
    measures: tuple
    hits: tuple
    sample_count: int
    seed: int
    window: Disk
    escape_budget: int
    sink_detected: bool
    return_times: tuple = field(default=())

    @property
    def nonincreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.measures, self.measures[1:]))

    def rows(self):
        for n, h, f in zip(self.n_values, self.hits, self.measures):
            yield n, h, f

    def summary(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_values": list(self.n_values),
            "measures": list(self.measures),
            "hits": list(self.hits),
            "sample_count": self.sample_count,
            "seed": self.seed,
            "nonincreasing": self.nonincreasing,
            "sink_detected": self.sink_detected,
            "return_times": [
                {"eps": r.eps, "min_gap": r.min_gap, "K_fit": r.K_fit} for r in self.return_times
            ],
        }


def n_min(alpha: float, window: Disk) -> int:
    """Smallest ``n`` with ``exp(-2 alpha n)`` not exceeding the window diameter."""
    diam = 2 * window.radius
    if diam <= 0:
        raise ValueError("window must have positive radius")
    return max(1, math.ceil(-math.log(diam) / (2 * alpha)))


def _uniform_disk(rng: np.random.Generator, window: Disk, count: int) -> np.ndarray:
    r = window.radius * np.sqrt(rng.random(count))
    theta = 2 * np.pi * rng.random(count)
    return window.center + r * np.exp(1j * theta)


def _escaped_mask(map: MapSpec, z: np.ndarray, R: float) -> np.ndarray:
    bad = ~np.isfinite(z)
    if map.is_poly:
        return bad | (np.abs(z) > R)
    return bad | (z.real > R)


def _step(map: MapSpec, z: np.ndarray) -> np.ndarray:
    if map.is_poly:
        return (z * z if map.d == 2 else z**map.d) + map.c
    with np.errstate(over="ignore", invalid="ignore"):
        return map.a * np.exp(z)


def _sink(map: MapSpec):
    try:
        return detect_attracting_cycle(map)
    except AmbiguousConvergence:
        return None


def min_return_gap(points: np.ndarray, eps: float) -> Optional[int]:
    """Smallest ``s >= 1`` with ``|z_i| < eps`` and ``|z_{i+s}| < eps`` for some ``i``."""
    idx = np.flatnonzero(np.abs(points) < eps)
    if len(idx) < 2:
        return None
    return int(np.min(np.diff(idx)))


def area_scan_En(
    map: MapSpec,
    alpha: float,
    n_list: Sequence[int],
    window: Disk,
    samples: int,
    seed: int,
    escape_budget: int = 100,
    eps_list: Sequence[float] = (),
    return_orbits: int = 64,
    return_length: int = 2000,
) -> AreaScan:
    """Fraction of uniform window samples lying in ``E_n`` for each ``n``.

    Each ``n`` must be at least :func:`n_min`.  For each ``eps`` in
    ``eps_list`` the minimal observed return gap of Julia-sampled orbits to
    ``B(0, eps)`` is reported together with ``K_fit = s / log(1/eps)``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n_values = tuple(sorted(set(int(n) for n in n_list)))
    if not n_values:
        raise ValueError("n_list must be nonempty")
    floor = n_min(alpha, window)
    if n_values[0] < floor:
        raise ValueError(f"n = {n_values[0]} is below n_min = {floor} for this window")
    if samples < 1:
        raise ValueError("samples must be >= 1")

    rng = np.random.default_rng(seed)
    z = _uniform_disk(rng, window, samples)
    R = escape_radius(map)
    cycle = _sink(map)
    if cycle is not None:
        cyc = np.array(cycle.points, dtype=np.complex128)
        radius = (1 - abs(cycle.multiplier)) * capture_radius(cycle)

    total = max(escape_budget, n_values[-1])
    wanted = {n: i for i, n in enumerate(n_values)}
    small = np.zeros((len(n_values), samples), dtype=bool)
    alive = np.ones(samples, dtype=bool)
    active = np.arange(samples)
    cur = z.copy()
    for k in range(1, total + 1):
        cur = _step(map, cur)
        gone = _escaped_mask(map, cur, R)
        if cycle is not None:
            gone |= np.min(np.abs(cur[:, None] - cyc[None, :]), axis=1) < radius
        if gone.any():
            alive[active[gone]] = False
            keep = ~gone
            active, cur = active[keep], cur[keep]
        if k in wanted:
            row = wanted[k]
            small[row, active] = np.abs(cur) < math.exp(-2 * alpha * k)
        if not len(active):
            break

    hits = tuple(int(np.count_nonzero(small[i] & alive)) for i in range(len(n_values)))
    measures = tuple(h / samples for h in hits)

    stats = []
    if eps_list and map.is_poly:
        sample_rng = np.random.default_rng([seed, 1])
        starts = julia_sample(map, return_orbits, sample_rng)
        orbits = [iterate(map, complex(w), return_length).points for w in starts]
        for eps in eps_list:
            gaps = [g for g in (min_return_gap(p, eps) for p in orbits) if g is not None]
            s = min(gaps) if gaps else None
            stats.append(ReturnTimeStat(float(eps), s, None if s is None else s / math.log(1 / eps)))

    return AreaScan(
        alpha=float(alpha),
        n_values=n_values,
        measures=measures,
        hits=hits,
        sample_count=samples,
        seed=seed,
        window=window,
        escape_budget=total,
        sink_detected=cycle is not None,
        return_times=tuple(stats),
    )


@dataclass(frozen=True)
class RecurrenceExponentCheck:
    alpha: float
    horizon: int
    sampled: int
    slowly_recurrent: int
    min_window_exponent: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.slowly_recurrent == 0 or self.min_window_exponent >= self.threshold

    def summary(self) -> dict:
        return {
            "alpha": self.alpha,
            "horizon": self.horizon,
            "sampled": self.sampled,
            "slowly_recurrent": self.slowly_recurrent,
            "min_window_exponent": self.min_window_exponent,
            "threshold": self.threshold,
            "verdict": "pass" if self.passed else "fail",
        }


def slow_recurrence_exponents(
    map: MapSpec,
    samples: int,
    seed: int,
    alpha: float = 0.1,
    horizon: int = 10_000,
    threshold: float = -0.01,
    burn_in: int = 100,
) -> RecurrenceExponentCheck:
    """Windowed lower exponents of Julia-sampled points that pass the slow-recurrence test.

    A point counts as slowly recurrent when no ``n`` in ``(burn_in, horizon]``
    has ``|f^n(z)| < exp(-alpha n)``; its exponent is the minimum of
    ``chi_n`` over ``[horizon/2, horizon]``.
    """
    rng = np.random.default_rng(seed)
    points = julia_sample(map, samples, rng)
    worst = math.inf
    kept = 0
    for w in points:
        trace = iterate(map, complex(w), horizon)
        if trace.n < horizon:
            continue
        if any(n > burn_in for n in recurrence_violations(trace, 0j, alpha)):
            continue
        kept += 1
        worst = min(worst, window_lower_exponent(trace, horizon // 2, horizon))
    return RecurrenceExponentCheck(float(alpha), horizon, samples, kept, worst, threshold)
