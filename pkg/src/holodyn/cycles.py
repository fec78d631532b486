"""Attracting-cycle detection along the marked orbit, Newton refinement and basin tests."""

from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass
from typing import Optional

from .core import MapSpec, derivative_at, escape_radius
from .errors import AmbiguousConvergence, DerivativeSingular, NoConvergence

#: Cauchy-test tolerance applied to the trailing window before refinement.
CAUCHY_TOL = 1e-8
DEFAULT_TOL = 1e-9
NEWTON_CAP = 100


@dataclass(frozen=True)
class CycleRecord:
    period: int
    points: tuple
    multiplier: complex
    residual: float

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "points": [[z.real, z.imag] for z in self.points],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "residual": self.residual,
        }


def _escaped(map: MapSpec, z: complex, R: float) -> bool:
    if not cmath.isfinite(z):
        return True
    if map.is_poly:
        return abs(z) > R
    return z.real > R


def _iterate_with_derivative(map: MapSpec, z: complex, p: int):
    """Return ``(f^p(z), Df^p(z))``."""
    dz = 1 + 0j
    for _ in range(p):
        dz *= derivative_at(map, z)
        z = map(z)
    return z, dz


def _cycle_from(map: MapSpec, z: complex, p: int) -> CycleRecord:
    points = [z]
    for _ in range(p - 1):
        points.append(map(points[-1]))
    multiplier = 1 + 0j
    for w in points:
        multiplier *= derivative_at(map, w)
    residual = max(abs(_iterate_with_derivative(map, w, p)[0] - w) for w in points)
    return CycleRecord(p, tuple(points), multiplier, residual)


def refine_cycle(map: MapSpec, guess: complex, p: int, tol: float = 1e-10) -> CycleRecord:
    """Newton's method on ``g(z) = f^p(z) - z``.

    Iterates until the step stalls at rounding level, then requires the
    residual ``max |f^p(z_i) - z_i|`` over the cycle to be below ``tol``.
    """
    if p < 1:
        raise ValueError("period must be >= 1")
    z = complex(guess)
    for _ in range(NEWTON_CAP):
        fz, dfz = _iterate_with_derivative(map, z, p)
        g = fz - z
        if g == 0:
            break
        dg = dfz - 1
        if abs(dg) < 1e-30:
            raise DerivativeSingular(f"|Df^{p} - 1| = {abs(dg):.3g} at z = {z}")
        step = g / dg
        z -= step
        if not cmath.isfinite(z):
            raise NoConvergence(f"Newton iterate left the finite plane from guess {guess}")
        if abs(step) <= 4 * 2.2e-16 * max(1.0, abs(z)):
            break
    else:
        record = _cycle_from(map, z, p)
        if record.residual < tol:
            return record
        raise NoConvergence(f"no convergence after {NEWTON_CAP} Newton steps (period {p})")
    record = _cycle_from(map, z, p)
    if not record.residual < tol:
        raise NoConvergence(f"residual {record.residual:.3g} >= tol {tol:.3g} (period {p})")
    return record


def _divisors(p: int):
    return [q for q in range(1, p) if p % q == 0]


def _minimal_period(map: MapSpec, record: CycleRecord, tol: float) -> CycleRecord:
    z = record.points[0]
    for q in _divisors(record.period):
        if abs(_iterate_with_derivative(map, z, q)[0] - z) < max(tol, 10 * record.residual):
            return _cycle_from(map, z, q)
    return record


def _trailing_period(window, max_period: int) -> Optional[int]:
    n = len(window)
    for p in range(1, max_period + 1):
        if all(abs(window[k] - window[k - p]) < CAUCHY_TOL for k in range(p, n)):
            return p
    return None


def detect_attracting_cycle(
    map: MapSpec,
    max_period: int = 64,
    max_iter: int = 100_000,
    tol: float = DEFAULT_TOL,
) -> Optional[CycleRecord]:
    """Look for an attracting cycle that captures the marked point.

    The marked orbit is scanned for near-periodicity (a Cauchy test over a
    trailing window of ``2*max_period`` points).  A hit is Newton-refined
    and emitted only if ``|multiplier| < 1 - tol``; a refined cycle with
    ``|multiplier|`` within ``tol`` of 1 raises :class:`AmbiguousConvergence`.
    ``None`` means "none detected within budget", never "none exists".
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    R = escape_radius(map)
    width = 2 * max_period + 1
    window = []
    z = map.marked_point
    check_every = max(1, max_period)
    for k in range(max_iter + 1):
        window.append(z)
        if len(window) > width:
            del window[0]
        if len(window) == width and k % check_every == 0:
            p = _trailing_period(window, max_period)
            if p is not None:
                return _certify(map, window[-1], p, tol, max_iter)
        if _escaped(map, z, R):
            return None
        z = map(z)
    return None


def _certify(map: MapSpec, guess: complex, p: int, tol: float, budget: int) -> Optional[CycleRecord]:
    try:
        record = refine_cycle(map, guess, p, tol=max(tol, 1e-10))
    except DerivativeSingular:
        # Newton cannot move: the guess already sits on a (super)attracting point
        # only when the residual vanishes; otherwise the cycle is parabolic-like.
        record = _cycle_from(map, guess, p)
        if record.residual >= max(tol, 1e-10):
            raise AmbiguousConvergence(
                f"near-periodic orbit (period {p}) with singular Newton system", record
            )
    except NoConvergence:
        # Slow (parabolic) convergence defeats Newton's quadratic phase.
        record = _cycle_from(map, guess, p)
        raise AmbiguousConvergence(
            f"near-periodic orbit (period {p}) did not refine; |multiplier| = "
            f"{abs(record.multiplier):.12g}",
            record,
        )
    record = _minimal_period(map, record, max(tol, 1e-10))
    mod = abs(record.multiplier)
    if 1 - tol <= mod <= 1 + tol:
        raise AmbiguousConvergence(
            f"indifferent cycle of period {record.period}: |multiplier| = {mod:.12g}", record
        )
    if mod > 1:
        return None
    _confirm_attraction(map, guess, record, budget)
    return record


def _confirm_attraction(map: MapSpec, z: complex, record: CycleRecord, budget: int) -> None:
    # Parabolic orbits creep in like 1/k and pass the Cauchy filter while Newton
    # lands a sqrt(eps) away from the double root; geometric convergence to the
    # refined cycle separates them.
    scale = max(1.0, max(abs(w) for w in record.points))
    target = 1e-11 * scale
    for _ in range(budget + 1):
        if min(abs(z - w) for w in record.points) <= target:
            return
        z = map(z)
    raise AmbiguousConvergence(
        f"orbit does not converge geometrically to the period-{record.period} cycle "
        f"(|multiplier| = {abs(record.multiplier):.12g}); treated as indifferent",
        record,
    )


class BasinStatus(str, enum.Enum):
    CAPTURED = "captured"
    ESCAPED = "escaped"
    EXHAUSTED = "exhausted"


def capture_radius(cycle: CycleRecord, default: float = 0.25) -> float:
    """``0.25 * min pairwise gap`` of the cycle; ``default`` for fixed points."""
    if cycle.period == 1:
        return default
    gap = min(abs(u - v) for u, v in itertools.combinations(cycle.points, 2))
    return 0.25 * gap


def basin_status(
    map: MapSpec,
    z: complex,
    cycle: CycleRecord,
    max_iter: int = 10_000,
    capture: Optional[float] = None,
) -> BasinStatus:
    radius = (1 - abs(cycle.multiplier)) * (capture_radius(cycle) if capture is None else capture)
    R = escape_radius(map)
    z = complex(z)
    for _ in range(max_iter + 1):
        if any(abs(z - w) < radius for w in cycle.points):
            return BasinStatus.CAPTURED
        if _escaped(map, z, R):
            return BasinStatus.ESCAPED
        z = map(z)
    return BasinStatus.EXHAUSTED


def in_basin(map: MapSpec, z: complex, cycle: CycleRecord, max_iter: int = 10_000) -> bool:
    """True iff the orbit of ``z`` enters the linearization disk of ``cycle``.

    Use :func:`basin_status` to tell escape from budget exhaustion.
    """
    return basin_status(map, z, cycle, max_iter) is BasinStatus.CAPTURED


def multiplier_rate(cycle: CycleRecord) -> float:
    """``log|multiplier| / period``; ``-inf`` for superattracting cycles."""
    m = abs(cycle.multiplier)
    return -math.inf if m == 0 else math.log(m) / cycle.period
