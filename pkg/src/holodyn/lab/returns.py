"""First-entry events and the derivative lower bounds at return times.

Two families of bounds are checked on sampled orbits:

* returns to a ball around the critical value ``c``: at the first entry
  time ``n`` into ``B(c, delta)`` either
  ``|Df^n(z)| >= lam^-n |f^n(z) - c| / max(delta, |z - c|)`` or (only when
  ``|z - c| > delta``) ``|Df^n(z)| >= |f^n(z) - c| / (12 |z - c|)``;
* returns to a ball around the critical point 0 (polynomials without
  sinks): ``|Df^n(z)| >= delta / (12 |z|) lam^-n``, and ``lam^-n`` when
  ``|z| = delta``;

plus the closest-return bound ``|Df^n(z)| >= min(delta0/(12|z|), 1) lam^-n``.
Everything is compared in log scale.  Failures are findings: campaigns
persist each one as a standalone JSON artifact.
"""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import MapSpec, OrbitTrace, iterate, roots_array
from ..errors import PreconditionUnmet

LOG_TOL = 1e-9


class Lemma(str, enum.Enum):
    RETURN = "return"
    RETURN_POLY = "return_poly"
    CLOSE_RETURN = "close_return"


@dataclass(frozen=True, eq=False)
class ReturnEvent:
    z: complex
    delta: float
    n: int
    target: complex
    orbit: OrbitTrace

    @property
    def log_derivative(self) -> float:
        return float(self.orbit.cum_logderiv[self.n])

    @property
    def endpoint(self) -> complex:
        return complex(self.orbit.points[self.n])


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    lam: float
    passed: bool
    slack: float
    lemma: Lemma = Lemma.RETURN
    log_lhs: float = 0.0
    log_rhs: float = 0.0


def first_entry(
    map: MapSpec, z: complex, delta: float, target: complex, n_max: int = 10_000
) -> Optional[ReturnEvent]:
    """Minimal ``n >= 1`` with ``|f^n(z) - target| <= delta``, or ``None``.

    The orbit is grown in doubling chunks so that early entries stay cheap.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    n_try = min(64, n_max)
    while True:
        trace = iterate(map, z, n_try)
        dist = np.abs(trace.points[1:] - target)
        hits = np.flatnonzero(dist <= delta)
        if len(hits):
            return ReturnEvent(complex(z), float(delta), int(hits[0]) + 1, complex(target), trace)
        if trace.n < n_try or n_try >= n_max:
            return None
        n_try = min(2 * n_try, n_max)


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _make_check(log_lhs: float, log_rhs: float, lam: float, lemma: Lemma, tol: float) -> BoundCheck:
    if log_rhs == -math.inf:
        slack = math.inf
    elif log_lhs == -math.inf:
        slack = -math.inf
    else:
        slack = log_lhs - log_rhs
    return BoundCheck(
        lhs=math.exp(log_lhs) if log_lhs < 709 else math.inf,
        rhs=math.exp(log_rhs) if log_rhs < 709 else math.inf,
        lam=lam,
        passed=slack >= -tol,
        slack=slack,
        lemma=lemma,
        log_lhs=log_lhs,
        log_rhs=log_rhs,
    )


def check_return_bound(event: ReturnEvent, lam: float, tol: float = LOG_TOL) -> BoundCheck:
    """Check the bound that applies to ``event``.

    Events aimed at the critical value get the disjunction of the two
    critical-value bounds; events aimed at 0 on a polynomial get the
    critical-point bound (which needs ``|z| >= delta``).
    """
    if lam <= 1:
        raise ValueError("lam must exceed 1")
    map = event.orbit.map
    n, delta = event.n, event.delta
    log_lhs = event.log_derivative
    log_lam_n = n * math.log(lam)
    if event.target == map.critical_value:
        c = map.critical_value
        dist_n = abs(event.endpoint - c)
        dist_0 = abs(event.z - c)
        log_rhs = -log_lam_n + _safe_log(dist_n) - math.log(max(delta, dist_0))
        if dist_0 > delta:
            log_rhs = min(log_rhs, _safe_log(dist_n) - math.log(12 * dist_0))
        return _make_check(log_lhs, log_rhs, lam, Lemma.RETURN, tol)
    if event.target == 0 and map.is_poly:
        r = abs(event.z)
        if r < delta:
            raise PreconditionUnmet(f"|z| = {r:.6g} < delta = {delta:.6g}")
        if r == delta:
            log_rhs = -log_lam_n
        else:
            log_rhs = math.log(delta) - math.log(12 * r) - log_lam_n
        return _make_check(log_lhs, log_rhs, lam, Lemma.RETURN_POLY, tol)
    raise ValueError("target must be the critical value, or 0 for a polynomial")


def is_closest_return(trace: OrbitTrace, n: int, delta0: float) -> bool:
    r = np.abs(trace.points[: n + 1])
    return bool(r[n] <= delta0 and np.all(r[n] <= r[:n]))


def check_close_return_bound(
    map: MapSpec, z: complex, n: int, lam: float = 1.05, delta0: float = 0.05, tol: float = LOG_TOL
) -> BoundCheck:
    """``|Df^n(z)| >= min(delta0/(12|z|), 1) lam^-n`` at a closest return ``n`` to 0."""
    if n < 1:
        raise PreconditionUnmet("n must be >= 1")
    z = complex(z)
    if z == 0:
        raise PreconditionUnmet("z is the critical point; Df(0) = 0")
    trace = iterate(map, z, n)
    if trace.n < n:
        raise PreconditionUnmet(f"orbit escapes at step {trace.escaped_at} before n = {n}")
    if not is_closest_return(trace, n, delta0):
        raise PreconditionUnmet(f"n = {n} is not a closest return below delta0 = {delta0}")
    log_rhs = min(math.log(delta0) - math.log(12 * abs(z)), 0.0) - n * math.log(lam)
    return _make_check(float(trace.cum_logderiv[n]), log_rhs, lam, Lemma.CLOSE_RETURN, tol)


# -- sampling and campaigns ----------------------------------------------------


def julia_sample(map: MapSpec, count: int, rng: np.random.Generator, depth: int = 60, start: complex = 0j) -> np.ndarray:
    """Points near the Julia set of ``z^d + c`` by random inverse iteration.

    Each sample applies ``depth`` uniformly chosen inverse branches to
    ``start`` (default the critical point), the standard backward-orbit
    method; the empirical distribution approaches harmonic measure.
    """
    if not map.is_poly:
        raise ValueError("inverse iteration sampling is defined for polynomials only")
    d, c = map.d, map.c
    z = np.full(count, complex(start), dtype=np.complex128)
    for _ in range(depth):
        k = rng.integers(0, d, size=count)
        z = roots_array(z - c, d, k)
    return z


@dataclass
class CampaignResult:
    lemma: str
    checked: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    min_slack: float = math.inf
    artifacts: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        return {
            "lemma": self.lemma,
            "checked": self.checked,
            "skipped": self.skipped,
            "failures": len(self.failures),
            "min_slack": self.min_slack,
            "verdict": "pass" if self.passed else "fail",
        }


def _persist(out_dir: Optional[str], name: str, payload: dict) -> Optional[str]:
    if out_dir is None:
        return None
    folder = os.path.join(out_dir, "counterexamples")
    os.makedirs(folder, exist_ok=True)
    path = os.path.join(folder, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _map_dict(map: MapSpec) -> dict:
    return {"family": map.family.value, "d": map.d, "c": [map.c.real, map.c.imag],
            "a": [map.a.real, map.a.imag]}


def _record_failure(result: CampaignResult, out_dir, payload: dict) -> None:
    result.failures.append(payload)
    path = _persist(out_dir, f"{result.lemma}-{len(result.failures):05d}.json", payload)
    if path:
        result.artifacts.append(path)


def return_bound_campaign(
    map: MapSpec,
    delta: float,
    lam: float,
    events: int,
    seed: int,
    lemma: Lemma = Lemma.RETURN,
    n_max: int = 10_000,
    out_dir: Optional[str] = None,
    max_samples: Optional[int] = None,
) -> CampaignResult:
    """Harvest ``events`` first-entry events from Julia samples and check each bound.

    ``lemma=RETURN`` aims at the critical value, ``RETURN_POLY`` at 0.
    Samples without an entry within ``n_max`` (or inside the target ball for
    ``RETURN_POLY``) are skipped and counted.
    """
    lemma = Lemma(lemma)
    target = map.critical_value if lemma is Lemma.RETURN else 0j
    rng = np.random.default_rng(seed)
    result = CampaignResult(lemma.value)
    budget = max_samples if max_samples is not None else 4 * events
    batch = julia_sample(map, budget, rng)
    for idx, z in enumerate(batch):
        if result.checked >= events:
            break
        z = complex(z)
        if lemma is Lemma.RETURN_POLY and abs(z) < delta:
            result.skipped += 1
            continue
        ev = first_entry(map, z, delta, target, n_max)
        if ev is None:
            result.skipped += 1
            continue
        chk = check_return_bound(ev, lam)
        result.checked += 1
        result.rows.append((idx, ev.n, chk.log_lhs, chk.log_rhs, chk.slack, chk.passed))
        result.min_slack = min(result.min_slack, chk.slack)
        if not chk.passed:
            _record_failure(result, out_dir, {
                "lemma": lemma.value, "map": _map_dict(map), "z": [z.real, z.imag],
                "delta": delta, "lam": lam, "n": ev.n, "seed": seed, "sample_index": idx,
                "log_lhs": chk.log_lhs, "log_rhs": chk.log_rhs, "slack": chk.slack,
            })
    return result


def close_return_campaign(
    map: MapSpec,
    lam: float,
    delta0: float,
    samples: int,
    seed: int,
    orbit_length: int = 1000,
    out_dir: Optional[str] = None,
) -> CampaignResult:
    """Check the closest-return bound at every closest return of sampled orbits."""
    rng = np.random.default_rng(seed)
    result = CampaignResult(Lemma.CLOSE_RETURN.value)
    for idx, z in enumerate(julia_sample(map, samples, rng)):
        z = complex(z)
        if z == 0:
            result.skipped += 1
            continue
        trace = iterate(map, z, orbit_length)
        r = np.abs(trace.points)
        prev_min = np.minimum.accumulate(r)
        S = trace.cum_logderiv
        for n in range(1, len(r)):
            if r[n] > delta0 or r[n] > prev_min[n - 1]:
                continue
            log_rhs = min(math.log(delta0) - math.log(12 * abs(z)), 0.0) - n * math.log(lam)
            chk = _make_check(float(S[n]), log_rhs, lam, Lemma.CLOSE_RETURN, LOG_TOL)
            result.checked += 1
            result.rows.append((idx, n, chk.log_lhs, chk.log_rhs, chk.slack, chk.passed))
            result.min_slack = min(result.min_slack, chk.slack)
            if not chk.passed:
                _record_failure(result, out_dir, {
                    "lemma": Lemma.CLOSE_RETURN.value, "map": _map_dict(map), "z": [z.real, z.imag],
                    "delta0": delta0, "lam": lam, "n": n, "seed": seed, "sample_index": idx,
                    "log_lhs": chk.log_lhs, "log_rhs": chk.log_rhs, "slack": chk.slack,
                })
    return result
