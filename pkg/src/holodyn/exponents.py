"""Forward and backward Lyapunov exponent estimates, and the slow-recurrence test.

Limits are not computable, so ``liminf``/``limsup`` are replaced by tail
statistics over a finite horizon: :func:`lower_exponent` is the minimum of
``chi_n = S_n / n`` over a window ``[burn_in, n_max]``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import random
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import NEG_INF, MapSpec, NeumaierSum, OrbitTrace, _root_branches, iterate
from .errors import BranchPointHit


class Verdict(str, enum.Enum):
    FINITE = "FiniteEstimate"
    MINUS_INFINITY = "MinusInfinity"
    DIVERGES_PLUS = "DivergesPlus"
    ESCAPED = "Escaped"


@dataclass(frozen=True, eq=False)
class ExponentEstimate:
    n: np.ndarray
    chi: np.ndarray
    running_inf_tail: np.ndarray
    running_sup_tail: np.ndarray
    verdict: Verdict
    trace: OrbitTrace

    @property
    def final(self) -> float:
        return float(self.chi[-1]) if len(self.chi) else math.nan

    def tail_rate(self, window: int = 1) -> float:
        """``(S_n - S_{n-window}) / window`` at the end of the horizon."""
        S = self.trace.cum_logderiv
        if window < 1 or window > len(S) - 1:
            raise ValueError("window must be in [1, n]")
        hi, lo = S[-1], S[-1 - window]
        if hi == NEG_INF:
            return NEG_INF
        return float((hi - lo) / window)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "chi_n", "running_inf", "running_sup"])
        for row in zip(self.n, self.chi, self.running_inf_tail, self.running_sup_tail):
            w.writerow([int(row[0])] + [repr(float(x)) for x in row[1:]])
        return buf.getvalue()


def _series_from_trace(trace: OrbitTrace) -> ExponentEstimate:
    S = trace.cum_logderiv[1:]
    n = np.arange(1, len(S) + 1)
    chi = S / n
    inf_tail = np.minimum.accumulate(chi[::-1])[::-1] if len(chi) else chi
    sup_tail = np.maximum.accumulate(chi[::-1])[::-1] if len(chi) else chi
    if trace.hit_critical_at is not None:
        verdict = Verdict.MINUS_INFINITY
    elif trace.escaped_at is not None:
        verdict = Verdict.DIVERGES_PLUS if trace.map.is_poly else Verdict.ESCAPED
    else:
        verdict = Verdict.FINITE
    return ExponentEstimate(n, chi, inf_tail, sup_tail, verdict, trace)


def forward_exponent_series(map: MapSpec, z0: Optional[complex] = None, n_max: int = 1000) -> ExponentEstimate:
    """``chi_n = (1/n) log|Df^n(z0)|`` for ``n = 1..n_max`` (``z0`` defaults to the marked point)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if z0 is None:
        z0 = map.marked_point
    return _series_from_trace(iterate(map, z0, n_max))


def lower_exponent(
    map: MapSpec,
    z0: Optional[complex] = None,
    n_max: int = 1000,
    burn_in: Optional[int] = None,
) -> float:
    """Minimum of ``chi_n`` over ``n`` in ``[burn_in, n_max]``.

    A finite-horizon lower estimate for ``liminf chi_n``, not a limit.
    ``burn_in`` defaults to ``n_max // 2``.  Returns ``+inf`` for escaping
    orbits and ``-inf`` once the orbit has hit the critical point.
    """
    if burn_in is None:
        burn_in = n_max // 2
    if not 0 <= burn_in < n_max:
        raise ValueError("need 0 <= burn_in < n_max")
    est = forward_exponent_series(map, z0, n_max)
    if est.verdict in (Verdict.DIVERGES_PLUS, Verdict.ESCAPED):
        return math.inf
    lo = max(burn_in, 1)
    return float(np.min(est.chi[lo - 1 :]))


def window_lower_exponent(trace: OrbitTrace, lo: int, hi: int) -> float:
    """``min chi_n`` for ``n`` in ``[lo, hi]`` on an existing trace."""
    S = trace.cum_logderiv
    lo = max(lo, 1)
    if hi > len(S) - 1:
        raise ValueError("window exceeds the trace")
    n = np.arange(lo, hi + 1)
    return float(np.min(S[lo : hi + 1] / n))


# -- backward orbits ---------------------------------------------------------


@dataclass(frozen=True)
class FixedAngle:
    """Always take the root with argument ``(arg w + 2 pi k) / d``."""

    k: int = 0


@dataclass(frozen=True)
class RandomSeeded:
    seed: int = 0


@dataclass(frozen=True)
class MinDerivative:
    """Adversarial branch choice.

    All ``d`` roots of ``w - c`` share one modulus, so ``|Df|`` at the
    chosen point is branch independent; the policy instead picks the root
    closest to ``c``, which minimizes ``|Df|`` at the next backward step.
    ``seed`` picks the first branch and breaks exact ties.
    """

    seed: Optional[int] = None


BranchPolicy = Union[FixedAngle, RandomSeeded, MinDerivative]


@dataclass(frozen=True, eq=False)
class BackwardOrbit:
    branch_policy: BranchPolicy
    points: np.ndarray
    cum_logderiv: np.ndarray

    @property
    def chi(self) -> np.ndarray:
        """``chi_n^back = S_n / n`` for ``n = 1..``."""
        S = self.cum_logderiv[1:]
        return S / np.arange(1, len(S) + 1)


def backward_orbit(map: MapSpec, policy: BranchPolicy = FixedAngle(0), n_max: int = 40) -> BackwardOrbit:
    """Backward orbit ``x_0 = 0, x_{-1}, ...`` of the critical point.

    ``S_n = sum_{k=1..n} log|Df(x_{-k})|``, compensated.  Raises
    :class:`BranchPointHit` when some ``x_{-(n-1)}`` equals ``c`` exactly.
    """
    if not map.is_poly:
        raise ValueError("backward orbits are defined for the polynomial family only")
    d, c = map.d, map.c
    rng = random.Random(policy.seed) if isinstance(policy, (RandomSeeded, MinDerivative)) else None
    x = 0j
    points = [x]
    sums = [0.0]
    acc = NeumaierSum()
    for step in range(1, n_max + 1):
        w = x - c
        if w == 0:
            raise BranchPointHit(f"x_{{-{step - 1}}} = c; branch point hit at step {step}", step)
        roots = _root_branches(w, d)
        if isinstance(policy, FixedAngle):
            x = roots[policy.k % d]
        elif isinstance(policy, RandomSeeded):
            x = roots[rng.randrange(d)]
        elif step == 1 and policy.seed is not None:
            x = roots[rng.randrange(d)]
        else:
            best = min(abs(r - c) for r in roots)
            ties = [r for r in roots if abs(r - c) == best]
            x = ties[0] if len(ties) == 1 or rng is None else ties[rng.randrange(len(ties))]
        points.append(x)
        sums.append(acc.add(map.log_abs_derivative(x)))
    return BackwardOrbit(policy, np.array(points), np.array(sums))


# -- slow recurrence ---------------------------------------------------------


class Reference(str, enum.Enum):
    CRITICAL_POINT = "CriticalPoint"
    CRITICAL_VALUE = "CriticalValue"


@dataclass(frozen=True)
class RecurrenceReport:
    alpha: float
    violations: tuple
    horizon: int
    burn_in: int
    reference: Reference
    slowly_recurrent_up_to_horizon: bool
    escaped_at: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "violations": list(self.violations),
            "horizon": self.horizon,
            "burn_in": self.burn_in,
            "reference": self.reference.value,
            "slowly_recurrent_up_to_horizon": self.slowly_recurrent_up_to_horizon,
            "escaped_at": self.escaped_at,
        }


def recurrence_violations(trace: OrbitTrace, ref: complex, alpha: float, index_shift: int = 0) -> list:
    """All ``n >= 1`` with ``|z_n - ref| < exp(-alpha (n + index_shift))``."""
    z = trace.points[1:]
    n = np.arange(1, len(z) + 1)
    dist = np.abs(z - ref)
    bad = dist < np.exp(-alpha * (n + index_shift))
    return [int(k) for k in n[bad]]


def slow_recurrence_test(
    map: MapSpec,
    z0: complex,
    alpha: float,
    horizon: int,
    reference: Reference = Reference.CRITICAL_POINT,
    burn_in: int = 0,
    index_shift: int = 0,
) -> RecurrenceReport:
    """Check ``|f^n(z0) - ref| >= exp(-alpha n)`` for ``1 <= n <= horizon``.

    ``ref`` is the critical point 0 or the critical value ``c``; for
    ``z^d + c`` the two are linked by ``|f^{n+1}(z) - c| = |f^n(z)|^d``,
    which is what ``index_shift`` is for.  The flag ignores violations at
    ``n <= burn_in``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    reference = Reference(reference)
    ref = 0j if reference is Reference.CRITICAL_POINT else map.critical_value
    trace = iterate(map, z0, horizon)
    violations = recurrence_violations(trace, ref, alpha, index_shift)
    late = [n for n in violations if n > burn_in]
    return RecurrenceReport(
        alpha=alpha,
        violations=tuple(violations),
        horizon=horizon,
        burn_in=burn_in,
        reference=reference,
        slowly_recurrent_up_to_horizon=not late,
        escaped_at=trace.escaped_at,
    )
