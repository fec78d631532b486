"""Hyperbolic times, the Pliss lemma, shadows and criticality counts.

Conventions: ``S`` is the cumulative log-derivative of an
:class:`~holodyn.core.OrbitTrace`, so ``S[m] - S[i] = log|Df^{m-i}(z_i)|``.
The only critical point of ``z^d + c`` is 0, so the shadow weight is
``phi(j) = -log|z_j|`` and the primed sums may drop a single index.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    Disk,
    MapSpec,
    OrbitTrace,
    _root_branches,
    inverse_branch_at,
    iterate,
    preimage_cover,
    pullback_disk,
)
from .errors import (
    CertificationLost,
    DegenerateBranch,
    HypothesisFails,
    HypothesisViolated,
    MinusInfinityInWindow,
    OrbitHitsCritical,
)


# -- Pliss lemma ---------------------------------------------------------------


@dataclass(frozen=True)
class PlissInput:
    a: tuple
    B: float
    b1: float
    b2: float

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        if not 0 < self.b1 < self.b2 <= self.B:
            raise ValueError(f"need 0 < b1 < b2 <= B, got b1={self.b1}, b2={self.b2}, B={self.B}")

    @property
    def r(self) -> int:
        return len(self.a)

    @property
    def theta(self) -> float:
        return (self.b2 - self.b1) / (self.B - self.b1)

    def hypotheses_hold(self) -> bool:
        exact = [Fraction(x) for x in self.a]
        return sum(exact) >= Fraction(self.b2) * self.r and all(x <= Fraction(self.B) for x in exact)


def pliss_times(inp: PlissInput) -> list:
    """Indices ``m`` in ``[1, r]`` with ``sum_{i=n+1}^{m} a_i >= b1 (m - n)`` for all ``n < m``.

    With ``P_k = sum_{i<=k} (a_i - b1)`` the condition is
    ``P_m >= max_{n<m} P_n``, one pass over the prefix sums.  Arithmetic is
    exact (floats are converted to fractions), so ties are decided exactly.
    When the lemma's hypotheses fail a :class:`HypothesisViolated` warning
    is issued and the set carries no size guarantee.
    """
    if not inp.hypotheses_hold():
        warnings.warn(
            "Pliss hypotheses fail (sum a_j < b2*r or some a_j > B); no count guarantee",
            HypothesisViolated,
            stacklevel=2,
        )
    b1 = Fraction(inp.b1)
    prefix = Fraction(0)
    best = Fraction(0)
    out = []
    for m, x in enumerate(inp.a, start=1):
        prefix += Fraction(x) - b1
        if prefix >= best:
            out.append(m)
            best = prefix
    return out


# -- hyperbolic times ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HyperbolicTimeSet:
    lam: float
    m_max: int
    times: np.ndarray
    density: float

    def __contains__(self, m) -> bool:
        i = np.searchsorted(self.times, m)
        return bool(i < len(self.times) and self.times[i] == m)

    def mask(self) -> np.ndarray:
        """Boolean array over ``m = 1..m_max``."""
        out = np.zeros(self.m_max, dtype=bool)
        out[self.times - 1] = True
        return out


def _check_window(trace: OrbitTrace, m_max: int) -> np.ndarray:
    S = trace.cum_logderiv
    if len(S) < m_max + 1:
        raise ValueError(f"trace has {len(S) - 1} steps, need {m_max}")
    S = S[: m_max + 1]
    bad = np.flatnonzero(np.isneginf(S))
    if len(bad):
        raise MinusInfinityInWindow(f"log-derivative sum is -inf from index {bad[0]}")
    return S


def hyperbolic_times(trace: OrbitTrace, lam: float, m_max: int, atol: float = 1e-12) -> HyperbolicTimeSet:
    """All ``lam``-hyperbolic times ``m <= m_max``.

    ``m`` qualifies iff ``S_m - S_i >= (m - i) log lam`` for every
    ``0 <= i < m``, i.e. ``S_m - m log lam`` is at least the running max of
    ``S_i - i log lam``.  ``atol`` admits rounding-level ties such as
    ``lam == |Df|`` on a fixed point.
    """
    if lam <= 1:
        raise ValueError("lam must exceed 1")
    S = _check_window(trace, m_max)
    L = math.log(lam)
    u = S - L * np.arange(m_max + 1)
    prev_max = np.maximum.accumulate(u)[:-1]
    ok = u[1:] >= prev_max - atol
    times = np.flatnonzero(ok) + 1
    return HyperbolicTimeSet(lam, m_max, times, len(times) / m_max if m_max else 0.0)


# -- shadows -------------------------------------------------------------------


def cover_counts(starts: np.ndarray, ends: np.ndarray, m: int) -> np.ndarray:
    """For ``n = 1..m``, the number of half-open intervals ``(start, end]`` containing ``n``.

    Integer ``n`` lies in ``(j, x]`` iff ``j + 1 <= n <= floor(x)``; the
    count is a difference-array sweep.
    """
    starts = np.asarray(starts, dtype=np.int64)
    hi = np.floor(np.minimum(np.asarray(ends, dtype=float), m)).astype(np.int64)
    lo = starts + 1
    keep = hi >= lo
    diff = np.zeros(m + 2, dtype=np.int64)
    np.add.at(diff, lo[keep], 1)
    np.add.at(diff, hi[keep] + 1, -1)
    return np.cumsum(diff)[1 : m + 1]


def shadow_weights(trace: OrbitTrace, m: int) -> np.ndarray:
    """``phi(j) = -log|z_j|`` for ``j = 0..m-1``."""
    if not trace.map.is_poly:
        raise ValueError("shadows are defined for the polynomial family only (Crit' = {0})")
    z = trace.points[:m]
    if len(z) < m:
        raise ValueError(f"trace has {len(trace.points)} points, need {m}")
    r = np.abs(z)
    hits = np.flatnonzero(r == 0)
    if len(hits):
        raise OrbitHitsCritical(f"orbit hits the critical point at index {hits[0]}", int(hits[0]))
    return -np.log(r)


def fit_dpu_constant(phi: np.ndarray, exclude: int = 1) -> float:
    """Least ``C`` with ``sum'_{k<n} phi+(k) <= C n`` for every ``n <= len(phi)``.

    ``phi+`` is the positive part (negative weights give empty shadows) and
    the primed sum drops the ``exclude`` largest terms among ``k < n``.
    """
    pos = np.maximum(phi, 0.0)
    total = np.cumsum(pos)
    if exclude == 0:
        kept = total
    elif exclude == 1:
        kept = total - np.maximum.accumulate(pos)
    else:
        kept = np.array([total[i] - np.sort(pos[: i + 1])[-exclude:].sum() for i in range(len(pos))])
    n = np.arange(1, len(pos) + 1)
    return float(np.max(kept / n)) if len(pos) else 0.0


@dataclass(frozen=True, eq=False)
class ShadowTable:
    phi: np.ndarray
    K: float
    N: int
    shadows: list
    cover_count: np.ndarray
    in_A: np.ndarray
    C_g_fit: float
    claim_margin: float

    @property
    def m(self) -> int:
        return len(self.cover_count)

    @property
    def A_density(self) -> float:
        return float(self.in_A.mean()) if self.m else 1.0

    @property
    def claim_bound(self) -> float:
        return 1.0 - self.C_g_fit * self.K / self.N if self.N > 0 else -math.inf

    @property
    def claim_holds(self) -> bool:
        return self.claim_margin >= -1e-12


def shadow_table(trace: OrbitTrace, K: float, N: int, m: Optional[int] = None) -> ShadowTable:
    """Shadows ``S(j, K) = (j, j + K phi(j)]``, ``A(N, K)`` membership and the counting bound.

    ``claim_margin`` is ``min over m' <= m`` of
    ``#(A(N,K) cap [1, m'])/m' - (1 - C_g_fit K / N)``; it is nonnegative
    whenever the counting argument is consistent with the fitted constant.
    """
    if K <= 0:
        raise ValueError("K must be positive")
    if N < 0:
        raise ValueError("N must be >= 0")
    if m is None:
        m = trace.n
    phi = shadow_weights(trace, m)
    j = np.arange(m)
    ends = j + K * phi
    counts = cover_counts(j, ends, m)
    in_A = counts <= N
    shadows = [(int(jj), float(e)) for jj, e in zip(j, ends) if phi[jj] > 0]
    C = fit_dpu_constant(phi)
    bound = 1.0 - C * K / N if N > 0 else -math.inf
    running = np.cumsum(in_A) / np.arange(1, m + 1)
    margin = float(np.min(running - bound)) if m else 0.0
    return ShadowTable(phi, K, N, shadows, counts, in_A, C, margin)


# -- criticality ---------------------------------------------------------------


class CriticalityMode(str, enum.Enum):
    SHADOW_PROXY = "ShadowProxy"
    CERTIFIED_PULLBACK = "CertifiedPullback"


@dataclass(frozen=True)
class CriticalityReport:
    n: int
    r: float
    mode: CriticalityMode
    count: int
    certified: bool
    radii: tuple = ()
    note: str = ""

    def telescope_constant(self, lam: float) -> float:
        """Least ``C`` with ``radius_k <= C r lam^{-k}`` over the pullback steps."""
        if not self.radii or self.r == 0:
            return 0.0
        return max(rad * lam**k / self.r for k, rad in enumerate(self.radii, start=1))


def _proxy_count(points, n: int, r: float, C: float, lam: float) -> int:
    count = 0
    for j in range(1, n + 1):
        if abs(points[n - j]) <= C * r * lam ** (-j):
            count += 1
    return count


def _certified_pullback(map: MapSpec, points, n: int, r: float, radius_cap: float):
    disk = Disk(points[n], r)
    count = 0
    radii = []
    for k in range(1, n + 1):
        hint = complex(points[n - k])
        w = complex(points[n - k + 1])
        try:
            pullback_disk(map, disk, hint)
        except DegenerateBranch:
            count += 1
            disk = preimage_cover(map, disk)
        else:
            # choose the branch that carries the orbit point w back to the hint
            w0 = disk.center
            roots = _root_branches(w0 - map.c, map.d)
            best = min(roots, key=lambda u: abs(inverse_branch_at(map, w0, u, w) - hint))
            disk = pullback_disk(map, disk, best)
        radii.append(disk.radius)
        if disk.radius > radius_cap:
            raise CertificationLost(f"pullback radius {disk.radius:.3g} exceeds cap {radius_cap} at step {k}")
    return count, tuple(radii)


def criticality_count(
    map: MapSpec,
    trace: OrbitTrace,
    n: int,
    r: float,
    mode: CriticalityMode = CriticalityMode.SHADOW_PROXY,
    C: float = 1.0,
    lam: float = 1.0,
    radius_cap: float = 1.0,
) -> CriticalityReport:
    """Bound the number of critical steps of ``f^n`` on the component over ``B(f^n(z), r)``.

    ``ShadowProxy`` counts ``j`` in ``[1, n]`` with ``|f^{n-j}(z)| <= C r lam^{-j}``,
    the telescope-lemma heuristic.  ``CertifiedPullback`` pulls the disk
    back one step at a time with :func:`~holodyn.core.pullback_disk` and
    counts the steps whose target contains ``c``; it is a true upper bound.
    If a pullback radius exceeds ``radius_cap`` the proxy is returned with
    ``certified=False``.
    """
    mode = CriticalityMode(mode)
    if n < 0 or n > trace.n:
        raise ValueError(f"n must be in [0, {trace.n}]")
    if n == 0:
        return CriticalityReport(0, r, mode, 0, True)
    points = trace.points
    if mode is CriticalityMode.CERTIFIED_PULLBACK:
        try:
            count, radii = _certified_pullback(map, points, n, r, radius_cap)
        except CertificationLost as exc:
            proxy = _proxy_count(points, n, r, C, lam)
            return CriticalityReport(n, r, CriticalityMode.SHADOW_PROXY, proxy, False, note=str(exc))
        return CriticalityReport(n, r, mode, count, True, radii)
    return CriticalityReport(n, r, mode, _proxy_count(points, n, r, C, lam), False)


# -- density report ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityReport:
    average_rate: float
    required_rate: float
    lam_hyperbolic: float
    theta: float
    K0: float
    N: int
    C_g_fit: float
    hyperbolic: HyperbolicTimeSet
    shadows: ShadowTable
    H: np.ndarray
    density: float
    alpha: float
    proxy_counts: np.ndarray
    violations: list
    certified: list = field(default_factory=list)

    @property
    def density_ge_alpha(self) -> bool:
        return self.density >= self.alpha

    def rows(self):
        """``(n, is_hyperbolic, shadow_cover_count, in_A, criticality_count)`` for ``n = 1..m``."""
        hyp = self.hyperbolic.mask()
        for i in range(self.hyperbolic.m_max):
            yield (i + 1, bool(hyp[i]), int(self.shadows.cover_count[i]),
                   bool(self.shadows.in_A[i]), int(self.proxy_counts[i]))

    def summary(self) -> dict:
        return {
            "average_rate": self.average_rate,
            "required_rate": self.required_rate,
            "lam_hyperbolic": self.lam_hyperbolic,
            "theta": self.theta,
            "K0": self.K0,
            "N": self.N,
            "C_g_fit": self.C_g_fit,
            "hyperbolic_density": self.hyperbolic.density,
            "A_density": self.shadows.A_density,
            "density": self.density,
            "alpha": self.alpha,
            "density_ge_alpha": self.density_ge_alpha,
            "claim_holds": self.shadows.claim_holds,
            "criticality_violations": len(self.violations),
            "certified_samples": [
                {"n": c.n, "count": c.count, "certified": c.certified} for c in self.certified
            ],
        }


def hyperbolic_density_report(
    map: MapSpec,
    z: complex,
    lam: float,
    eps0: float,
    m: int,
    K0: Optional[float] = None,
    N: Optional[int] = None,
    rho: float = 0.1,
    C: float = 1.0,
    certify: int = 0,
) -> DensityReport:
    """Density of ``H_m`` = hyperbolic times intersected with ``A(N, K0)``.

    Requires ``(1/m) log|Df^m(z)| > eps0 + log lam``, otherwise raises
    :class:`HypothesisFails`.  With ``eps = eps0/8``: hyperbolic times are
    taken at rate ``lam e^{4 eps}``, ``K0 = 1/log(lam e^{2 eps})``,
    ``theta`` is the Pliss constant of the increments with
    ``b2 = log lam + eps0``, ``b1 = log lam + 4 eps``, ``B = max`` increment,
    and ``N = floor(2 C_g K0 / theta) + 1``.  Every ``n`` in ``H_m`` gets a
    proxy criticality count at radius ``rho``; counts above ``N`` are
    reported as violations.  ``certify`` > 0 additionally certifies that
    many of the smallest elements of ``H_m`` by pullback.
    """
    if lam <= 1 or eps0 <= 0:
        raise ValueError("need lam > 1 and eps0 > 0")
    trace = iterate(map, z, m)
    if trace.n < m:
        raise HypothesisFails(f"orbit escapes at step {trace.escaped_at} before m = {m}")
    S = trace.cum_logderiv
    required = eps0 + math.log(lam)
    avg = float(S[m] / m)
    if not avg > required:
        raise HypothesisFails(
            f"(1/m) log|Df^m| = {avg:.6g} does not exceed eps0 + log lam = {required:.6g}",
            avg, required,
        )
    eps = eps0 / 8
    lam_h = lam * math.exp(4 * eps)
    hyp = hyperbolic_times(trace, lam_h, m)
    increments = np.diff(S[: m + 1])
    b1, b2, B = math.log(lam_h), required, float(increments.max())
    theta = (b2 - b1) / (B - b1)
    if K0 is None:
        K0 = 1.0 / math.log(lam * math.exp(2 * eps))
    C_g = fit_dpu_constant(shadow_weights(trace, m))
    if N is None:
        N = int(math.floor(2 * C_g * K0 / theta)) + 1
    table = shadow_table(trace, K0, N, m)
    in_H = hyp.mask() & table.in_A
    H = np.flatnonzero(in_H) + 1

    lam_p = lam * math.exp(2 * eps)
    phi = table.phi
    idx = np.arange(m)
    proxy = cover_counts(idx, idx + (phi + math.log(C * rho)) / math.log(lam_p), m)
    violations = [int(n) for n in H if proxy[n - 1] > N]
    certified = [
        criticality_count(map, trace, int(n), rho, CriticalityMode.CERTIFIED_PULLBACK, C, lam_p)
        for n in H[:certify]
    ]
    return DensityReport(
        average_rate=avg,
        required_rate=required,
        lam_hyperbolic=lam_h,
        theta=theta,
        K0=K0,
        N=N,
        C_g_fit=table.C_g_fit,
        hyperbolic=hyp,
        shadows=table,
        H=H,
        density=len(H) / m,
        alpha=theta / 2,
        proxy_counts=proxy,
        violations=violations,
        certified=certified,
    )
