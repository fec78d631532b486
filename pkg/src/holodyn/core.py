"""Map families, orbit iteration and the derivative cocycle.

Two families are supported: unicritical polynomials ``z**d + c`` and
exponential maps ``a * exp(z)``.  Orbits carry the running sum
``S_k = log|Df^k(z_0)|`` accumulated with Neumaier's compensated
summation, so that long orbits (``n ~ 10**6``) keep the exponent estimate
accurate to a few ulps of the total.
"""

from __future__ import annotations

import cmath
import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateBranch

NEG_INF = float("-inf")

#: ``Re z`` beyond which ``a*exp(z)`` is treated as escaping to infinity.
EXP_CUTOFF = 700.0


class Family(str, enum.Enum):
    POLY = "poly"
    EXP = "exp"


@dataclass(frozen=True)
class MapSpec:
    """A map ``z**d + c`` or ``a*exp(z)``; build with :meth:`poly` / :meth:`exponential`."""

    family: Family
    d: int = 2
    c: complex = 0j
    a: complex = 1 + 0j
    exp_cutoff: float = EXP_CUTOFF

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "a", complex(self.a))
        if self.family is Family.POLY:
            if int(self.d) != self.d or self.d < 2:
                raise ValueError(f"degree must be an integer >= 2, got {self.d!r}")
            object.__setattr__(self, "d", int(self.d))
            if not cmath.isfinite(self.c):
                raise ValueError("c must be finite")
        else:
            if self.a == 0 or not cmath.isfinite(self.a):
                raise ValueError("a must be finite and nonzero")

    @classmethod
    def poly(cls, d: int, c: complex) -> "MapSpec":
        return cls(Family.POLY, d=d, c=c)

    @classmethod
    def exponential(cls, a: complex, cutoff: float = EXP_CUTOFF) -> "MapSpec":
        return cls(Family.EXP, a=a, exp_cutoff=cutoff)

    @property
    def is_poly(self) -> bool:
        return self.family is Family.POLY

    @property
    def marked_point(self) -> complex:
        """Critical value ``c`` for polynomials, the asymptotic-value orbit start 0 for exponentials."""
        return self.c if self.is_poly else 0j

    @property
    def critical_value(self) -> complex:
        return self.c if self.is_poly else 0j

    def __call__(self, z: complex) -> complex:
        if self.is_poly:
            return (z * z if self.d == 2 else z**self.d) + self.c
        return self.a * cmath.exp(z)

    def log_abs_derivative(self, z: complex) -> float:
        """``log|Df(z)|``; ``-inf`` at the critical point."""
        if self.is_poly:
            r = abs(z)
            if r == 0.0:
                return NEG_INF
            return math.log(self.d) + (self.d - 1) * math.log(r)
        return math.log(abs(self.a)) + z.real

    def describe(self) -> str:
        if self.is_poly:
            return f"z^{self.d}+({self.c})"
        return f"({self.a})*exp(z)"


def derivative_at(map: MapSpec, z: complex) -> complex:
    """``Df(z)``: ``d*z**(d-1)`` or ``a*exp(z)``."""
    z = complex(z)
    if map.is_poly:
        return map.d * z ** (map.d - 1)
    return map.a * cmath.exp(z)


def escape_radius(map: MapSpec) -> float:
    """Radius past which the orbit provably tends to infinity.

    For polynomials ``R = 1 + max(1, |c|)``: then ``R**d - R > |c|``, so
    ``|z| > R`` gives ``|f(z)| > |z|``.  For the exponential family this
    is the configured real-part cutoff instead (it is compared against
    ``Re z``, not ``|z|``).
    """
    if map.is_poly:
        return 1.0 + max(1.0, abs(map.c))
    return map.exp_cutoff


class NeumaierSum:
    """Running compensated sum that also tracks an absorbing ``-inf``."""

    __slots__ = ("_s", "_comp", "_neg_inf")

    def __init__(self):
        self._s = 0.0
        self._comp = 0.0
        self._neg_inf = False

    def add(self, x: float) -> float:
        if self._neg_inf:
            return NEG_INF
        if x == NEG_INF:
            self._neg_inf = True
            return NEG_INF
        s = self._s
        t = s + x
        if abs(s) >= abs(x):
            self._comp += (s - t) + x
        else:
            self._comp += (x - t) + s
        self._s = t
        return t + self._comp

    @property
    def value(self) -> float:
        return NEG_INF if self._neg_inf else self._s + self._comp


def compensated_sum(values) -> float:
    acc = NeumaierSum()
    for v in values:
        acc.add(v)
    return acc.value


@dataclass(frozen=True, eq=False)
class OrbitTrace:
    """Forward orbit ``z_0..z_n`` with ``cum_logderiv[k] = log|Df^k(z_0)|``."""

    map: MapSpec
    start: complex
    points: np.ndarray
    cum_logderiv: np.ndarray
    escaped_at: Optional[int] = None
    hit_critical_at: Optional[int] = None

    def __post_init__(self):
        self.points.setflags(write=False)
        self.cum_logderiv.setflags(write=False)

    def __len__(self):
        return len(self.points)

    @property
    def n(self) -> int:
        """Number of steps taken (``len(points) - 1``)."""
        return len(self.points) - 1

    def csv_rows(self):
        for k, (z, s) in enumerate(zip(self.points, self.cum_logderiv)):
            yield k, float(z.real), float(z.imag), float(s)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "re", "im", "S"])
        for k, re, im, s in self.csv_rows():
            w.writerow([k, repr(re), repr(im), repr(s)])
        return buf.getvalue()


def iterate(map: MapSpec, z0: complex, n: int) -> OrbitTrace:
    """Iterate ``n`` steps from ``z0``, stopping at escape.

    The trace is cut at the first index ``m`` with ``|z_m| > R``
    (polynomials) or ``Re z_m > cutoff`` (exponential), and ``escaped_at``
    is set to ``m``.  A non-finite iterate marks the last finite index as
    escaped instead of raising.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    z = complex(z0)
    if not cmath.isfinite(z):
        raise ValueError("z0 must be finite")

    points = [z]
    sums = [0.0]
    acc = NeumaierSum()
    escaped_at = None
    hit_critical_at = None

    if map.is_poly:
        R = escape_radius(map)
        d, c = map.d, map.c
        log_d = math.log(d)
        dm1 = d - 1
        log = math.log
        if abs(z) > R:
            escaped_at = 0
        else:
            for k in range(n):
                r = abs(z)
                if r == 0.0:
                    if hit_critical_at is None:
                        hit_critical_at = k
                    s = acc.add(NEG_INF)
                else:
                    s = acc.add(log_d + dm1 * log(r))
                z = z * z + c if d == 2 else z**d + c
                if not cmath.isfinite(z):
                    escaped_at = k
                    break
                points.append(z)
                sums.append(s)
                if abs(z) > R:
                    escaped_at = k + 1
                    break
    else:
        a = map.a
        log_a = math.log(abs(a))
        cutoff = map.exp_cutoff
        exp = cmath.exp
        if z.real > cutoff:
            escaped_at = 0
        else:
            for k in range(n):
                s = acc.add(log_a + z.real)
                z = a * exp(z)
                if not cmath.isfinite(z):
                    escaped_at = k
                    break
                points.append(z)
                sums.append(s)
                if z.real > cutoff:
                    escaped_at = k + 1
                    break

    return OrbitTrace(
        map=map,
        start=complex(z0),
        points=np.array(points, dtype=np.complex128),
        cum_logderiv=np.array(sums, dtype=np.float64),
        escaped_at=escaped_at,
        hit_critical_at=hit_critical_at,
    )


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius >= 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be finite and >= 0, got {self.radius!r}")

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return abs(complex(z) - self.center) <= self.radius + slack


def unit_roots(d: int) -> np.ndarray:
    """``exp(2 pi i k / d)`` with components that should vanish set to exact zeros."""
    k = np.arange(d)
    w = np.exp(2j * np.pi * k / d)
    re = np.where(np.abs(w.real) < 1e-15, 0.0, w.real)
    im = np.where(np.abs(w.imag) < 1e-15, 0.0, w.imag)
    return re + 1j * im


def _principal_root(w: complex, d: int) -> complex:
    if d == 2:
        return cmath.sqrt(w)
    return cmath.rect(abs(w) ** (1.0 / d), cmath.phase(w) / d)


def _root_branches(w: complex, d: int) -> list[complex]:
    """All ``d``-th roots of ``w``, FixedAngle order: ``k``-th has argument ``(arg w + 2 pi k)/d``.

    Real inputs keep real roots exactly real, so real orbits stay real.
    """
    base = _principal_root(complex(w), d)
    if d == 2:
        return [base, -base]
    return [base * complex(u) for u in unit_roots(d)]


def roots_array(w: np.ndarray, d: int, k: np.ndarray) -> np.ndarray:
    """Vectorized ``_root_branches(w, d)[k]``."""
    if d == 2:
        return np.where(k == 0, 1.0, -1.0) * np.sqrt(w)
    base = np.abs(w) ** (1.0 / d) * np.exp(1j * np.angle(w) / d)
    return base * unit_roots(d)[k]


def inverse_branch_at(map: MapSpec, target_center: complex, root: complex, w: complex) -> complex:
    """Continue the inverse branch sending ``target_center`` to ``root`` up to ``w``.

    Valid when the segment from the center to ``w`` avoids ``c`` with
    ``|w - center| < |center - c|`` (then the ratio stays in ``B(1, 1)``
    where the principal root is continuous).
    """
    ratio = (w - map.c) / (target_center - map.c)
    return root * ratio ** (1.0 / map.d)


#: Relative inflation of certified radii to absorb binary64 rounding.
_RADIUS_INFLATION = 1e-12


def pullback_disk(map: MapSpec, target: Disk, root_hint: complex) -> Disk:
    """Certified disk containing the component of ``f^{-1}(target)`` picked by ``root_hint``.

    The branch of ``w -> (w - c)**(1/d)`` is univalent on the target when
    the closed disk misses ``c``.  On the convex target its derivative is
    bounded by ``1/(d * (|w0 - c| - r)**((d-1)/d))``, which gives the
    radius around the branch image of the target center.
    """
    if not map.is_poly:
        raise ValueError("pullback_disk is defined for the polynomial family only")
    d, c = map.d, map.c
    w0, r = target.center, target.radius
    rho = abs(w0 - c)
    if rho <= r:
        raise DegenerateBranch(
            f"closed disk B({w0}, {r}) contains the critical value {c}"
        )
    roots = _root_branches(w0 - c, d)
    center = min(roots, key=lambda u: abs(u - root_hint))
    if r == 0.0:
        return Disk(center, 0.0)
    lip = 1.0 / (d * (rho - r) ** ((d - 1) / d))
    radius = r * lip * (1.0 + _RADIUS_INFLATION)
    return Disk(center, radius)


def preimage_cover(map: MapSpec, target: Disk) -> Disk:
    """Disk covering the whole of ``f^{-1}(target)``: ``|z|**d <= |w0 - c| + r``."""
    if not map.is_poly:
        raise ValueError("preimage_cover is defined for the polynomial family only")
    R = (abs(target.center - map.c) + target.radius) ** (1.0 / map.d)
    return Disk(0j, R * (1.0 + _RADIUS_INFLATION))
