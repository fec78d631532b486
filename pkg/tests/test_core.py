import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holodyn.core import (
    Disk,
    MapSpec,
    NeumaierSum,
    compensated_sum,
    derivative_at,
    escape_radius,
    iterate,
    preimage_cover,
    pullback_disk,
)
from holodyn.errors import DegenerateBranch

finite = st.floats(-2.0, 2.0, allow_nan=False)
params = st.builds(complex, finite, finite)


def test_mapspec_validation():
    with pytest.raises(ValueError):
        MapSpec.poly(1, 0)
    with pytest.raises(ValueError):
        MapSpec.exponential(0)
    assert MapSpec.poly(3, 1j).marked_point == 1j
    assert MapSpec.exponential(0.5).marked_point == 0


def test_superattracting_two_cycle_orbit():
    tr = iterate(MapSpec.poly(2, -1), 0, 4)
    assert list(tr.points) == [0, -1, 0, -1, 0]
    assert tr.cum_logderiv[1] == -math.inf
    assert tr.cum_logderiv[2] == -math.inf
    assert tr.hit_critical_at == 0


def test_chebyshev_orbit_lands_on_fixed_point():
    tr = iterate(MapSpec.poly(2, -2), -2, 3)
    assert list(tr.points) == [-2, 2, 2, 2]
    assert tr.cum_logderiv[3] == pytest.approx(3 * math.log(4), abs=1e-12)


def test_exponential_orbit_from_zero():
    tr = iterate(MapSpec.exponential(1), 0, 3)
    e = math.e
    assert np.allclose(tr.points, [0, 1, e, e**e])
    assert tr.cum_logderiv[3] == pytest.approx(1 + e, abs=1e-12)


def test_exponential_log_derivative_is_log_of_next_point():
    tr = iterate(MapSpec.exponential(0.3 + 0.2j), 0.1j, 30)
    inc = np.diff(tr.cum_logderiv)
    assert np.allclose(inc, np.log(np.abs(tr.points[1:])), atol=1e-12)


def test_derivative_examples():
    assert derivative_at(MapSpec.poly(2, -2), 2) == 4
    assert derivative_at(MapSpec.poly(3, 0), 1j) == pytest.approx(-3)


def test_escape_marks_first_index_beyond_radius():
    m = MapSpec.poly(2, 1)
    tr = iterate(m, 0, 100)
    assert tr.escaped_at == tr.n
    assert abs(tr.points[-1]) > escape_radius(m)
    assert np.all(np.abs(tr.points[:-1]) <= escape_radius(m))


def test_overflow_in_exponential_never_raises():
    tr = iterate(MapSpec.exponential(1), 0, 10)
    assert tr.escaped_at is not None
    assert np.all(np.isfinite(tr.points))


def test_neumaier_matches_fsum_on_cancelling_data():
    vals = [1e16, 1.0, -1e16, 3.0, 1e-3] * 1000
    assert compensated_sum(vals) == pytest.approx(math.fsum(vals), rel=0, abs=1e-9)
    acc = NeumaierSum()
    acc.add(1.0)
    acc.add(-math.inf)
    acc.add(5.0)
    assert acc.value == -math.inf


def test_compensated_orbit_sum_matches_high_precision():
    m = MapSpec.poly(2, 1j)
    tr = iterate(m, 1j, 2000)
    mpmath.mp.dps = 30
    ref = mpmath.fsum(mpmath.log(2 * abs(mpmath.mpc(z.real, z.imag))) for z in tr.points[:-1])
    assert abs(tr.cum_logderiv[-1] - float(ref)) < 1e-10


@given(params, st.integers(0, 40), st.integers(0, 40))
def test_cocycle_additivity(c, m, n):
    f = MapSpec.poly(2, c)
    tr = iterate(f, c, m + n)
    if tr.n < m + n or tr.hit_critical_at is not None:
        return
    tail = iterate(f, tr.points[m], n)
    assert tr.cum_logderiv[m + n] == pytest.approx(tr.cum_logderiv[m] + tail.cum_logderiv[n], abs=1e-9)


@given(params, st.integers(2, 5), st.integers(0, 60))
def test_points_follow_the_map(c, d, n):
    f = MapSpec.poly(d, c)
    tr = iterate(f, c, n)
    for k in range(tr.n):
        assert tr.points[k + 1] == f(complex(tr.points[k]))


def test_disk_validation():
    with pytest.raises(ValueError):
        Disk(0, -1)
    with pytest.raises(ValueError):
        Disk(0, math.inf)


def test_pullback_example_radius():
    m = MapSpec.poly(2, 0)
    out = pullback_disk(m, Disk(4, 0.4), 2)
    assert out.center == 2
    assert 0.10 <= out.radius <= 0.11


def test_pullback_degenerate_branch():
    with pytest.raises(DegenerateBranch):
        pullback_disk(MapSpec.poly(2, 0), Disk(0.1, 0.2), 1)


@given(
    params,
    st.integers(2, 4),
    st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)),
    st.floats(0.01, 0.95),
    st.integers(0, 3),
)
def test_pullback_soundness(c, d, w0, frac, k):
    f = MapSpec.poly(d, c)
    rho = abs(w0 - c)
    if rho < 1e-3:
        return
    target = Disk(w0, frac * rho)
    roots = [cmath.rect(rho ** (1 / d), (cmath.phase(w0 - c) + 2 * math.pi * j) / d) for j in range(d)]
    out = pullback_disk(f, target, roots[k % d])
    # all 10^3 boundary samples: the preimage on the same branch lies in the disk
    theta = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
    for w in w0 + target.radius * np.exp(1j * theta):
        pre = [cmath.rect(abs(w - c) ** (1 / d), (cmath.phase(w - c) + 2 * math.pi * j) / d) for j in range(d)]
        nearest = min(pre, key=lambda u: abs(u - out.center))
        assert abs(nearest - out.center) <= out.radius * (1 + 1e-9) + 1e-12
    assert all(abs(f(u) - target.center) <= target.radius * (1 + 1e-9) + 1e-12 for u in [out.center])


@given(params, st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)), st.floats(0, 2))
def test_preimage_cover_contains_all_preimages(c, w0, r):
    f = MapSpec.poly(2, c)
    cover = preimage_cover(f, Disk(w0, r))
    for w in w0 + r * np.exp(1j * np.linspace(0, 2 * np.pi, 64)):
        s = cmath.sqrt(w - c)
        assert abs(s) <= cover.radius * (1 + 1e-12) + 1e-15
