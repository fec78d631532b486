import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holodyn.core import MapSpec, iterate
from holodyn.errors import BranchPointHit
from holodyn.exponents import (
    FixedAngle,
    MinDerivative,
    RandomSeeded,
    Reference,
    Verdict,
    backward_orbit,
    forward_exponent_series,
    lower_exponent,
    recurrence_violations,
    slow_recurrence_test,
    window_lower_exponent,
)


def test_chebyshev_series_is_constant():
    est = forward_exponent_series(MapSpec.poly(2, -2), n_max=50)
    assert np.allclose(est.chi, 2 * math.log(2), atol=1e-12)
    assert est.verdict is Verdict.FINITE


def test_misiurewicz_exact_on_even_steps():
    # i -> -1+i -> -i -> -1+i: the factors |Df| alternate 2, 2*sqrt2, 2, 2*sqrt2, ...
    est = forward_exponent_series(MapSpec.poly(2, 1j), n_max=2000)
    assert np.allclose(est.chi[1::2], 0.5 * math.log(4 * math.sqrt(2)), atol=1e-12)
    assert math.isclose(0.5 * math.log(4 * math.sqrt(2)), 1.25 * math.log(2))


def test_superattracting_verdict():
    est = forward_exponent_series(MapSpec.poly(2, 0), n_max=10)
    assert est.verdict is Verdict.MINUS_INFINITY
    assert lower_exponent(MapSpec.poly(2, -1), n_max=10) == -math.inf


def test_escaping_orbit_is_plus_infinity():
    assert forward_exponent_series(MapSpec.poly(2, 1), n_max=100).verdict is Verdict.DIVERGES_PLUS
    assert lower_exponent(MapSpec.poly(2, 1), n_max=100) == math.inf
    assert forward_exponent_series(MapSpec.exponential(1), n_max=100).verdict is Verdict.ESCAPED


def test_lower_exponent_window_definition():
    f = MapSpec.poly(2, 0.25)
    est = forward_exponent_series(f, n_max=4000)
    assert lower_exponent(f, n_max=4000, burn_in=100) == pytest.approx(est.chi[99:].min())
    tr = iterate(f, 0.25, 4000)
    assert window_lower_exponent(tr, 100, 4000) == pytest.approx(est.chi[99:].min())


def test_running_tails_bracket_the_series():
    est = forward_exponent_series(MapSpec.poly(2, -0.75 + 0.05j), n_max=500)
    assert np.all(est.running_inf_tail <= est.chi + 1e-15)
    assert np.all(est.running_sup_tail >= est.chi - 1e-15)


def test_csv_output_header():
    text = forward_exponent_series(MapSpec.poly(2, -2), n_max=3).to_csv()
    assert text.splitlines()[0] == "n,chi_n,running_inf,running_sup"
    assert len(text.splitlines()) == 4


def backward_oracle(n):
    # x_{-k} = 2 cos(pi / 2^{k+1}) on the principal branch of z^2 - 2
    mpmath.mp.dps = 40
    s = mpmath.fsum(mpmath.log(4 * mpmath.cos(mpmath.pi / 2 ** (k + 1))) for k in range(1, n + 1))
    return float(s / n)


def test_backward_principal_branch_matches_product_formula():
    orb = backward_orbit(MapSpec.poly(2, -2), FixedAngle(0), 40)
    assert orb.chi[-1] == pytest.approx(backward_oracle(40), abs=1e-12)
    assert abs(orb.chi[-1] - (math.log(4) - 0.451 / 40)) < 1e-3


def test_backward_policies_are_reproducible():
    f = MapSpec.poly(2, -0.1 + 0.7j)
    a = backward_orbit(f, RandomSeeded(5), 30)
    b = backward_orbit(f, RandomSeeded(5), 30)
    assert np.array_equal(a.points, b.points)
    for pts in (a.points, backward_orbit(f, MinDerivative(3), 30).points):
        assert np.allclose([f(complex(z)) for z in pts[1:]], pts[:-1], atol=1e-9)


def test_backward_branch_point():
    # for c = 0 the critical value is 0 itself
    with pytest.raises(BranchPointHit) as info:
        backward_orbit(MapSpec.poly(2, 0), FixedAngle(0), 5)
    assert info.value.step == 1


@given(st.integers(0, 10_000))
def test_min_derivative_stays_above_floor(seed):
    orb = backward_orbit(MapSpec.poly(2, -2), MinDerivative(seed), 40)
    assert orb.chi[-1] >= -0.05


def test_slow_recurrence_flags_superattracting_orbit():
    rep = slow_recurrence_test(MapSpec.poly(2, -1), -1, 0.1, 50)
    assert not rep.slowly_recurrent_up_to_horizon
    assert rep.violations[0] == 1


def test_slow_recurrence_on_fixed_point():
    rep = slow_recurrence_test(MapSpec.poly(2, -2), 2, 0.1, 100)
    assert rep.slowly_recurrent_up_to_horizon and rep.violations == ()


@given(st.floats(-1.9, 1.9), st.floats(0.05, 1.0), st.integers(2, 3))
def test_reference_equivalence(x, alpha, d):
    # |f^{n+1}(z) - c| = |f^n(z)|^d, so critical-value violations at n+1 are
    # critical-point violations at n with the threshold raised to the d-th power
    f = MapSpec.poly(d, -1.5 if d == 2 else 0.3j)
    tr = iterate(f, x, 200)
    dist_c = np.abs(tr.points[1:] - f.c)
    dist_0 = np.abs(tr.points[:-1])
    # subtracting c back out costs a few ulps of |c|
    slack = 8 * np.finfo(float).eps * max(1.0, abs(f.c))
    assert np.allclose(dist_c, dist_0**d, rtol=1e-9, atol=slack)
    # compare the two tests where the threshold is resolvable and not a near tie
    horizon = [n for n in range(1, len(dist_c) + 1) if math.exp(-alpha * n) > 1e6 * slack]
    vc = set(recurrence_violations(tr, f.c, alpha)) & set(horizon)
    expected = {n for n in horizon if dist_0[n - 1] ** d < math.exp(-alpha * n)}
    ties = {n for n in horizon if abs(dist_0[n - 1] ** d - math.exp(-alpha * n)) < 1e3 * slack}
    assert vc ^ expected <= ties
    assert Reference("CriticalValue") is Reference.CRITICAL_VALUE
