"""Acceptance criteria 1-11; each test prints one PASS/FAIL line.

Run ``python tests/test_acceptance.py`` for the bare list, or ``pytest`` to
see the lines collected in the terminal summary.
"""

import cmath
import filecmp
import math
import os
import time
import warnings

import mpmath
import numpy as np

from holodyn.core import Disk, MapSpec, iterate
from holodyn.cycles import detect_attracting_cycle, multiplier_rate
from holodyn.errors import HypothesisViolated
from holodyn.exponents import (
    FixedAngle,
    MinDerivative,
    Verdict,
    backward_orbit,
    forward_exponent_series,
    lower_exponent,
)
from holodyn.harness.config import dump, from_dict, load
from holodyn.harness.runner import run_experiment
from holodyn.hyperbolic import PlissInput, pliss_times, shadow_table
from holodyn.lab.area import area_scan_En, slow_recurrence_exponents
from holodyn.lab.fredholm import fredholm_eval, zero_scan
from holodyn.lab.returns import Lemma, return_bound_campaign

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
    print(line, flush=True)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def best_time(fn, repeats):
    best, out = math.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def test_01_chebyshev_oracle():
    f = MapSpec.poly(2, -2)
    dt, est = best_time(lambda: forward_exponent_series(f, n_max=50), 20)
    err = float(np.max(np.abs(est.chi - 2 * math.log(2))))
    report(1, err <= 1e-9 and dt < 1e-3 and len(est.chi) == 50,
           f"max |chi_n - 2 log 2| = {err:.2e} for n <= 50, runtime {dt * 1e3:.3f} ms")


def test_02_misiurewicz_oracle():
    f = MapSpec.poly(2, 1j)
    dt, est = best_time(lambda: forward_exponent_series(f, n_max=10_000), 5)
    target = 1.25 * math.log(2)
    err = abs(est.final - target)
    report(2, err <= 1e-6 and dt < 0.05,
           f"|chi_10^4 - 1.25 log 2| = {err:.2e}, runtime {dt * 1e3:.1f} ms")


def test_03_parabolic_boundary():
    f = MapSpec.poly(2, 0.25)
    t0 = time.perf_counter()
    low = lower_exponent(f, n_max=10**6)
    dt = time.perf_counter() - t0
    report(3, abs(low) <= 1e-4 and dt < 5.0,
           f"lower_exponent at n = 10^6 is {low:.3e} (|.| <= 1e-4), runtime {dt:.2f} s")


def test_04_sinks_and_negative_exponents():
    notes = []
    ok = True
    for c in (0, -1, -0.6):
        f = MapSpec.poly(2, c)
        cyc = detect_attracting_cycle(f)
        est = forward_exponent_series(f, n_max=10_000)
        if cyc is None:
            ok = False
            notes.append(f"c={c}: no sink")
            continue
        rate = multiplier_rate(cyc)
        if est.verdict is Verdict.MINUS_INFINITY:
            notes.append(f"c={c}: p={cyc.period}, -inf")
            ok &= rate == -math.inf
            continue
        # quadratic-formula oracle for the fixed point multiplier
        oracle = math.log(abs(1 - cmath.sqrt(1 - 4 * c)))
        per_step = est.tail_rate(cyc.period)
        err = abs(per_step - oracle)
        trending = est.final < 0 and abs(est.chi[-1] - oracle) < abs(est.chi[999] - oracle)
        ok &= err <= 1e-6 and trending and abs(rate - oracle) < 1e-9
        notes.append(f"c={c}: p={cyc.period}, per-step {per_step:.9f} vs log|m| {oracle:.9f} (err {err:.1e})")
    report(4, ok, "; ".join(notes))


def _backward_oracle(n):
    # principal branch: x_{-k} = 2 cos(pi / 2^{k+1}), so |Df(x_{-k})| = 4 cos(pi / 2^{k+1})
    mpmath.mp.dps = 40
    s = mpmath.fsum(mpmath.log(4 * mpmath.cos(mpmath.pi / 2 ** (k + 1))) for k in range(1, n + 1))
    return float(s / n)


def test_05_backward_orbit():
    f = MapSpec.poly(2, -2)
    chi = backward_orbit(f, FixedAngle(0), 40).chi[-1]
    oracle = _backward_oracle(40)
    shape = math.log(4) - 0.451 / 40
    worst = min(backward_orbit(f, MinDerivative(seed), 40).chi[-1] for seed in range(100))
    report(5, abs(chi - oracle) < 1e-12 and abs(chi - shape) < 1e-3 and worst >= -0.05,
           f"chi_40 = {chi:.9f} (product formula {oracle:.9f}, |. - (log 4 - 0.451/40)| = "
           f"{abs(chi - shape):.1e}); MinDerivative min over 100 seeds {worst:.4f}")


def _pliss_brute(a, b1):
    return [m for m in range(1, len(a) + 1)
            if all(sum(a[n:m]) >= b1 * (m - n) for n in range(m))]


def test_06_pliss_equivalence():
    rng = np.random.default_rng(20240606)
    inputs = []
    for _ in range(1000):
        r = int(rng.integers(1, 33))
        # eighths keep float partial sums exact
        a = tuple(float(x) / 8 for x in rng.integers(-8, 25, size=r))
        b1 = float(rng.integers(1, 8)) / 8
        b2 = b1 + float(rng.integers(1, 9)) / 8
        inputs.append(PlissInput(a, B=max(3.0, b2, max(a)), b1=b1, b2=b2))
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisViolated)
        fast = [pliss_times(inp) for inp in inputs]
    dt = time.perf_counter() - t0
    mismatches = sum(got != _pliss_brute(inp.a, inp.b1) for got, inp in zip(fast, inputs))
    holding = [(got, inp) for got, inp in zip(fast, inputs) if inp.hypotheses_hold()]
    short = sum(len(got) <= inp.theta * inp.r for got, inp in holding)
    report(6, mismatches == 0 and short == 0 and dt < 1.0,
           f"{mismatches} mismatches vs brute force on 1000 inputs, {short} count failures "
           f"among {len(holding)} with hypotheses, runtime {dt * 1e3:.0f} ms")


def test_07_fredholm():
    f = MapSpec.poly(2, -2)
    value, tail = fredholm_eval(f, 0.5)
    scan = zero_scan(f, 0.95, 1000)
    err = abs(value - 6 / 7)
    report(7, err <= 1e-9 and math.isfinite(tail) and scan.zero_scan > 0.2 and len(scan.t_grid) >= 1000,
           f"|F(1/2) - 6/7| = {err:.1e}, tail {tail:.1e}; min |F| over {len(scan.t_grid)} points "
           f"= {scan.zero_scan:.4f}")


def test_08_return_campaigns(tmp_path):
    f = MapSpec.poly(2, -2)
    t0 = time.perf_counter()
    a = return_bound_campaign(f, 1e-2, 1.05, 10_000, seed=11, out_dir=str(tmp_path))
    b = return_bound_campaign(f, 1e-2, 1.05, 10_000, seed=12, lemma=Lemma.RETURN_POLY,
                              out_dir=str(tmp_path))
    dt = time.perf_counter() - t0
    ok = a.checked == b.checked == 10_000 and not a.failures and not b.failures and dt < 30
    released = len(a.artifacts) + len(b.artifacts)
    report(8, ok,
           f"return: {len(a.failures)}/{a.checked} failures, return_poly: {len(b.failures)}/{b.checked} "
           f"failures, {released} artifacts, runtime {dt:.1f} s")


def test_09_shadows_and_claim():
    rng = np.random.default_rng(9)
    mismatches = 0
    bounded = [(-2, 0.3), (1j, 1j), (-0.5, 0.1), (-0.6, 0.2j), (-2, -1.1)]
    for i, m in enumerate((10, 100, 500, 1000, 1000)):
        c, z0 = bounded[i]
        tr = iterate(MapSpec.poly(2, c), z0, m)
        K = float(rng.uniform(0.5, 4))
        table = shadow_table(tr, K, 2, m)
        j = np.arange(m)
        ends = j + K * table.phi
        n = np.arange(1, m + 1)
        brute = ((j[None, :] < n[:, None]) & (n[:, None] <= ends[None, :])).sum(axis=1)
        mismatches += int(np.sum(brute != table.cover_count))
        mismatches += int(np.sum((brute <= 2) != table.in_A))
    # bounded c = i orbits in floating point are the exact preperiodic ones (|z| >= 1, phi <= 0)
    tr = iterate(MapSpec.poly(2, 1j), 1j, 10_000)
    grid = [(K, N) for K in (0.5, 1.0, 2.0) for N in (1, 3, 10)]
    claims = [shadow_table(tr, K, N, 10_000) for K, N in grid]
    held = sum(t.claim_holds for t in claims)
    # real chaotic orbits do come close to 0, so the bound is not vacuous there
    extra = [shadow_table(iterate(MapSpec.poly(2, c), z0, 10_000), K, N, 10_000)
             for c, z0 in ((-2, 0.3), (-1.8, 0.7)) for K, N in grid]
    extra_held = sum(t.claim_holds for t in extra)
    report(9, mismatches == 0 and held == len(claims) and extra_held == len(extra),
           f"{mismatches} stabbing mismatches for m <= 10^3; claim holds in {held}/{len(claims)} "
           f"(K, N) cases on c = i, m = 10^4; {extra_held}/{len(extra)} on real chaotic orbits "
           f"(min margin {min(t.claim_margin for t in extra):.3f})")


def test_10_area_and_slow_recurrence():
    f = MapSpec.poly(2, -2)
    scan = area_scan_En(f, 0.1, [20, 30, 40, 50], Disk(0, 2.5), 10**6, seed=7)
    chk = slow_recurrence_exponents(f, 200, seed=10, alpha=0.1, horizon=10_000, threshold=-0.01)
    ok = scan.nonincreasing and scan.measures[-1] < 1e-3 and chk.slowly_recurrent > 0 and chk.passed
    report(10, ok,
           f"(a) E_n fractions {list(scan.measures)} at 10^6 samples; (b) {chk.slowly_recurrent}/200 "
           f"slowly recurrent, min windowed exponent {chk.min_window_exponent:.4f}")


def _csv_files(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            if name.endswith(".csv"):
                out[os.path.relpath(os.path.join(dirpath, name), root)] = os.path.join(dirpath, name)
    return out


def test_11_reproducibility(tmp_path):
    configs = [
        {"kind": "lyapunov", "c_re": 0.25, "n_max": 5000},
        {"kind": "backward", "c_re": -2.0, "policy": "random", "seed": 3},
        {"kind": "return-bound", "c_re": -2.0, "events": 300, "seed": 5},
        {"kind": "area-scan", "c_re": -2.0, "samples": 5000, "seed": 7},
        {"kind": "density-report", "c_im": 1.0, "m": 2000},
        {"kind": "porosity", "c_re": -2.0, "z_re": 0.5, "j": [4], "grid": 17},
        {"kind": "sweep", "sweep_kind": "lyapunov", "values": ["-2", "0.25", "1j"], "n_max": 500,
         "workers": 2},
    ]
    compared, differing = 0, []
    for i, body in enumerate(configs):
        path = tmp_path / f"cfg{i}.toml"
        dump(from_dict({**body, "out_dir": str(tmp_path / f"first{i}")}), str(path))
        first = load(str(path))
        run_experiment(first)
        second = from_dict({**first.to_dict(), "out_dir": str(tmp_path / f"second{i}")})
        run_experiment(second)
        a, b = _csv_files(first.out_dir), _csv_files(second.out_dir)
        if set(a) != set(b):
            differing.append(f"{body['kind']}: file sets differ")
        for rel in a:
            compared += 1
            if rel in b and not filecmp.cmp(a[rel], b[rel], shallow=False):
                differing.append(rel)
    report(11, compared > 0 and not differing,
           f"{compared} CSV files from {len(configs)} configs byte-identical on re-run"
           + (f"; differing: {differing}" if differing else ""))


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for fn in tests:
        try:
            if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except AssertionError:
            failed += 1
    raise SystemExit(1 if failed else 0)
