"""Dispatch experiments, persist their outputs, run parameter sweeps and emit reports.

Each run writes into ``config.out_dir``:

* ``results.json``: digest, kind, verdict and summary statistics;
* ``<kind>.csv``: per-sample rows, floats written with ``repr`` so a
  re-run with the same config produces identical bytes;
* ``config.toml``: the validated config, re-loadable with ``--config``;
* ``run.log``: the only file carrying timestamps.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import traceback
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .. import cycles, exponents, hyperbolic
from ..core import Disk, iterate
from ..errors import AmbiguousConvergence, HolodynError, HypothesisViolated, InvalidConfig, NonemptyRequired
from ..errors import PreconditionUnmet
from ..lab import area, fredholm, porosity, returns
from .config import ExperimentConfig, from_dict

RESULTS_FILE = "results.json"
LOG_FILE = "run.log"


@dataclass(frozen=True)
class ResultRecord:
    digest: str
    kind: str
    summary: dict
    verdict: str
    rows_path: Optional[str] = None
    plot_columns: tuple = ()
    out_dir: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "digest": self.digest,
            "kind": self.kind,
            "verdict": self.verdict,
            "summary": self.summary,
            "rows": os.path.basename(self.rows_path) if self.rows_path else None,
        }


@dataclass
class _Outcome:
    summary: dict
    header: Sequence[str] = ()
    rows: list = field(default_factory=list)
    verdict: str = "ran"
    plot_columns: tuple = ()


# -- helpers -------------------------------------------------------------------


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _no_sink_note(map) -> dict:
    try:
        cyc = cycles.detect_attracting_cycle(map)
    except AmbiguousConvergence:
        return {"sink_detected": False, "sink_note": "indifferent cycle suspected"}
    if cyc is None:
        return {"sink_detected": False, "sink_note": "no attracting cycle detected"}
    return {"sink_detected": True, "sink_note": f"attracting cycle of period {cyc.period}"}


def _full_trace(config: ExperimentConfig, n: int):
    map = config.map
    trace = iterate(map, config.start(map.marked_point), n)
    if trace.n < n:
        raise PreconditionUnmet(f"orbit escapes at step {trace.escaped_at}, before {n}")
    return trace


# -- kind handlers ---------------------------------------------------------------


def _orbit(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    map = cfg.map
    trace = iterate(map, cfg.start(map.marked_point), cfg.param("n_max"))
    last = complex(trace.points[-1])
    summary = {
        "steps": trace.n,
        "escaped_at": trace.escaped_at,
        "hit_critical_at": trace.hit_critical_at,
        "S_final": float(trace.cum_logderiv[-1]),
        "z_final": [last.real, last.imag],
    }
    return _Outcome(summary, ("k", "re", "im", "S"), list(trace.csv_rows()), plot_columns=("k", "S"))


def _cycle_detect(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    map = cfg.map
    try:
        cyc = cycles.detect_attracting_cycle(
            map, cfg.param("max_period"), cfg.param("max_iter"), cfg.param("tol")
        )
    except AmbiguousConvergence as exc:
        summary = {"detected": False, "ambiguous": True, "message": str(exc)}
        if exc.record is not None:
            summary["multiplier_abs"] = abs(exc.record.multiplier)
        return _Outcome(summary, ("k", "re", "im"), [], plot_columns=("k", "re", "im"))
    if cyc is None:
        return _Outcome({"detected": False, "ambiguous": False}, ("k", "re", "im"), [],
                        plot_columns=("k", "re", "im"))
    summary = {
        "detected": True,
        "ambiguous": False,
        "period": cyc.period,
        "multiplier": [cyc.multiplier.real, cyc.multiplier.imag],
        "multiplier_abs": abs(cyc.multiplier),
        "rate": cycles.multiplier_rate(cyc),
        "residual": cyc.residual,
    }
    rows = [(k, z.real, z.imag) for k, z in enumerate(cyc.points)]
    return _Outcome(summary, ("k", "re", "im"), rows, plot_columns=("k", "re", "im"))


def _lyapunov(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    map = cfg.map
    n_max = cfg.param("n_max")
    est = exponents.forward_exponent_series(map, cfg.start(map.marked_point), n_max)
    burn_in = cfg.param("burn_in", n_max // 2)
    if est.verdict in (exponents.Verdict.DIVERGES_PLUS, exponents.Verdict.ESCAPED):
        lower = math.inf
    else:
        lower = float(np.min(est.chi[max(burn_in, 1) - 1 :])) if len(est.chi) >= max(burn_in, 1) else math.nan
    summary = {
        "chi_final": est.final,
        "lower_exponent": lower,
        "burn_in": burn_in,
        "steps": int(len(est.chi)),
        "exponent_verdict": est.verdict.value,
        "tail_rate": est.tail_rate(1) if len(est.chi) else math.nan,
    }
    rows = zip(est.n, est.chi, est.running_inf_tail, est.running_sup_tail)
    return _Outcome(summary, ("n", "chi_n", "running_inf", "running_sup"), list(rows),
                    plot_columns=("n", "chi_n"))


def _backward(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    name = cfg.param("policy")
    if name == "fixed":
        policy = exponents.FixedAngle(cfg.param("branch"))
    elif name == "random":
        policy = exponents.RandomSeeded(cfg.seed)
    elif name == "minderiv":
        policy = exponents.MinDerivative(cfg.seed)
    else:
        raise InvalidConfig({"policy": "must be one of fixed, random, minderiv"})
    orbit = exponents.backward_orbit(cfg.map, policy, cfg.param("n_max"))
    chi = orbit.chi
    rows = [
        (n, orbit.points[n].real, orbit.points[n].imag, orbit.cum_logderiv[n], chi[n - 1])
        for n in range(1, len(orbit.points))
    ]
    summary = {"policy": name, "chi_final": float(chi[-1]), "chi_min": float(np.min(chi))}
    return _Outcome(summary, ("n", "re", "im", "S", "chi"), rows, plot_columns=("n", "chi"))


def _slowrec(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    map = cfg.map
    try:
        ref = exponents.Reference(cfg.param("reference"))
    except ValueError:
        raise InvalidConfig({"reference": "must be CriticalPoint or CriticalValue"}) from None
    z0 = cfg.start(map.marked_point)
    report = exponents.slow_recurrence_test(
        map, z0, cfg.param("alpha"), cfg.param("horizon"), ref, cfg.param("burn_in")
    )
    target = 0j if ref is exponents.Reference.CRITICAL_POINT else map.critical_value
    trace = iterate(map, z0, cfg.param("horizon"))
    rows = [(n, abs(complex(trace.points[n]) - target)) for n in report.violations]
    verdict = "pass" if report.slowly_recurrent_up_to_horizon else "fail"
    return _Outcome(report.to_dict(), ("n", "distance"), rows, verdict, ("n", "distance"))


def _pliss(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    seq = cfg.param("sequence")
    if not seq:
        raise InvalidConfig({"sequence": "must be nonempty"})
    try:
        inp = hyperbolic.PlissInput(tuple(seq), cfg.param("B"), cfg.param("b1"), cfg.param("b2"))
    except ValueError as exc:
        raise InvalidConfig({"b1": str(exc)}) from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HypothesisViolated)
        times = hyperbolic.pliss_times(inp)
    holds = inp.hypotheses_hold()
    bound = inp.theta * inp.r
    summary = {
        "times": times,
        "count": len(times),
        "r": inp.r,
        "theta": inp.theta,
        "theta_r": bound,
        "hypotheses_hold": holds,
        "hypothesis_violated_warning": bool(caught),
    }
    verdict = "pass" if (not holds or len(times) > bound) else "fail"
    chosen = set(times)
    rows = [(i, a, i in chosen) for i, a in enumerate(inp.a, start=1)]
    return _Outcome(summary, ("index", "a", "is_pliss"), rows, verdict, ("index", "is_pliss"))


def _hyptimes(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    m_max = cfg.param("m_max")
    hts = hyperbolic.hyperbolic_times(_full_trace(cfg, m_max), cfg.param("lam"), m_max)
    summary = {"lam": hts.lam, "m_max": m_max, "count": int(len(hts.times)), "density": hts.density}
    rows = [(m, flag) for m, flag in enumerate(hts.mask(), start=1)]
    return _Outcome(summary, ("m", "is_hyperbolic"), rows, plot_columns=("m", "is_hyperbolic"))


def _shadows(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    m = cfg.param("m")
    table = hyperbolic.shadow_table(_full_trace(cfg, m), cfg.param("K"), cfg.param("N"), m)
    summary = {
        "K": table.K,
        "N": table.N,
        "m": table.m,
        "A_density": table.A_density,
        "C_g_fit": table.C_g_fit,
        "claim_bound": table.claim_bound,
        "claim_margin": table.claim_margin,
        "claim_holds": table.claim_holds,
    }
    rows = [(n, table.phi[n - 1], table.cover_count[n - 1], table.in_A[n - 1]) for n in range(1, m + 1)]
    return _Outcome(summary, ("n", "phi", "cover_count", "in_A"), rows,
                    "pass" if table.claim_holds else "fail", ("n", "cover_count", "in_A"))


def _density(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    map = cfg.map
    rep = hyperbolic.hyperbolic_density_report(
        map, cfg.start(map.marked_point), cfg.param("lam"), cfg.param("eps0"), cfg.param("m"),
        rho=cfg.param("rho"), C=cfg.param("C"), certify=cfg.param("certify"),
    )
    verdict = "pass" if rep.density_ge_alpha and not rep.violations else "fail"
    header = ("n", "is_hyperbolic", "shadow_cover_count", "in_A", "criticality_count")
    return _Outcome(rep.summary(), header, list(rep.rows()), verdict, ("n", "in_A", "is_hyperbolic"))


_CAMPAIGN_HEADER = ("sample_index", "n", "log_lhs", "log_rhs", "slack", "passed")


def _return_bound(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    try:
        lemma = returns.Lemma(cfg.param("lemma"))
    except ValueError:
        raise InvalidConfig({"lemma": "must be return or return_poly"}) from None
    res = returns.return_bound_campaign(
        cfg.map, cfg.param("delta"), cfg.param("lam"), cfg.param("events"), cfg.seed,
        lemma=lemma, n_max=cfg.param("n_max"), out_dir=out_dir,
    )
    summary = {**res.summary(), **_no_sink_note(cfg.map)}
    return _Outcome(summary, _CAMPAIGN_HEADER, res.rows, summary["verdict"], ("n", "slack"))


def _close_return(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    res = returns.close_return_campaign(
        cfg.map, cfg.param("lam"), cfg.param("delta0"), cfg.param("samples"), cfg.seed,
        orbit_length=cfg.param("orbit_length"), out_dir=out_dir,
    )
    summary = {**res.summary(), **_no_sink_note(cfg.map)}
    return _Outcome(summary, _CAMPAIGN_HEADER, res.rows, summary["verdict"], ("n", "slack"))


def _fredholm(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    map = cfg.map
    t = complex(cfg.param("t_re"), cfg.param("t_im"))
    value, tail = fredholm.fredholm_eval(map, t, cfg.param("n_cut"))
    scan = fredholm.zero_scan(map, cfg.param("radius"), cfg.param("grid"), cfg.param("n_cut"))
    env = scan.envelope
    summary = {
        "t": [t.real, t.imag],
        "value": [value.real, value.imag],
        "tail_bound": tail,
        "grid_points": int(len(scan.t_grid)),
        "zero_scan": scan.zero_scan,
        "certified_min": scan.certified_min,
        "envelope_A": None if env is None else env.A,
        "envelope_q": None if env is None else env.q,
        **_no_sink_note(map),
    }
    rows = [
        (tt.real, tt.imag, abs(v), tb)
        for tt, v, tb in zip(scan.t_grid, scan.values, scan.tail_bound)
    ]
    verdict = "pass" if scan.certified_min > 0 else "fail"
    return _Outcome(summary, ("t_re", "t_im", "abs_F", "tail_bound"), rows, verdict,
                    ("t_re", "t_im", "abs_F"))


def _area_scan(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    window = Disk(complex(cfg.param("window_re"), cfg.param("window_im")), cfg.param("window_radius"))
    scan = area.area_scan_En(
        cfg.map, cfg.param("alpha"), cfg.param("n"), window, cfg.param("samples"), cfg.seed,
        escape_budget=cfg.param("escape_budget"), eps_list=cfg.param("eps"),
    )
    verdict = "pass" if scan.nonincreasing else "fail"
    return _Outcome(scan.summary(), ("n", "hits", "fraction"), list(scan.rows()), verdict, ("n", "fraction"))


def _porosity(cfg: ExperimentConfig, out_dir: str) -> _Outcome:
    probe = porosity.porosity_probe(
        cfg.map, complex(cfg.param("z_re"), cfg.param("z_im")), cfg.param("j"), cfg.param("grid"),
        cfg.param("escape_budget"), cfg.param("center_grid") or None,
    )
    return _Outcome(probe.summary(), ("j", "scale", "rho"), list(probe.rows()), plot_columns=("j", "rho"))


HANDLERS: dict[str, Callable[[ExperimentConfig, str], _Outcome]] = {
    "orbit": _orbit,
    "cycle-detect": _cycle_detect,
    "lyapunov": _lyapunov,
    "backward": _backward,
    "slowrec": _slowrec,
    "pliss": _pliss,
    "hyptimes": _hyptimes,
    "shadows": _shadows,
    "density-report": _density,
    "return-bound": _return_bound,
    "close-return": _close_return,
    "fredholm": _fredholm,
    "area-scan": _area_scan,
    "porosity": _porosity,
}

#: Headline scalar per kind, used for the sweep plot file.
PRIMARY_METRIC = {
    "orbit": "S_final",
    "cycle-detect": "multiplier_abs",
    "lyapunov": "lower_exponent",
    "backward": "chi_final",
    "slowrec": "slowly_recurrent_up_to_horizon",
    "pliss": "count",
    "hyptimes": "density",
    "shadows": "A_density",
    "density-report": "density",
    "return-bound": "min_slack",
    "close-return": "min_slack",
    "fredholm": "zero_scan",
    "area-scan": "hits",
    "porosity": "hole_radii",
}


# -- running -------------------------------------------------------------------


def _open_log(out_dir: str) -> logging.Logger:
    logger = logging.getLogger(f"holodyn.run.{os.path.abspath(out_dir)}")
    logger.setLevel(logging.INFO)
    logger.propagate = False
    handler = logging.FileHandler(os.path.join(out_dir, LOG_FILE), mode="a")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    logger.addHandler(handler)
    return logger


def _close_log(logger: logging.Logger) -> None:
    for h in list(logger.handlers):
        h.close()
        logger.removeHandler(h)


def run_experiment(config: ExperimentConfig) -> ResultRecord:
    """Run one experiment and write its outputs into ``config.out_dir``.

    Domain errors (a failed hypothesis, an escaping orbit, ...) are results,
    not crashes: they come back as a record with verdict ``"error"``.
    Parameter problems raise :class:`InvalidConfig`.
    """
    if config.kind == "sweep":
        return _run_sweep_config(config)
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    digest = config.digest()
    logger = _open_log(out_dir)
    try:
        logger.info("start kind=%s digest=%s", config.kind, digest)
        with open(os.path.join(out_dir, "config.toml"), "w") as fh:
            fh.write(config.to_toml())
        try:
            outcome = HANDLERS[config.kind](config, out_dir)
        except InvalidConfig:
            logger.info("invalid config")
            raise
        except HolodynError as exc:
            outcome = _Outcome({"error": type(exc).__name__, "message": str(exc)}, verdict="error")
        except ValueError as exc:
            raise InvalidConfig({"<params>": str(exc)}) from None
        rows_path = None
        if outcome.header:
            rows_path = os.path.join(out_dir, f"{config.kind}.csv")
            write_csv(rows_path, outcome.header, outcome.rows)
        record = ResultRecord(
            digest=digest,
            kind=config.kind,
            summary=_jsonable(outcome.summary),
            verdict=outcome.verdict,
            rows_path=rows_path,
            plot_columns=outcome.plot_columns,
            out_dir=out_dir,
        )
        write_json(os.path.join(out_dir, RESULTS_FILE), record.to_dict())
        logger.info("done verdict=%s", record.verdict)
        return record
    finally:
        _close_log(logger)


# -- sweeps --------------------------------------------------------------------


def derive_seed(root: int, index: int) -> int:
    """Per-point seed: first 32-bit word of ``SeedSequence(root, spawn_key=(index,))``."""
    return int(np.random.SeedSequence(root, spawn_key=(index,)).generate_state(1)[0])


def _as_complex(value) -> complex:
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex axis value must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def axis_updates(axis: str, value) -> dict:
    """Config changes for one sweep point; ``c``/``a``/``z0`` axes take complex values."""
    if axis in ("c", "a", "z0"):
        z = _as_complex(value)
        return {f"{axis}_re": z.real, f"{axis}_im": z.imag}
    return {axis: value}


def _run_point(payload: dict) -> dict:
    """Worker entry: never raises, so one bad point cannot abort the sweep."""
    try:
        cfg = from_dict(payload)
        rec = run_experiment(cfg)
        return {"ok": True, "record": rec}
    except Exception as exc:  # crash isolation
        return {"ok": False, "error": type(exc).__name__, "message": str(exc),
                "traceback": traceback.format_exc(limit=3)}


def _failure(kind: str, index: int, value, error: str, message: str) -> ResultRecord:
    return ResultRecord(
        digest="",
        kind=kind,
        summary={"index": index, "axis_value": _jsonable(value), "error": error, "message": message},
        verdict="error",
    )


def sweep(
    base: ExperimentConfig,
    axis: str,
    values: Sequence,
    workers: Optional[int] = None,
) -> list:
    """One :class:`ResultRecord` per axis value, computed by a bounded process pool.

    Point ``i`` gets the seed :func:`derive_seed` ``(base.seed, i)`` and
    writes into ``<out_dir>/points/<i>``.  Failures become records with
    verdict ``"error"``; an aggregate ``sweep.csv`` has one row per point.
    """
    values = list(values)
    if not values:
        return []
    workers = workers or base.workers
    payloads = []
    records: list = [None] * len(values)
    for i, v in enumerate(values):
        data = base.to_dict()
        try:
            data.update(axis_updates(axis, v))
        except ValueError as exc:
            records[i] = _failure(base.kind, i, v, "InvalidConfig", str(exc))
            continue
        data["seed"] = derive_seed(base.seed, i)
        data["out_dir"] = os.path.join(base.out_dir, "points", f"{i:04d}")
        data["workers"] = 1
        payloads.append((i, data))

    def absorb(i, result):
        if result["ok"]:
            records[i] = result["record"]
        else:
            records[i] = _failure(base.kind, i, values[i], result["error"], result["message"])

    if workers == 1 or len(payloads) <= 1:
        for i, data in payloads:
            absorb(i, _run_point(data))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(i, pool.submit(_run_point, data)) for i, data in payloads]
            for i, fut in futures:
                try:
                    absorb(i, fut.result())
                except Exception as exc:  # worker process died
                    records[i] = _failure(base.kind, i, values[i], type(exc).__name__, str(exc))
    os.makedirs(base.out_dir, exist_ok=True)
    _write_sweep_table(os.path.join(base.out_dir, "sweep.csv"), axis, values, records)
    return records


def _scalar_items(summary: dict) -> dict:
    out = {}
    for k, v in summary.items():
        if isinstance(v, (bool, int, float, str)) or v is None:
            out[k] = "" if v is None else v
    return out


def _write_sweep_table(path: str, axis: str, values: Sequence, records: Sequence) -> None:
    keys = sorted({k for r in records for k in _scalar_items(r.summary)} - {"index", "message"})
    header = ["index", "value_re", "value_im", "verdict", "digest"] + keys
    rows = []
    for i, (v, rec) in enumerate(zip(values, records)):
        try:
            z = _as_complex(v)
        except (TypeError, ValueError):
            z = complex(math.nan, math.nan)
        items = _scalar_items(rec.summary)
        rows.append([i, z.real, z.imag, rec.verdict, rec.digest] + [items.get(k, "") for k in keys])
    write_csv(path, header, rows)


def _run_sweep_config(config: ExperimentConfig) -> ResultRecord:
    data = config.to_dict()
    target = data.pop("sweep_kind")
    axis = data.pop("axis")
    values = data.pop("values")
    data["kind"] = target
    base = from_dict(data)
    records = sweep(base, axis, values, config.workers)
    failures = sum(r.verdict == "error" for r in records)
    summary = {
        "sweep_kind": target,
        "axis": axis,
        "points": len(records),
        "failures": failures,
        "verdicts": [r.verdict for r in records],
    }
    os.makedirs(config.out_dir, exist_ok=True)
    metric = PRIMARY_METRIC.get(target, "")
    record = ResultRecord(
        digest=config.digest(),
        kind="sweep",
        summary=summary,
        verdict="ran" if not failures else "partial",
        rows_path=os.path.join(config.out_dir, "sweep.csv"),
        plot_columns=("value_re", "value_im", metric),
        out_dir=config.out_dir,
    )
    with open(os.path.join(config.out_dir, "config.toml"), "w") as fh:
        fh.write(config.to_toml())
    write_json(os.path.join(config.out_dir, RESULTS_FILE), record.to_dict())
    return record


# -- reports -------------------------------------------------------------------


def emit_report(records: Sequence[ResultRecord], out_dir: str) -> list:
    """Write plot-ready column files and ``summary.txt``; returns the written paths."""
    records = list(records)
    if not records:
        raise NonemptyRequired("emit_report needs at least one record")
    written = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        lines = []
        for i, rec in enumerate(records):
            lines.append(f"[{i}] kind={rec.kind} verdict={rec.verdict} digest={rec.digest[:12]}")
            for k, v in sorted(_scalar_items(rec.summary).items()):
                lines.append(f"    {k}: {v}")
            if not (rec.rows_path and rec.plot_columns and os.path.exists(rec.rows_path)):
                continue
            path = os.path.join(out_dir, f"{i:03d}-{rec.kind}.dat")
            _write_columns(rec.rows_path, rec.plot_columns, path)
            written.append(path)
        summary_path = os.path.join(out_dir, "summary.txt")
        with open(summary_path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(summary_path)
    except OSError as exc:
        where = exc.filename or out_dir
        raise OSError(exc.errno, f"cannot write report file {where}: {exc.strerror}", where) from exc
    return written


def _write_columns(src: str, columns: Sequence[str], dst: str) -> None:
    with open(src, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = [c for c in columns if c in (reader.fieldnames or ())]
        with open(dst, "w") as out:
            out.write("# " + " ".join(cols) + "\n")
            for row in reader:
                out.write(" ".join(row[c] if row[c] != "" else "nan" for c in cols) + "\n")
