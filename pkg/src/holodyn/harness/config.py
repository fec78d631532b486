"""Experiment configuration: a flat, typed TOML table with a schema version.

Every key is either a map/run key shared by all kinds or a numeric
parameter of the chosen kind.  Unknown keys and type mismatches are
collected per field and raised together as :class:`InvalidConfig`.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..core import MapSpec
from ..errors import InvalidConfig

SCHEMA_VERSION = 1

# Type tags: "int", "float", "str", "floats", "ints", "any" (sweep values).
_OPT = object()  # marks an optional parameter with no default

KIND_PARAMS: dict[str, dict[str, tuple[str, Any]]] = {
    "orbit": {
        "z0_re": ("float", _OPT), "z0_im": ("float", _OPT), "n_max": ("int", 100),
    },
    "cycle-detect": {
        "max_period": ("int", 64), "max_iter": ("int", 100_000), "tol": ("float", 1e-9),
    },
    "lyapunov": {
        "z0_re": ("float", _OPT), "z0_im": ("float", _OPT), "n_max": ("int", 1000),
        "burn_in": ("int", _OPT),
    },
    "backward": {
        "policy": ("str", "fixed"), "branch": ("int", 0), "n_max": ("int", 40),
    },
    "slowrec": {
        "z0_re": ("float", _OPT), "z0_im": ("float", _OPT), "alpha": ("float", 0.1),
        "horizon": ("int", 1000), "reference": ("str", "CriticalPoint"), "burn_in": ("int", 0),
    },
    "pliss": {
        "sequence": ("floats", [2.0, 0.5, 0.5]), "B": ("float", 2.0), "b1": ("float", 0.5),
        "b2": ("float", 1.0),
    },
    "hyptimes": {
        "z0_re": ("float", _OPT), "z0_im": ("float", _OPT), "lam": ("float", 2.0),
        "m_max": ("int", 1000),
    },
    "shadows": {
        "z0_re": ("float", _OPT), "z0_im": ("float", _OPT), "K": ("float", 1.0),
        "N": ("int", 3), "m": ("int", 1000),
    },
    "density-report": {
        "z0_re": ("float", _OPT), "z0_im": ("float", _OPT), "lam": ("float", 1.2),
        "eps0": ("float", 0.1), "m": ("int", 10_000), "rho": ("float", 0.1), "C": ("float", 1.0),
        "certify": ("int", 0),
    },
    "return-bound": {
        "delta": ("float", 0.01), "lam": ("float", 1.05), "events": ("int", 10_000),
        "lemma": ("str", "return"), "n_max": ("int", 10_000),
    },
    "close-return": {
        "lam": ("float", 1.05), "delta0": ("float", 0.05), "samples": ("int", 300),
        "orbit_length": ("int", 1000),
    },
    "fredholm": {
        "t_re": ("float", 0.5), "t_im": ("float", 0.0), "grid": ("int", 1000),
        "radius": ("float", 0.95), "n_cut": ("int", 200),
    },
    "area-scan": {
        "alpha": ("float", 0.1), "n": ("ints", [20, 30, 40, 50]), "samples": ("int", 100_000),
        "window_re": ("float", 0.0), "window_im": ("float", 0.0), "window_radius": ("float", 2.5),
        "escape_budget": ("int", 100), "eps": ("floats", [0.1, 0.01]),
    },
    "porosity": {
        "z_re": ("float", 1.0), "z_im": ("float", 0.0), "j": ("ints", [3]), "grid": ("int", 65),
        "center_grid": ("int", 0), "escape_budget": ("int", 200),
    },
    "sweep": {
        "sweep_kind": ("str", "lyapunov"), "axis": ("str", "c"), "values": ("any", []),
    },
}

KINDS = tuple(KIND_PARAMS)

COMMON_KEYS: dict[str, tuple[str, Any]] = {
    "family": ("str", "poly"),
    "d": ("int", 2),
    "c_re": ("float", 0.0),
    "c_im": ("float", 0.0),
    "a_re": ("float", 1.0),
    "a_im": ("float", 0.0),
    "seed": ("int", 0),
    "out_dir": ("str", "out"),
    "workers": ("int", 1),
}

_MAY_BE_ZERO = frozenset({"branch", "center_grid", "burn_in", "N", "certify"})

#: Keys that do not influence results and are left out of the digest.
NON_SEMANTIC = frozenset({"out_dir", "workers"})


def _coerce(tag: str, value: Any):
    """Return the value converted to ``tag`` or raise ``TypeError``."""
    if tag == "any":
        return value
    if tag == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"expected integer, got {type(value).__name__}")
        return value
    if tag == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError(f"expected number, got {type(value).__name__}")
        value = float(value)
        if math.isnan(value):
            raise TypeError("NaN is not allowed")
        return value
    if tag == "str":
        if not isinstance(value, str):
            raise TypeError(f"expected string, got {type(value).__name__}")
        return value
    if tag in ("floats", "ints"):
        if not isinstance(value, (list, tuple)):
            raise TypeError(f"expected array, got {type(value).__name__}")
        return [_coerce(tag[:-1] if tag == "ints" else "float", v) for v in value]
    raise AssertionError(tag)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    family: str = "poly"
    d: int = 2
    c_re: float = 0.0
    c_im: float = 0.0
    a_re: float = 1.0
    a_im: float = 0.0
    seed: int = 0
    out_dir: str = "out"
    workers: int = 1
    params: dict = field(default_factory=dict)

    @property
    def map(self) -> MapSpec:
        if self.family == "poly":
            return MapSpec.poly(self.d, complex(self.c_re, self.c_im))
        return MapSpec.exponential(complex(self.a_re, self.a_im))

    def param(self, key: str, default=None):
        return self.params.get(key, default)

    def start(self, default: complex) -> complex:
        """``z0`` from ``z0_re``/``z0_im`` when given, else ``default``."""
        if "z0_re" not in self.params and "z0_im" not in self.params:
            return default
        return complex(self.params.get("z0_re", 0.0), self.params.get("z0_im", 0.0))

    def to_dict(self) -> dict:
        out = {"schema": SCHEMA_VERSION, "kind": self.kind}
        for key in COMMON_KEYS:
            out[key] = getattr(self, key)
        out.update(self.params)
        return out

    def digest(self) -> str:
        """sha256 of the canonical JSON form, ignoring output location and parallelism."""
        body = {k: v for k, v in self.to_dict().items() if k not in NON_SEMANTIC}
        blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def with_updates(self, **changes) -> "ExperimentConfig":
        """Copy with common keys or parameters replaced, then revalidated."""
        data = self.to_dict()
        data.update(changes)
        return from_dict(data)


def from_dict(data: dict) -> ExperimentConfig:
    """Validate a flat mapping and build an :class:`ExperimentConfig`."""
    problems: dict[str, str] = {}
    data = dict(data)
    schema = data.pop("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        problems["schema"] = f"unsupported schema version {schema!r} (expected {SCHEMA_VERSION})"
    kind = data.pop("kind", None)
    if kind not in KIND_PARAMS:
        problems["kind"] = f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}"
        raise InvalidConfig(problems)

    common = {}
    for key, (tag, default) in COMMON_KEYS.items():
        if key not in data:
            common[key] = default
            continue
        try:
            common[key] = _coerce(tag, data.pop(key))
        except TypeError as exc:
            problems[key] = str(exc)

    params = {}
    spec = dict(KIND_PARAMS[kind])
    if kind == "sweep":
        # a sweep config also carries the parameters of the kind it sweeps
        target = data.get("sweep_kind", KIND_PARAMS["sweep"]["sweep_kind"][1])
        if target in KIND_PARAMS and target != "sweep":
            spec.update(KIND_PARAMS[target])
    for key, (tag, default) in spec.items():
        if key in data:
            try:
                params[key] = _coerce(tag, data.pop(key))
            except TypeError as exc:
                problems[key] = str(exc)
        elif default is not _OPT:
            params[key] = list(default) if isinstance(default, list) else default
    for key in sorted(data):
        problems[key] = f"unknown key for kind {kind!r}"

    if common.get("family") not in ("poly", "exp"):
        problems.setdefault("family", "must be 'poly' or 'exp'")
    if isinstance(common.get("d"), int) and common["d"] < 2:
        problems.setdefault("d", "degree must be >= 2")
    if isinstance(common.get("workers"), int) and common["workers"] < 1:
        problems.setdefault("workers", "must be >= 1")
    if common.get("family") == "exp" and common.get("a_re") == 0 and common.get("a_im") == 0:
        problems.setdefault("a_re", "a must be nonzero")
    for key, value in params.items():
        tag = spec[key][0]
        if tag == "int" and key not in _MAY_BE_ZERO and value < 1:
            problems.setdefault(key, "must be >= 1")
        if tag == "float" and key in ("lam",) and value <= 1:
            problems.setdefault(key, "must exceed 1")
        if tag == "float" and key in ("alpha", "delta", "delta0", "eps0", "K", "rho", "window_radius", "tol") and value <= 0:
            problems.setdefault(key, "must be positive")
    if kind == "sweep":
        if params.get("sweep_kind") not in KIND_PARAMS or params.get("sweep_kind") == "sweep":
            problems.setdefault("sweep_kind", "must name a non-sweep experiment kind")
        if not isinstance(params.get("values"), list):
            problems.setdefault("values", "expected array")
    if problems:
        raise InvalidConfig(problems)
    return ExperimentConfig(kind=kind, params=params, **common)


def loads(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidConfig({"<file>": f"not valid TOML: {exc}"}) from None
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise InvalidConfig({k: "nested tables are not allowed; the format is flat" for k in nested})
    return from_dict(data)


def load(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode()
    except OSError as exc:
        raise InvalidConfig({"<file>": f"{path}: {exc.strerror}"}) from None
    return loads(text)


def dump(config: ExperimentConfig, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(config.to_toml())


__all__ = [
    "ExperimentConfig",
    "KINDS",
    "KIND_PARAMS",
    "SCHEMA_VERSION",
    "dump",
    "from_dict",
    "load",
    "loads",
]
