"""JSON configuration documents and CSV helpers.

Document layout::

    {
      "n_waves": 3,
      "riemann": {"rho_minus": "p/q", "rho_plus": "p/q",
                  "v_minus": ["p/q", "p/q"], "v_plus": ["p/q", "p/q"]},
      "speeds": ["p/q", ...],                      # n_waves + 1 entries
      "regions": [{"rho", "alpha", "beta", "gamma", "delta", "C"}, ...],
      "thermo": {"eps_minus", "eps_plus", "deps_minus", "deps_plus": "p/q",
                 "eps": [...], "deps": [...]}
    }

Scalars may be written as "p/q", integers or decimals; decimals are read
exactly.  Output always uses "p/q".
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from .exactnum import format_rational, parse_rational, to_rational
from .fan_model import FanConfiguration, RiemannDatum, ThermoTable, WaveState

REGION_KEYS = ("rho", "alpha", "beta", "gamma", "delta", "C")
THERMO_KEYS = ("eps_minus", "eps_plus", "deps_minus", "deps_plus")


class ConfigError(ValueError):
    """Malformed configuration document; message names the offending key or line."""


def _scalar(value: Any, path: str):
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got boolean")
    if isinstance(value, int):
        return to_rational(value)
    if isinstance(value, float):
        # JSON floats are decimal text; re-read through repr for exactness of intent
        return parse_rational(repr(value))
    if isinstance(value, str):
        try:
            return parse_rational(value)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    raise ConfigError(f"{path}: expected a rational string, got {type(value).__name__}")


def _get(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    if key not in obj:
        raise ConfigError(f"{path}.{key}: missing key" if path else f"{key}: missing key")
    return obj[key]


def _list(value, length: int, path: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(f"{path}: expected a list")
    if len(value) != length:
        raise ConfigError(f"{path}: expected {length} entries, got {len(value)}")
    return value


def config_from_dict(doc: dict) -> FanConfiguration:
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected an object")
    n = _get(doc, "n_waves", "")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("n_waves: expected an integer >= 1")
    rie = _get(doc, "riemann", "")
    vm = _list(_get(rie, "v_minus", "riemann"), 2, "riemann.v_minus")
    vp = _list(_get(rie, "v_plus", "riemann"), 2, "riemann.v_plus")
    try:
        datum = RiemannDatum(
            _scalar(_get(rie, "rho_minus", "riemann"), "riemann.rho_minus"),
            _scalar(_get(rie, "rho_plus", "riemann"), "riemann.rho_plus"),
            tuple(_scalar(v, f"riemann.v_minus[{k}]") for k, v in enumerate(vm)),
            tuple(_scalar(v, f"riemann.v_plus[{k}]") for k, v in enumerate(vp)),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"riemann: {exc}") from None
    speeds = [
        _scalar(v, f"speeds[{k}]")
        for k, v in enumerate(_list(_get(doc, "speeds", ""), n + 1, "speeds"))
    ]
    states = []
    for k, reg in enumerate(_list(_get(doc, "regions", ""), n, "regions")):
        vals = [_scalar(_get(reg, key, f"regions[{k}]"), f"regions[{k}].{key}") for key in REGION_KEYS]
        try:
            states.append(WaveState(*vals))
        except ValueError as exc:
            raise ConfigError(f"regions[{k}]: {exc}") from None
    th = _get(doc, "thermo", "")
    head = [_scalar(_get(th, key, "thermo"), f"thermo.{key}") for key in THERMO_KEYS]
    eps = [_scalar(v, f"thermo.eps[{k}]") for k, v in enumerate(_list(_get(th, "eps", "thermo"), n, "thermo.eps"))]
    deps = [_scalar(v, f"thermo.deps[{k}]") for k, v in enumerate(_list(_get(th, "deps", "thermo"), n, "thermo.deps"))]
    thermo = ThermoTable(*head, tuple(eps), tuple(deps))
    return FanConfiguration(datum, tuple(speeds), tuple(states), thermo)


def config_to_dict(cfg: FanConfiguration) -> dict:
    f = format_rational
    d, th = cfg.datum, cfg.thermo
    return {
        "n_waves": cfg.n,
        "riemann": {
            "rho_minus": f(d.rho_minus),
            "rho_plus": f(d.rho_plus),
            "v_minus": [f(v) for v in d.v_minus],
            "v_plus": [f(v) for v in d.v_plus],
        },
        "speeds": [f(v) for v in cfg.speeds],
        "regions": [dict(zip(REGION_KEYS, (f(v) for v in s.astuple()))) for s in cfg.states],
        "thermo": {
            "eps_minus": f(th.eps_minus),
            "eps_plus": f(th.eps_plus),
            "deps_minus": f(th.deps_minus),
            "deps_plus": f(th.deps_plus),
            "eps": [f(v) for v in th.eps],
            "deps": [f(v) for v in th.deps],
        },
    }


def dumps_config(cfg: FanConfiguration) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def loads_config(text: str) -> FanConfiguration:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc)


def load_config(path) -> FanConfiguration:
    return loads_config(Path(path).read_text())


def save_config(cfg: FanConfiguration, path) -> None:
    Path(path).write_text(dumps_config(cfg))


def datum_to_dict(d: RiemannDatum) -> dict:
    f = format_rational
    return {
        "rho_minus": f(d.rho_minus),
        "rho_plus": f(d.rho_plus),
        "v_minus": [f(v) for v in d.v_minus],
        "v_plus": [f(v) for v in d.v_plus],
    }


def scalar_json(x) -> dict:
    """Dual rendering used in reports: exact text plus a float."""
    q = to_rational(x)
    return {"exact": format_rational(q), "float": float(q)}


def write_csv(rows: Iterable[Sequence], header: Sequence[str], path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
