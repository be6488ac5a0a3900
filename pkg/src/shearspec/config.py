"""Run configuration: an INI file with fixed sections and keys.

    [profile]   expr, h
    [physics]   g, sigma
    [solver]    rtol, atol, r_loc_factor, series_terms
    [trace]     k_min, k_max, step_max
    [census]    k_list          (comma separated)
    [output]    dir, format     (format must be csv)

Unknown sections or keys are rejected.  Missing keys take the defaults
below, except ``profile.expr`` and ``profile.h``, which are required.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .errors import ConfigError
from .rayleigh import SolverOptions

DEFAULTS = {
    "physics": {"g": "1.0", "sigma": "0.0"},
    "solver": {"rtol": "1e-10", "atol": "1e-12", "r_loc_factor": "0.125",
               "series_terms": "16"},
    "trace": {"k_min": "0.0", "k_max": "5.0", "step_max": "0.1"},
    "census": {"k_list": "0.5, 1.0, 2.0"},
    "output": {"dir": "shearspec_out", "format": "csv"},
}
REQUIRED = {"profile": ("expr", "h")}


@dataclass(frozen=True)
class RunConfig:
    expr: str
    h: float
    g: float = 1.0
    sigma: float = 0.0
    rtol: float = 1e-10
    atol: float = 1e-12
    r_loc_factor: float = 0.125
    series_terms: int = 16
    k_min: float = 0.0
    k_max: float = 5.0
    step_max: float = 0.1
    k_list: tuple[float, ...] = field(default=(0.5, 1.0, 2.0))
    out_dir: str = "shearspec_out"
    format: str = "csv"

    @property
    def solver(self) -> SolverOptions:
        return SolverOptions(rtol=self.rtol, atol=self.atol,
                             r_loc_factor=self.r_loc_factor,
                             series_terms=self.series_terms)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp["profile"] = {"expr": self.expr, "h": repr(self.h)}
        cp["physics"] = {"g": repr(self.g), "sigma": repr(self.sigma)}
        cp["solver"] = {"rtol": repr(self.rtol), "atol": repr(self.atol),
                        "r_loc_factor": repr(self.r_loc_factor),
                        "series_terms": str(self.series_terms)}
        cp["trace"] = {"k_min": repr(self.k_min), "k_max": repr(self.k_max),
                       "step_max": repr(self.step_max)}
        cp["census"] = {"k_list": ", ".join(repr(k) for k in self.k_list)}
        cp["output"] = {"dir": self.out_dir, "format": self.format}
        lines = []
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines += [f"{k} = {v}" for k, v in cp[sec].items()]
            lines.append("")
        return "\n".join(lines)


def _float(sec, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not a number") from None


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    known = {"profile": {"expr", "h"}, **{s: set(d) for s, d in DEFAULTS.items()}}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]")
        for key in cp[sec]:
            if key not in known[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
    for sec, keys in REQUIRED.items():
        for key in keys:
            if not cp.has_option(sec, key):
                raise ConfigError(f"missing required key [{sec}] {key}")

    def get(sec, key):
        if cp.has_option(sec, key):
            return cp[sec][key].strip()
        return DEFAULTS[sec][key]

    vals = {}
    for sec, key in [("physics", "g"), ("physics", "sigma"), ("solver", "rtol"),
                     ("solver", "atol"), ("solver", "r_loc_factor"), ("trace", "k_min"),
                     ("trace", "k_max"), ("trace", "step_max")]:
        vals[key] = _float(sec, key, get(sec, key))
    h = _float("profile", "h", get("profile", "h"))
    try:
        terms = int(get("solver", "series_terms"))
    except ValueError:
        raise ConfigError("[solver] series_terms must be an integer") from None
    try:
        k_list = tuple(float(v) for v in get("census", "k_list").split(",") if v.strip())
    except ValueError:
        raise ConfigError("[census] k_list must be comma-separated numbers") from None
    fmt = get("output", "format")
    if fmt != "csv":
        raise ConfigError(f"[output] format must be csv, got {fmt!r}")
    for key in ("rtol", "atol", "r_loc_factor", "step_max", "g"):
        if not vals[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if vals["sigma"] < 0:
        raise ConfigError("sigma must be non-negative")
    if not h > 0:
        raise ConfigError("profile h must be positive")
    if terms < 2:
        raise ConfigError("series_terms must be at least 2")
    if not (0.0 <= vals["k_min"] < vals["k_max"]):
        raise ConfigError("need 0 <= k_min < k_max")
    if not k_list or any(k < 0 for k in k_list):
        raise ConfigError("census k_list must be a nonempty list of non-negative numbers")
    return RunConfig(expr=get("profile", "expr"), h=h, g=vals["g"], sigma=vals["sigma"],
                     rtol=vals["rtol"], atol=vals["atol"],
                     r_loc_factor=vals["r_loc_factor"], series_terms=terms,
                     k_min=vals["k_min"], k_max=vals["k_max"], step_max=vals["step_max"],
                     k_list=k_list, out_dir=get("output", "dir"), format=fmt)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
