"""INI-style scenario configuration for the command-line runner.

Example (a gamma sweep near orthogonal postselection)::

    [geometry]
    theta = 1.5707963267948966
    gamma = 0.0
    phi = 0.7853981633974483

    [probe]
    delta_P = 1
    delta_p = 1
    p_phi = inf
    mass = 1

    [window]
    kind = rectangular
    T = 1

    [coupling]
    lambda = 0.01

    [sweep]
    variable = gamma
    start = 0
    stop = 6.283185307179586
    steps = 10000

Keys are case-sensitive (``delta_P`` and ``delta_p`` are different keys).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ConfigError, ValidationError
from .probe import RECTANGULAR, WINDOW_KINDS, CouplingWindow, GaussianProbe

SECTIONS = {
    "geometry": {"theta", "gamma", "phi"},
    "probe": {"delta_P", "delta_p", "p_phi", "mass", "hbar"},
    "window": {"kind", "T", "prep_lead"},
    "coupling": {"lambda"},
    "grid": {"p_min", "p_max", "n_points"},
    "sweep": {"variable", "start", "stop", "steps"},
}
REQUIRED = {
    "geometry": ("theta", "gamma", "phi"),
    "probe": ("delta_P", "delta_p", "mass"),
    "coupling": ("lambda",),
}
SWEEP_VARIABLES = ("gamma", "phi", "lambda")
ANGLE_DOMAINS = {"theta": math.pi, "gamma": 2 * math.pi, "phi": math.pi}


@dataclass(frozen=True)
class GridSpec:
    """``p_min``/``p_max`` of ``None`` mean the engine's automatic bounds."""

    p_min: Optional[float] = None
    p_max: Optional[float] = None
    n_points: int = 4001

    @property
    def auto(self):
        return self.p_min is None


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int

    def values(self):
        if self.steps == 1:
            return [self.start]
        width = self.stop - self.start
        return [self.start + width * k / (self.steps - 1) for k in range(self.steps)]


@dataclass(frozen=True)
class ScenarioConfig:
    theta: float
    gamma: float
    phi: float
    probe: GaussianProbe
    window: CouplingWindow
    lam: float
    grid: GridSpec = GridSpec()
    sweep: Optional[SweepSpec] = None

    def at(self, variable, value):
        """Copy of this config with one sweep variable replaced."""
        if variable == "lambda":
            return replace(self, lam=value)
        return replace(self, **{variable: value})


def _fail(section, key, constraint):
    where = f"[{section}] {key}" if key else f"[{section}]"
    raise ConfigError(f"{where}: {constraint}")


def _number(raw, section, key, allow_inf=False):
    text = raw.strip()
    if allow_inf and text.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        _fail(section, key, f"cannot parse {text!r} as a number")
    if not math.isfinite(value):
        _fail(section, key, f"must be finite, got {text!r}")
    return value


def _integer(raw, section, key):
    value = _number(raw, section, key)
    if value != int(value):
        _fail(section, key, f"must be an integer, got {raw.strip()!r}")
    return int(value)


def read_sections(text):
    """Parse the raw INI text into ``{section: {key: value}}`` with key checks."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    out = {}
    for name in parser.sections():
        if name not in SECTIONS:
            _fail(name, None, f"unknown section (expected one of {sorted(SECTIONS)})")
        keys = dict(parser[name])
        for key in keys:
            if key not in SECTIONS[name]:
                _fail(name, key, f"unknown key (expected one of {sorted(SECTIONS[name])})")
        out[name] = keys
    return out


def apply_overrides(sections, overrides):
    """Apply ``section.key=value`` strings on top of parsed sections."""
    for item in overrides:
        lhs, sep, value = item.partition("=")
        section, dot, key = lhs.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        if section not in SECTIONS:
            _fail(section, None, "unknown section in override")
        if key not in SECTIONS[section]:
            _fail(section, key, "unknown key in override")
        sections.setdefault(section, {})[key] = value.strip()
    return sections


def build_config(sections, degrees=False):
    for section, keys in REQUIRED.items():
        for key in keys:
            if key not in sections.get(section, {}):
                _fail(section, key, "missing required key")

    def angle(key, raw, section="geometry"):
        value = _number(raw, section, key)
        return math.radians(value) if degrees else value

    geo = sections["geometry"]
    angles = {k: angle(k, geo[k]) for k in ("theta", "gamma", "phi")}
    for key, upper in ANGLE_DOMAINS.items():
        if not 0 <= angles[key] <= upper * (1 + 1e-15):
            _fail("geometry", key, f"must lie in [0, {upper:.17g}] radians")
        angles[key] = min(angles[key], upper)

    pr = sections["probe"]
    try:
        probe = GaussianProbe(
            delta_P=_number(pr["delta_P"], "probe", "delta_P"),
            delta_p=_number(pr["delta_p"], "probe", "delta_p"),
            p_phi=_number(pr.get("p_phi", "inf"), "probe", "p_phi", allow_inf=True),
            mass=_number(pr["mass"], "probe", "mass"),
            hbar=_number(pr.get("hbar", "1"), "probe", "hbar"),
        )
    except ValidationError as exc:
        _fail("probe", None, str(exc))

    win = sections.get("window", {})
    kind = win.get("kind", RECTANGULAR).strip()
    if kind not in WINDOW_KINDS:
        _fail("window", "kind", f"must be one of {WINDOW_KINDS}")
    if kind == RECTANGULAR and "T" not in win:
        _fail("window", "T", "missing required key for a rectangular window")
    try:
        window = CouplingWindow(
            kind=kind,
            T=_number(win.get("T", "1"), "window", "T"),
            prep_lead=_number(win.get("prep_lead", "0"), "window", "prep_lead"),
        )
    except ValidationError as exc:
        _fail("window", None, str(exc))

    lam = _number(sections["coupling"]["lambda"], "coupling", "lambda")
    if lam == 0:
        _fail("coupling", "lambda", "must be nonzero")

    grid = _build_grid(sections.get("grid", {}))
    sweep = _build_sweep(sections.get("sweep", {}), degrees)
    return ScenarioConfig(angles["theta"], angles["gamma"], angles["phi"],
                          probe, window, lam, grid, sweep)


def _build_grid(raw):
    def auto(key):
        return raw.get(key, "auto").strip().lower() == "auto"

    n_points = 4001 if auto("n_points") else _integer(raw["n_points"], "grid", "n_points")
    if n_points < 101 or n_points % 2 == 0:
        _fail("grid", "n_points", "must be an odd integer >= 101")
    if auto("p_min") and auto("p_max"):
        return GridSpec(None, None, n_points)
    if auto("p_min") or auto("p_max"):
        _fail("grid", "p_min" if auto("p_min") else "p_max",
              "p_min and p_max must both be numbers or both be auto")
    p_min = _number(raw["p_min"], "grid", "p_min")
    p_max = _number(raw["p_max"], "grid", "p_max")
    if not p_min < p_max:
        _fail("grid", "p_max", "must exceed p_min")
    return GridSpec(p_min, p_max, n_points)


def _build_sweep(raw, degrees):
    if not raw:
        return None
    for key in ("variable", "start", "stop", "steps"):
        if key not in raw:
            _fail("sweep", key, "missing required key for a sweep")
    variable = raw["variable"].strip()
    if variable not in SWEEP_VARIABLES:
        _fail("sweep", "variable", f"must be one of {SWEEP_VARIABLES}")
    start = _number(raw["start"], "sweep", "start")
    stop = _number(raw["stop"], "sweep", "stop")
    steps = _integer(raw["steps"], "sweep", "steps")
    if steps < 1:
        _fail("sweep", "steps", "must be >= 1")
    if variable in ANGLE_DOMAINS:
        if degrees:
            start, stop = math.radians(start), math.radians(stop)
        upper = ANGLE_DOMAINS[variable]
        for key, value in (("start", start), ("stop", stop)):
            if not 0 <= value <= upper * (1 + 1e-15):
                _fail("sweep", key, f"{variable} must lie in [0, {upper:.17g}] radians")
        start, stop = min(start, upper), min(stop, upper)
    elif start == 0 or stop == 0:
        _fail("sweep", "start" if start == 0 else "stop", "lambda must be nonzero")
    return SweepSpec(variable, start, stop, steps)


def parse_config(text, overrides=(), degrees=False):
    """Parse and validate a scenario configuration document."""
    return build_config(apply_overrides(read_sections(text), overrides), degrees)
