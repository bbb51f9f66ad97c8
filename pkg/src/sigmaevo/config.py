"""Run configuration: a line-oriented ``key = value`` format with section headers.

Example::

    [run]
    command = simulate
    output_dir = out/run1
    seed = 7

    [params]
    n = 2
    alpha = 0.5
    p = 1.95
    q = 1.95

Every key is optional; missing keys take the defaults in :data:`FIELDS`.
Unknown sections or keys are errors, and all problems found in one document
are reported together.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass

from .params import ParameterError, Params, validate_params
from .spectral import Grid

COMMANDS = ("region", "linear-decay", "simulate", "compare", "check-inequalities", "fit")

# validation context used when ``context = auto``
AUTO_CONTEXT = {
    "region": "theorem",
    "simulate": "theorem",
    "compare": "theorem",
    "linear-decay": "linear",
    "check-inequalities": "linear",
    "fit": "linear",
}


class ConfigError(ValueError):
    """Carries every problem found while parsing or validating a config."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


def _floats(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(t) for t in text.split(","))


def _names(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    text = text.strip()
    return None if text in ("", "auto") else float(text)


def _fmt_float(v):
    return format(float(v), ".17g")


def _fmt_value(v):
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt_float(x) if isinstance(x, float) else str(x) for x in v)
    return str(v)


# a, b values for the Duhamel-integral lattice
LATTICE = tuple(0.25 * k for k in range(1, 13))

# (attribute, section, key, parser, default)
FIELDS = (
    ("command", "run", "command", str, "simulate"),
    ("output_dir", "run", "output_dir", str, "sigmaevo-out"),
    ("seed", "run", "seed", int, 0),
    ("strict", "run", "strict", _bool, False),
    ("n", "params", "n", float, 2.0),
    ("sigma", "params", "sigma", float, 1.0),
    ("alpha", "params", "alpha", float, 0.5),
    ("p", "params", "p", float, 2.0),
    ("q", "params", "q", float, 2.0),
    ("m", "params", "m", float, 1.5),
    ("context", "params", "context", str, "auto"),
    ("N", "grid", "N", int, 256),
    ("L", "grid", "L", float, 64.0),
    ("profile", "data", "profile", str, "gaussian"),
    ("epsilon", "data", "epsilon", float, 1e-3),
    ("horizon", "time", "horizon", float, 50.0),
    ("dt", "time", "dt", float, 0.05),
    ("adaptive", "time", "adaptive", _bool, True),
    ("tolerance", "time", "tolerance", float, 1e-6),
    ("split_time", "time", "split_time", _opt_float, None),
    ("checkpoints", "time", "checkpoints", _floats, ()),
    ("kind", "nonlinearity", "kind", str, "modified"),
    ("zero_mode", "nonlinearity", "zero_mode", str, "project"),
    ("power_control", "nonlinearity", "power_control", _bool, False),
    ("t_min", "decay", "t_min", float, 1.0),
    ("t_max", "decay", "t_max", float, 1e4),
    ("samples", "decay", "samples", int, 81),
    ("fit_min", "decay", "fit_min", float, 1e2),
    ("fit_max", "decay", "fit_max", float, 1e4),
    ("fit_input", "decay", "fit_input", str, ""),
    ("hls_q", "inequalities", "hls_q", float, 2.0),
    ("hls_control_r", "inequalities", "hls_control_r", _opt_float, None),
    ("gn_q", "inequalities", "gn_q", float, 4.0),
    ("hls_family", "inequalities", "hls_family", _names, ("wavelet", "random")),
    ("gn_family", "inequalities", "gn_family", _names, ("gaussian", "wavelet", "random")),
    ("extent", "inequalities", "extent", _opt_float, 1.5),
    ("lattice", "inequalities", "lattice", _floats, LATTICE),
)

PROFILE_NAMES = ("gaussian", "laplacian_gaussian", "bump", "random")


@dataclass(frozen=True)
class RunConfig:
    command: str = "simulate"
    output_dir: str = "sigmaevo-out"
    seed: int = 0
    strict: bool = False
    n: float = 2.0
    sigma: float = 1.0
    alpha: float = 0.5
    p: float = 2.0
    q: float = 2.0
    m: float = 1.5
    context: str = "auto"
    N: int = 256
    L: float = 64.0
    profile: str = "gaussian"
    epsilon: float = 1e-3
    horizon: float = 50.0
    dt: float = 0.05
    adaptive: bool = True
    tolerance: float = 1e-6
    split_time: float | None = None
    checkpoints: tuple = ()
    kind: str = "modified"
    zero_mode: str = "project"
    power_control: bool = False
    t_min: float = 1.0
    t_max: float = 1e4
    samples: int = 81
    fit_min: float = 1e2
    fit_max: float = 1e4
    fit_input: str = ""
    hls_q: float = 2.0
    hls_control_r: float | None = None
    gn_q: float = 4.0
    hls_family: tuple = ("wavelet", "random")
    gn_family: tuple = ("gaussian", "wavelet", "random")
    extent: float | None = 1.5
    lattice: tuple = LATTICE

    @property
    def validation_context(self) -> str:
        return AUTO_CONTEXT[self.command] if self.context == "auto" else self.context

    def params(self) -> Params:
        return validate_params(self.n, self.sigma, self.alpha, self.p, self.q, self.m, self.validation_context)

    def grid(self) -> Grid:
        return Grid(int(self.n), self.N, self.L)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_BY_KEY = {(sec, key): (attr, parser) for attr, sec, key, parser, _ in FIELDS}
_SECTIONS = tuple(dict.fromkeys(sec for _, sec, _, _, _ in FIELDS))


def _check(cfg: RunConfig):
    """Semantic checks beyond the per-value parsers; returns a list of messages."""
    errors = []
    if cfg.command not in COMMANDS:
        errors.append(f"run.command must be one of {COMMANDS}, got {cfg.command!r}")
        return errors
    try:
        cfg.params()
    except ParameterError as exc:
        errors.extend(f"params: {e}" for e in exc.errors)
    if cfg.command in ("simulate", "compare", "check-inequalities"):
        try:
            cfg.grid()
        except ValueError as exc:
            errors.append(f"grid: {exc}")
    if cfg.profile not in PROFILE_NAMES:
        errors.append(f"data.profile must be one of {PROFILE_NAMES}, got {cfg.profile!r}")
    if cfg.epsilon < 0:
        errors.append(f"data.epsilon must be >= 0, got {cfg.epsilon:g}")
    if not cfg.horizon > 0:
        errors.append(f"time.horizon must be positive, got {cfg.horizon:g}")
    if not cfg.dt > 0:
        errors.append(f"time.dt must be positive, got {cfg.dt:g}")
    if not cfg.tolerance > 0:
        errors.append(f"time.tolerance must be positive, got {cfg.tolerance:g}")
    if cfg.split_time is not None and not 0 < cfg.split_time < cfg.horizon:
        errors.append(f"time.split_time must lie in (0, horizon), got {cfg.split_time:g}")
    if cfg.kind not in ("modified", "hartree", "power"):
        errors.append(f"nonlinearity.kind must be modified, hartree or power, got {cfg.kind!r}")
    if cfg.zero_mode not in ("project", "retain"):
        errors.append(f"nonlinearity.zero_mode must be project or retain, got {cfg.zero_mode!r}")
    if not 0 < cfg.t_min < cfg.t_max:
        errors.append(f"decay window needs 0 < t_min < t_max, got {cfg.t_min:g}, {cfg.t_max:g}")
    if cfg.samples < 2:
        errors.append(f"decay.samples must be >= 2, got {cfg.samples}")
    if not cfg.fit_min < cfg.fit_max:
        errors.append(f"decay fit window needs fit_min < fit_max, got {cfg.fit_min:g}, {cfg.fit_max:g}")
    if cfg.command == "fit" and not cfg.fit_input:
        errors.append("decay.fit_input is required for the fit command")
    if cfg.extent is not None and not cfg.extent > 0:
        errors.append(f"inequalities.extent must be positive or auto, got {cfg.extent:g}")
    for name in ("hls_family", "gn_family"):
        bad = [f for f in getattr(cfg, name) if f not in ("gaussian", "wavelet", "oscillatory", "bump", "random")]
        if bad:
            errors.append(f"inequalities.{name} has unknown members {bad}")
    return errors


def parse_config(text: str, overrides=None) -> RunConfig:
    """Parse ``text`` (plus ``section.key -> string`` overrides) into a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        With every syntax, unknown-key, type and constraint error found.
    """
    parser = configparser.ConfigParser(
        interpolation=None, strict=True, empty_lines_in_values=False, inline_comment_prefixes=("#", ";")
    )
    parser.optionxform = str  # keys are case sensitive (N and n differ)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from None

    raw, errors = {}, []
    for section in parser.sections():
        if section not in _SECTIONS:
            errors.append(f"unknown section [{section}]")
            continue
        for key, value in parser.items(section):
            if (section, key) not in _BY_KEY:
                errors.append(f"unknown key {section}.{key}")
            else:
                raw[(section, key)] = value
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if (section, key) not in _BY_KEY:
            errors.append(f"unknown key {dotted}")
        else:
            raw[(section, key)] = str(value)

    values = {}
    for (section, key), text_value in raw.items():
        attr, conv = _BY_KEY[(section, key)]
        try:
            values[attr] = conv(text_value)
        except ValueError:
            errors.append(f"{section}.{key}: cannot parse {text_value!r} as {getattr(conv, '__name__', 'value').lstrip('_')}")
    for attr in ("n", "sigma", "alpha", "p", "q", "m", "L", "epsilon", "horizon", "dt"):
        if attr in values and not math.isfinite(values[attr]):
            errors.append(f"{attr} must be finite, got {values[attr]!r}")
    if errors:
        raise ConfigError(errors)

    cfg = RunConfig(**values)
    errors = _check(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def serialize(cfg: RunConfig) -> str:
    """Every key of every section, floats with 17 significant digits."""
    lines = []
    for section in _SECTIONS:
        if lines:
            lines.append("")
        lines.append(f"[{section}]")
        for attr, sec, key, _, _ in FIELDS:
            if sec == section:
                lines.append(f"{key} = {_fmt_value(getattr(cfg, attr))}")
    return "\n".join(lines) + "\n"


def load_config(path, overrides=None) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc.strerror}"]) from None
    return parse_config(text, overrides)
