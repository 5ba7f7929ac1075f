"""Run configuration files.

A configuration is plain ``key = value`` text with ``#`` comments.  Keys may
sit under the optional section headers ``[problem]``, ``[solver]``,
``[oracle]`` and ``[output]``; the headers are only for readability, every
key name is unique across them.  Example::

    [problem]
    D = 1.0
    beta = 1.0
    b = 1.0
    flux = linear
    flux_params = 0.05, 0.05
    u0 = quadratic

    [solver]
    N = 256
    sigma = 0.05
"""

import configparser
from dataclasses import dataclass, fields
import math
from pathlib import Path
import re

from .errors import ConfigError
from .problem import FluxSpec, InitialProfile, PhysicalProblem

MODES = ("solve", "solve+oracle", "constants-only", "validate-only")
FLUX_FORMS = ("constant", "linear", "exponential", "table")
PROFILE_FORMS = ("constant", "quadratic", "table")
SECTIONS = ("problem", "solver", "oracle", "output")
_TOP = "top"


@dataclass
class RunConfig:
    """Everything one pipeline run needs; defaults are the documented ones."""

    D: float
    beta: float
    b: float
    flux: str = "constant"
    flux_params: tuple = (0.0,)
    flux_table: str = None
    u0: str = "constant"
    u0_table: str = None
    u0_A: float = 0.5
    u0_samples: int = 401
    # solver
    N: int = 256
    Ny: int = 65
    tol: float = 1e-10
    tol_outer: float = 1e-8
    max_iter: int = 200
    max_outer: int = 50
    relax: float = 1.0
    C1: object = "auto"
    sigma: object = "auto"
    T: object = None
    jump: str = "exact"
    stride: int = 1
    # oracle
    Nx: int = 200
    safety: float = 0.4
    # output
    out: str = "out"
    mode: str = "solve"
    source: str = None

    def build_problem(self) -> PhysicalProblem:
        """The physical problem described by the configuration."""
        if self.flux == "table":
            g = FluxSpec.from_file(self.flux_table)
        else:
            g = getattr(FluxSpec, self.flux)(*self.flux_params)
        if self.u0 == "table":
            u0 = InitialProfile.from_file(self.u0_table)
        elif self.u0 == "quadratic":
            u0 = InitialProfile.compatible_quadratic(self.beta, self.b, float(g(0.0)), self.D,
                                                     self.u0_A, self.u0_samples)
        else:
            u0 = InitialProfile.constant(self.beta, self.b, self.u0_samples)
        return PhysicalProblem(self.D, self.beta, self.b, g, u0)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "source"}


_FLOAT = ("D", "beta", "b", "u0_A", "tol", "tol_outer", "relax", "safety")
_INT = ("u0_samples", "N", "Ny", "max_iter", "max_outer", "stride", "Nx")
_AUTO_FLOAT = ("C1", "sigma")
_TEXT = ("flux", "flux_table", "u0", "u0_table", "jump", "out", "mode")
_REQUIRED = ("D", "beta", "b")
KNOWN = set(_FLOAT + _INT + _AUTO_FLOAT + _TEXT + ("flux_params", "T"))


def _key_lines(text):
    lines = {}
    for i, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*([A-Za-z_]\w*)\s*[=:]", line)
        if m:
            lines.setdefault(m.group(1), i)
    return lines


def _read(text, origin):
    cp = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",),
        default_section="\x00", strict=True,
    )
    cp.optionxform = str
    try:
        # the leading header lets keys appear before any section
        cp.read_string(f"[{_TOP}]\n" + text, source=origin)
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] - 1 if exc.errors else None
        raise ConfigError(f"{origin}: malformed line {exc.errors[0][1].strip()}", lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        lineno = exc.lineno - 1 if exc.lineno else None
        raise ConfigError(f"{origin}: {exc.message.splitlines()[0]}", lineno) from None
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    unknown_sections = [s for s in cp.sections() if s not in SECTIONS + (_TOP,)]
    if unknown_sections:
        raise ConfigError(f"{origin}: unknown section(s): {', '.join(unknown_sections)}")
    raw = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            if key in raw:
                raise ConfigError(f"{origin}: key {key!r} given twice")
            raw[key] = value.strip()
    return raw


def _positive(name, value, lineno):
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be positive, got {value}", lineno)


def _convert(raw, lines, base):
    vals = {}
    for key, text in raw.items():
        ln = lines.get(key)
        try:
            if key in _FLOAT:
                vals[key] = float(text)
            elif key in _INT:
                vals[key] = int(text)
            elif key in _AUTO_FLOAT:
                vals[key] = "auto" if text.lower() == "auto" else float(text)
            elif key == "T":
                vals[key] = None if text.lower() in ("", "none") else float(text)
            elif key == "flux_params":
                vals[key] = tuple(float(v) for v in text.replace(",", " ").split())
            else:
                vals[key] = text
        except ValueError:
            raise ConfigError(f"cannot read {key} = {text!r}", ln) from None
        if key in ("flux_table", "u0_table"):
            path = Path(text)
            if not path.is_absolute():
                path = base / path
            vals[key] = str(path)
    return vals


def _validate(cfg: RunConfig, lines):
    ln = lines.get
    if not 0 < cfg.D < 2:
        raise ConfigError(f"D = {cfg.D} violates 0<D<2", ln("D"))
    for key in ("beta", "b", "tol", "tol_outer", "relax", "safety", "N", "Ny", "max_iter",
                "max_outer", "stride", "Nx", "u0_samples"):
        _positive(key, getattr(cfg, key), ln(key))
    for key in ("sigma", "C1", "T"):
        v = getattr(cfg, key)
        if isinstance(v, float):
            _positive(key, v, ln(key))
    if cfg.relax > 1:
        raise ConfigError(f"relax must lie in (0, 1], got {cfg.relax}", ln("relax"))
    if cfg.safety > 1:
        raise ConfigError(f"safety must lie in (0, 1], got {cfg.safety}", ln("safety"))
    if cfg.flux not in FLUX_FORMS:
        raise ConfigError(f"flux must be one of {FLUX_FORMS}, got {cfg.flux!r}", ln("flux"))
    if cfg.u0 not in PROFILE_FORMS:
        raise ConfigError(f"u0 must be one of {PROFILE_FORMS}, got {cfg.u0!r}", ln("u0"))
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.mode!r}", ln("mode"))
    if cfg.jump not in ("exact", "printed"):
        raise ConfigError(f"jump must be 'exact' or 'printed', got {cfg.jump!r}", ln("jump"))
    need = {"constant": 1, "linear": 2, "exponential": 2}.get(cfg.flux)
    if need is not None and len(cfg.flux_params) != need:
        raise ConfigError(f"flux = {cfg.flux} takes {need} parameter(s), got {len(cfg.flux_params)}",
                          ln("flux_params"))
    for key, form in (("flux_table", cfg.flux), ("u0_table", cfg.u0)):
        path = getattr(cfg, key)
        if form == "table":
            if path is None:
                raise ConfigError(f"{key} is required when the form is 'table'")
            if not Path(path).is_file():
                raise ConfigError(f"{key}: no such file {path}", ln(key))


def config_from_text(text, origin="<string>", base=None) -> RunConfig:
    """Parse configuration text; relative table paths resolve against ``base``."""
    base = Path(base) if base is not None else Path.cwd()
    raw = _read(text, origin)
    unknown = sorted(set(raw) - KNOWN)
    if unknown:
        raise ConfigError(f"{origin}: unknown key(s): {', '.join(unknown)}")
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"{origin}: missing required key(s): {', '.join(missing)}")
    lines = _key_lines(text)
    cfg = RunConfig(**_convert(raw, lines, base), source=origin)
    _validate(cfg, lines)
    return cfg


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return config_from_text(text, str(path), path.parent)
