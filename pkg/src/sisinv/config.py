"""Flat ``section.key = value`` run configuration.

Grammar: one assignment per line, ``#`` starts a comment, blank lines are
ignored.  Keys are ``section.name``; repeating a key is an error.  Every key
has a documented default (see :data:`SCHEMA`), and the fully resolved set of
keys is embedded in every report the CLI writes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SISError
from .forward import Bounds, ModelConfig
from .grid import Grid
from .inverse import InverseConfig
from .twin import PROFILE_KINDS, Profile, TwinSpec


class ConfigSyntaxError(SISError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class ValidationError(SISError, ValueError):
    def __init__(self, key, constraint, line=None):
        self.key = key
        self.constraint = constraint
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{key}: {constraint}{where}")


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError
    return int(v)


def _bool(s):
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError


def _floats(s):
    return [float(t) for t in s.split(",") if t.strip()]


def _kind(s):
    if s not in PROFILE_KINDS:
        raise ValueError
    return s


def _path(s):
    return s


def _profile_keys(prefix, kind, base, amp, wavenumber=1):
    return {
        f"{prefix}_kind": (_kind, kind, None, f"must be one of {', '.join(PROFILE_KINDS)}"),
        f"{prefix}_base": (_float, base, None, "must be a number"),
        f"{prefix}_amplitude": (_float, amp, None, "must be a number"),
        f"{prefix}_center": (_float, 0.5, None, "must be a number"),
        f"{prefix}_width": (_float, 0.1, lambda v: v > 0, "must be > 0"),
        f"{prefix}_wavenumber": (_int, wavenumber, lambda v: v >= 0, "must be a nonnegative integer"),
    }


def _in01(v):
    return 0.0 < v < 1.0


# key -> (parser, default, check, constraint message); default None means "unset"
SCHEMA: dict[str, tuple] = {
    "grid.dim": (_int, 1, lambda v: v in (1, 2), "must be 1 or 2"),
    "grid.nx": (_int, 16, lambda v: v >= 3, "must be >= 3"),
    "grid.ny": (_int, 16, lambda v: v >= 3, "must be >= 3"),
    "grid.lx": (_float, 1.0, lambda v: v > 0, "must be > 0"),
    "grid.ly": (_float, 1.0, lambda v: v > 0, "must be > 0"),
    "model.m": (_float, 0.5, _in01, "must lie in (0,1)"),
    "model.n": (_float, 0.5, _in01, "must lie in (0,1)"),
    "model.T": (_float, 1.0, lambda v: v > 0, "must be > 0"),
    "model.dt": (_float, 1.0 / 64, lambda v: v > 0, "must be > 0"),
    "model.floor": (_float, 1e-12, lambda v: v >= 0, "must be >= 0"),
    "bounds.b_lo": (_float, 0.05, _in01, "must lie in (0,1)"),
    "bounds.b_hi": (_float, 0.95, _in01, "must lie in (0,1)"),
    "bounds.r_lo": (_float, 0.05, _in01, "must lie in (0,1)"),
    "bounds.r_hi": (_float, 0.95, _in01, "must lie in (0,1)"),
    **_profile_keys("initial.s0", "sinusoidal", 0.7, 0.2),
    **_profile_keys("initial.i0", "sinusoidal", 0.3, 0.1, 2),
    "initial.s0_file": (_path, None, None, ""),
    "initial.i0_file": (_path, None, None, ""),
    **_profile_keys("twin.beta", "sinusoidal", 0.5, 0.15),
    **_profile_keys("twin.gamma", "sinusoidal", 0.5, -0.1),
    "twin.noise": (_float, 0.0, lambda v: v >= 0, "must be >= 0"),
    "twin.seed": (_int, 0, lambda v: 0 <= v < 2**64, "must be an unsigned 64-bit integer"),
    "observations.s_obs": (_path, None, None, ""),
    "observations.i_obs": (_path, None, None, ""),
    "inverse.delta": (_float, 1e-6, lambda v: v >= 0, "must be >= 0"),
    "inverse.max_iters": (_int, 500, lambda v: v >= 1, "must be a positive integer"),
    "inverse.grad_tol": (_float, 1e-7, lambda v: v > 0, "must be > 0"),
    "inverse.step0": (_float, 1.0, lambda v: v > 0, "must be > 0"),
    "inverse.armijo_c": (_float, 1e-4, _in01, "must lie in (0,1)"),
    "inverse.backtrack": (_float, 0.5, _in01, "must lie in (0,1)"),
    "inverse.sobolev_smoothing": (_bool, False, None, "must be a boolean"),
    "inverse.sobolev_mu": (_float, 0.01, lambda v: v > 0, "must be > 0"),
    "inverse.bb_steps": (_bool, True, None, "must be a boolean"),
    "inverse.init": (str, "midpoint", lambda v: v in ("midpoint", "random"), "must be midpoint or random"),
    "sweep.deltas": (_floats, [1e-6, 1e-4, 1e-2, 1.0], lambda v: len(v) > 0 and min(v) >= 0,
                     "must be a comma-separated list of numbers >= 0"),
    "sweep.starts": (_int, 2, lambda v: v >= 2, "must be >= 2"),
    "sweep.jobs": (_int, 1, lambda v: v >= 1, "must be >= 1"),
    "check.directions": (_int, 10, lambda v: v >= 1, "must be >= 1"),
    "check.seed": (_int, 0, lambda v: v >= 0, "must be >= 0"),
    "output.dir": (_path, "out", None, ""),
    "output.slices": (_int, 8, lambda v: v >= 1, "must be >= 1"),
}

_LINE = re.compile(r"^([A-Za-z_][\w]*)\.([A-Za-z_][\w]*)\s*=\s*(.*?)\s*$")


@dataclass
class RunConfig:
    grid: Grid
    model: ModelConfig
    bounds: Bounds
    s0: Profile
    i0: Profile
    inverse: InverseConfig
    twin: TwinSpec | None = None
    s0_file: str | None = None
    i0_file: str | None = None
    s_obs: str | None = None
    i_obs: str | None = None
    init: str = "midpoint"
    sweep_deltas: list = field(default_factory=list)
    sweep_starts: int = 2
    sweep_jobs: int = 1
    check_directions: int = 10
    check_seed: int = 0
    out: str = "out"
    slices: int = 8
    base: Path = Path(".")
    resolved: dict = field(default_factory=dict)

    @property
    def has_observations(self) -> bool:
        return self.s_obs is not None and self.i_obs is not None


def _read_lines(text: str):
    seen: dict[str, int] = {}
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        m = _LINE.match(body)
        if not m:
            raise ConfigSyntaxError(f"expected 'section.key = value', got {body!r}", lineno)
        key = f"{m.group(1)}.{m.group(2)}"
        if key in seen:
            raise ConfigSyntaxError(f"duplicate key {key!r} (first set on line {seen[key]})", lineno)
        if key not in SCHEMA:
            raise ValidationError(key, "unknown key", lineno)
        if m.group(3) == "":
            raise ConfigSyntaxError(f"missing value for {key!r}", lineno)
        seen[key] = lineno
        raw[key] = (m.group(3), lineno)
    return raw


def _profile(values, prefix):
    return Profile(
        kind=values[f"{prefix}_kind"],
        base=values[f"{prefix}_base"],
        amplitude=values[f"{prefix}_amplitude"],
        center=values[f"{prefix}_center"],
        width=values[f"{prefix}_width"],
        wavenumber=values[f"{prefix}_wavenumber"],
    )


def parse_config(text: str, base: Path | str = ".") -> RunConfig:
    """Parse and validate configuration text; relative paths resolve against ``base``."""
    raw = _read_lines(text)
    values, lines = {}, {}
    for key, (parser, default, check, msg) in SCHEMA.items():
        if key not in raw:
            values[key] = default
            continue
        text_value, lineno = raw[key]
        lines[key] = lineno
        try:
            v = parser(text_value)
        except ValueError:
            raise ValidationError(key, msg or "invalid value", lineno) from None
        if check is not None and not check(v):
            raise ValidationError(key, msg, lineno)
        values[key] = v

    def fail(key, constraint):
        raise ValidationError(key, constraint, lines.get(key))

    if values["bounds.b_lo"] > values["bounds.b_hi"]:
        fail("bounds.b_hi", "must be >= bounds.b_lo")
    if values["bounds.r_lo"] > values["bounds.r_hi"]:
        fail("bounds.r_hi", "must be >= bounds.r_lo")
    if values["model.dt"] > values["model.T"]:
        fail("model.dt", "must not exceed model.T")
    for a, b in (("initial.s0_file", "initial.i0_file"), ("observations.s_obs", "observations.i_obs")):
        if (values[a] is None) != (values[b] is None):
            missing = b if values[b] is None else a
            fail(missing, f"must be given together with {a if missing == b else b}")

    if values["grid.dim"] == 1:
        grid = Grid.line(values["grid.nx"], values["grid.lx"])
    else:
        grid = Grid.rect(values["grid.nx"], values["grid.ny"], values["grid.lx"], values["grid.ly"])
    model = ModelConfig(values["model.m"], values["model.n"], values["model.T"], values["model.dt"], values["model.floor"])
    bounds = Bounds(values["bounds.b_lo"], values["bounds.b_hi"], values["bounds.r_lo"], values["bounds.r_hi"])
    inverse = InverseConfig(
        delta=values["inverse.delta"],
        max_iters=values["inverse.max_iters"],
        grad_tol=values["inverse.grad_tol"],
        step0=values["inverse.step0"],
        armijo_c=values["inverse.armijo_c"],
        backtrack=values["inverse.backtrack"],
        sobolev_smoothing=values["inverse.sobolev_smoothing"],
        sobolev_mu=values["inverse.sobolev_mu"],
        bb_steps=values["inverse.bb_steps"],
    )
    twin = None
    if any(k.startswith("twin.") for k in raw):
        twin = TwinSpec(_profile(values, "twin.beta"), _profile(values, "twin.gamma"),
                        values["twin.noise"], values["twin.seed"])

    resolved = {k: _render(v) for k, v in values.items() if v is not None}
    resolved["model.dt"] = repr(model.dt)
    return RunConfig(
        grid=grid,
        model=model,
        bounds=bounds,
        s0=_profile(values, "initial.s0"),
        i0=_profile(values, "initial.i0"),
        inverse=inverse,
        twin=twin,
        s0_file=values["initial.s0_file"],
        i0_file=values["initial.i0_file"],
        s_obs=values["observations.s_obs"],
        i_obs=values["observations.i_obs"],
        init=values["inverse.init"],
        sweep_deltas=values["sweep.deltas"],
        sweep_starts=values["sweep.starts"],
        sweep_jobs=values["sweep.jobs"],
        check_directions=values["check.directions"],
        check_seed=values["check.seed"],
        out=values["output.dir"],
        slices=values["output.slices"],
        base=Path(base),
        resolved=resolved,
    )


def _render(v):
    if isinstance(v, list):
        return ", ".join(repr(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base=path.parent)
