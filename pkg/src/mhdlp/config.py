"""Plain-text run configuration: `section.key = value` lines, strict schema.

Unknown keys, duplicate keys, and invalid values are rejected eagerly with
the offending key path in the message.  The parsed result bundles the
solver RunConfig with the monitor settings (criterion exponents, envelope
weight, fit cap).
"""

import hashlib
import math
from dataclasses import dataclass

from .grid import TWO_PI, Grid
from .monitor import CriterionSpec, make_criterion_spec
from .solver import InitialCondition, PhysicsParams, RunConfig


class ConfigError(ValueError):
    pass


def _parse_number(text: str, key: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse number from {text!r}") from None


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse integer from {text!r}") from None


_KNOWN_KEYS = {
    "grid.dims", "grid.n", "grid.period",
    "physics.nu", "physics.eta",
    "time.dt", "time.t_max", "time.cfl",
    "ic.kind", "ic.seed", "ic.amplitude", "ic.b_amplitude",
    "ic.slope", "ic.band_lo", "ic.band_hi", "ic.u_rms", "ic.b_rms",
    "output.diag_every", "output.checkpoint_every",
    "criterion.s", "criterion.p",
    "envelope.rho", "envelope.c_cap",
}

_REQUIRED_KEYS = {"grid.dims", "grid.n", "time.dt", "time.t_max", "ic.kind"}

_IC_FLOAT_PARAMS = ("amplitude", "b_amplitude", "slope", "u_rms", "b_rms")
_IC_INT_PARAMS = ("band_lo", "band_hi")


@dataclass
class ParsedRun:
    run: RunConfig
    criterion: CriterionSpec
    rho: float | None
    c_cap: float
    canonical: str

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical.encode()).hexdigest()


def parse_config_text(text: str, source: str = "<config>") -> ParsedRun:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = value

    missing = _REQUIRED_KEYS - set(entries)
    if missing:
        raise ConfigError(f"{source}: missing required keys {sorted(missing)}")

    try:
        grid = Grid(
            dims=_parse_int(entries["grid.dims"], "grid.dims"),
            n=_parse_int(entries["grid.n"], "grid.n"),
            period=_parse_number(entries.get("grid.period", repr(TWO_PI)), "grid.period"),
        )
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None

    try:
        physics = PhysicsParams(
            nu=_parse_number(entries.get("physics.nu", "0"), "physics.nu"),
            eta=_parse_number(entries.get("physics.eta", "0"), "physics.eta"),
        )
    except ValueError as exc:
        raise ConfigError(f"physics: {exc}") from None

    params: dict = {}
    for name in _IC_FLOAT_PARAMS:
        key = f"ic.{name}"
        if key in entries:
            params[name] = _parse_number(entries[key], key)
    for name in _IC_INT_PARAMS:
        key = f"ic.{name}"
        if key in entries:
            params[name] = _parse_int(entries[key], key)
    seed = _parse_int(entries["ic.seed"], "ic.seed") if "ic.seed" in entries else None
    ic = InitialCondition(kind=entries["ic.kind"].strip(), params=params, seed=seed)

    try:
        run = RunConfig(
            grid=grid,
            physics=physics,
            dt=_parse_number(entries["time.dt"], "time.dt"),
            t_max=_parse_number(entries["time.t_max"], "time.t_max"),
            ic=ic,
            diag_every=_parse_int(entries.get("output.diag_every", "10"),
                                  "output.diag_every"),
            checkpoint_every=_parse_int(entries.get("output.checkpoint_every", "0"),
                                        "output.checkpoint_every"),
            cfl=_parse_number(entries.get("time.cfl", "0.4"), "time.cfl"),
        )
    except ValueError as exc:
        raise ConfigError(f"run: {exc}") from None

    try:
        criterion = make_criterion_spec(
            _parse_number(entries.get("criterion.s", "0"), "criterion.s"),
            _parse_number(entries.get("criterion.p", "inf"), "criterion.p"),
        )
    except ValueError as exc:
        raise ConfigError(f"criterion: {exc}") from None

    rho = _parse_number(entries["envelope.rho"], "envelope.rho") \
        if "envelope.rho" in entries else 0.75
    if not (0.5 < rho < 1.0):
        raise ConfigError(f"envelope.rho: must lie in (1/2, 1), got {rho}")
    c_cap = _parse_number(entries.get("envelope.c_cap", "1e6"), "envelope.c_cap")
    if not (c_cap >= 1.0):
        raise ConfigError(f"envelope.c_cap: must be >= 1, got {c_cap}")

    canonical = "\n".join(f"{k} = {entries[k]}" for k in sorted(entries))
    return ParsedRun(run=run, criterion=criterion, rho=rho, c_cap=c_cap,
                     canonical=canonical)


def parse_config(path) -> ParsedRun:
    """Parse a config file; missing files and schema violations raise ConfigError."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, source=str(path))
