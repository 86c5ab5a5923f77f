"""Flat ``key = value`` configuration files.

One assignment per line, ``#`` starts a comment. Any frequency-like key may
instead be written with the suffix ``_over_2pi_hz`` (value in Hz, multiplied
by 2*pi on load). Phases accept ``pi`` forms such as ``pi``, ``-pi/2`` or
``0.5*pi``. Unknown keys are rejected with their file and line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Optional

from omfields.analysis import AXES, OBSERVABLES, Axis, SweepSpec
from omfields.errors import ValidationError
from omfields.model import DriveConfig, SystemParams, to_rad_s, validate
from omfields.response import steady_state

SUFFIX = "_over_2pi_hz"
CONFIG_DIR = Path(__file__).parent / "configs"

FREQUENCY_KEYS = {
    "omega_m", "gamma_m", "gamma_a0", "gamma_ae", "g",
    "omega_q", "delta", "Delta", "Delta_a", "G",
    "eps_c", "eps_p", "eps_m", "G_min", "G_max",
}
FREQUENCY_AXES = {"delta", "omega_q", "G"}
NUMBER_KEYS = FREQUENCY_KEYS | {"phi_p", "phi_m", "eta", "phi", "oracle_ratio"}
INT_KEYS = {"branch", "oracle_steps_per_period"}
STR_KEYS = {"mode", "delay_method", "oracle_scheme"}
LIST_KEYS = {"axes", "observables"}
BOOL_KEYS = {"resonant"}
for _axis in AXES:
    NUMBER_KEYS |= {f"{_axis}_start", f"{_axis}_stop"}
    INT_KEYS |= {f"{_axis}_count"}
    if _axis in FREQUENCY_AXES:
        FREQUENCY_KEYS |= {f"{_axis}_start", f"{_axis}_stop", f"{_axis}_values"}
NUMBER_LIST_KEYS = {f"{a}_values" for a in AXES}
KNOWN_KEYS = NUMBER_KEYS | INT_KEYS | STR_KEYS | LIST_KEYS | BOOL_KEYS | NUMBER_LIST_KEYS

_PI = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\s*\*\s*)?([+-]?)pi(?:\s*/\s*(\d+\.?\d*))?$")


def _number(text: str, where: str) -> float:
    s = text.strip()
    try:
        return float(s)
    except ValueError:
        pass
    m = _PI.match(s)
    if m is None:
        raise ValidationError(f"{where}: cannot read {text!r} as a number")
    coef = float(m.group(1).rstrip(" *")) if m.group(1) else 1.0
    sign = -1.0 if m.group(2) == "-" else 1.0
    div = float(m.group(3)) if m.group(3) else 1.0
    return sign * coef * math.pi / div


def _convert(key: str, raw: str, where: str) -> Any:
    if key in NUMBER_KEYS:
        return _number(raw, where)
    if key in NUMBER_LIST_KEYS:
        return [_number(x, where) for x in raw.split(",") if x.strip()]
    if key in INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ValidationError(f"{where}: {key} expects an integer, got {raw!r}") from None
    if key in BOOL_KEYS:
        low = raw.strip().lower()
        if low not in ("true", "false"):
            raise ValidationError(f"{where}: {key} expects true or false, got {raw!r}")
        return low == "true"
    if key in LIST_KEYS:
        return [x.strip() for x in raw.split(",") if x.strip()]
    return raw.strip()


def parse_assignment(line: str, where: str) -> Optional[tuple[str, Any]]:
    """Parse ``key = value`` into a canonical (unsuffixed, rad/s) key and value."""
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    if "=" not in body:
        raise ValidationError(f"{where}: expected 'key = value', got {line.strip()!r}")
    key, raw = (s.strip() for s in body.split("=", 1))
    scaled = key.endswith(SUFFIX)
    base = key[: -len(SUFFIX)] if scaled else key
    if base not in KNOWN_KEYS or (scaled and base not in FREQUENCY_KEYS):
        raise ValidationError(f"{where}: unknown key {key!r}")
    value = _convert(base, raw, where)
    if scaled:
        value = [to_rad_s(v) for v in value] if isinstance(value, list) else to_rad_s(value)
    return base, value


class Entries(dict):
    """Canonical key -> value, remembering where each key was set."""

    def __init__(self):
        super().__init__()
        self.where: dict[str, str] = {}

    def set(self, key: str, value: Any, where: str, override: bool = False):
        if key in self and not override:
            raise ValidationError(f"{where}: {key!r} already set at {self.where[key]}")
        self[key] = value
        self.where[key] = where


def read_entries(text: str, source: str = "<config>") -> Entries:
    entries = Entries()
    for n, line in enumerate(text.splitlines(), start=1):
        parsed = parse_assignment(line, f"{source}:{n}")
        if parsed:
            entries.set(*parsed, where=f"{source}:{n}")
    return entries


def resolve_path(path: str | Path) -> Path:
    """A config path, falling back to the bundled configs directory."""
    p = Path(path)
    if p.exists():
        return p
    bundled = CONFIG_DIR / p.name
    if bundled.exists():
        return bundled
    raise ValidationError(f"config file {str(path)!r} not found")


def load_entries(path: Optional[str | Path], overrides: Iterable[str] = ()) -> Entries:
    entries = Entries()
    if path is not None:
        p = resolve_path(path)
        entries = read_entries(p.read_text(encoding="utf-8"), str(path))
    for i, item in enumerate(overrides, start=1):
        parsed = parse_assignment(item, f"--set #{i}")
        if parsed:
            entries.set(*parsed, where=f"--set #{i}", override=True)
    return entries


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    drive: DriveConfig
    G: complex
    mode: str
    entries: dict
    axes: tuple[Axis, ...] = ()
    observables: tuple[str, ...] = ()
    resonant: bool = True
    delay_method: str = "central_difference"

    def sweep(self, axes: Optional[tuple[Axis, ...]] = None,
              observables: Optional[tuple[str, ...]] = None) -> SweepSpec:
        axes = self.axes if axes is None else axes
        observables = self.observables if observables is None else observables
        return SweepSpec(self.params, self.drive, self.G, axes, observables,
                         self.resonant, self.delay_method)

    def get(self, key: str, default=None):
        return self.entries.get(key, default)


def _require(entries: Entries, *keys: str):
    for key in keys:
        if key not in entries:
            raise ValidationError(f"missing required parameter {key!r}")


def _axes(entries: Entries) -> tuple[Axis, ...]:
    axes = []
    for name in entries.get("axes", []):
        if name not in AXES:
            raise ValidationError(f"{entries.where['axes']}: unknown axis {name!r}; expected one of {AXES}")
        if f"{name}_values" in entries:
            values = entries[f"{name}_values"]
            if not values:
                raise ValidationError(f"{entries.where[name + '_values']}: empty value list")
            axes.append(Axis(name, tuple(float(v) for v in values)))
            continue
        _require(entries, f"{name}_start", f"{name}_stop", f"{name}_count")
        try:
            axes.append(Axis.linear(name, entries[f"{name}_start"], entries[f"{name}_stop"],
                                    entries[f"{name}_count"]))
        except ValidationError as exc:
            raise ValidationError(f"{entries.where[name + '_count']}: malformed grid: {exc}") from None
    return tuple(axes)


def build(entries: Entries) -> RunConfig:
    """Turn canonical entries into validated domain objects."""
    _require(entries, "omega_m", "gamma_m", "gamma_a0", "gamma_ae")
    params = SystemParams(
        omega_m=entries["omega_m"], gamma_m=entries["gamma_m"],
        gamma_a0=entries["gamma_a0"], gamma_ae=entries["gamma_ae"], g=entries.get("g"),
    )
    mode = entries.get("mode", "effective")
    if mode not in ("effective", "bare"):
        raise ValidationError(f"{entries.where['mode']}: mode must be effective or bare")

    axis_names = set(entries.get("axes", []))
    if "delta" not in entries:
        if "omega_q" in entries:
            entries.set("delta", entries["omega_q"], entries.where["omega_q"])
        elif axis_names & {"delta", "omega_q"}:
            entries.set("delta", params.omega_m, "<default>")
        else:
            _require(entries, "delta")
    eps_p = entries.get("eps_p", 1e-3)
    for a, b in (("eta", "eps_m"), ("phi", "phi_p")):
        if a in entries and b in entries:
            raise ValidationError(f"{entries.where[a]}: {a!r} conflicts with {b!r} at {entries.where[b]}")
    phi_m = entries.get("phi_m", 0.0)
    drive = DriveConfig(
        eps_c=entries.get("eps_c", 1.0),
        eps_p=eps_p,
        phi_p=phi_m + entries["phi"] if "phi" in entries else entries.get("phi_p", 0.0),
        eps_m=entries["eta"] * eps_p if "eta" in entries else entries.get("eps_m", 0.0),
        phi_m=phi_m,
        omega_q=entries.get("omega_q", entries["delta"]),
        delta=entries["delta"],
        Delta=entries.get("Delta", 0.0),
    )

    if mode == "effective":
        _require(entries, "Delta")
        if "G" not in entries and params.g is None:
            raise ValidationError("missing required parameter 'G' (or 'g')")
        ss = steady_state(params, drive, "effective", G=entries.get("G"))
    else:
        _require(entries, "g", "Delta_a")
        ss = steady_state(params, drive, "bare", Delta_a=entries["Delta_a"], branch=entries.get("branch"))
        drive = replace(drive, Delta=ss.Delta)

    report = validate(params, drive)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))

    observables = tuple(entries.get("observables", []))
    for obs in observables:
        if obs not in OBSERVABLES:
            raise ValidationError(f"{entries.where['observables']}: unknown observable {obs!r}")
    return RunConfig(
        params=params, drive=drive, G=ss.G, mode=mode, entries=dict(entries),
        axes=_axes(entries), observables=observables,
        resonant=entries.get("resonant", True),
        delay_method=entries.get("delay_method", "central_difference"),
    )


def entries_from_mapping(mapping: dict, source: str) -> Entries:
    entries = Entries()
    for key, value in mapping.items():
        if key not in KNOWN_KEYS:
            raise ValidationError(f"{source}: unknown key {key!r}")
        entries.set(key, value, source)
    return entries


def load(path: Optional[str | Path], overrides: Iterable[str] = ()) -> RunConfig:
    return build(load_entries(path, overrides))
