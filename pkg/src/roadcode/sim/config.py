"""Simulation configuration: a flat ``key = value`` text file.

Blank lines and lines starting with ``#`` are ignored.  Every key is a
field of :class:`SimConfig`; unknown keys and out-of-range values raise
:class:`InvalidConfig` naming the offending field.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


class InvalidConfig(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class MonitorSpec:
    id: str
    junction: str
    headings: tuple[str, ...]

    def text(self) -> str:
        return f"{self.id}:{self.junction}:{','.join(self.headings)}"


def parse_monitors(text: str) -> tuple[MonitorSpec, ...]:
    """``m1:A:E,W; m2:B:N,S`` -> monitor specs.  An empty string means no monitors."""
    out = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise InvalidConfig("monitors", f"expected id:junction:headings, got {chunk!r}")
        mid, junction, headings = (p.strip() for p in parts)
        hs = tuple(h.strip().upper() for h in headings.split(",") if h.strip())
        if not mid or not hs or any(h not in "NESW" or len(h) != 1 for h in hs):
            raise InvalidConfig("monitors", f"bad monitor {chunk!r}")
        out.append(MonitorSpec(mid, junction.upper(), hs))
    ids = [m.id for m in out]
    if len(set(ids)) != len(ids):
        raise InvalidConfig("monitors", "duplicate monitor id")
    return tuple(out)


@dataclass(frozen=True)
class SimConfig:
    width: int = 31
    height: int = 31
    light_green_ticks: int = 20
    light_red_ticks: int = 20
    light_start: str = "horizontal"  # which axis is green at tick 0
    spawn_rate: float = 0.05  # per entry point per tick
    pedestrian_rate: float = 0.01  # per crossing point per tick
    ambulance_fraction: float = 0.05
    human_fraction: float = 0.5
    p_runlight: float = 0.02
    p_speed: float = 0.10
    reaction_delay_max: int = 2
    speed_limit: int = 1
    max_speed: int = 2
    safe_gap: int = 5
    sense_range: int = 3
    approach_horizon: int = 8
    cone_depth: int = 6
    monitors: str = "m1:A:E,W;m2:B:N,S"
    seed: int = 42

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.width < 15:
            raise InvalidConfig("width", "must be at least 15")
        if self.height < 9:
            raise InvalidConfig("height", "must be at least 9")
        for name in ("light_green_ticks", "light_red_ticks"):
            if getattr(self, name) < 1:
                raise InvalidConfig(name, "light phases last at least 1 tick")
        if self.light_start not in ("horizontal", "vertical"):
            raise InvalidConfig("light_start", "must be 'horizontal' or 'vertical'")
        for name in ("spawn_rate", "pedestrian_rate", "ambulance_fraction", "human_fraction", "p_runlight", "p_speed"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(name, f"must lie in [0, 1], got {value}")
        if self.reaction_delay_max < 0:
            raise InvalidConfig("reaction_delay_max", "must be >= 0")
        if self.speed_limit < 1:
            raise InvalidConfig("speed_limit", "must be >= 1")
        if self.max_speed < self.speed_limit:
            raise InvalidConfig("max_speed", "must be >= speed_limit")
        for name in ("safe_gap", "sense_range", "approach_horizon", "cone_depth"):
            if getattr(self, name) < 1:
                raise InvalidConfig(name, "must be >= 1")
        parse_monitors(self.monitors)

    @property
    def monitor_specs(self) -> tuple[MonitorSpec, ...]:
        return parse_monitors(self.monitors)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.as_dict().items())

    @classmethod
    def from_text(cls, text: str, **overrides) -> "SimConfig":
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values: dict = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfig(f"line {n}", f"expected key = value, got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise InvalidConfig(key, "unknown setting")
            values[key] = _convert(key, types[key], value)
        values.update(overrides)
        return cls(**values)


def _convert(key: str, kind: str, value: str):
    try:
        if kind == "int":
            return int(value, 0)
        if kind == "float":
            return float(value)
    except ValueError:
        raise InvalidConfig(key, f"expected {kind}, got {value!r}") from None
    return value


def load_config(path: str | Path | None = None, **overrides) -> SimConfig:
    if path is None:
        return SimConfig(**overrides)
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig("config", f"cannot read {p}: {exc.strerror}") from None
    return SimConfig.from_text(text, **overrides)


__all__ = ["InvalidConfig", "MonitorSpec", "SimConfig", "load_config", "parse_monitors"]
