"""Run configuration for the command line and the verification suite."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .gamma_series import Truncation
from .lattice_fan import Fan, FanError


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class Tolerances:
    pairing: float = 1e-6
    pairing_zero: float = 1e-8
    constancy: float = 1e-6
    euler_residue: float = 1e-9
    euler_line: float = 1e-7
    derivative: float = 1e-5
    psi_sum: float = 1e-8
    closed_form: float = 1e-10
    duality: float = 1e-3
    tail: float = 1e-5
    relations: float = 1e-12
    monodromy: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not isinstance(val, (int, float)) or not val > 0:
                raise ConfigError(f"tolerance {f.name} must be positive, got {val!r}")


@dataclass(frozen=True)
class ParameterSpec:
    """Where the parameter point x comes from: explicit, random or basepoint."""

    source: str = "random"
    x: tuple | None = None

    def __post_init__(self):
        if self.source not in ("explicit", "random", "basepoint"):
            raise ConfigError(f"unknown parameter source {self.source!r}")
        if self.source == "explicit" and not self.x:
            raise ConfigError("explicit parameter source needs x")


@dataclass(frozen=True)
class LoopSpec:
    """kind: root_swap | circle (index, center) | small (index, radius)."""

    kind: str
    index: int = 0
    center: complex = 0j
    radius: float = 0.05

    def __post_init__(self):
        if self.kind not in ("root_swap", "circle", "small"):
            raise ConfigError(f"unknown loop kind {self.kind!r}")
        if self.radius <= 0:
            raise ConfigError("loop radius must be positive")


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    rays: tuple[int, ...] = (0, 2)
    parameter: ParameterSpec = field(default_factory=ParameterSpec)
    degree_bound: int = 3
    seed: int = 0
    random_points: int = 5
    paths: int = 3
    path_samples: int = 8
    tolerances: Tolerances = field(default_factory=Tolerances)
    truncation: Truncation = field(default_factory=Truncation)
    loops: tuple[LoopSpec, ...] = ()
    sweep: tuple[int, ...] = ()
    inverse_max_n: int = 12
    output: str | None = None

    def __post_init__(self):
        try:
            Fan(self.n, self.rays)
        except FanError as exc:
            raise ConfigError(str(exc)) from None
        if self.degree_bound < 2:
            raise ConfigError("degree_bound must be at least 2 (the pairing reads degree-2 entries)")
        if self.random_points < 1 or self.paths < 0 or self.path_samples < 2:
            raise ConfigError("random_points >= 1, paths >= 0 and path_samples >= 2 are required")
        if self.parameter.x is not None and len(self.parameter.x) != self.n + 1:
            raise ConfigError(f"x must have n + 1 = {self.n + 1} entries")
        if any(m < 1 for m in self.sweep):
            raise ConfigError("sweep values must be >= 1")
        if self.inverse_max_n < 1:
            raise ConfigError("inverse_max_n must be >= 1")

    @property
    def fan(self) -> Fan:
        return Fan(self.n, self.rays)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        kw = dict(data)
        try:
            if "rays" in kw:
                kw["rays"] = tuple(int(r) for r in kw["rays"])
            elif "n" in kw:
                kw["rays"] = (0, int(kw["n"]))
            if "parameter" in kw:
                kw["parameter"] = _parameter(kw["parameter"])
            if "tolerances" in kw:
                kw["tolerances"] = Tolerances(**kw["tolerances"])
            if "truncation" in kw:
                kw["truncation"] = Truncation(**kw["truncation"])
            if "loops" in kw:
                kw["loops"] = tuple(_loop(spec) for spec in kw["loops"])
            if "sweep" in kw:
                kw["sweep"] = tuple(int(m) for m in kw["sweep"])
            return cls(**kw)
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rays"] = list(self.rays)
        out["loops"] = [{"kind": lp.kind, "index": lp.index, "center": [lp.center.real, lp.center.imag],
                         "radius": lp.radius} for lp in self.loops]
        out["sweep"] = list(self.sweep)
        if self.parameter.x is not None:
            out["parameter"]["x"] = [[z.real, z.imag] for z in self.parameter.x]
        return out


def _complex(val) -> complex:
    if isinstance(val, (list, tuple)):
        re, im = val
        return complex(float(re), float(im))
    return complex(val)


def _parameter(spec) -> ParameterSpec:
    if isinstance(spec, (list, tuple)):
        return ParameterSpec("explicit", tuple(_complex(v) for v in spec))
    if not isinstance(spec, dict):
        raise ConfigError("parameter must be an object or a list of coefficients")
    x = spec.get("x")
    return ParameterSpec(spec.get("source", "explicit" if x else "random"),
                         tuple(_complex(v) for v in x) if x else None)


def _loop(spec) -> LoopSpec:
    if isinstance(spec, str):
        return LoopSpec(spec)
    spec = dict(spec)
    if "center" in spec:
        spec["center"] = _complex(spec["center"])
    return LoopSpec(**spec)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    return RunConfig.from_dict(data)
