"""JSON run configuration.

A config is one JSON object with a section per subcommand plus shared
``seed`` and ``guard`` keys. Sections are only required by the command
that reads them, so one file can drive every subcommand::

    {
      "seed": 42,
      "construction": {"h1": 1, "stages": [{"r": 7}, {"r": 11}, {"r": 13}]},
      "mix": {"j0": 1, "A": [0], "B": [0]},
      "parity": {"lo": 3, "hi": 19999}
    }
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from ergomix.errors import ConfigError
from ergomix.numtheory import is_prime, is_primitive_root, minimal_primitive_root
from ergomix.tower import DEFAULT_GUARD, ConstructionParams, StageSpec


@dataclass(frozen=True)
class ScanConfig:
    lo: int
    hi: int


@dataclass(frozen=True)
class SpacersConfig:
    r: int
    q: int
    H: int
    n_max: int = 200


@dataclass(frozen=True)
class DistConfig:
    H: int
    r: int
    N: int = 2
    tv_max: Optional[float] = None


@dataclass(frozen=True)
class MixConfig:
    j0: int = 1
    A: tuple[int, ...] = (0,)
    B: tuple[int, ...] = (0,)
    m_min: Optional[int] = None
    m_max: Optional[int] = None
    stride: Optional[int] = None
    compare_stochastic: bool = True


@dataclass(frozen=True)
class DensityConfig:
    primes: tuple[int, ...]


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    guard: int = DEFAULT_GUARD
    construction: Optional[ConstructionParams] = None
    primroot: Optional[ScanConfig] = None
    spacers: Optional[SpacersConfig] = None
    dist: Optional[DistConfig] = None
    mix: Optional[MixConfig] = None
    parity: Optional[ScanConfig] = None
    density: Optional[DensityConfig] = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def echo(self) -> dict:
        """Resolved config as plain JSON data."""
        out: dict[str, Any] = {"seed": self.seed, "guard": self.guard}
        for name in ("primroot", "spacers", "dist", "mix", "parity", "density"):
            section = getattr(self, name)
            if section is not None:
                out[name] = _jsonable(asdict(section))
        if self.construction is not None:
            out["construction"] = {
                "h1": self.construction.h1,
                "stages": [_jsonable(asdict(s)) for s in self.construction.stages],
            }
        return out


def _jsonable(d: Any) -> Any:
    if isinstance(d, dict):
        return {k: _jsonable(v) for k, v in d.items()}
    if isinstance(d, (list, tuple)):
        return [_jsonable(v) for v in d]
    return d


_SECTIONS = {"seed", "guard", "construction", "primroot", "spacers", "dist", "mix", "parity", "density"}


def _int(d: dict, key: str, where: str, default: Any = ..., minimum: Optional[int] = None) -> Any:
    if key not in d or d[key] is None:
        if default is ...:
            raise ConfigError(f"{where}.{key}: required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}.{key}: must be >= {minimum}, got {v}")
    return v


def _section(raw: dict, name: str) -> Optional[dict]:
    sec = raw.get(name)
    if sec is None:
        return None
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected an object")
    return sec


def _resolve_q(value: Any, r: int, where: str) -> Optional[int]:
    if value is None or value == "minimal":
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.q: expected an integer or \"minimal\", got {value!r}")
    if not is_primitive_root(value, r):
        raise ConfigError(f"{where}.q: {value} is not a primitive root mod {r}")
    return value


def _prime(d: dict, key: str, where: str) -> int:
    r = _int(d, key, where, minimum=2)
    if r < 3 or not is_prime(r):
        raise ConfigError(f"{where}.{key}: r must be prime (odd), got {r}")
    return r


def _construction(sec: dict, seed: int, guard: int) -> ConstructionParams:
    h1 = _int(sec, "h1", "construction", minimum=0)
    stages_raw = sec.get("stages")
    if not isinstance(stages_raw, list) or not stages_raw:
        raise ConfigError("construction.stages: expected a nonempty list")
    stages = []
    for k, st in enumerate(stages_raw):
        where = f"construction.stages[{k}]"
        if not isinstance(st, dict):
            raise ConfigError(f"{where}: expected an object")
        scheme = st.get("scheme", "algebraic")
        if scheme not in ("algebraic", "stochastic"):
            raise ConfigError(f"{where}.scheme: unknown scheme {scheme!r}")
        if scheme == "algebraic":
            r = _prime(st, "r", where)
            H = _int(st, "H", where, default=r)
            if H < r:
                raise ConfigError(f"{where}.H: algebraic stages need H >= r ({r}), got {H}")
            q = _resolve_q(st.get("q"), r, where)
            if q is None:
                q = minimal_primitive_root(r)
        else:
            r = _int(st, "r", where, minimum=2)
            H = _int(st, "H", where, default=r, minimum=1)
            q = None
        stages.append(StageSpec(r=r, scheme=scheme, H=H, q=q))
    return ConstructionParams(h1=h1, stages=tuple(stages), seed=seed, guard=guard)


def _levels(sec: dict, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
    v = sec.get(key, list(default))
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"mix.{key}: expected a list of level indices")
    return tuple(sorted(set(v)))


def build_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = sorted(set(raw) - _SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    seed = _int(raw, "seed", "config", default=0, minimum=0)
    if seed >= 1 << 64:
        raise ConfigError("config.seed: must fit in 64 bits")
    guard = _int(raw, "guard", "config", default=DEFAULT_GUARD, minimum=1)

    construction = None
    if (sec := _section(raw, "construction")) is not None:
        construction = _construction(sec, seed, guard)

    primroot = None
    if (sec := _section(raw, "primroot")) is not None:
        lo = _int(sec, "lo", "primroot", minimum=3)
        primroot = ScanConfig(lo, _int(sec, "hi", "primroot", minimum=lo))

    spacers = None
    if (sec := _section(raw, "spacers")) is not None:
        r = _prime(sec, "r", "spacers")
        q = _resolve_q(sec.get("q"), r, "spacers")
        H = _int(sec, "H", "spacers", default=r)
        if H < r:
            raise ConfigError(f"spacers.H: must be >= r ({r}), got {H}")
        spacers = SpacersConfig(
            r=r,
            q=minimal_primitive_root(r) if q is None else q,
            H=H,
            n_max=_int(sec, "n_max", "spacers", default=200, minimum=1),
        )

    dist = None
    if (sec := _section(raw, "dist")) is not None:
        H = _int(sec, "H", "dist", minimum=1)
        r = _int(sec, "r", "dist", minimum=4)
        N = _int(sec, "N", "dist", default=2, minimum=1)
        if N > r - 2:
            raise ConfigError(f"dist.N: window must be <= r - 2 ({r - 2}), got {N}")
        tv_max = sec.get("tv_max")
        if tv_max is not None and not isinstance(tv_max, (int, float)):
            raise ConfigError("dist.tv_max: expected a number")
        dist = DistConfig(H=H, r=r, N=N, tv_max=tv_max)

    mix = None
    if (sec := _section(raw, "mix")) is not None:
        mix = MixConfig(
            j0=_int(sec, "j0", "mix", default=1, minimum=1),
            A=_levels(sec, "A", (0,)),
            B=_levels(sec, "B", (0,)),
            m_min=_int(sec, "m_min", "mix", default=None, minimum=0),
            m_max=_int(sec, "m_max", "mix", default=None, minimum=0),
            stride=_int(sec, "stride", "mix", default=None, minimum=1),
            compare_stochastic=bool(sec.get("compare_stochastic", True)),
        )

    parity = None
    if (sec := _section(raw, "parity")) is not None:
        lo = _int(sec, "lo", "parity", minimum=3)
        parity = ScanConfig(lo, _int(sec, "hi", "parity", minimum=lo))

    density = None
    if (sec := _section(raw, "density")) is not None:
        primes = sec.get("primes")
        if not isinstance(primes, list) or not primes:
            raise ConfigError("density.primes: expected a nonempty list")
        for k, p in enumerate(primes):
            if isinstance(p, bool) or not isinstance(p, int) or p < 5 or not is_prime(p):
                raise ConfigError(f"density.primes[{k}]: r must be prime (>= 5), got {p!r}")
        density = DensityConfig(tuple(sorted(set(primes))))

    return RunConfig(
        seed=seed,
        guard=guard,
        construction=construction,
        primroot=primroot,
        spacers=spacers,
        dist=dist,
        mix=mix,
        parity=parity,
        density=density,
        raw=raw,
    )


def _apply_override(raw: dict, item: str) -> None:
    key, sep, value = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {item!r}: expected key=value")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    node = raw
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {item!r}: {p} is not an object")
    node[parts[-1]] = parsed


def parse_config(
    source: Union[str, Path, dict, None] = None,
    overrides: Optional[list[str]] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    """Load a config file (or dict), apply ``key.path=value`` overrides, validate."""
    if source is None:
        raw: dict = {}
    elif isinstance(source, dict):
        raw = json.loads(json.dumps(source))
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    for item in overrides or ():
        if not isinstance(raw, dict):
            break
        _apply_override(raw, item)
    if seed is not None and isinstance(raw, dict):
        raw["seed"] = seed
    return build_config(raw)
