"""YAML run configuration with a strict schema.

Every block is optional; an omitted block or key takes the reference
(aluminium conductor, scenario 1) value.  Unknown blocks or keys are
rejected, with the line number where they appear.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .environment import ScenarioConfig
from .physics import MaterialParams
from .simulator import MeshSpec, RunConfig, get_param, param_block
from .stochastic import MAX_TENSOR_DIMS, RandomParam


class ConfigError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


@dataclass(frozen=True)
class ParamSpec:
    name: str
    half_width_fraction: float = 0.10
    mean: Optional[float] = None  # defaults to the deterministic value in the config


@dataclass(frozen=True)
class StochasticSpec:
    mode: str = "PCM"
    params: Tuple[ParamSpec, ...] = ()
    n_per_dim: int = 5
    mc_samples: int = 1000
    seed: int = 0
    workers: Optional[int] = None


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    snapshot_every: int = 500
    formats: Tuple[str, ...] = ("csv", "json")


@dataclass(frozen=True)
class ConfigFile:
    run: RunConfig = RunConfig()
    stochastic: Optional[StochasticSpec] = None
    output: OutputSpec = OutputSpec()
    sha256: str = field(default="", compare=False)

    def random_params(self) -> List[RandomParam]:
        if self.stochastic is None:
            raise ConfigError("no stochastic block in config")
        out = []
        for p in self.stochastic.params:
            mean = get_param(self.run, p.name) if p.mean is None else p.mean
            out.append(RandomParam(p.name, float(mean), p.half_width_fraction))
        return out


_LOAD_TOP = ("H0", "pressure")
_SCHEMA = {
    "mesh": [f.name for f in fields(MeshSpec)],
    "material": [f.name for f in fields(MaterialParams)],
    "load": list(_LOAD_TOP) + ["theta_b", "theta_A", "w_b", "w_A", "I_b", "I_A"],
    "scenario": ["id", "w_max", "I_r", "theta_r"],
    "run": ["dt", "n_steps", "theta_lim"],
    "stochastic": ["mode", "params", "n_per_dim", "mc_samples", "seed", "workers"],
    "output": ["directory", "snapshot_every", "formats"],
}
_INT_KEYS = {"n_elements", "id", "n_steps", "n_per_dim", "mc_samples", "seed", "workers", "snapshot_every"}
_FORMATS = ("csv", "json")


def _line_map(text: str) -> Dict[Tuple[str, ...], int]:
    """Map (block,) and (block, key) paths to 1-based source lines."""
    lines: Dict[Tuple[str, ...], int] = {}
    node = yaml.compose(text, Loader=yaml.SafeLoader)
    if not isinstance(node, yaml.MappingNode):
        return lines
    for k, v in node.value:
        lines[(k.value,)] = k.start_mark.line + 1
        if isinstance(v, yaml.MappingNode):
            for kk, _ in v.value:
                lines[(k.value, kk.value)] = kk.start_mark.line + 1
    return lines


def _number(value, key: str, line: Optional[int], integer: bool = False):
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}", line)
    try:
        if integer:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        kind = "an integer" if integer else "a number"
        raise ConfigError(f"{key}: expected {kind}, got {value!r}", line) from None


def parse_config(text: str) -> ConfigFile:
    try:
        data = yaml.safe_load(text)
        lines = _line_map(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"YAML syntax error: {exc.problem}", line) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level of the config must be a mapping")

    for block, body in data.items():
        if block not in _SCHEMA:
            raise ConfigError(f"unknown block {block!r} (allowed: {', '.join(_SCHEMA)})", lines.get((block,)))
        if body is None:
            data[block] = body = {}
        if not isinstance(body, dict):
            raise ConfigError(f"block {block!r} must be a mapping", lines.get((block,)))
        for key in body:
            if key not in _SCHEMA[block]:
                raise ConfigError(
                    f"unknown key {block}.{key} (allowed: {', '.join(_SCHEMA[block])})", lines.get((block, key))
                )

    def get(block, key, default):
        body = data.get(block) or {}
        if key not in body:
            return default
        line = lines.get((block, key))
        if key in ("mode", "directory", "params", "formats") or (key == "workers" and body[key] is None):
            return body[key]
        return _number(body[key], f"{block}.{key}", line, integer=key in _INT_KEYS)

    def build(block, default):
        return replace(default, **{k: get(block, k, getattr(default, k)) for k in (data.get(block) or {})})

    try:
        mesh = build("mesh", MeshSpec())
        material = build("material", MaterialParams())
        sid = get("scenario", "id", 1)
        load_kw = {k: get("load", k, None) for k in _SCHEMA["load"] if k not in _LOAD_TOP and k in (data.get("load") or {})}
        load_kw.update({k: get("scenario", k, None) for k in ("w_max", "I_r", "theta_r") if k in (data.get("scenario") or {})})
        scenario = ScenarioConfig.preset(sid, dt=get("run", "dt", 0.01), **load_kw)
        output = OutputSpec(
            directory=str(get("output", "directory", "out")),
            snapshot_every=get("output", "snapshot_every", 500),
            formats=_formats(get("output", "formats", list(_FORMATS)), lines.get(("output", "formats"))),
        )
        run = RunConfig(
            mesh=mesh,
            material=material,
            scenario=scenario,
            H0=get("load", "H0", 40e3),
            pressure=get("load", "pressure", 1.0),
            n_steps=get("run", "n_steps", 4000),
            theta_lim=get("run", "theta_lim", 373.0),
            snapshot_every=output.snapshot_every,
        )
        stochastic = _stochastic(data["stochastic"], lines, get) if "stochastic" in data else None
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    # validate the named parameters before anything runs
    if stochastic is not None:
        for p in stochastic.params:
            try:
                param_block(p.name)
            except KeyError:
                raise ConfigError(f"stochastic.params: unknown parameter {p.name!r}", lines.get(("stochastic", "params"))) from None
    return ConfigFile(run=run, stochastic=stochastic, output=output)


def _formats(value, line) -> Tuple[str, ...]:
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, (list, tuple)) or any(v not in _FORMATS for v in value):
        raise ConfigError(f"output.formats must be a list drawn from {_FORMATS}, got {value!r}", line)
    return tuple(value)


def _stochastic(body, lines, get) -> StochasticSpec:
    mode = str(get("stochastic", "mode", "PCM")).upper()
    if mode not in ("PCM", "MC"):
        raise ConfigError(f"stochastic.mode must be PCM or MC, got {mode!r}", lines.get(("stochastic", "mode")))
    line = lines.get(("stochastic", "params"))
    raw = get("stochastic", "params", [])
    if not isinstance(raw, list) or not raw:
        raise ConfigError("stochastic.params must be a non-empty list", line)
    params = []
    for item in raw:
        if isinstance(item, str):
            item = {"name": item}
        if not isinstance(item, dict) or "name" not in item:
            raise ConfigError(f"stochastic.params entries need a name, got {item!r}", line)
        extra = set(item) - {"name", "half_width_fraction", "mean"}
        if extra:
            raise ConfigError(f"stochastic.params: unknown key(s) {sorted(extra)}", line)
        params.append(
            ParamSpec(
                name=str(item["name"]),
                half_width_fraction=_number(item.get("half_width_fraction", 0.10), "half_width_fraction", line),
                mean=None if item.get("mean") is None else _number(item["mean"], "mean", line),
            )
        )
    if any(p.name == "n_elements" for p in params):
        raise ConfigError("stochastic.params: n_elements is a discretization choice, not a random input", line)
    if len({p.name for p in params}) != len(params):
        raise ConfigError("stochastic.params: duplicate parameter names", line)
    workers = get("stochastic", "workers", None)
    spec = StochasticSpec(
        mode=mode,
        params=tuple(params),
        n_per_dim=get("stochastic", "n_per_dim", 5),
        mc_samples=get("stochastic", "mc_samples", 1000),
        seed=get("stochastic", "seed", 0),
        workers=workers,
    )
    if mode == "PCM" and len(params) > MAX_TENSOR_DIMS:
        raise ConfigError(
            f"{len(params)} random parameters exceed the full tensor-grid limit of {MAX_TENSOR_DIMS}; "
            "reduce the parameter set (a sensitivity study on subsets can rank them first)",
            line,
        )
    if not 1 <= spec.n_per_dim <= 100:
        raise ConfigError("stochastic.n_per_dim must be in [1, 100]", lines.get(("stochastic", "n_per_dim")))
    if spec.mc_samples < 1:
        raise ConfigError("stochastic.mc_samples must be >= 1", lines.get(("stochastic", "mc_samples")))
    return spec


def to_dict(cfg: ConfigFile) -> Dict[str, Any]:
    """Fully resolved config as plain data; parsing it again gives the same config."""
    r = cfg.run
    loads = r.scenario.loads
    out: Dict[str, Any] = {
        "mesh": asdict(r.mesh),
        "material": asdict(r.material),
        "load": {"H0": r.H0, "pressure": r.pressure, **{k: getattr(loads, k) for k in _SCHEMA["load"][2:]}},
        "scenario": {"id": r.scenario.id, "w_max": loads.w_max, "I_r": loads.I_r, "theta_r": loads.theta_r},
        "run": {"dt": r.dt, "n_steps": r.n_steps, "theta_lim": r.theta_lim},
        "output": {
            "directory": cfg.output.directory,
            "snapshot_every": cfg.output.snapshot_every,
            "formats": list(cfg.output.formats),
        },
    }
    if cfg.stochastic is not None:
        s = cfg.stochastic
        out["stochastic"] = {
            "mode": s.mode,
            "params": [
                {"name": p.name, "half_width_fraction": p.half_width_fraction, **({} if p.mean is None else {"mean": p.mean})}
                for p in s.params
            ],
            "n_per_dim": s.n_per_dim,
            "mc_samples": s.mc_samples,
            "seed": s.seed,
            "workers": s.workers,
        }
    return out


def dump_config(cfg: ConfigFile) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False)


def load_config(path) -> ConfigFile:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config is not valid UTF-8: {exc}") from None
    cfg = parse_config(text)
    return replace(cfg, sha256=hashlib.sha256(raw).hexdigest())
