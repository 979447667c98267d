"""Run configuration: strict JSON parsing, validation with field-path
diagnostics, deterministic default fill, and round-trippable serialization.

Unknown keys are errors (with a suggestion when one is obvious); every
validation failure names the offending field path, e.g. "geometry.a".
"""

from __future__ import annotations

import difflib
import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace

from .errors import ConfigError

EXPERIMENT_KINDS = ("transit", "reflect", "sweep", "model-compare")
SWEEP_AXES = ("p", "ell", "a")
MODEL_KINDS = ("hard", "step", "smooth")
FORMATS = ("csv", "json")

# Desk-scale default run: p=1 (lambda ~ 6.28), a=10, ell=50, sigma_x=8,
# sigma_y=12. The box is sized so the packet center keeps 4 sigma from every
# wall and the barrier-reflected lobe never reaches the upstream wall within
# the run.
DEFAULTS = {
    "grid": {"nx": 1344, "ny": 384, "dx": 0.25, "dy": 0.25, "x0": -176.0, "y0": -48.0},
    "packet": {"xc": -60.0, "yc": 0.0, "sx": 8.0, "sy": 12.0, "k0": 1.0},
    "geometry": {"x_in": -25.0, "ell": 50.0, "a": 10.0, "y_center": 0.0},
    "model": {"kind": "hard"},
    "stepper": {"sample_stride": 8},
    "experiment": {"kind": "transit"},
    "output": {"dir": "out", "formats": ["csv", "json"]},
}

# Barrier height for soft models, as a multiple of the nominal packet energy.
# Chosen so wall penetration ~1/sqrt(2 v0) shifts the effective channel width
# by well under a grid spacing; see geometry.BarrierModel.
V0_DEFAULT_ENERGY_FACTOR = 800.0

_ALIASES = {
    "length": "ell",
    "lenght": "ell",
    "l": "ell",
    "width": "a",
    "sigma_x": "sx",
    "sigma_y": "sy",
    "p": "k0",
    "timestep": "dt",
    "steps": "n_steps",
    "stride": "sample_stride",
}


@dataclass(frozen=True)
class GridConfig:
    nx: int
    ny: int
    dx: float
    dy: float
    x0: float
    y0: float


@dataclass(frozen=True)
class PacketConfig:
    xc: float
    yc: float
    sx: float
    sy: float
    k0: float


@dataclass(frozen=True)
class GeometryConfig:
    x_in: float
    ell: float
    a: float
    y_center: float


@dataclass(frozen=True)
class ModelConfig:
    kind: str
    v0: float | None = None
    w: float | None = None


@dataclass(frozen=True)
class CapConfig:
    width: float
    strength: float


@dataclass(frozen=True)
class StepperSection:
    dt: float
    sample_stride: int
    n_steps: int | None = None  # None = auto-estimated by the experiment
    cap: CapConfig | None = None


@dataclass(frozen=True)
class ExperimentSection:
    kind: str
    axis: str | None = None
    values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class OutputSection:
    dir: str
    formats: tuple[str, ...]


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig
    packet: PacketConfig
    geometry: GeometryConfig
    model: ModelConfig
    stepper: StepperSection
    experiment: ExperimentSection
    output: OutputSection

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in list(d["model"]):
            if d["model"][k] is None:
                del d["model"][k]
        if d["stepper"]["cap"] is None:
            del d["stepper"]["cap"]
        if d["stepper"]["n_steps"] is None:
            del d["stepper"]["n_steps"]
        for k in list(d["experiment"]):
            if d["experiment"][k] is None:
                del d["experiment"][k]
        if d["experiment"].get("values") is not None:
            d["experiment"]["values"] = list(d["experiment"]["values"])
        d["output"]["formats"] = list(d["output"]["formats"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(cfg.to_json().encode()).hexdigest()


def _suggest(key: str, known) -> str:
    alias = _ALIASES.get(key.lower())
    if alias in known:
        return f"; did you mean {alias!r}?"
    close = difflib.get_close_matches(key, list(known), n=1, cutoff=0.55)
    if close:
        return f"; did you mean {close[0]!r}?"
    return ""


def _check_unknown(section: dict, known, path: str):
    for key in section:
        if key not in known:
            raise ConfigError(f"unknown key {key!r}{_suggest(key, known)}", path=f"{path}.{key}" if path else key)


def _number(section: dict, key: str, path: str, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError("missing required field", path=f"{path}.{key}")
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", path=f"{path}.{key}")
    return float(v)


def _integer(section: dict, key: str, path: str, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError("missing required field", path=f"{path}.{key}")
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"expected an integer, got {v!r}", path=f"{path}.{key}")
    return int(v)


def _positive(value, path: str):
    if value is not None and not value > 0:
        raise ConfigError(f"must be positive, got {value}", path=path)
    return value


def _section(raw: dict, name: str) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"expected an object, got {sec!r}", path=name)
    return dict(sec)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration; fill defaults.

    The returned config may still carry n_steps=None ("auto"); experiments
    materialize it deterministically, and emitted result manifests echo the
    fully resolved configuration.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    _check_unknown(raw, ("grid", "packet", "geometry", "model", "stepper", "experiment", "output"), "")

    g = _section(raw, "grid")
    _check_unknown(g, ("nx", "ny", "dx", "dy", "x0", "y0"), "grid")
    gd = DEFAULTS["grid"]
    grid = GridConfig(
        nx=_integer(g, "nx", "grid", gd["nx"]),
        ny=_integer(g, "ny", "grid", gd["ny"]),
        dx=_number(g, "dx", "grid", gd["dx"]),
        dy=_number(g, "dy", "grid", gd["dy"]),
        x0=_number(g, "x0", "grid", gd["x0"]),
        y0=_number(g, "y0", "grid", gd["y0"]),
    )
    for key in ("nx", "ny"):
        if getattr(grid, key) < 8:
            raise ConfigError(f"must be >= 8, got {getattr(grid, key)}", path=f"grid.{key}")
    _positive(grid.dx, "grid.dx")
    _positive(grid.dy, "grid.dy")

    p = _section(raw, "packet")
    _check_unknown(p, ("xc", "yc", "sx", "sy", "k0"), "packet")
    pd = DEFAULTS["packet"]
    packet = PacketConfig(
        xc=_number(p, "xc", "packet", pd["xc"]),
        yc=_number(p, "yc", "packet", pd["yc"]),
        sx=_positive(_number(p, "sx", "packet", pd["sx"]), "packet.sx"),
        sy=_positive(_number(p, "sy", "packet", pd["sy"]), "packet.sy"),
        k0=_number(p, "k0", "packet", pd["k0"]),
    )

    ge = _section(raw, "geometry")
    _check_unknown(ge, ("x_in", "ell", "a", "y_center"), "geometry")
    ged = DEFAULTS["geometry"]
    geometry = GeometryConfig(
        x_in=_number(ge, "x_in", "geometry", ged["x_in"]),
        ell=_positive(_number(ge, "ell", "geometry", ged["ell"]), "geometry.ell"),
        a=_number(ge, "a", "geometry", ged["a"]),
        y_center=_number(ge, "y_center", "geometry", ged["y_center"]),
    )
    if geometry.a < 0:
        raise ConfigError(f"must be >= 0 (0 closes the channel), got {geometry.a}", path="geometry.a")

    m = _section(raw, "model")
    _check_unknown(m, ("kind", "v0", "w"), "model")
    kind = m.get("kind", DEFAULTS["model"]["kind"])
    if kind not in MODEL_KINDS:
        raise ConfigError(f"must be one of {MODEL_KINDS}, got {kind!r}", path="model.kind")
    v0 = _positive(_number(m, "v0", "model"), "model.v0")
    w = _positive(_number(m, "w", "model"), "model.w")
    if kind in ("step", "smooth") and v0 is None:
        v0 = V0_DEFAULT_ENERGY_FACTOR * 0.5 * packet.k0 ** 2
    if kind == "smooth" and w is None:
        w = 2.0 * max(grid.dx, grid.dy)
    if kind == "hard":
        v0 = None
        w = None
    model = ModelConfig(kind=kind, v0=v0, w=w)

    s = _section(raw, "stepper")
    _check_unknown(s, ("dt", "n_steps", "sample_stride", "cap"), "stepper")
    dt = _positive(_number(s, "dt", "stepper", 0.25 * min(grid.dx, grid.dy) ** 2), "stepper.dt")
    stride = _integer(s, "sample_stride", "stepper", DEFAULTS["stepper"]["sample_stride"])
    _positive(stride, "stepper.sample_stride")
    n_steps = s.get("n_steps")
    if n_steps is not None:
        if n_steps == "auto":
            n_steps = None
        else:
            n_steps = _integer(s, "n_steps", "stepper")
            _positive(n_steps, "stepper.n_steps")
            if n_steps % stride != 0:
                raise ConfigError(
                    f"must be a multiple of sample_stride={stride}, got {n_steps}",
                    path="stepper.n_steps",
                )
    cap = None
    if "cap" in s:
        c = s["cap"]
        if c is not None:
            if not isinstance(c, dict):
                raise ConfigError(f"expected an object, got {c!r}", path="stepper.cap")
            _check_unknown(c, ("width", "strength"), "stepper.cap")
            cap = CapConfig(
                width=_positive(_number(c, "width", "stepper.cap", required=True), "stepper.cap.width"),
                strength=_positive(_number(c, "strength", "stepper.cap", required=True), "stepper.cap.strength"),
            )
    stepper = StepperSection(dt=dt, sample_stride=stride, n_steps=n_steps, cap=cap)

    e = _section(raw, "experiment")
    _check_unknown(e, ("kind", "axis", "values"), "experiment")
    ekind = e.get("kind", DEFAULTS["experiment"]["kind"])
    if ekind not in EXPERIMENT_KINDS:
        raise ConfigError(f"must be one of {EXPERIMENT_KINDS}, got {ekind!r}", path="experiment.kind")
    axis = e.get("axis")
    values = e.get("values")
    if ekind == "sweep":
        if axis not in SWEEP_AXES:
            raise ConfigError(f"sweep needs axis in {SWEEP_AXES}, got {axis!r}", path="experiment.axis")
        if not isinstance(values, list) or len(values) < 2:
            raise ConfigError("sweep needs a list of at least 2 values", path="experiment.values")
        for k, v in enumerate(values):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"sweep values must be positive numbers, got {v!r}", path=f"experiment.values[{k}]")
        values = tuple(float(v) for v in values)
    else:
        if axis is not None or values is not None:
            raise ConfigError("axis/values only apply to sweep runs", path="experiment.axis")
    experiment = ExperimentSection(kind=ekind, axis=axis, values=values)

    o = _section(raw, "output")
    _check_unknown(o, ("dir", "formats"), "output")
    outdir = o.get("dir", DEFAULTS["output"]["dir"])
    if not isinstance(outdir, str) or not outdir:
        raise ConfigError(f"expected a non-empty string, got {outdir!r}", path="output.dir")
    formats = o.get("formats", DEFAULTS["output"]["formats"])
    if not isinstance(formats, list) or not formats:
        raise ConfigError("expected a non-empty list", path="output.formats")
    for f in formats:
        if f not in FORMATS:
            raise ConfigError(f"must be one of {FORMATS}, got {f!r}", path="output.formats")
    output = OutputSection(dir=outdir, formats=tuple(formats))

    cfg = RunConfig(grid, packet, geometry, model, stepper, experiment, output)
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: RunConfig):
    g, ge = cfg.grid, cfg.geometry
    x_lo, x_hi = g.x0, g.x0 + (g.nx - 1) * g.dx
    if not (x_lo + 2 * g.dx <= ge.x_in and ge.x_in + ge.ell <= x_hi - 2 * g.dx):
        raise ConfigError(
            f"slab [{ge.x_in}, {ge.x_in + ge.ell}] must sit two spacings inside the grid x extent",
            path="geometry.x_in",
        )
    if cfg.model.kind == "smooth" and cfg.model.w < 2 * max(g.dx, g.dy):
        raise ConfigError(
            f"must be >= 2*max(dx,dy) = {2 * max(g.dx, g.dy)}, got {cfg.model.w}",
            path="model.w",
        )
    if cfg.experiment.kind == "sweep" and cfg.experiment.axis == "a":
        for k, a in enumerate(cfg.experiment.values):
            half = a / 2
            if not (g.y0 < ge.y_center - half and ge.y_center + half < g.y0 + (g.ny - 1) * g.dy):
                raise ConfigError(f"sweep width {a} does not fit the grid y extent", path=f"experiment.values[{k}]")


def default_config(kind: str = "transit", **overrides) -> RunConfig:
    """The documented desk-scale defaults, as a parsed RunConfig."""
    raw = {"experiment": {"kind": kind}}
    raw.update(overrides)
    return parse_config(json.dumps(raw))


def with_resolved_steps(cfg: RunConfig, n_steps: int) -> RunConfig:
    return replace(cfg, stepper=replace(cfg.stepper, n_steps=int(n_steps)))


def reflection_defaults() -> dict:
    """Reference configuration for the solid-wall reflection run: a finer,
    smaller box (the momentum-operator discretization bias (k dx)^2/6 must
    stay well under the 1% budget tolerance)."""
    return {
        "grid": {"nx": 2048, "ny": 64, "dx": 0.0625, "dy": 0.0625, "x0": -112.0, "y0": -2.0},
        "packet": {"xc": -48.0, "yc": 0.0, "sx": 8.0, "sy": 0.5, "k0": 1.0},
        "geometry": {"x_in": 0.0, "ell": 4.0, "a": 0.0, "y_center": 0.0},
        "model": {"kind": "hard"},
        "stepper": {"dt": 0.005, "sample_stride": 10},
        "experiment": {"kind": "reflect"},
    }


def validate_nsteps_stride(n_steps: int, stride: int):
    if n_steps % stride != 0:
        raise ConfigError(f"n_steps={n_steps} not a multiple of sample_stride={stride}", path="stepper.n_steps")


def estimate_growth(sigma: float, t: float) -> float:
    """Free-packet width growth factor sigma(t)/sigma(0)."""
    return math.sqrt(1.0 + (t / (2.0 * sigma * sigma)) ** 2)
