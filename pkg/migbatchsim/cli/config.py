'''
Scenario and sweep files.

A scenario is one YAML document validated by the pydantic models below.
Relative file paths resolve against the directory of the YAML file, so a
loaded ScenarioConfig only carries absolute paths and dumps back to a file
that loads into an equal config from anywhere.
'''

import copy
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..engine.events import SimTime, seconds_to_us
from ..metrics.cost import DEFAULT_ELECTRICITY_PRICE, DEFAULT_LIFETIME_YEARS, PriceModel
from ..preproc.cpu_pool import CpuPoolSpec
from ..preproc.dpu import DEFAULT_TRANSFER_OVERHEAD_US, CuSpec, DpuSpec, FunctionalUnitSpec
from ..preproc.latency import LatencyModel
from ..tuning.curves import DEFAULT_DELTA
from ..tuning.mig import MIG_SHAPES, MigConfig, VGpuShape, parse_mig_notation
from ..tuning.policy import DEFAULT_BUCKET_WIDTH_S
from ..utils.errors import ConfigError
from ..workload.histogram import load_length_histogram
from ..workload.traffic import ConstantAudio, FixedImage, TrafficSpec, VariableAudio


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


## Traffic ---------------------------------------------------------------------------------------------------------

class ImageInput(Section):
    kind: Literal["image"] = "image"


class ConstantAudioInput(Section):
    kind: Literal["audio_constant"]
    length_s: float = Field(default=2.5, gt=0)


class HistogramAudioInput(Section):
    kind: Literal["audio"]
    histogram: Path


InputSection = Annotated[Union[ImageInput, ConstantAudioInput, HistogramAudioInput], Field(discriminator="kind")]


class TrafficSection(Section):
    rate_lambda: float = Field(gt=0)
    input: InputSection = ImageInput()


## MIG -------------------------------------------------------------------------------------------------------------

class MigSection(Section):
    shape: str = "1g.5gb"
    vgpus: int = Field(default=7, ge=1, le=7)
    active: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _from_notation(cls, data: Any) -> Any:
        if isinstance(data, str):
            mig = parse_mig_notation(data)
            return {"shape": mig.shape.notation, "vgpus": mig.vgpu_count}
        return data

    @model_validator(mode="after")
    def _check_topology(self) -> "MigSection":
        if self.shape not in MIG_SHAPES:
            raise ValueError(f"unknown MIG shape {self.shape!r}; known: {list(MIG_SHAPES)}")
        MigConfig(vgpu_count=self.vgpus, shape=VGpuShape.from_notation(self.shape))
        if self.active is not None and self.active > self.vgpus:
            raise ValueError(f"active servers ({self.active}) exceed vgpus ({self.vgpus})")
        return self

    def to_mig_config(self) -> MigConfig:
        """The vGPUs that actually serve: `active` of them when set."""
        return MigConfig(vgpu_count=self.active or self.vgpus, shape=VGpuShape.from_notation(self.shape))


## Preprocessing ---------------------------------------------------------------------------------------------------

class LatencyLaw(Section):
    base_us: float = Field(ge=0)
    per_second_us: float = Field(default=0.0, ge=0)
    exponent: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _positive(self):
        if self.base_us + self.per_second_us <= 0:
            raise ValueError("latency law must give a positive latency")
        return self

    def to_model(self) -> LatencyModel:
        return LatencyModel(base_us=self.base_us, per_second_us=self.per_second_us, exponent=self.exponent)


class UnitSection(LatencyLaw):
    name: str


class CpuSection(Section):
    workers: int = Field(ge=1)
    efficiency_cap: float = Field(default=1.0, gt=0, le=1)
    service: LatencyLaw

    def to_spec(self) -> CpuPoolSpec:
        return CpuPoolSpec(workers=self.workers, service_time=self.service.to_model(),
                           efficiency_cap=self.efficiency_cap)


class CuSection(Section):
    name: str
    count: int = Field(default=1, ge=1)
    pipelined: bool = True
    units: List[UnitSection] = Field(min_length=1)

    def to_spec(self) -> CuSpec:
        return CuSpec(units=tuple(FunctionalUnitSpec(u.name, u.to_model()) for u in self.units),
                      pipelined=self.pipelined, name=self.name)


class DpuSection(Section):
    transfer_overhead_us: int = Field(default=DEFAULT_TRANSFER_OVERHEAD_US, ge=0)
    cus: List[CuSection] = Field(min_length=1)

    def to_spec(self) -> DpuSpec:
        return DpuSpec(cu_instances=tuple((cu.to_spec(), cu.count) for cu in self.cus),
                       transfer_overhead=self.transfer_overhead_us)


class IdealSection(Section):
    pass


class PreprocSection(Section):
    cpu: Optional[CpuSection] = None
    dpu: Optional[DpuSection] = None
    ideal: Optional[IdealSection] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        chosen = [name for name in ("cpu", "dpu", "ideal") if getattr(self, name) is not None]
        if len(chosen) != 1:
            raise ValueError(f"exactly one of cpu, dpu, ideal must be set, got {chosen or 'none'}")
        return self

    @property
    def backend(self) -> str:
        return next(name for name in ("cpu", "dpu", "ideal") if getattr(self, name) is not None)


## Model, policy, run ----------------------------------------------------------------------------------------------

class ModelSection(Section):
    profile: Path
    name: Optional[str] = None


class PolicySection(Section):
    mode: Literal["auto", "static", "explicit"] = "auto"
    bucket_width_s: float = Field(default=DEFAULT_BUCKET_WIDTH_S, gt=0)
    delta: float = Field(default=DEFAULT_DELTA, gt=0, lt=1)
    batch_sizes: Optional[List[int]] = None
    batch_max: Optional[List[int]] = None
    time_queue_us: Optional[int] = Field(default=None, gt=0)

    @field_validator("batch_sizes")
    @classmethod
    def _ascending(cls, value):
        if value is not None:
            if len(value) == 0 or value[0] < 1 or any(b <= a for a, b in zip(value, value[1:])):
                raise ValueError("batch_sizes must be non-empty, >= 1 and strictly ascending")
        return value

    @model_validator(mode="after")
    def _mode_fields(self):
        if self.mode == "explicit" and (self.batch_max is None or self.time_queue_us is None):
            raise ValueError("explicit policy needs batch_max and time_queue_us")
        if self.mode == "auto" and (self.batch_max is not None or self.time_queue_us is not None):
            raise ValueError("auto policy derives batch_max and time_queue_us; remove them or use mode: explicit")
        if self.mode == "static" and self.batch_max is not None and len(self.batch_max) != 1:
            raise ValueError("static policy takes a single batch_max")
        if self.batch_max is not None and any(b < 1 for b in self.batch_max):
            raise ValueError("batch_max must be >= 1")
        return self


class SimSection(Section):
    duration_s: float = Field(default=10.0, gt=0)
    seed: int = Field(default=0, ge=0)
    warmup_fraction: float = Field(default=0.1, ge=0, lt=1)
    check_invariants: bool = False

    @property
    def duration_us(self) -> SimTime:
        return seconds_to_us(self.duration_s)


class CostSection(Section):
    capex_usd: Dict[str, float] = Field(default_factory=dict)
    power_w: Dict[str, float] = Field(default_factory=dict)
    lifetime_years: float = Field(default=DEFAULT_LIFETIME_YEARS, gt=0)
    electricity_usd_per_kwh: float = Field(default=DEFAULT_ELECTRICITY_PRICE, ge=0)

    @field_validator("capex_usd", "power_w")
    @classmethod
    def _non_negative(cls, value):
        if any(v < 0 for v in value.values()):
            raise ValueError("component costs must be non-negative")
        return value

    def to_price_model(self, backend: str) -> PriceModel:
        """Sum the per-component constants; the DPU only counts when it is the preprocessing backend."""
        def total(parts):
            return sum(v for k, v in parts.items() if k != "dpu" or backend == "dpu")
        return PriceModel(capex_usd=total(self.capex_usd), power_w=total(self.power_w),
                          lifetime_years=self.lifetime_years,
                          electricity_usd_per_kwh=self.electricity_usd_per_kwh)


class OutputsSection(Section):
    dir: Path = Path("outputs")
    run_name: Optional[str] = None
    trace: bool = False
    dispatch_trace: bool = False
    event_trace: bool = False
    use_wandb: bool = False
    wandb_project: str = "migbatchsim"


## Scenario --------------------------------------------------------------------------------------------------------

class ScenarioConfig(Section):
    traffic: TrafficSection
    mig: MigSection = MigSection()
    preproc: PreprocSection
    model: ModelSection
    policy: PolicySection = PolicySection()
    sim: SimSection = SimSection()
    cost: Optional[CostSection] = None
    outputs: OutputsSection = OutputsSection()

    @model_validator(mode="after")
    def _dpu_layout(self):
        if self.preproc.dpu is not None:
            try:
                self.preproc.dpu.to_spec().check_layout(self.modality)
            except ValueError as e:
                raise ValueError(f"preproc.dpu: {e}")
        return self

    @property
    def modality(self) -> str:
        return "vision" if self.traffic.input.kind == "image" else "audio"

    def traffic_spec(self) -> TrafficSpec:
        source = self.traffic.input
        if source.kind == "audio":
            kind = VariableAudio(load_length_histogram(source.histogram))
        elif source.kind == "audio_constant":
            kind = ConstantAudio(source.length_s)
        else:
            kind = FixedImage()
        return TrafficSpec(rate_lambda=self.traffic.rate_lambda, duration=self.sim.duration_us,
                           seed=self.sim.seed, input_kind=kind)

    def price_model(self) -> Optional[PriceModel]:
        return None if self.cost is None else self.cost.to_price_model(self.preproc.backend)

    def resolve_paths(self, base_dir: Path) -> "ScenarioConfig":
        data = self.model_dump()
        data["model"]["profile"] = _resolve(base_dir, data["model"]["profile"])
        if data["traffic"]["input"].get("kind") == "audio":
            data["traffic"]["input"]["histogram"] = _resolve(base_dir, data["traffic"]["input"]["histogram"])
        return ScenarioConfig.model_validate(data)

    def check_files(self) -> None:
        missing = []
        if not self.model.profile.is_file():
            missing.append(("model.profile", self.model.profile))
        if self.traffic.input.kind == "audio" and not self.traffic.input.histogram.is_file():
            missing.append(("traffic.input.histogram", self.traffic.input.histogram))
        if missing:
            raise ConfigError("; ".join(f"{field}: file not found: {path}" for field, path in missing),
                              [field for field, _ in missing])

    def with_value(self, dotted: str, value: Any) -> "ScenarioConfig":
        """Copy with one field replaced, e.g. with_value('traffic.rate_lambda', 500)."""
        data = copy.deepcopy(self.model_dump())
        node = data
        keys = dotted.split(".")
        for key in keys[:-1]:
            node = node[key]
        node[keys[-1]] = value
        return validate_scenario(data)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json", exclude_none=True), sort_keys=False)


def _resolve(base_dir: Path, path: Union[str, Path]) -> Path:
    path = Path(path).expanduser()
    return path if path.is_absolute() else (base_dir / path).resolve()


def _format_errors(error: ValidationError, prefix: str = "") -> ConfigError:
    paths, lines = [], []
    for item in error.errors():
        path = ".".join(str(part) for part in (prefix, *item["loc"]) if part != "")
        paths.append(path or "<root>")
        lines.append(f"{path or '<root>'}: {item['msg']}")
    return ConfigError("invalid configuration:\n  " + "\n  ".join(lines), paths)


def validate_scenario(data: Any) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise _format_errors(e)


def _read_yaml(path: Path) -> Any:
    try:
        with open(path) as f:
            return yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: not valid YAML ({e})")


def load_scenario(path: Union[str, Path], check_files: bool = True) -> ScenarioConfig:
    """
    Read, validate and path-resolve a scenario file.

    Raises:
        ConfigError: On schema violations (message lists every failing field
                     path) or missing referenced files
    """
    path = Path(path)
    config = validate_scenario(_read_yaml(path)).resolve_paths(path.parent.resolve())
    if check_files:
        config.check_files()
    return config


## Sweeps ----------------------------------------------------------------------------------------------------------

SWEEP_AXES = ("rate_lambda", "active_servers", "batch_size", "mig_shape", "seed")

_AXIS_FIELDS = {
    "rate_lambda": "traffic.rate_lambda",
    "active_servers": "mig.active",
    "seed": "sim.seed",
}


class SweepAxis(Section):
    name: Literal["rate_lambda", "active_servers", "batch_size", "mig_shape", "seed"]
    values: List[Union[int, float, str]] = Field(min_length=1)


class SweepSpec(Section):
    base: ScenarioConfig
    axes: List[SweepAxis] = Field(min_length=1, max_length=2)
    parallel: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _distinct_axes(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"sweep axes must be distinct, got {names}")
        return self

    def apply(self, point: Dict[str, Any]) -> ScenarioConfig:
        """Scenario for one grid point; batch_size does not change the scenario."""
        config = self.base
        for name, value in point.items():
            if name in _AXIS_FIELDS:
                config = config.with_value(_AXIS_FIELDS[name], value)
            elif name == "mig_shape":
                mig = parse_mig_notation(str(value))
                data = copy.deepcopy(config.model_dump())
                data["mig"] = {"shape": mig.shape.notation, "vgpus": mig.vgpu_count,
                               "active": data["mig"].get("active")}
                config = validate_scenario(data)
        return config


def load_sweep(path: Union[str, Path]) -> SweepSpec:
    """
    A sweep file names its base scenario (`base: scenario.yaml`, relative to
    the sweep file) or inlines it (`scenario: {...}`), plus one or two axes.
    """
    path = Path(path)
    raw = _read_yaml(path)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: a sweep file must be a mapping", ["<root>"])
    raw = dict(raw)
    base_dir = path.parent.resolve()
    if "base" in raw and "scenario" in raw:
        raise ConfigError("sweep: set either base or scenario, not both", ["base", "scenario"])
    if "base" in raw:
        base = load_scenario(_resolve(base_dir, raw.pop("base")))
    elif "scenario" in raw:
        base = validate_scenario(raw.pop("scenario")).resolve_paths(base_dir)
        base.check_files()
    else:
        raise ConfigError("sweep: missing base scenario", ["base"])
    try:
        return SweepSpec.model_validate({**raw, "base": base})
    except ValidationError as e:
        raise _format_errors(e)

