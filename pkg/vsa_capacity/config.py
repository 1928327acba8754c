from __future__ import annotations

import itertools
import json
from pathlib import Path
from typing import (
    Annotated,
    Any,
    Dict,
    List,
    Literal,
    Mapping,
    Optional,
    Type,
    TypedDict,
    TypeVar,
    Union,
    get_type_hints,
)

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from .codebook import BindingKind, Scheme
from .exceptions import (
    ConfigError,
    InvalidConfigError,
    InvalidParameterError,
    ParsingError,
    VSAError,
)
from .memory import Activation, ActivationKind, NetworkConfig, NoiseKind, NoiseModel
from .utils import SectionlessConfigParser, logger


class SettingsDict(TypedDict):
    beta: Annotated[float, "exponent of the Chang bound on erfc"]
    resolution: Annotated[int, "quadrature bins for the accuracy integral"]
    window: Annotated[float, "half-width of the quadrature window in SD"]
    squash_bins: Annotated[int, "n, the tracker has 2n+1 bins"]
    fixed_point_tol: float
    fixed_point_max_iter: int
    snr_floor: Annotated[float, "tail sums stop once s drops below this"]
    tail_cap: Annotated[int, "hard cap on lookbacks summed in a tail"]


class Settings:
    beta = 1.08
    resolution = 2000
    window = 8.0
    squash_bins = 400
    fixed_point_tol = 1e-10
    fixed_point_max_iter = 10**6
    snr_floor = 1e-3
    tail_cap = 10**6

    @classmethod
    def create(cls, **overrides: Any) -> SettingsDict:
        expected = get_type_hints(SettingsDict)
        if unknown := set(overrides) - set(expected):
            raise ConfigError(f"Invalid settings: {unknown=} (expected: {sorted(expected)})")
        values = {name: getattr(cls, name) for name in expected}
        for name, value in overrides.items():
            try:
                values[name] = expected[name](value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"[-] Error: setting {name}={value!r}: {e}") from e
        if values["resolution"] < 2 or values["squash_bins"] < 1 or values["window"] <= 0:
            raise ConfigError(f"[-] Error: invalid settings {overrides}")
        return values  # type:ignore[return-value]


SettingsOverrides = Dict[str, float]


def resolve_settings(settings: Optional[Mapping[str, Any]] = None) -> SettingsDict:
    """Defaults merged with `settings`, a partial mapping of SettingsDict keys."""
    return Settings.create(**(settings or {}))


class _Model(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class _Tunable(_Model):
    """Models that feed the analytic side carry their own Settings overrides."""

    settings: SettingsOverrides = Field(default_factory=dict)

    @field_validator("settings")
    @classmethod
    def _check_settings(cls, value: SettingsOverrides) -> SettingsOverrides:
        resolve_settings(value)
        return value


class ExperimentSpec(_Tunable):
    """One Monte-Carlo configuration: every trial draws a sequence, encodes
    it and decodes at each lookback of `lookbacks` (K=0 is the newest item).
    """

    scheme: Scheme = Scheme.HDC
    binding: BindingKind = BindingKind.PERMUTATION
    n_dim: int = Field(1000, ge=2)
    n_tokens: int = Field(27, ge=2)
    activation: ActivationKind = ActivationKind.LINEAR
    contraction: float = 1.0
    kappa: Optional[int] = None
    gamma: Optional[float] = None
    length: int = 10
    filled: bool = False
    lookbacks: tuple[int, ...] = (0,)
    noise: NoiseKind = NoiseKind.NONE
    noise_level: float = 0.0
    input_sparsity: float = 0.0
    code_sparsity: float = 0.0
    threshold: Optional[float] = None
    trials: int = 1000
    seed: int = Field(0, ge=0)
    shared_codebook: bool = False
    chunk_size: int = Field(250, ge=1)
    squash_bins: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check(self) -> ExperimentSpec:
        if self.trials < 1:
            raise InvalidParameterError(f"[-] Error: trials must be >= 1, got {self.trials}")
        if not self.lookbacks or min(self.lookbacks) < 0:
            raise InvalidParameterError("[-] Error: lookbacks must be non-empty and >= 0")
        if not self.filled and self.length < 1:
            raise InvalidParameterError(f"[-] Error: length must be >= 1, got {self.length}")
        if not self.filled and max(self.lookbacks) >= self.length:
            raise InvalidParameterError(
                f"[-] Error: lookback {max(self.lookbacks)} >= length {self.length}"
            )
        for name in ("input_sparsity", "code_sparsity"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidParameterError(f"[-] Error: {name} must lie in [0, 1]")
        if self.noise is NoiseKind.BIT_FLIP and self.scheme is not Scheme.HDC:
            raise InvalidConfigError("[-] Error: bit-flip noise runs only with HDC codebooks")
        if self.filled and self.contraction == 1.0 and self.activation is ActivationKind.LINEAR:
            raise InvalidConfigError(
                "[-] Error: a filled run needs lambda < 1 or a saturating activation"
            )
        # construct the module-level objects so their own checks run
        self.network_config()
        self.noise_model()
        return self

    def activation_model(self) -> Activation:
        return Activation(self.activation, kappa=self.kappa, gamma=self.gamma)

    def network_config(self) -> NetworkConfig:
        return NetworkConfig(self.n_dim, self.activation_model(), self.contraction)

    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.noise, self.noise_level)

    def replace(self, **changes: Any) -> ExperimentSpec:
        return type(self).model_validate({**self.model_dump(), **changes})


class SweepConfig(_Model):
    """A base spec and a grid; points enumerate the grid in key order with
    the last key varying fastest."""

    base: ExperimentSpec = Field(default_factory=ExperimentSpec)
    grid: Dict[str, List[Any]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> SweepConfig:
        fields = set(ExperimentSpec.model_fields)
        if unknown := set(self.grid) - fields:
            raise InvalidParameterError(f"[-] Error: unknown grid fields {sorted(unknown)}")
        if any(not values for values in self.grid.values()):
            raise InvalidParameterError("[-] Error: grid axes must be non-empty")
        return self

    def points(self) -> list[ExperimentSpec]:
        keys = list(self.grid)
        return [
            self.base.replace(**dict(zip(keys, combo)))
            for combo in itertools.product(*(self.grid[k] for k in keys))
        ]


TheoryVariant = Literal[
    "snr",
    "LinearLargeM",
    "LinearExact",
    "DecayFinite",
    "DecayFilled",
    "ReadoutNoise",
    "PerStepNoise",
    "BitFlip",
]


class TheoryRequest(_Tunable):
    """Analytic curve request. `variant="snr"` evaluates the accuracy for the
    listed SNR values directly; other variants build the SNR first."""

    variant: TheoryVariant = "snr"
    snr: List[float] = Field(default_factory=list)
    n_tokens: List[int] = Field(default_factory=lambda: [27])
    n_dim: List[int] = Field(default_factory=lambda: [1000])
    length: List[int] = Field(default_factory=lambda: [1])
    contraction: List[float] = Field(default_factory=lambda: [0.99])
    lookback: List[float] = Field(default_factory=lambda: [0.0])
    noise_level: List[float] = Field(default_factory=lambda: [0.0])
    variance_ratio: float = 0.0
    threshold: Optional[float] = None
    resolution: Optional[int] = Field(None, ge=2)
    window: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check(self) -> TheoryRequest:
        if self.variant == "snr" and not self.snr:
            raise InvalidParameterError("[-] Error: variant 'snr' needs a non-empty snr list")
        return self


class OptimizeRequest(_Tunable):
    objective: Literal["M", "lambda", "kappa", "gamma"] = "M"
    n_dim: int = Field(1000, ge=1)
    n_tokens: int = Field(27, ge=2)
    grid: List[float] = Field(default_factory=list)
    length: Optional[int] = Field(None, ge=1)
    squash_bins: Optional[int] = Field(None, ge=1)


ModelT = TypeVar("ModelT", bound=BaseModel)
ConfigSource = Union[str, Path]


def _coerce(value: str) -> Any:
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def read_raw_config(path: ConfigSource) -> dict:
    """Read a JSON object, or a sectionless ``key = value`` .conf file."""
    path = Path(path)
    try:
        if path.suffix in (".conf", ".ini", ".cfg"):
            flat = SectionlessConfigParser().read_flat(path)
            return {k: _coerce(v) for k, v in flat.items()}
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, ParsingError) as e:
        logger.exception(e)
        raise ConfigError(str(e)) from e
    if not isinstance(data, dict):
        raise ConfigError(f"[-] Error: {path} must hold a JSON object")
    return data


def load_config(path: ConfigSource, model: Type[ModelT], **overrides: Any) -> ModelT:
    data = read_raw_config(path)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(data, model)


def parse_config(data: dict, model: Type[ModelT]) -> ModelT:
    try:
        parsed = model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"[-] Error: invalid {model.__name__}: {e}") from e
    except VSAError as e:
        raise ConfigError(str(e)) from e
    if overrides := getattr(parsed, "settings", None):
        logger.debug(f"{model.__name__} settings: {resolve_settings(overrides)}")
    return parsed
