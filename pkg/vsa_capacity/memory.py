"""Sequence memory: trajectory association into one superposition vector,
readout by dereferencing with W^-K and winner-take-all or thresholded detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Final, Iterable, Optional, Union

import numpy as np

from .codebook import BindingKind, BindingOperator, Codebook, Scheme
from .exceptions import (
    InvalidConfigError,
    InvalidDimensionError,
    InvalidLookbackError,
    InvalidParameterError,
    ParsingError,
)
from .utils import SeedLike, as_generator, check_probability, logger

EMPTY: Final = -1
REJECT: Final = -1


class ActivationKind(str, Enum):
    LINEAR = "Linear"
    CLIPPED = "ClippedLinear"
    TANH = "Tanh"


@dataclass(frozen=True)
class Activation:
    kind: ActivationKind = ActivationKind.LINEAR
    kappa: Optional[int] = None
    gamma: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ActivationKind(self.kind))
        if self.kind is ActivationKind.CLIPPED:
            if self.kappa is None or int(self.kappa) != self.kappa or self.kappa < 1:
                raise InvalidParameterError(
                    f"[-] Error: kappa must be a positive integer, got {self.kappa!r}"
                )
        elif self.kind is ActivationKind.TANH:
            if self.gamma is None or not self.gamma > 0:
                raise InvalidParameterError(
                    f"[-] Error: gamma must be positive, got {self.gamma!r}"
                )

    @classmethod
    def linear(cls) -> Activation:
        return cls()

    @classmethod
    def clipped(cls, kappa: int) -> Activation:
        return cls(ActivationKind.CLIPPED, kappa=kappa)

    @classmethod
    def tanh(cls, gamma: float) -> Activation:
        return cls(ActivationKind.TANH, gamma=gamma)

    @property
    def bound(self) -> float:
        if self.kind is ActivationKind.CLIPPED:
            return float(self.kappa)  # type:ignore[arg-type]
        if self.kind is ActivationKind.TANH:
            return float(self.gamma)  # type:ignore[arg-type]
        return math.inf

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.kind is ActivationKind.CLIPPED:
            return np.clip(x, -self.kappa, self.kappa)  # type:ignore[operator]
        if self.kind is ActivationKind.TANH:
            gamma = float(self.gamma)  # type:ignore[arg-type]
            return gamma * np.tanh(x / gamma)
        return x


@dataclass(frozen=True)
class NetworkConfig:
    n_dim: int
    activation: Activation = field(default_factory=Activation)
    contraction: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.contraction <= 1.0:
            raise InvalidParameterError(
                f"[-] Error: contraction must lie in (0, 1], got {self.contraction!r}"
            )

    def check(self, codebook: Codebook, binding: BindingOperator) -> None:
        if not codebook.n_dim == binding.n_dim == self.n_dim:
            raise InvalidDimensionError(
                f"[-] Error: N mismatch: config={self.n_dim}, "
                f"codebook={codebook.n_dim}, binding={binding.n_dim}"
            )
        if not math.isclose(binding.contraction, self.contraction):
            raise InvalidConfigError(
                f"[-] Error: binding contraction {binding.contraction} != "
                f"config contraction {self.contraction}"
            )
        if self.activation.kind is ActivationKind.CLIPPED and (
            codebook.scheme is not Scheme.HDC
            or binding.kind is not BindingKind.PERMUTATION
        ):
            raise InvalidConfigError(
                "[-] Error: ClippedLinear needs integer dynamics "
                "(HDC codebook with Permutation binding)"
            )


@dataclass(frozen=True)
class MemoryState:
    x: np.ndarray = field(repr=False, compare=False)
    steps_elapsed: int = 0
    items_stored: int = 0

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=np.float64, copy=True)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        if self.items_stored > self.steps_elapsed:
            raise InvalidParameterError(
                "[-] Error: items_stored cannot exceed steps_elapsed"
            )

    @classmethod
    def zeros(cls, n_dim: int) -> MemoryState:
        return cls(np.zeros(n_dim))

    def to_dict(self) -> dict:
        return {
            "steps_elapsed": self.steps_elapsed,
            "items_stored": self.items_stored,
            "x": self.x.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> MemoryState:
        return cls(
            np.asarray(data["x"], dtype=np.float64),
            int(data["steps_elapsed"]),
            int(data["items_stored"]),
        )


class NoiseKind(str, Enum):
    NONE = "none"
    READOUT = "readout"
    PER_STEP = "per_step"
    BIT_FLIP = "bit_flip"


@dataclass(frozen=True)
class NoiseModel:
    """Noise level is sigma_eta for the Gaussian kinds and p_f for bit flips."""

    kind: NoiseKind = NoiseKind.NONE
    level: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.kind is NoiseKind.BIT_FLIP:
            check_probability(self.level, "p_f", upper=0.5)
        elif self.level < 0:
            raise InvalidParameterError(
                f"[-] Error: sigma must be non-negative, got {self.level!r}"
            )

    @classmethod
    def none(cls) -> NoiseModel:
        return cls()

    @classmethod
    def readout(cls, sigma: float) -> NoiseModel:
        return cls(NoiseKind.READOUT, sigma)

    @classmethod
    def per_step(cls, sigma: float) -> NoiseModel:
        return cls(NoiseKind.PER_STEP, sigma)

    @classmethod
    def bit_flip(cls, p_f: float) -> NoiseModel:
        return cls(NoiseKind.BIT_FLIP, p_f)

    def corrupt_readout(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Readout-time corruption of the state (identity for other kinds)."""
        if self.kind is NoiseKind.READOUT:
            return x + rng.normal(0.0, self.level, size=x.shape)
        if self.kind is NoiseKind.BIT_FLIP:
            return np.where(rng.random(x.shape) < self.level, -x, x)
        return x


SequenceSource = Union[str, Path]


@dataclass(frozen=True)
class InputSequence:
    """Ordered slots, each a token index or EMPTY (-1)."""

    slots: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", tuple(int(s) for s in self.slots))
        if any(s < EMPTY for s in self.slots):
            raise InvalidParameterError("[-] Error: token indices must be >= 0 or EMPTY")

    def __len__(self) -> int:
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    @property
    def length(self) -> int:
        return len(self.slots)

    @property
    def items(self) -> int:
        return sum(s != EMPTY for s in self.slots)

    def at_lookback(self, lookback: int) -> int:
        return self.slots[len(self.slots) - 1 - lookback]

    def check_tokens(self, n_tokens: int) -> None:
        if bad := [s for s in self.slots if s >= n_tokens]:
            raise InvalidParameterError(
                f"[-] Error: tokens {sorted(set(bad))} out of range for D={n_tokens}"
            )

    @classmethod
    def random(
        cls, length: int, n_tokens: int, seed: SeedLike = 0, empty_probability: float = 0.0
    ) -> InputSequence:
        rng = as_generator(seed)
        check_probability(empty_probability, "empty_probability")
        tokens = rng.integers(0, n_tokens, size=length)
        if empty_probability:
            tokens[rng.random(length) < empty_probability] = EMPTY
        return cls(tuple(tokens.tolist()))

    @classmethod
    def parse(cls, lines: Iterable[str]) -> InputSequence:
        slots = []
        for lineno, raw in enumerate(lines, 1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            if text == "-":
                slots.append(EMPTY)
                continue
            try:
                value = int(text)
            except ValueError as e:
                raise ParsingError(
                    f"[-] Error: line {lineno}: expected token id or '-', got {text!r}"
                ) from e
            if value < 0:
                raise ParsingError(f"[-] Error: line {lineno}: negative token id {value}")
            slots.append(value)
        return cls(tuple(slots))

    @classmethod
    def from_text(cls, source: SequenceSource) -> InputSequence:
        """Read one token id per line, ``-`` marks an EMPTY slot."""
        return cls.parse(Path(source).read_text(encoding="utf-8").splitlines())

    def to_text(self) -> str:
        return "".join(("-" if s == EMPTY else str(s)) + "\n" for s in self.slots)


def _check_token(token: int, codebook: Codebook) -> None:
    if token != EMPTY and not 0 <= token < codebook.n_tokens:
        raise InvalidParameterError(
            f"[-] Error: token {token} out of range for D={codebook.n_tokens}"
        )


def step(
    config: NetworkConfig,
    state: MemoryState,
    token: int,
    codebook: Codebook,
    binding: BindingOperator,
    noise: Optional[NoiseModel] = None,
    rng: Optional[np.random.Generator] = None,
) -> MemoryState:
    """One update cycle x <- f(W x + Phi a); EMPTY still applies W and f."""
    config.check(codebook, binding)
    _check_token(token, codebook)
    x = binding.apply(state.x, 1)
    items = state.items_stored
    if token != EMPTY:
        x = x + codebook.columns[:, token]
        items += 1
    if noise is not None and noise.kind is NoiseKind.PER_STEP and noise.level:
        if rng is None:
            raise InvalidParameterError("[-] Error: per-step noise needs an rng")
        x = x + rng.normal(0.0, noise.level, size=x.shape)
    return MemoryState(config.activation(x), state.steps_elapsed + 1, items)


def encode_sequence(
    config: NetworkConfig,
    codebook: Codebook,
    binding: BindingOperator,
    sequence: InputSequence,
    noise: Optional[NoiseModel] = None,
    seed: SeedLike = 0,
    initial: Optional[MemoryState] = None,
) -> MemoryState:
    """Run len(sequence) chained steps from x(0) = 0 (or from `initial`)."""
    config.check(codebook, binding)
    sequence.check_tokens(codebook.n_tokens)
    rng = as_generator(seed)
    state = initial if initial is not None else MemoryState.zeros(config.n_dim)
    for token in sequence:
        state = step(config, state, token, codebook, binding, noise, rng)
    return state


def burn_in_steps(config: NetworkConfig) -> int:
    """Steps needed to reach the filled equilibrium: max(10 tau, 10 kappa^2)."""
    candidates = []
    if config.contraction < 1.0:
        candidates.append(10 * (-1.0 / math.log(config.contraction)))
    if config.activation.kind is not ActivationKind.LINEAR:
        candidates.append(10 * config.activation.bound**2)
    if not candidates:
        raise InvalidConfigError(
            "[-] Error: a linear network with lambda=1 has no filled equilibrium"
        )
    return int(math.ceil(max(candidates)))


def filled_state(
    config: NetworkConfig,
    codebook: Codebook,
    binding: BindingOperator,
    seed: SeedLike = 0,
    steps: Optional[int] = None,
) -> MemoryState:
    """Burn the network in with uniform random tokens until equilibrium."""
    steps = burn_in_steps(config) if steps is None else steps
    logger.debug(f"filled initializer: burn-in of {steps} steps")
    rng = as_generator(seed)
    burn = InputSequence(tuple(rng.integers(0, codebook.n_tokens, size=steps).tolist()))
    return encode_sequence(config, codebook, binding, burn, seed=rng)


def decode_scores(
    codebook: Codebook,
    binding: BindingOperator,
    state: MemoryState,
    lookback: int,
    noise: Optional[NoiseModel] = None,
    rng: SeedLike = None,
) -> np.ndarray:
    """h_d = sim(Phi_d, W^-K x) for every token d."""
    if not 0 <= lookback < state.steps_elapsed:
        raise InvalidLookbackError(
            f"[-] Error: lookback {lookback} outside [0, {state.steps_elapsed})"
        )
    x = state.x
    if noise is not None and noise.kind in (NoiseKind.READOUT, NoiseKind.BIT_FLIP):
        x = noise.corrupt_readout(x, as_generator(rng))
    return codebook.scores(binding.apply(x, -lookback))


def classify(scores: np.ndarray, rng: SeedLike = None) -> int:
    """Winner-take-all; ties are broken uniformly at random."""
    scores = np.asarray(scores)
    if scores.size == 0:
        raise InvalidParameterError("[-] Error: cannot classify an empty score vector")
    winners = np.flatnonzero(scores == scores.max())
    if len(winners) == 1:
        return int(winners[0])
    return int(as_generator(rng).choice(winners))


def detect(scores: np.ndarray, theta: float, rng: SeedLike = None) -> int:
    """Return REJECT when every score is below theta, otherwise classify."""
    if math.isnan(theta):
        raise InvalidParameterError("[-] Error: detection threshold is NaN")
    scores = np.asarray(scores)
    if scores.size and scores.max() < theta:
        return REJECT
    return classify(scores, rng)
