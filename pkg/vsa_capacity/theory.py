"""Analytic retrieval accuracy and channel capacity.

Scores are standardized so that a distractor score is N(0, 1) and the hit
score is N(s, hit_scale^2); s is the signal-to-noise ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache, singledispatch
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize, special, stats

from .config import resolve_settings
from .exceptions import InvalidParameterError, UndefinedSNRError
from .memory import Activation, ActivationKind, NetworkConfig
from .tracker import (
    DistributionTracker,
    MomentCurve,
    StepKind,
    TrackerMode,
    hit_scale,
    moment_curve,
    nonlinear_snr,
    signal_moments,
    tracker_init,
    tracker_moments,
    tracker_step,
)
from .utils import check_probability, logger

ArrayLike = Union[float, Sequence[float], np.ndarray]

LN2 = math.log(2.0)
TRUNCATION_TOL = 1e-6


# -- signal-to-noise ratio -------------------------------------------------


@dataclass(frozen=True)
class LinearLargeM:
    n_dim: int
    length: int


@dataclass(frozen=True)
class LinearExact:
    n_dim: int
    length: int
    variance_ratio: float = 0.0


@dataclass(frozen=True)
class DecayFinite:
    n_dim: int
    length: int
    contraction: float
    lookback: float


@dataclass(frozen=True)
class DecayFilled:
    n_dim: int
    contraction: float
    lookback: float


@dataclass(frozen=True)
class ReadoutNoise:
    n_dim: int
    length: int
    sigma: float


@dataclass(frozen=True)
class PerStepNoise:
    n_dim: int
    length: int
    sigma: float


@dataclass(frozen=True)
class BitFlip:
    n_dim: int
    length: int
    p_f: float


@dataclass(frozen=True)
class NonlinearTracked:
    """Clipped or tanh network; `length=None` is the filled start and
    `lookback` counts from 1."""

    config: NetworkConfig
    length: Optional[int]
    lookback: int
    n_bins: Optional[int] = None
    settings: Optional[Mapping[str, Any]] = field(default=None, compare=False)


SnrScenario = Union[
    LinearLargeM,
    LinearExact,
    DecayFinite,
    DecayFilled,
    ReadoutNoise,
    PerStepNoise,
    BitFlip,
    NonlinearTracked,
]


def _check_length(length: int) -> None:
    if length == 0:
        raise UndefinedSNRError("[-] Error: SNR is undefined for M=0 stored items")
    if length < 0:
        raise InvalidParameterError(f"[-] Error: M must be positive, got {length}")


def _check_decay(contraction: float) -> None:
    if not 0.0 < contraction <= 1.0:
        raise InvalidParameterError(
            f"[-] Error: contraction must lie in (0, 1], got {contraction!r}"
        )


def _check_sigma(sigma: float) -> None:
    if sigma < 0:
        raise InvalidParameterError(f"[-] Error: sigma must be non-negative, got {sigma!r}")


@singledispatch
def snr(scenario) -> float:
    raise InvalidParameterError(f"[-] Error: unknown SNR scenario {scenario!r}")


@snr.register(LinearLargeM)
def _(scenario: LinearLargeM) -> float:
    _check_length(scenario.length)
    return math.sqrt(scenario.n_dim / scenario.length)


@snr.register(LinearExact)
def _(scenario: LinearExact) -> float:
    _check_length(scenario.length)
    if scenario.variance_ratio < 0:
        raise InvalidParameterError("[-] Error: variance ratio must be non-negative")
    denom = scenario.length - 1 + scenario.variance_ratio
    return math.inf if denom == 0 else math.sqrt(scenario.n_dim / denom)


@snr.register(DecayFinite)
def _(scenario: DecayFinite) -> float:
    _check_length(scenario.length)
    _check_decay(scenario.contraction)
    lam, m = scenario.contraction, scenario.length
    if lam == 1.0:
        return math.sqrt(scenario.n_dim / m)
    log_lam = math.log(lam)
    # (1 - lam^2) / (1 - lam^2M) without cancellation near lam = 1
    ratio = math.expm1(2 * log_lam) / math.expm1(2 * m * log_lam)
    return lam**scenario.lookback * math.sqrt(scenario.n_dim * ratio)


@snr.register(DecayFilled)
def _(scenario: DecayFilled) -> float:
    _check_decay(scenario.contraction)
    lam = scenario.contraction
    return lam**scenario.lookback * math.sqrt(scenario.n_dim * -math.expm1(2 * math.log(lam)))


@snr.register(ReadoutNoise)
def _(scenario: ReadoutNoise) -> float:
    _check_length(scenario.length)
    _check_sigma(scenario.sigma)
    return math.sqrt(scenario.n_dim / (scenario.length + scenario.sigma**2))


@snr.register(PerStepNoise)
def _(scenario: PerStepNoise) -> float:
    _check_length(scenario.length)
    _check_sigma(scenario.sigma)
    return math.sqrt(scenario.n_dim / (scenario.length * (1 + scenario.sigma**2)))


@snr.register(BitFlip)
def _(scenario: BitFlip) -> float:
    _check_length(scenario.length)
    p = check_probability(scenario.p_f, "p_f", upper=0.5)
    return math.sqrt(scenario.n_dim * (1 - 2 * p) ** 2 / (scenario.length + 2 * p))


@snr.register(NonlinearTracked)
def _(scenario: NonlinearTracked) -> float:
    return nonlinear_snr(
        scenario.config, scenario.length, scenario.lookback, scenario.n_bins, scenario.settings
    )


# -- accuracy --------------------------------------------------------------


def _as_output(values: np.ndarray, scalar: bool) -> Union[float, np.ndarray]:
    return float(values[0]) if scalar else values


def accuracy_numeric(
    s: ArrayLike,
    n_tokens: int,
    theta: Optional[float] = None,
    hit_scale: float = 1.0,
    resolution: Optional[int] = None,
    window: Optional[float] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> Union[float, np.ndarray]:
    """Probability that the hit beats all D-1 distractors (and theta).

    Integrates phi(u) Phi(hit_scale u + s)^(D-1) over the hit deviation u on
    ``[-window, window]`` with `resolution` Simpson intervals; detection
    starts the integral where the hit score reaches theta. Explicit
    `resolution` and `window` win over `settings`.
    """
    if n_tokens < 1:
        raise InvalidParameterError(f"[-] Error: D must be >= 1, got {n_tokens}")
    if hit_scale < 0:
        raise InvalidParameterError("[-] Error: hit_scale must be non-negative")
    cfg = resolve_settings(settings)
    resolution = cfg["resolution"] if resolution is None else int(resolution)
    window = cfg["window"] if window is None else float(window)
    scalar = np.ndim(s) == 0
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
    distractors = float(n_tokens - 1)
    if hit_scale == 0:
        out = np.exp(distractors * special.log_ndtr(s_arr))
        if theta is not None:
            out = np.where(s_arr >= theta, out, 0.0)
        return _as_output(np.clip(out, 0.0, 1.0), scalar)
    if theta is None:
        lower = np.full_like(s_arr, -window)
    else:
        with np.errstate(invalid="ignore"):
            lower = np.clip((theta - s_arr) / hit_scale, -window, window)
        lower = np.where(np.isnan(lower), -window, lower)
    _check_truncation(s_arr, lower, window, hit_scale, distractors)
    t = np.linspace(0.0, 1.0, resolution + 1)
    out = np.empty_like(s_arr)
    for start in range(0, len(s_arr), 256):
        rows = slice(start, start + 256)
        width = window - lower[rows]
        u = lower[rows, None] + width[:, None] * t[None, :]
        log_cdf = special.log_ndtr(hit_scale * u + s_arr[rows, None])
        f = stats.norm.pdf(u) * np.exp(distractors * log_cdf)
        out[rows] = integrate.simpson(f, dx=1.0 / resolution, axis=-1) * width
    return _as_output(np.clip(out, 0.0, 1.0), scalar)


def _check_truncation(
    s: np.ndarray, lower: np.ndarray, window: float, hit_scale: float, distractors: float
) -> None:
    # bound on the integrand mass outside [lower, window]
    upper = float(stats.norm.sf(window))
    low_tail = np.exp(distractors * special.log_ndtr(s - hit_scale * window))
    below = float(np.max(np.where(lower <= -window, stats.norm.cdf(-window) * low_tail, 0.0)))
    if upper + below > TRUNCATION_TOL:
        logger.warning(
            f"accuracy quadrature window {window} drops up to {upper + below:.2e} "
            "of probability mass"
        )


def accuracy_closed_d2(s: ArrayLike) -> Union[float, np.ndarray]:
    """Phi(s / sqrt(2)), the exact D=2 accuracy."""
    value = 0.5 * special.erfc(-np.asarray(s, dtype=np.float64) / 2.0)
    return float(value) if np.ndim(value) == 0 else value


class ApproxMethod(str, Enum):
    FA = "FA"
    FA_CR = "FA_CR"
    FA_CR_LEE = "FA_CR_LEE"
    CHANG = "Chang"
    FA_CHANG = "FA_Chang"
    PLATE = "Plate"


def chang_alpha(
    beta: Optional[float] = None, settings: Optional[Mapping[str, Any]] = None
) -> float:
    beta = resolve_settings(settings)["beta"] if beta is None else beta
    return math.sqrt(2 * math.e / math.pi) * math.sqrt(beta - 1) / beta


def accuracy_approx(
    s: ArrayLike,
    n_tokens: int,
    method: ApproxMethod | str,
    beta: Optional[float] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> Union[float, np.ndarray]:
    """High-fidelity approximations of the accuracy integral.

    FA factorizes the joint distractor CDF, CR replaces erfc by its
    Chernoff-Rubin bound, LEE keeps the first term of the binomial
    expansion. Chang swaps the CR bound for alpha exp(-beta x^2).
    """
    method = ApproxMethod(method)
    beta = resolve_settings(settings)["beta"] if beta is None else beta
    s_arr = np.asarray(s, dtype=np.float64)
    d1 = n_tokens - 1
    tail = np.exp(-(s_arr**2) / 4)
    if method is ApproxMethod.FA:
        value = special.ndtr(s_arr / math.sqrt(2)) ** d1
    elif method is ApproxMethod.FA_CR:
        value = (1 - 0.5 * tail) ** d1
    elif method is ApproxMethod.FA_CR_LEE:
        value = 1 - 0.5 * d1 * tail
    elif method is ApproxMethod.CHANG:
        value = 1 - 0.5 * d1 * chang_alpha(beta) * np.exp(-beta * s_arr**2 / 4)
    elif method is ApproxMethod.FA_CHANG:
        value = (1 - 0.5 * chang_alpha(beta) * np.exp(-beta * s_arr**2 / 4)) ** d1
    else:
        value = 1 - n_tokens * np.exp(-(s_arr**2) / 8)
    value = np.clip(value, 0.0, 1.0)
    return float(value) if np.ndim(value) == 0 else value


def required_snr_squared(
    n_tokens: int,
    epsilon: float,
    method: ApproxMethod | str,
    beta: Optional[float] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> float:
    """s^2 needed for error rate epsilon."""
    method = ApproxMethod(method)
    if not 0.0 < epsilon < 1.0:
        raise InvalidParameterError(f"[-] Error: epsilon must lie in (0, 1), got {epsilon!r}")
    if n_tokens < 2:
        raise InvalidParameterError(f"[-] Error: D must be >= 2, got {n_tokens}")
    beta = resolve_settings(settings)["beta"] if beta is None else beta
    if method is ApproxMethod.FA_CR_LEE:
        return 4 * (math.log(n_tokens - 1) - math.log(2 * epsilon))
    if method is ApproxMethod.CHANG:
        return (4 / beta) * (
            math.log(n_tokens - 1) - math.log(2 * epsilon) + math.log(chang_alpha(beta))
        )
    if method is ApproxMethod.PLATE:
        return 8 * math.log(n_tokens / epsilon)
    raise InvalidParameterError(f"[-] Error: no closed-form s^2 for {method.value}")


def snr_for_accuracy(
    p_corr: float,
    n_tokens: int,
    theta: Optional[float] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> float:
    """Invert accuracy_numeric in s by bracketing root search."""
    if not 0.0 <= p_corr < 1.0:
        raise InvalidParameterError(f"[-] Error: target accuracy must lie in [0, 1), got {p_corr}")
    if p_corr <= 1.0 / n_tokens and theta is None:
        return 0.0

    def gap(s: float) -> float:
        return float(accuracy_numeric(s, n_tokens, theta, settings=settings)) - p_corr

    if gap(0.0) >= 0:
        return 0.0
    high = 1.0
    while gap(high) < 0:
        high *= 2
        if high > 1e4:
            raise InvalidParameterError("[-] Error: target accuracy is not reachable")
    return float(optimize.brentq(gap, 0.0, high, xtol=1e-12))


@lru_cache(maxsize=32)
def _accuracy_grid(
    n_tokens: int, points: int, resolution: int, window: float
) -> tuple[np.ndarray, np.ndarray]:
    s_max = 2 * math.sqrt(2 * math.log(max(n_tokens, 2))) + 14
    grid = np.linspace(0.0, s_max, points)
    values = np.asarray(accuracy_numeric(grid, n_tokens, resolution=resolution, window=window))
    values.setflags(write=False)
    return grid, values


def accuracy_table(
    s: ArrayLike,
    n_tokens: int,
    points: int = 4001,
    settings: Optional[Mapping[str, Any]] = None,
) -> np.ndarray:
    """Interpolated accuracy_numeric; cached per D, for long capacity sweeps."""
    cfg = resolve_settings(settings)
    grid, values = _accuracy_grid(n_tokens, points, cfg["resolution"], cfg["window"])
    s_arr = np.asarray(s, dtype=np.float64)
    return np.interp(s_arr, grid, values, left=1.0 / n_tokens, right=1.0)


# -- information -----------------------------------------------------------


def item_info(p_corr: ArrayLike, n_tokens: int) -> Union[float, np.ndarray]:
    """Mutual information (bits) of one retrieved token with accuracy p_corr."""
    p = np.clip(np.asarray(p_corr, dtype=np.float64), 0.0, 1.0)
    d = float(n_tokens)
    bits = (special.xlogy(p, p * d) + special.xlogy(1 - p, (1 - p) * d / (d - 1))) / LN2
    bits = np.maximum(bits, 0.0)
    return float(bits) if np.ndim(bits) == 0 else bits


def total_info(p_corr: ArrayLike, n_tokens: int, count: Optional[int] = None) -> float:
    """Sum of item_info over lookbacks; a scalar p with `count` is the
    constant-accuracy shortcut count * I_item."""
    if count is not None:
        return count * float(item_info(float(p_corr), n_tokens))  # type:ignore[arg-type]
    return float(np.sum(item_info(np.atleast_1d(p_corr), n_tokens)))


@dataclass(frozen=True)
class CapacityResult:
    objective: str
    n_dim: int
    n_tokens: int
    grid: tuple[float, ...]
    values: tuple[float, ...] = field(repr=False)
    argmax: float
    p_corr: np.ndarray = field(repr=False, compare=False)
    i_item: np.ndarray = field(repr=False, compare=False)

    @property
    def i_total(self) -> float:
        return float(np.sum(self.i_item))

    @property
    def i_per_neuron(self) -> float:
        return self.i_total / self.n_dim

    def rows(self) -> list[dict]:
        return [
            {
                "objective": self.objective,
                "N": self.n_dim,
                "D": self.n_tokens,
                "value": value,
                "I_per_neuron": info,
                "argmax": value == self.argmax,
            }
            for value, info in zip(self.grid, self.values)
        ]


def _decay_snr_curve(
    n_dim: int, contraction: float, length: Optional[int], cfg: Mapping[str, Any]
) -> np.ndarray:
    if length is not None:
        k = np.arange(length)
        return np.array([snr(DecayFinite(n_dim, length, contraction, 0))]) * contraction**k
    s0 = snr(DecayFilled(n_dim, contraction, 0))
    if s0 <= cfg["snr_floor"]:
        return np.array([s0])
    horizon = math.log(s0 / cfg["snr_floor"]) / -math.log(contraction)
    k = np.arange(min(int(math.ceil(horizon)) + 1, cfg["tail_cap"]))
    return s0 * contraction**k


def retrieval_curve(
    objective: str,
    value: float,
    n_dim: int,
    n_tokens: int,
    length: Optional[int] = None,
    n_bins: Optional[int] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(p_corr, I_item) for every retrievable lookback at one grid point."""
    cfg = resolve_settings(settings)
    if objective == "M":
        m = int(value)
        p = np.full(m, accuracy_table(snr(LinearLargeM(n_dim, m)), n_tokens, settings=cfg))
    elif objective == "lambda":
        p = accuracy_table(_decay_snr_curve(n_dim, value, length, cfg), n_tokens, settings=cfg)
    elif objective in ("kappa", "gamma"):
        activation = (
            Activation.clipped(int(value)) if objective == "kappa" else Activation.tanh(value)
        )
        curve = moment_curve(
            NetworkConfig(n_dim, activation), length, n_bins=n_bins, settings=cfg
        )
        p = accuracy_table(curve.snr, n_tokens, settings=cfg)
    else:
        raise InvalidParameterError(f"[-] Error: unknown objective {objective!r}")
    return p, np.asarray(item_info(p, n_tokens))


def capacity_search(
    objective: str,
    n_dim: int,
    n_tokens: int,
    grid: Sequence[float],
    length: Optional[int] = None,
    n_bins: Optional[int] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> CapacityResult:
    """Exhaustive grid search of I_total / N over M, lambda, kappa or gamma.

    For lambda, kappa and gamma, `length=None` evaluates the filled network
    (information summed over all lookbacks); otherwise M = length items.
    """
    if not len(grid):
        raise InvalidParameterError("[-] Error: capacity_search needs a non-empty grid")
    best: Optional[tuple[float, np.ndarray, np.ndarray]] = None
    values = []
    for value in grid:
        p, info = retrieval_curve(objective, value, n_dim, n_tokens, length, n_bins, settings)
        per_neuron = float(np.sum(info)) / n_dim
        values.append(per_neuron)
        if best is None or per_neuron > max(values[:-1]):
            best = (value, p, info)
        logger.debug(f"capacity {objective}={value}: {per_neuron:.4f} bits/neuron")
    assert best is not None
    return CapacityResult(
        objective,
        n_dim,
        n_tokens,
        tuple(float(v) for v in grid),
        tuple(values),
        float(best[0]),
        best[1],
        best[2],
    )


def optimal_dimension(
    tau: float,
    n_tokens: int,
    grid: Sequence[int],
    settings: Optional[Mapping[str, Any]] = None,
) -> CapacityResult:
    """N maximizing bits per neuron of a filled decay buffer with time constant tau."""
    if not len(grid):
        raise InvalidParameterError("[-] Error: optimal_dimension needs a non-empty grid")
    contraction = math.exp(-1.0 / tau)
    results = [
        retrieval_curve("lambda", contraction, int(n), n_tokens, settings=settings) for n in grid
    ]
    values = [float(np.sum(info)) / n for n, (_, info) in zip(grid, results)]
    index = int(np.argmax(values))
    return CapacityResult(
        "N",
        int(grid[index]),
        n_tokens,
        tuple(float(n) for n in grid),
        tuple(values),
        float(grid[index]),
        results[index][0],
        results[index][1],
    )


# -- M = 1 collisions ------------------------------------------------------


def _collision_pmf(n_dim: int, n_tokens: int, colliders: str) -> tuple[np.ndarray, np.ndarray]:
    if colliders not in ("others", "all"):
        raise InvalidParameterError("[-] Error: colliders must be 'others' or 'all'")
    trials = n_tokens - 1 if colliders == "others" else n_tokens
    if trials <= 0:
        return np.zeros(1), np.ones(1)
    rate = trials * 2.0**-n_dim
    top = int(min(trials, math.ceil(rate + 12 * math.sqrt(rate) + 30)))
    c = np.arange(top + 1)
    if n_dim <= 30:
        pmf = stats.binom.pmf(c, trials, 2.0**-n_dim)
    else:
        pmf = stats.poisson.pmf(c, rate)
    return c.astype(np.float64), pmf


def collision_accuracy(n_dim: int, n_tokens: int, colliders: str = "others") -> float:
    """Accuracy of a single stored bipolar token: identical codewords tie and
    ties are broken uniformly. `colliders="all"` counts D potential colliders
    instead of the D-1 other tokens."""
    c, pmf = _collision_pmf(n_dim, n_tokens, colliders)
    return float(np.sum(pmf / (c + 1)))


def collision_info(
    n_dim: int, n_tokens: int, colliders: str = "others", formula: str = "group"
) -> tuple[float, float]:
    """(bits, bits per neuron) retrieved from a single stored token.

    "group" is the information of learning the collision group of the token,
    sum p_c log2(D/(c+1)); "literal" is sum p_c log2(p_c D/(c+1)).
    """
    c, pmf = _collision_pmf(n_dim, n_tokens, colliders)
    if formula == "group":
        bits = np.sum(pmf * (math.log2(n_tokens) - np.log2(c + 1)))
    elif formula == "literal":
        bits = np.sum(special.xlogy(pmf, pmf * n_tokens / (c + 1))) / LN2
    else:
        raise InvalidParameterError(f"[-] Error: unknown collision formula {formula!r}")
    return float(bits), float(bits) / n_dim


def enumerate_collisions(
    n_dim: int, n_tokens: int, trials: int, seed: int = 0
) -> tuple[float, float]:
    """Brute force M=1 accuracy: (mean, standard error) over random codebooks."""
    rng = np.random.default_rng(seed)
    hits = np.empty(trials)
    for t in range(trials):
        codes = rng.integers(0, 2, size=(n_tokens, n_dim))
        target = rng.integers(n_tokens)
        ties = np.all(codes == codes[target], axis=1)
        winners = np.flatnonzero(ties)
        hits[t] = rng.choice(winners) == target
    return float(hits.mean()), float(hits.std(ddof=1) / math.sqrt(trials))


# -- all items correct -----------------------------------------------------


def all_correct_probability(
    s: float,
    n_tokens: int,
    length: int,
    theta: Optional[float] = None,
    convention: str = "Ours",
) -> float:
    """Probability that all M stored tokens are read out correctly.

    "Plate" thresholds every token: all M hits above theta and the D-M unused
    tokens below it. "Ours" raises the per-token accuracy to the M-th power.
    """
    if convention == "Plate":
        if length > n_tokens:
            raise InvalidParameterError(
                f"[-] Error: Plate convention draws M={length} of D={n_tokens} without replacement"
            )
        if theta is None:
            raise InvalidParameterError("[-] Error: Plate convention needs a threshold")
        if math.isinf(s):
            return 1.0
        log_p = length * special.log_ndtr(s - theta) + (n_tokens - length) * special.log_ndtr(theta)
        return float(np.exp(log_p))
    if convention != "Ours":
        raise InvalidParameterError(f"[-] Error: unknown convention {convention!r}")
    return float(accuracy_numeric(s, n_tokens, theta)) ** length


def plate_optimal_threshold(s: float, n_tokens: int, length: int) -> float:
    """Threshold maximizing the Plate all-correct probability."""

    def loss(theta: float) -> float:
        return -(
            length * special.log_ndtr(s - theta)
            + (n_tokens - length) * special.log_ndtr(theta)
        )

    result = optimize.minimize_scalar(loss, bounds=(-8.0, s + 8.0), method="bounded")
    return float(result.x)


# -- buffer time constants -------------------------------------------------


@dataclass(frozen=True)
class Lambda:
    value: float


@dataclass(frozen=True)
class Kappa:
    value: int


@dataclass(frozen=True)
class VarianceBound:
    value: float


@singledispatch
def time_constant(kind) -> float:
    raise InvalidParameterError(f"[-] Error: unknown time constant kind {kind!r}")


@time_constant.register(Lambda)
def _(kind: Lambda) -> float:
    if not 0.0 < kind.value < 1.0:
        raise InvalidParameterError(f"[-] Error: lambda must lie in (0, 1), got {kind.value!r}")
    return -1.0 / math.log(kind.value)


@time_constant.register(Kappa)
def _(kind: Kappa) -> float:
    if kind.value < 1:
        raise InvalidParameterError(f"[-] Error: kappa must be >= 1, got {kind.value!r}")
    argument = 1 - 3 / (kind.value * (kind.value + 1))
    if argument <= 0:
        raise InvalidParameterError(
            f"[-] Error: kappa={kind.value} has no finite time constant "
            f"(log of {argument:.3f})"
        )
    return -2.0 / math.log(argument)


@time_constant.register(VarianceBound)
def _(kind: VarianceBound) -> float:
    if not kind.value > 1:
        raise InvalidParameterError(f"[-] Error: variance bound must exceed 1, got {kind.value!r}")
    return time_constant(Lambda(math.sqrt(1 - 1 / kind.value)))


def contraction_for_kappa(kappa: int) -> float:
    """lambda whose filled variance 1/(1-lambda^2) equals the clipped
    network's uniform-state variance."""
    variance = ((2 * kappa + 1) ** 2 - 1) / 12
    return math.sqrt(1 - 1 / variance)


def tanh_time_constant(
    gamma: float, n_bins: Optional[int] = None, settings: Optional[Mapping[str, Any]] = None
) -> float:
    """Time constant of a tanh network via its filled-state variance."""
    tracker = tracker_init(Activation.tanh(gamma), True, n_bins, settings)
    _, variance = tracker_moments(tracker)
    return time_constant(VarianceBound(variance))


def storage_bits(n_dim: int, kappa: int) -> float:
    if kappa < 1:
        raise InvalidParameterError(f"[-] Error: kappa must be >= 1, got {kappa!r}")
    return n_dim * math.log2(2 * kappa + 1)


def activation_label(activation: Activation) -> str:
    if activation.kind is ActivationKind.CLIPPED:
        return f"kappa={activation.kappa}"
    if activation.kind is ActivationKind.TANH:
        return f"gamma={activation.gamma}"
    return "linear"
