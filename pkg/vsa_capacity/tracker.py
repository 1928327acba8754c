"""Distribution tracker for saturating networks.

One inner-product term z = Phi_d,i * x_i of the stored item is followed through
the dynamics as a probability vector over discretized z values. Inputs that
are not the item of interest diffuse the distribution (y = +-1 with
probability 1/2 each); the item itself skews it (y * Phi = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Mapping, Optional

import numpy as np

from .config import SettingsDict, resolve_settings
from .exceptions import InvalidLookbackError, InvalidParameterError
from .memory import Activation, ActivationKind, NetworkConfig
from .utils import logger


class TrackerMode(str, Enum):
    EXACT_INTEGER = "ExactInteger"
    DISCRETIZED_SQUASH = "DiscretizedSquash"


class StepKind(str, Enum):
    DIFFUSE = "Diffuse"
    SKEW = "Skew"


@lru_cache(maxsize=64)
def _squash_kernel(activation: Activation, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bin values K(j) and target bins J(f(K(j) +- 1)) for a 2n+1 grid on [-bound, bound]."""
    bound = activation.bound
    values = -bound + np.arange(2 * n + 1) * bound / n

    def target(shift: float) -> np.ndarray:
        squashed = activation(values + shift)
        # np.rint rounds half to even
        index = np.rint(n / bound * (squashed + bound)).astype(np.intp)
        return np.clip(index, 0, 2 * n)

    return values, target(+1.0), target(-1.0)


@dataclass(frozen=True)
class DistributionTracker:
    """Probability vector `p` over the bin values `values` (last axis).

    `p` may carry leading batch axes; every row is tracked independently.
    """

    mode: TrackerMode
    activation: Activation
    n: int
    p: np.ndarray = field(repr=False, compare=False)

    @property
    def values(self) -> np.ndarray:
        if self.mode is TrackerMode.EXACT_INTEGER:
            return np.arange(-self.n, self.n + 1, dtype=np.float64)
        return _squash_kernel(self.activation, self.n)[0]

    def replace(self, p: np.ndarray) -> DistributionTracker:
        return DistributionTracker(self.mode, self.activation, self.n, p)


def _tracker_shape(
    activation: Activation, n_bins: Optional[int], cfg: SettingsDict
) -> tuple[TrackerMode, int]:
    if activation.kind is ActivationKind.LINEAR:
        raise InvalidParameterError("[-] Error: tracking needs a saturating activation")
    if activation.kind is ActivationKind.CLIPPED and n_bins is None:
        return TrackerMode.EXACT_INTEGER, int(activation.kappa)  # type:ignore[arg-type]
    n = cfg["squash_bins"] if n_bins is None else int(n_bins)
    if n < 1:
        raise InvalidParameterError(f"[-] Error: n_bins must be >= 1, got {n}")
    return TrackerMode.DISCRETIZED_SQUASH, n


def _diffuse(mode: TrackerMode, activation: Activation, n: int, p: np.ndarray) -> np.ndarray:
    if mode is TrackerMode.EXACT_INTEGER:
        out = np.empty_like(p)
        out[..., 1:-1] = 0.5 * (p[..., :-2] + p[..., 2:])
        out[..., 0] = 0.5 * (p[..., 0] + p[..., 1])
        out[..., -1] = 0.5 * (p[..., -2] + p[..., -1])
        return out
    _, up, down = _squash_kernel(activation, n)
    return 0.5 * (_scatter(p, up, 2 * n + 1) + _scatter(p, down, 2 * n + 1))


def _skew(mode: TrackerMode, activation: Activation, n: int, p: np.ndarray) -> np.ndarray:
    if mode is TrackerMode.EXACT_INTEGER:
        out = np.empty_like(p)
        out[..., 0] = 0.0
        out[..., 1:-1] = p[..., :-2]
        out[..., -1] = p[..., -1] + p[..., -2]
        return out
    _, up, _ = _squash_kernel(activation, n)
    return _scatter(p, up, 2 * n + 1)


def _scatter(p: np.ndarray, target: np.ndarray, bins: int) -> np.ndarray:
    if p.ndim == 1:
        return np.bincount(target, weights=p, minlength=bins)
    flat = p.reshape(-1, p.shape[-1])
    out = np.zeros_like(flat)
    np.add.at(out, (slice(None), target), flat)
    return out.reshape(p.shape)


def _fixed_point(
    mode: TrackerMode, activation: Activation, n: int, cfg: SettingsDict
) -> np.ndarray:
    tol, max_iter = cfg["fixed_point_tol"], cfg["fixed_point_max_iter"]
    p = np.full(2 * n + 1, 1.0 / (2 * n + 1))
    for iteration in range(1, max_iter + 1):
        nxt = _diffuse(mode, activation, n, p)
        change = np.abs(nxt - p).sum()
        p = nxt
        if change < tol:
            logger.debug(f"filled tracker converged after {iteration} iterations")
            return p
    logger.warning(f"filled tracker did not reach L1 < {tol} in {max_iter} iterations")
    return p


def tracker_init(
    activation: Activation,
    filled: bool = False,
    n_bins: Optional[int] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> DistributionTracker:
    """Delta at z=0 for an empty network, the equilibrium for a filled one.

    Clipped activations track exactly on {-kappa..kappa} unless `n_bins` asks
    for the discretized kernel; tanh always uses the discretized kernel.
    """
    cfg = resolve_settings(settings)
    mode, n = _tracker_shape(activation, n_bins, cfg)
    if not filled:
        p = np.zeros(2 * n + 1)
        p[n] = 1.0
    elif mode is TrackerMode.EXACT_INTEGER:
        p = np.full(2 * n + 1, 1.0 / (2 * n + 1))
    else:
        p = _fixed_point(mode, activation, n, cfg)
    return DistributionTracker(mode, activation, n, p)


def tracker_step(tracker: DistributionTracker, kind: StepKind | str) -> DistributionTracker:
    kind = StepKind(kind)
    fn = _diffuse if kind is StepKind.DIFFUSE else _skew
    return tracker.replace(fn(tracker.mode, tracker.activation, tracker.n, tracker.p))


def tracker_moments(tracker: DistributionTracker) -> tuple[float, float]:
    """Mean and variance of the tracked z distribution."""
    mu, var = _moments(tracker.values, tracker.p)
    return float(mu), float(var)


def _moments(values: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = p @ values
    var = p @ values**2 - mu**2
    return mu, np.maximum(var, 0.0)


def _snr(n_dim: int, mu: np.ndarray, var: np.ndarray) -> np.ndarray:
    # a distractor term has mean 0, so its variance is the second moment mu^2 + var
    mu = np.asarray(mu, dtype=np.float64)
    sd = np.sqrt(np.asarray(var, dtype=np.float64) + mu**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = math.sqrt(n_dim) * mu / sd
    return np.where(sd > 0, s, 0.0)


def _hit_scale(mu: np.ndarray, var: np.ndarray) -> np.ndarray:
    second = np.asarray(var, dtype=np.float64) + np.asarray(mu, dtype=np.float64) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sqrt(np.asarray(var, dtype=np.float64) / second)
    return np.where(second > 0, ratio, 1.0)


def signal_moments(
    config: NetworkConfig,
    length: Optional[int],
    lookback: int,
    n_bins: Optional[int] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> tuple[float, float]:
    """Tracker moments for the item stored `lookback` steps from the end.

    `lookback` counts from 1 (the newest item); `length=None` means the
    network started from its filled equilibrium.
    """
    if lookback < 1:
        raise InvalidLookbackError(f"[-] Error: lookback must be >= 1, got {lookback}")
    if length is not None and lookback > length:
        raise InvalidLookbackError(f"[-] Error: lookback {lookback} > length {length}")
    tracker = tracker_init(config.activation, length is None, n_bins, settings)
    before = 0 if length is None else length - lookback
    for _ in range(before):
        tracker = tracker_step(tracker, StepKind.DIFFUSE)
    tracker = tracker_step(tracker, StepKind.SKEW)
    for _ in range(lookback - 1):
        tracker = tracker_step(tracker, StepKind.DIFFUSE)
    return tracker_moments(tracker)


def nonlinear_snr(
    config: NetworkConfig,
    length: Optional[int],
    lookback: int,
    n_bins: Optional[int] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> float:
    """s = sqrt(N) mu / sigma, sigma being the distractor SD (root second
    moment of the tracked terms). Lookbacks count from 1.
    """
    mu, var = signal_moments(config, length, lookback, n_bins, settings)
    return float(_snr(config.n_dim, np.float64(mu), np.float64(var)))


def hit_scale(mu: float, var: float) -> float:
    return float(_hit_scale(np.float64(mu), np.float64(var)))


@dataclass(frozen=True)
class MomentCurve:
    """Signal moments indexed by lookback K = 1, 2, ... (position 0 is K=1)."""

    mu: np.ndarray
    var: np.ndarray
    n_dim: int

    @property
    def lookbacks(self) -> np.ndarray:
        return np.arange(1, len(self.mu) + 1)

    @property
    def snr(self) -> np.ndarray:
        return _snr(self.n_dim, self.mu, self.var)

    @property
    def hit_scale(self) -> np.ndarray:
        """Hit SD over distractor SD, for the accuracy integral."""
        return _hit_scale(self.mu, self.var)


def moment_curve(
    config: NetworkConfig,
    length: Optional[int] = None,
    *,
    first_item: bool = False,
    max_lookback: Optional[int] = None,
    n_bins: Optional[int] = None,
    settings: Optional[Mapping[str, Any]] = None,
) -> MomentCurve:
    """Moments for every lookback in one pass.

    - ``length=None``: filled start, K = 1..max_lookback (or until the SNR
      falls below the ``snr_floor`` setting).
    - ``first_item=True``: empty start with M = K, i.e. the oldest item of a
      growing sequence.
    - otherwise: empty start, fixed M = length, K = 1..M.
    """
    activation = config.activation
    cfg = resolve_settings(settings)
    if length is None or first_item:
        tracker = tracker_init(activation, length is None, n_bins, cfg)
        p = _skew(tracker.mode, activation, tracker.n, tracker.p)
        limit = max_lookback or (length if first_item else cfg["tail_cap"])
        if first_item and length is not None:
            limit = min(limit, length)
        values = tracker.values
        mus, variances = [], []
        for k in range(1, limit + 1):
            mu, var = _moments(values, p)
            mus.append(mu)
            variances.append(var)
            if max_lookback is None and length is None:
                if _snr(config.n_dim, mu, var) < cfg["snr_floor"]:
                    break
            p = _diffuse(tracker.mode, activation, tracker.n, p)
        return MomentCurve(np.array(mus), np.array(variances), config.n_dim)

    # fixed M: row r starts from r diffusions of the empty state (item at K = M - r)
    tracker = tracker_init(activation, False, n_bins, cfg)
    mode, n, values = tracker.mode, tracker.n, tracker.values
    rows = np.empty((length, 2 * n + 1))
    p = tracker.p
    for r in range(length):
        rows[r] = p
        p = _diffuse(mode, activation, n, p)
    rows = _skew(mode, activation, n, rows)
    mu = np.empty(length)
    var = np.empty(length)
    for t in range(length):
        r = length - 1 - t  # row whose K - 1 equals t
        mu[t], var[t] = _moments(values, rows[r])
        rows[:r] = _diffuse(mode, activation, n, rows[:r])
    return MomentCurve(mu, var, config.n_dim)
