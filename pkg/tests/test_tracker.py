import itertools
from fractions import Fraction

import numpy as np
import pytest

from vsa_capacity.exceptions import InvalidLookbackError, InvalidParameterError
from vsa_capacity.memory import Activation, NetworkConfig
from vsa_capacity.tracker import (
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


def enumerate_moments(kappa: int, length: int, lookback: int) -> tuple[Fraction, Fraction]:
    """Exact mean and variance of the tracked term over all +-1 paths."""
    position = length - lookback
    total = Fraction(0)
    squares = Fraction(0)
    weight = Fraction(1, 2 ** (length - 1))
    for signs in itertools.product((-1, 1), repeat=length - 1):
        z = 0
        others = iter(signs)
        for t in range(length):
            y = 1 if t == position else next(others)
            z = max(-kappa, min(kappa, z + y))
        total += weight * z
        squares += weight * z * z
    return total, squares - total * total


@pytest.mark.parametrize("length", range(1, 7))
def test_tracker_matches_path_enumeration(length):
    config = NetworkConfig(100, Activation.clipped(1))
    for lookback in range(1, length + 1):
        mu, var = enumerate_moments(1, length, lookback)
        got_mu, got_var = signal_moments(config, length, lookback)
        # dyadic probabilities are exact in double precision
        assert Fraction(got_mu) == mu
        assert Fraction(got_var) == pytest.approx(var, abs=1e-12)


def test_curves_match_single_lookbacks():
    config = NetworkConfig(500, Activation.clipped(3))
    curve = moment_curve(config, 12)
    for k in (1, 5, 12):
        mu, var = signal_moments(config, 12, k)
        assert curve.mu[k - 1] == pytest.approx(mu)
        assert curve.var[k - 1] == pytest.approx(var)
    assert curve.lookbacks.tolist() == list(range(1, 13))

    first = moment_curve(config, 12, first_item=True)
    for m in (1, 6, 12):
        assert first.mu[m - 1] == pytest.approx(signal_moments(config, m, m)[0])


def test_filled_start():
    clipped = tracker_init(Activation.clipped(4), filled=True)
    assert clipped.mode is TrackerMode.EXACT_INTEGER
    assert np.allclose(clipped.p, 1 / 9)
    assert tracker_moments(clipped)[1] == pytest.approx(((2 * 4 + 1) ** 2 - 1) / 12)

    tanh = tracker_init(Activation.tanh(4.0), filled=True, n_bins=50)
    assert tanh.mode is TrackerMode.DISCRETIZED_SQUASH
    assert tanh.p.sum() == pytest.approx(1.0)
    assert tracker_moments(tanh)[0] == pytest.approx(0.0, abs=1e-9)
    # the equilibrium is a fixed point of diffusion
    assert np.allclose(tracker_step(tanh, StepKind.DIFFUSE).p, tanh.p, atol=1e-8)

    config = NetworkConfig(1000, Activation.clipped(4))
    curve = moment_curve(config, None, max_lookback=30)
    assert len(curve.mu) == 30
    assert np.all(np.diff(curve.snr) < 0)


def test_steps_conserve_probability():
    tracker = tracker_init(Activation.tanh(3.0), n_bins=40)
    for kind in ("Skew", "Diffuse", StepKind.DIFFUSE):
        tracker = tracker_step(tracker, kind)
        assert tracker.p.sum() == pytest.approx(1.0)
    assert tracker.values.min() == pytest.approx(-3.0)


def test_snr_falls_with_lookback():
    config = NetworkConfig(2000, Activation.tanh(8.0))
    values = [nonlinear_snr(config, 50, k, n_bins=100) for k in (1, 10, 50)]
    assert values[0] > values[1] > values[2] > 0


def test_hit_scale():
    assert hit_scale(1.0, 0.0) == 0.0
    assert hit_scale(0.0, 4.0) == 1.0
    assert hit_scale(0.0, 0.0) == 1.0


def test_errors():
    config = NetworkConfig(100, Activation.clipped(2))
    with pytest.raises(InvalidLookbackError):
        signal_moments(config, 5, 0)
    with pytest.raises(InvalidLookbackError):
        signal_moments(config, 5, 6)
    with pytest.raises(InvalidParameterError):
        tracker_init(Activation.linear())
    with pytest.raises(InvalidParameterError):
        tracker_init(Activation.tanh(1.0), n_bins=0)


def test_settings_reach_the_tracker():
    assert tracker_init(Activation.tanh(4.0), settings={"squash_bins": 60}).n == 60
    assert tracker_init(Activation.tanh(4.0), n_bins=30, settings={"squash_bins": 60}).n == 30
    assert tracker_init(Activation.tanh(4.0)).n == 400
    config = NetworkConfig(1000, Activation.tanh(4.0))
    coarse = signal_moments(config, 20, 5, settings={"squash_bins": 20})
    assert coarse == signal_moments(config, 20, 5, n_bins=20)
