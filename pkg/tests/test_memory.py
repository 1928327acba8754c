from pathlib import Path

import numpy as np
import pytest

from vsa_capacity.codebook import BindingKind, BindingOperator, Scheme, generate_codebook, make_binding
from vsa_capacity.exceptions import (
    InvalidConfigError,
    InvalidLookbackError,
    InvalidParameterError,
    ParsingError,
)
from vsa_capacity.memory import (
    EMPTY,
    REJECT,
    Activation,
    InputSequence,
    MemoryState,
    NetworkConfig,
    NoiseModel,
    burn_in_steps,
    classify,
    decode_scores,
    detect,
    encode_sequence,
    filled_state,
    step,
)


@pytest.fixture
def hdc():
    cb = generate_codebook(Scheme.HDC, 500, 8, seed=1)
    op = make_binding(BindingKind.PERMUTATION, 500, seed=2)
    return NetworkConfig(500), cb, op


def test_encode_is_trajectory_superposition(hdc):
    config, cb, op = hdc
    seq = InputSequence((3, EMPTY, 5))
    state = encode_sequence(config, cb, op, seq)
    expected = op.apply(cb.column(3), 2) + cb.column(5)
    assert np.array_equal(state.x, expected)
    assert (state.steps_elapsed, state.items_stored) == (3, 2)


@pytest.mark.parametrize(
    "scheme, kind",
    [(Scheme.HDC, BindingKind.PERMUTATION), (Scheme.HRR, BindingKind.CIRCULANT)],
)
def test_linear_encoding_is_shift_equivariant(scheme, kind):
    cb = generate_codebook(scheme, 256, 8, seed=4)
    op = make_binding(kind, 256, seed=5)
    config = NetworkConfig(256)
    head, tail = InputSequence((1, 6, 2)), InputSequence((7, EMPTY, 0, 3))
    joined = InputSequence(head.slots + tail.slots)
    x_head = encode_sequence(config, cb, op, head).x
    x_tail = encode_sequence(config, cb, op, tail).x
    x_joined = encode_sequence(config, cb, op, joined).x
    assert np.allclose(x_joined, op.apply(x_head, len(tail)) + x_tail)
    idle = encode_sequence(config, cb, op, InputSequence(head.slots + (EMPTY,) * 3)).x
    assert np.allclose(idle, op.apply(x_head, 3))


def test_single_item_decodes_exactly(hdc):
    config, cb, op = hdc
    state = encode_sequence(config, cb, op, InputSequence((4,)))
    scores = decode_scores(cb, op, state, 0)
    assert scores[4] == 500
    assert classify(scores) == 4


def test_short_sequence_recall(hdc):
    config, cb, op = hdc
    seq = InputSequence.random(5, 8, seed=11)
    state = encode_sequence(config, cb, op, seq)
    decoded = [classify(decode_scores(cb, op, state, k), 0) for k in range(5)]
    assert decoded == [seq.at_lookback(k) for k in range(5)]


def test_lookback_range(hdc):
    config, cb, op = hdc
    state = encode_sequence(config, cb, op, InputSequence((1, 2)))
    with pytest.raises(InvalidLookbackError):
        decode_scores(cb, op, state, 2)
    with pytest.raises(InvalidLookbackError):
        decode_scores(cb, op, state, -1)


def test_clipped_state_is_bounded():
    cb = generate_codebook(Scheme.HDC, 300, 4, seed=0)
    op = make_binding(BindingKind.PERMUTATION, 300, seed=0)
    config = NetworkConfig(300, Activation.clipped(1))
    state = encode_sequence(config, cb, op, InputSequence((2, 2)))
    assert set(np.unique(state.x)) <= {-1.0, 0.0, 1.0}
    long = encode_sequence(config, cb, op, InputSequence.random(200, 4, seed=1))
    assert np.abs(long.x).max() <= 1


def test_tanh_state_is_bounded():
    cb = generate_codebook(Scheme.HDC, 100, 4, seed=0)
    op = make_binding(BindingKind.PERMUTATION, 100, seed=0)
    config = NetworkConfig(100, Activation.tanh(2.0))
    state = encode_sequence(config, cb, op, InputSequence.random(300, 4, seed=2))
    assert np.abs(state.x).max() < 2.0


def test_clipped_requires_integer_dynamics():
    cb = generate_codebook(Scheme.HRR, 64, 4)
    op = make_binding(BindingKind.CIRCULANT, 64)
    with pytest.raises(InvalidConfigError):
        encode_sequence(NetworkConfig(64, Activation.clipped(3)), cb, op, InputSequence((1,)))


def test_activation_arguments():
    with pytest.raises(InvalidParameterError):
        Activation.clipped(0)
    with pytest.raises(InvalidParameterError):
        Activation.tanh(-1.0)
    with pytest.raises(InvalidParameterError):
        NetworkConfig(10, contraction=1.5)


def test_contraction_mismatch(hdc):
    _, cb, op = hdc
    with pytest.raises(InvalidConfigError):
        step(NetworkConfig(500, contraction=0.9), MemoryState.zeros(500), 1, cb, op)


def test_per_step_noise_needs_rng(hdc):
    config, cb, op = hdc
    with pytest.raises(InvalidParameterError):
        step(config, MemoryState.zeros(500), 1, cb, op, NoiseModel.per_step(1.0))
    noisy = encode_sequence(config, cb, op, InputSequence((1, 2)), NoiseModel.per_step(1.0), seed=3)
    clean = encode_sequence(config, cb, op, InputSequence((1, 2)))
    assert not np.array_equal(noisy.x, clean.x)


def test_bit_flip_negates_components():
    rng = np.random.default_rng(0)
    x = np.ones(10000)
    flipped = NoiseModel.bit_flip(0.1).corrupt_readout(x, rng)
    assert set(np.unique(flipped)) == {-1.0, 1.0}
    assert np.mean(flipped < 0) == pytest.approx(0.1, abs=0.01)
    with pytest.raises(InvalidParameterError):
        NoiseModel.bit_flip(0.6)
    with pytest.raises(InvalidParameterError):
        NoiseModel.readout(-1.0)


def test_burn_in_and_filled_state():
    assert burn_in_steps(NetworkConfig(10, contraction=0.9)) == 95
    assert burn_in_steps(NetworkConfig(10, Activation.clipped(3))) == 90
    with pytest.raises(InvalidConfigError):
        burn_in_steps(NetworkConfig(10))
    cb = generate_codebook(Scheme.HDC, 50, 4, seed=0)
    op = make_binding(BindingKind.PERMUTATION, 50, contraction=0.9, seed=0)
    state = filled_state(NetworkConfig(50, contraction=0.9), cb, op, seed=1, steps=20)
    assert state.steps_elapsed == 20


def test_filled_variance_matches_equilibrium():
    cb = generate_codebook(Scheme.HDC, 2000, 8, seed=6)
    lam = 0.9
    decay = make_binding(BindingKind.PERMUTATION, 2000, contraction=lam, seed=7)
    x = filled_state(NetworkConfig(2000, contraction=lam), cb, decay, seed=8).x
    assert np.mean(x**2) == pytest.approx(1 / (1 - lam**2), rel=0.15)

    kappa = 3
    op = make_binding(BindingKind.PERMUTATION, 2000, seed=7)
    x = filled_state(NetworkConfig(2000, Activation.clipped(kappa)), cb, op, seed=8).x
    assert np.mean(x**2) == pytest.approx(((2 * kappa + 1) ** 2 - 1) / 12, rel=0.1)


def test_classify_ties_and_detect():
    assert classify(np.array([1.0, 3.0, 2.0])) == 1
    picks = {classify(np.array([2.0, 2.0, 0.0]), seed) for seed in range(30)}
    assert picks == {0, 1}
    assert detect(np.array([0.1, 0.2]), 0.5) == REJECT
    assert detect(np.array([0.1, 0.7]), 0.5) == 1
    with pytest.raises(InvalidParameterError):
        detect(np.array([1.0]), float("nan"))
    with pytest.raises(InvalidParameterError):
        classify(np.array([]))


def test_sequence_text_format(tmp_path: Path):
    seq = InputSequence((3, EMPTY, 0))
    assert seq.to_text() == "3\n-\n0\n"
    path = tmp_path / "seq.txt"
    path.write_text("# header\n3\n\n-\n0\n")
    assert InputSequence.from_text(path) == seq
    with pytest.raises(ParsingError):
        InputSequence.parse(["a"])
    with pytest.raises(ParsingError):
        InputSequence.parse(["-4"])


def test_random_sequence():
    seq = InputSequence.random(1000, 5, seed=4, empty_probability=0.2)
    assert seq == InputSequence.random(1000, 5, seed=4, empty_probability=0.2)
    assert seq.items == pytest.approx(800, abs=60)
    assert seq.length == 1000
    with pytest.raises(InvalidParameterError):
        seq.check_tokens(3)


def test_state_invariants():
    with pytest.raises(InvalidParameterError):
        MemoryState(np.zeros(3), steps_elapsed=1, items_stored=2)
    assert MemoryState.from_dict(MemoryState(np.ones(2), 2, 1).to_dict()).steps_elapsed == 2


def test_rotation_binding_keeps_state_shape(hdc):
    config, cb, _ = hdc
    state = encode_sequence(config, cb, BindingOperator.rotation(500), InputSequence((0, 1)))
    assert state.x.shape == (500,)
