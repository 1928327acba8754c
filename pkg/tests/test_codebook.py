import math

import numpy as np
import pytest

from vsa_capacity.codebook import (
    BindingKind,
    BindingOperator,
    Scheme,
    binding_for,
    circular_convolve_direct,
    generate_codebook,
    make_binding,
    second_moment,
    similarity,
    variance_ratio,
)
from vsa_capacity.exceptions import (
    InvalidDimensionError,
    InvalidParameterError,
    UnretrievableLookbackError,
)


def test_codebook_is_deterministic():
    a = generate_codebook(Scheme.HDC, 200, 10, seed=7)
    b = generate_codebook("HDC", 200, 10, seed=7)
    c = generate_codebook(Scheme.HDC, 200, 10, seed=8)
    assert np.array_equal(a.columns, b.columns)
    assert not np.array_equal(a.columns, c.columns)
    assert np.array_equal(a.regenerate().columns, a.columns)


def test_scheme_statistics():
    hdc = generate_codebook(Scheme.HDC, 500, 40, seed=1)
    assert set(np.unique(hdc.columns)) == {-1.0, 1.0}

    hrr = generate_codebook(Scheme.HRR, 1000, 50, seed=1)
    assert hrr.columns.var() == pytest.approx(1 / 1000, rel=0.05)

    fhrr = generate_codebook(Scheme.FHRR, 64, 5, seed=1)
    magnitude = fhrr.columns[:32] ** 2 + fhrr.columns[32:] ** 2
    assert np.allclose(magnitude, 1.0)


def test_codebook_arguments():
    with pytest.raises(InvalidDimensionError):
        generate_codebook(Scheme.FHRR, 63, 5)
    with pytest.raises(InvalidParameterError):
        generate_codebook(Scheme.HDC, 1, 5)
    with pytest.raises(InvalidParameterError):
        generate_codebook(Scheme.HDC, 100, 1)
    with pytest.raises(InvalidParameterError):
        generate_codebook(Scheme.HDC, 100, 5, sparsity=1.5)


def test_sparsity_zeroes_entries():
    cb = generate_codebook(Scheme.HDC, 2000, 20, sparsity=0.3, seed=3)
    assert np.mean(cb.columns == 0) == pytest.approx(0.3, abs=0.01)
    fhrr = generate_codebook(Scheme.FHRR, 2000, 20, sparsity=0.5, seed=3)
    # real and imaginary parts vanish together
    assert np.array_equal(fhrr.columns[:1000] == 0, fhrr.columns[1000:] == 0)
    empty = generate_codebook(Scheme.HRR, 100, 4, sparsity=1.0)
    assert not empty.columns.any()


def test_moments():
    assert second_moment(Scheme.HDC, 100) == 1.0
    assert second_moment(Scheme.FHRR, 100, 0.5) == 0.25
    assert second_moment(Scheme.HRR, 100) == pytest.approx(0.01)
    assert variance_ratio(Scheme.HDC) == 0.0
    assert variance_ratio(Scheme.HRR) == 2.0
    assert math.isinf(variance_ratio(Scheme.HDC, 1.0))
    cb = generate_codebook(Scheme.RANDOM_UNITARY, 50, 3)
    assert cb.second_moment() == pytest.approx(1 / 50)
    assert cb.variance_ratio() == 2.0


def test_rotation_convention():
    op = BindingOperator.rotation(3)
    assert op.apply(np.array([1.0, 2.0, 3.0])).tolist() == [3.0, 1.0, 2.0]
    assert op.apply(np.array([1.0, 2.0, 3.0]), -1).tolist() == [2.0, 3.0, 1.0]


@pytest.mark.parametrize(
    "kind, split",
    [
        (BindingKind.PERMUTATION, False),
        (BindingKind.CIRCULANT, False),
        (BindingKind.CIRCULANT, True),
        (BindingKind.PHASOR_DIAGONAL, False),
        (BindingKind.RANDOM_UNITARY, False),
    ],
)
def test_binding_is_unitary_and_invertible(kind, split):
    op = make_binding(kind, 64, seed=5, split_complex=split)
    v = np.random.default_rng(0).standard_normal(64)
    for power in (1, 3, -2):
        w = op.apply(v, power)
        assert np.linalg.norm(w) == pytest.approx(np.linalg.norm(v), rel=1e-9)
        assert np.allclose(op.apply(w, -power), v)
    batch = np.random.default_rng(1).standard_normal((64, 4))
    assert np.allclose(op.apply(batch, 2)[:, 1], op.apply(batch[:, 1], 2))


@pytest.mark.parametrize("kind", list(BindingKind))
def test_power_equals_repeated_steps(kind):
    op = make_binding(kind, 48, contraction=0.98, seed=3)
    v = np.random.default_rng(2).standard_normal(48)
    stepped = v
    for _ in range(7):
        stepped = op.apply(stepped, 1)
    assert np.allclose(op.apply(v, 7), stepped)
    assert np.allclose(op.apply(op.apply(v, 7), -7), v)
    # a second call reuses any cached power
    assert np.allclose(op.apply(v, 7), stepped)


def test_contraction_scales_norm():
    op = make_binding(BindingKind.PERMUTATION, 32, contraction=0.9, seed=1)
    v = np.ones(32)
    assert np.linalg.norm(op.apply(v, 5)) == pytest.approx(0.9**5 * np.linalg.norm(v))
    with pytest.raises(InvalidParameterError):
        make_binding(BindingKind.PERMUTATION, 32, contraction=0.0)
    tiny = make_binding(BindingKind.PERMUTATION, 8, contraction=1e-3)
    with pytest.raises(UnretrievableLookbackError):
        tiny.apply(np.ones(8), -200)


def test_permutation_is_single_cycle():
    op = make_binding(BindingKind.PERMUTATION, 101, seed=9)
    seen, i = set(), 0
    for _ in range(101):
        seen.add(i)
        i = int(op.representation[i])
    assert len(seen) == 101 and i == 0


def test_circulant_matches_direct_convolution():
    op = make_binding(BindingKind.CIRCULANT, 16, seed=3)
    assert np.linalg.norm(op.representation) == pytest.approx(1.0)
    v = np.random.default_rng(2).standard_normal(16)
    assert np.allclose(op.apply(v), circular_convolve_direct(op.representation, v))


def test_binding_for_picks_complex_layout():
    fhrr = generate_codebook(Scheme.FHRR, 32, 4)
    assert binding_for(fhrr, BindingKind.CIRCULANT).split_complex
    hrr = generate_codebook(Scheme.HRR, 32, 4)
    assert not binding_for(hrr, BindingKind.CIRCULANT).split_complex
    with pytest.raises(InvalidDimensionError):
        make_binding(BindingKind.PHASOR_DIAGONAL, 33)


def test_similarity_and_scores():
    cb = generate_codebook(Scheme.HDC, 100, 5, seed=2)
    scores = cb.scores(cb.column(3))
    assert scores[3] == 100 and scores.argmax() == 3
    assert similarity(Scheme.HDC, cb.column(0), cb.column(0)) == 100
    with pytest.raises(InvalidDimensionError):
        similarity(Scheme.HDC, np.ones(3), np.ones(4))
    with pytest.raises(InvalidDimensionError):
        cb.scores(np.ones(99))
