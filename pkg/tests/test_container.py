import struct

import numpy as np
import pytest

from vsa_capacity.codebook import BindingKind, Scheme, generate_codebook, make_binding
from vsa_capacity.container import MAGIC, ArtifactKind, ContainerHeader, dumps, load, loads, save
from vsa_capacity.exceptions import DataError
from vsa_capacity.memory import MemoryState


def test_header_layout():
    header = ContainerHeader(kind=ArtifactKind.STATE, meta_len=5, payload_len=16)
    raw = header.build_header()
    assert header.header_len() == 24 == len(raw)
    assert raw[:4] == MAGIC
    parsed = ContainerHeader()
    parsed.parse(raw)
    assert (parsed.kind, parsed.meta_len, parsed.payload_len) == (3, 5, 16)


def test_codebook(tmp_path):
    cb = generate_codebook(Scheme.FHRR, 16, 3, sparsity=0.25, seed=6)
    path = save(cb, tmp_path / "codebook.vsac")
    back = load(path)
    assert back == cb
    assert np.array_equal(back.columns, cb.columns)


def test_binding_keeps_integer_permutation():
    op = make_binding(BindingKind.PERMUTATION, 50, contraction=0.9, seed=2)
    data = dumps(op)
    assert data[6] == ArtifactKind.BINDING
    back = loads(data)
    assert np.array_equal(back.representation, op.representation)
    assert np.issubdtype(back.representation.dtype, np.integer)
    assert back.contraction == 0.9
    v = np.arange(50.0)
    assert np.array_equal(back.apply(v, 3), op.apply(v, 3))


def test_binding_matrix_and_state():
    op = make_binding(BindingKind.RANDOM_UNITARY, 8, seed=1)
    assert np.array_equal(loads(dumps(op)).representation, op.representation)
    state = MemoryState(np.array([1.0, -2.0, 0.5]), 4, 3)
    back = loads(dumps(state))
    assert (back.steps_elapsed, back.items_stored) == (4, 3)
    assert back.x.tolist() == [1.0, -2.0, 0.5]


def test_corrupt_containers(tmp_path):
    data = dumps(MemoryState(np.ones(4), 1, 1))
    with pytest.raises(DataError):
        loads(b"XXXX" + data[4:])
    with pytest.raises(DataError):
        loads(data[:10])
    with pytest.raises(DataError):
        loads(data[:-1])
    with pytest.raises(DataError):
        loads(data[:6] + struct.pack("!B", 9) + data[7:])
    with pytest.raises(DataError):
        load(tmp_path / "missing.vsac")
    with pytest.raises(DataError):
        dumps("not an artifact")
