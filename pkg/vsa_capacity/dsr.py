"""Distributed shift register: the constructed, crosstalk-free baseline.

Every token is written as its own log2(D)-bit sign block; the state is
rotated by one block per input, so the register holds N // log2(D) of the
most recent tokens and older blocks wrap around and are overwritten.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InvalidLookbackError, InvalidParameterError, UnretrievableLookbackError
from .memory import EMPTY, InputSequence, MemoryState, NoiseKind, NoiseModel, classify
from .theory import item_info
from .utils import SeedLike, as_generator, check_probability, is_power_of_two


@dataclass(frozen=True)
class DsrCode:
    n_dim: int
    n_tokens: int
    blocks: np.ndarray = field(repr=False, compare=False)

    @property
    def block_bits(self) -> int:
        return self.blocks.shape[1]

    @property
    def capacity_slots(self) -> int:
        return self.n_dim // self.block_bits

    @property
    def codewords(self) -> np.ndarray:
        """D x N bipolar block patterns padded with zeros."""
        out = np.zeros((self.n_tokens, self.n_dim))
        out[:, : self.block_bits] = self.blocks
        return out


def make_dsr_code(n_dim: int, n_tokens: int) -> DsrCode:
    """Codeword d is the binary expansion of d, most significant bit first,
    with 1 -> +1 and 0 -> -1."""
    if n_tokens < 2 or not is_power_of_two(n_tokens):
        raise InvalidParameterError(f"[-] Error: DSR needs D a power of two >= 2, got {n_tokens}")
    bits = int(math.log2(n_tokens))
    if bits > n_dim:
        raise InvalidParameterError(
            f"[-] Error: a {bits}-bit block does not fit in N={n_dim} neurons"
        )
    shifts = np.arange(bits - 1, -1, -1)
    patterns = (np.arange(n_tokens)[:, None] >> shifts) & 1
    blocks = np.where(patterns == 1, 1.0, -1.0)
    blocks.setflags(write=False)
    return DsrCode(n_dim, n_tokens, blocks)


def dsr_encode(code: DsrCode, sequence: InputSequence) -> MemoryState:
    sequence.check_tokens(code.n_tokens)
    b = code.block_bits
    x = np.zeros(code.n_dim)
    for token in sequence:
        x = np.roll(x, b)
        x[:b] = 0.0 if token == EMPTY else code.blocks[token]
    return MemoryState(x, sequence.length, sequence.items)


def dsr_decode(
    code: DsrCode,
    state: MemoryState,
    lookback: int,
    noise: Optional[NoiseModel] = None,
    rng: SeedLike = None,
) -> int:
    """Nearest codeword on block `lookback` by sign agreement.

    Bit-flip noise is applied to the whole state before reading; ties (an
    EMPTY block, or zeros in general) are broken uniformly.
    """
    if not 0 <= lookback < state.steps_elapsed:
        raise InvalidLookbackError(
            f"[-] Error: lookback {lookback} outside [0, {state.steps_elapsed})"
        )
    if lookback >= code.capacity_slots:
        raise UnretrievableLookbackError(
            f"[-] Error: lookback {lookback} beyond the {code.capacity_slots} retained blocks"
        )
    rng = as_generator(rng)
    x = state.x
    if noise is not None and noise.kind is NoiseKind.BIT_FLIP:
        x = noise.corrupt_readout(x, rng)
    elif noise is not None and noise.kind is not NoiseKind.NONE:
        raise InvalidParameterError("[-] Error: the DSR decoder only models bit-flip noise")
    b = code.block_bits
    block = x[lookback * b : (lookback + 1) * b]
    return classify(code.blocks @ block, rng)


def dsr_accuracy(code: DsrCode, p_f: float) -> float:
    """Every sign pattern is a codeword, so a block decodes correctly only
    when none of its bits flipped."""
    p_f = check_probability(p_f, "p_f", upper=0.5)
    return (1.0 - p_f) ** code.block_bits


def dsr_information(code: DsrCode, length: int, p_f: float = 0.0) -> float:
    """Bits retrieved from the last `length` inputs.

    Only whole blocks are decodable, so with N = 13 and D = 8 the noiseless
    ceiling is floor(N / log2 D) * log2 D = 12 bits, not N.
    """
    if length < 0:
        raise InvalidParameterError(f"[-] Error: M must be >= 0, got {length}")
    retained = min(length, code.capacity_slots)
    return retained * float(item_info(dsr_accuracy(code, p_f), code.n_tokens))
