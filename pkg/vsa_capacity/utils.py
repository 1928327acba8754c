#!/usr/bin/env python
from __future__ import annotations

import configparser
import logging
import math
from configparser import RawConfigParser
from pathlib import Path
from typing import Union

import numpy as np

from .exceptions import InvalidParameterError, ParsingError

logger = logging.getLogger("vsa-capacity")

SeedLike = Union[int, np.random.Generator, None]


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Return a numpy Generator for an int seed, pass a Generator through.

    :param seed: int, Generator or None (None seeds with 0, never from OS entropy)
    Return: numpy.random.Generator
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(0 if seed is None else seed)


def trial_generator(master_seed: int, index: int) -> np.random.Generator:
    """Generator for trial `index`, independent of how trials are scheduled."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    )


def draw_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63 - 1))


def check_probability(value: float, name: str, upper: float = 1.0) -> float:
    if not 0.0 <= value <= upper:
        raise InvalidParameterError(
            f"[-] Error: {name} must lie in [0, {upper}], got {value!r}"
        )
    return float(value)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion k/n."""
    if n == 0:
        return (0.0, 1.0)
    phat = k / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


class SectionlessConfigParser(RawConfigParser):
    """
    Extends RawConfigParser to read `key = value` files that have no section.

    The text is prefixed with a placeholder section, which defaults to
    '__config__', so flat experiment files can be parsed like ini files.
    """

    def __init__(self, default_section: str = "__config__", **kwargs) -> None:
        super().__init__(**kwargs)
        self.placeholder = default_section

    def read_flat(self, filename: str | Path, encoding: str = "utf-8") -> dict:
        text = Path(filename).read_text(encoding=encoding)
        try:
            self.read_string(f"[{self.placeholder}]\n{text}", source=str(filename))
        except configparser.Error as e:
            raise ParsingError(f"[-] Error: cannot parse {filename}: {e}") from e
        return dict(self.items(self.placeholder))
