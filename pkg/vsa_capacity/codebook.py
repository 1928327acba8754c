"""Randomized codebooks and the binding operators that turn each VSA scheme
into the common recurrent form ``x(m) = f(W x(m-1) + Phi a(m))``.

Example::

    from vsa_capacity.codebook import Scheme, BindingKind, generate_codebook, make_binding

    cb = generate_codebook(Scheme.HDC, n_dim=1000, n_tokens=27, seed=1)
    op = make_binding(BindingKind.PERMUTATION, n_dim=1000, seed=2)
    y = op.apply(cb.column(3), power=5)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import linalg

from .exceptions import InvalidDimensionError, InvalidParameterError, UnretrievableLookbackError
from .utils import check_probability

FloatArray = npt.NDArray[np.float64]

# largest exponent e with exp(e) finite in double precision
_MAX_LOG_SCALE = math.log(np.finfo(np.float64).max)

# RandomUnitary powers kept per operator
_POWER_CACHE = 16


class Scheme(str, Enum):
    HDC = "HDC"
    HRR = "HRR"
    FHRR = "FHRR"
    RANDOM_UNITARY = "RandomUnitary"


class BindingKind(str, Enum):
    PERMUTATION = "Permutation"
    CIRCULANT = "Circulant"
    PHASOR_DIAGONAL = "PhasorDiagonal"
    RANDOM_UNITARY = "RandomUnitary"


def _frozen(array: npt.ArrayLike, dtype: Any = np.float64) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Codebook:
    """N x D symbol matrix; column d is the hypervector of token d.

    FHRR phasors are stored as N reals: rows ``[:N/2]`` hold the real parts
    and rows ``[N/2:]`` the imaginary parts.
    """

    scheme: Scheme
    n_dim: int
    n_tokens: int
    columns: FloatArray = field(repr=False, compare=False)
    sparsity: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "columns", _frozen(self.columns))
        if self.columns.shape != (self.n_dim, self.n_tokens):
            raise InvalidDimensionError(
                f"[-] Error: columns shape {self.columns.shape} does not match "
                f"(N={self.n_dim}, D={self.n_tokens})"
            )

    def column(self, token: int) -> FloatArray:
        return self.columns[:, token]

    def scores(self, y: np.ndarray) -> np.ndarray:
        """Similarity of every codeword with `y` (or with each column of `y`)."""
        if y.shape[0] != self.n_dim:
            raise InvalidDimensionError(
                f"[-] Error: vector length {y.shape[0]} != N={self.n_dim}"
            )
        return self.columns.T @ y

    def second_moment(self) -> float:
        return second_moment(self.scheme, self.n_dim, self.sparsity)

    def variance_ratio(self) -> float:
        return variance_ratio(self.scheme, self.sparsity)

    def regenerate(self) -> Codebook:
        return generate_codebook(
            self.scheme, self.n_dim, self.n_tokens, self.sparsity, self.seed
        )

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "n_dim": self.n_dim,
            "n_tokens": self.n_tokens,
            "sparsity": self.sparsity,
            "seed": self.seed,
            "columns": self.columns.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> Codebook:
        return cls(
            scheme=Scheme(data["scheme"]),
            n_dim=int(data["n_dim"]),
            n_tokens=int(data["n_tokens"]),
            columns=np.asarray(data["columns"], dtype=np.float64),
            sparsity=float(data.get("sparsity", 0.0)),
            seed=int(data.get("seed", 0)),
        )


def second_moment(scheme: Scheme | str, n_dim: int, sparsity: float = 0.0) -> float:
    """Theoretical E(x^2) of one stored real component."""
    scheme = Scheme(scheme)
    keep = 1.0 - sparsity
    if scheme is Scheme.HDC:
        return keep
    if scheme is Scheme.FHRR:
        return keep / 2
    return keep / n_dim


def variance_ratio(scheme: Scheme | str, sparsity: float = 0.0) -> float:
    """Theoretical V(x^2) / V(x)^2 of one similarity term."""
    scheme = Scheme(scheme)
    if sparsity >= 1.0:
        return math.inf
    if scheme is Scheme.HDC:
        return sparsity / (1 - sparsity)
    if scheme is Scheme.FHRR:
        # counted per complex element
        return 2 * sparsity / (1 - sparsity)
    return (2 + sparsity) / (1 - sparsity)


def generate_codebook(
    scheme: Scheme | str,
    n_dim: int,
    n_tokens: int,
    sparsity: float = 0.0,
    seed: int = 0,
) -> Codebook:
    """Draw a codebook with i.i.d. entries for the given scheme.

    :param scheme: HDC (+-1), HRR / RandomUnitary (N(0, 1/N)), FHRR (unit phasors)
    :param n_dim: N, even for FHRR
    :param n_tokens: D, alphabet size
    :param sparsity: probability of zeroing an entry (a complex element for FHRR)
    :param seed: RNG seed; identical arguments give a bit-identical matrix
    """
    scheme = Scheme(scheme)
    if n_dim < 2:
        raise InvalidParameterError(f"[-] Error: n_dim must be >= 2, got {n_dim}")
    if n_tokens < 2:
        raise InvalidParameterError(f"[-] Error: n_tokens must be >= 2, got {n_tokens}")
    if scheme is Scheme.FHRR and n_dim % 2:
        raise InvalidDimensionError(f"[-] Error: FHRR needs an even n_dim, got {n_dim}")
    check_probability(sparsity, "sparsity")
    rng = np.random.default_rng(seed)
    if scheme is Scheme.HDC:
        columns = rng.integers(0, 2, size=(n_dim, n_tokens)).astype(np.float64) * 2 - 1
        mask = rng.random((n_dim, n_tokens)) < sparsity
    elif scheme is Scheme.FHRR:
        half = n_dim // 2
        phases = rng.uniform(-np.pi, np.pi, size=(half, n_tokens))
        columns = np.vstack([np.cos(phases), np.sin(phases)])
        mask = np.tile(rng.random((half, n_tokens)) < sparsity, (2, 1))
    else:
        columns = rng.normal(0.0, math.sqrt(1.0 / n_dim), size=(n_dim, n_tokens))
        mask = rng.random((n_dim, n_tokens)) < sparsity
    columns[mask] = 0.0
    return Codebook(scheme, n_dim, n_tokens, columns, float(sparsity), seed)


@dataclass(frozen=True)
class BindingOperator:
    """W = lambda * U with U unitary.

    ``representation`` holds the permutation index array (``apply(v)[j] ==
    v[index[j]]``), the real circulant key, the phasor key angles, or the
    orthogonal matrix, depending on ``kind``.
    """

    kind: BindingKind
    n_dim: int
    representation: np.ndarray = field(repr=False, compare=False)
    contraction: float = 1.0
    split_complex: bool = False
    seed: int = 0
    _powers: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", BindingKind(self.kind))
        dtype = np.intp if self.kind is BindingKind.PERMUTATION else np.float64
        object.__setattr__(self, "representation", _frozen(self.representation, dtype))

    @classmethod
    def rotation(cls, n_dim: int, contraction: float = 1.0) -> BindingOperator:
        """Cyclic shift by one position: (a, b, c) -> (c, a, b)."""
        _check_contraction(contraction)
        index = (np.arange(n_dim) - 1) % n_dim
        return cls(BindingKind.PERMUTATION, n_dim, index, contraction)

    @property
    def half(self) -> int:
        return self.n_dim // 2

    def scale(self, power: int) -> float:
        if self.contraction == 1.0 or power == 0:
            return 1.0
        log_scale = power * math.log(self.contraction)
        if log_scale > _MAX_LOG_SCALE:
            raise UnretrievableLookbackError(
                f"[-] Error: lambda^{power} overflows double range "
                f"(lambda={self.contraction})"
            )
        return math.exp(log_scale)

    def apply(self, v: np.ndarray, power: int = 1) -> np.ndarray:
        """Return (lambda U)^power v; `v` may be a vector or an N x T batch."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.n_dim:
            raise InvalidDimensionError(
                f"[-] Error: vector length {v.shape[0]} != N={self.n_dim}"
            )
        power = int(power)
        if power == 0:
            return v.copy()
        scale = self.scale(power)
        if self.kind is BindingKind.PERMUTATION:
            out = v[self._index_power(power)]
        elif self.kind is BindingKind.CIRCULANT:
            if self.split_complex:
                h = self.half
                out = np.concatenate(
                    [self._convolve(v[:h], power), self._convolve(v[h:], power)]
                )
            else:
                out = self._convolve(v, power)
        elif self.kind is BindingKind.PHASOR_DIAGONAL:
            h = self.half
            rotor = np.exp(1j * power * self.representation)
            rotor = rotor.reshape((-1,) + (1,) * (v.ndim - 1))
            z = (v[:h] + 1j * v[h:]) * rotor
            out = np.concatenate([z.real, z.imag])
        else:
            out = self._matrix_power(power) @ v
        if scale != 1.0:
            out = out * scale
        return out

    def _matrix_power(self, power: int) -> np.ndarray:
        if (cached := self._powers.get(power)) is not None:
            return cached
        base = self.representation if power > 0 else self.representation.T
        matrix = np.linalg.matrix_power(base, abs(power))
        if len(self._powers) >= _POWER_CACHE:
            self._powers.pop(next(iter(self._powers)))
        self._powers[power] = matrix
        return matrix

    def _index_power(self, power: int) -> np.ndarray:
        base = self.representation
        if power < 0:
            base = np.argsort(base)
            power = -power
        result = np.arange(self.n_dim)
        while power:
            if power & 1:
                result = result[base]
            base = base[base]
            power >>= 1
        return result

    def _convolve(self, v: np.ndarray, power: int) -> np.ndarray:
        n = v.shape[0]
        spectrum = np.fft.rfft(self.representation)
        key = np.abs(spectrum) ** power * np.exp(1j * power * np.angle(spectrum))
        key = key.reshape((-1,) + (1,) * (v.ndim - 1))
        return np.fft.irfft(np.fft.rfft(v, axis=0) * key, n=n, axis=0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_dim": self.n_dim,
            "contraction": self.contraction,
            "split_complex": self.split_complex,
            "seed": self.seed,
            "representation": self.representation.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> BindingOperator:
        return cls(
            kind=BindingKind(data["kind"]),
            n_dim=int(data["n_dim"]),
            representation=np.asarray(data["representation"]),
            contraction=float(data.get("contraction", 1.0)),
            split_complex=bool(data.get("split_complex", False)),
            seed=int(data.get("seed", 0)),
        )


def _check_contraction(contraction: float) -> None:
    if not 0.0 < contraction <= 1.0:
        raise InvalidParameterError(
            f"[-] Error: contraction must lie in (0, 1], got {contraction!r}"
        )


def unitary_key(length: int, rng: np.random.Generator) -> FloatArray:
    """Real key whose Fourier spectrum has unit magnitude (so ||w|| = 1)."""
    bins = length // 2 + 1
    spectrum = np.exp(1j * rng.uniform(-np.pi, np.pi, size=bins))
    spectrum[0] = rng.choice([-1.0, 1.0])
    if length % 2 == 0:
        spectrum[-1] = rng.choice([-1.0, 1.0])
    return np.fft.irfft(spectrum, n=length)


def make_binding(
    kind: BindingKind | str,
    n_dim: int,
    contraction: float = 1.0,
    seed: int = 0,
    *,
    split_complex: bool = False,
) -> BindingOperator:
    """Sample a binding operator.

    Permutations are uniform random single N-cycles. RandomUnitary is Haar
    (QR of a Gaussian matrix with the R diagonal sign folded into Q).
    `split_complex` makes a Circulant act on the real and imaginary halves of
    an FHRR vector separately.
    """
    kind = BindingKind(kind)
    _check_contraction(contraction)
    if n_dim < 2:
        raise InvalidParameterError(f"[-] Error: n_dim must be >= 2, got {n_dim}")
    needs_even = kind is BindingKind.PHASOR_DIAGONAL or (
        kind is BindingKind.CIRCULANT and split_complex
    )
    if needs_even and n_dim % 2:
        raise InvalidDimensionError(
            f"[-] Error: {kind.value} on complex pairs needs an even n_dim, got {n_dim}"
        )
    rng = np.random.default_rng(seed)
    representation: np.ndarray
    if kind is BindingKind.PERMUTATION:
        order = rng.permutation(n_dim)
        representation = np.empty(n_dim, dtype=np.intp)
        representation[order] = np.roll(order, -1)
    elif kind is BindingKind.CIRCULANT:
        representation = unitary_key(n_dim // 2 if split_complex else n_dim, rng)
    elif kind is BindingKind.PHASOR_DIAGONAL:
        representation = rng.uniform(-np.pi, np.pi, size=n_dim // 2)
    else:
        q, r = linalg.qr(rng.standard_normal((n_dim, n_dim)))
        representation = q * np.sign(np.diag(r))
    return BindingOperator(
        kind,
        n_dim,
        representation,
        float(contraction),
        split_complex and kind is BindingKind.CIRCULANT,
        seed,
    )


def binding_for(
    codebook: Codebook, kind: BindingKind | str, contraction: float = 1.0, seed: int = 0
) -> BindingOperator:
    """make_binding with the complex layout chosen to suit `codebook`."""
    kind = BindingKind(kind)
    split = codebook.scheme is Scheme.FHRR and kind is BindingKind.CIRCULANT
    return make_binding(kind, codebook.n_dim, contraction, seed, split_complex=split)


def bind(op: BindingOperator, v: np.ndarray, power: int = 1) -> np.ndarray:
    return op.apply(v, power)


def similarity(scheme: Scheme | str, a: np.ndarray, b: np.ndarray) -> float:
    """Dot product; for FHRR the split layout makes this Re(a^T conj(b))."""
    scheme = Scheme(scheme)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidDimensionError(
            f"[-] Error: similarity needs equal-length vectors, got {a.shape} and {b.shape}"
        )
    if scheme is Scheme.FHRR and a.shape[0] % 2:
        raise InvalidDimensionError("[-] Error: FHRR vectors have an even length")
    return float(a @ b)


def circular_convolve_direct(key: np.ndarray, v: np.ndarray) -> np.ndarray:
    """O(N^2) circular convolution, kept as a reference for the FFT path."""
    n = len(v)
    out = np.zeros(n)
    for i in range(n):
        for j in range(n):
            out[i] += key[j] * v[(i - j) % n]
    return out
