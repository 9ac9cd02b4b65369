"""Truncated Hilbert space of two four-level ions sharing one phonon mode.

Basis states are labelled ``(n, l1, l2)``: phonon number ``n`` and the
internal levels ``l1``, ``l2`` (0..3) of ion 1 and ion 2.  The canonical
linear index is ``(n * 4 + l1) * 4 + l2`` so the phonon number varies
slowest.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

N_LEVELS = 4
SQRT1_2 = 1.0 / np.sqrt(2.0)


class BasisIndex(NamedTuple):
    n: int
    l1: int
    l2: int

    def label(self) -> str:
        return f"{self.n}{self.l1}{self.l2}"


@dataclass(frozen=True)
class Space:
    """Index bookkeeping for phonon numbers ``0..n_max``."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def dim(self) -> int:
        return N_LEVELS * N_LEVELS * (self.n_max + 1)

    def contains(self, b: BasisIndex) -> bool:
        n, l1, l2 = b
        return 0 <= n <= self.n_max and 0 <= l1 < N_LEVELS and 0 <= l2 < N_LEVELS

    def index(self, b: BasisIndex | tuple[int, int, int]) -> int:
        b = BasisIndex(*b)
        if not self.contains(b):
            raise IndexError(f"{b} outside space with n_max={self.n_max}")
        return (b.n * N_LEVELS + b.l1) * N_LEVELS + b.l2

    def basis(self, i: int) -> BasisIndex:
        if not 0 <= i < self.dim:
            raise IndexError(f"linear index {i} outside [0, {self.dim})")
        rest, l2 = divmod(i, N_LEVELS)
        n, l1 = divmod(rest, N_LEVELS)
        return BasisIndex(n, l1, l2)

    def __iter__(self) -> Iterator[BasisIndex]:
        for i in range(self.dim):
            yield self.basis(i)

    def phonon_numbers(self) -> np.ndarray:
        """Phonon number of every basis state, in canonical order."""
        return np.arange(self.dim) // (N_LEVELS * N_LEVELS)

    def levels(self) -> tuple[np.ndarray, np.ndarray]:
        i = np.arange(self.dim)
        return (i // N_LEVELS) % N_LEVELS, i % N_LEVELS


def make_space(n_max: int = 3) -> Space:
    return Space(n_max)


class StateVector:
    """Complex amplitudes over a :class:`Space`.

    The amplitude array is copied on construction and made read-only, so a
    state can be shared freely.  Arithmetic returns new states.
    """

    __slots__ = ("space", "amplitudes")

    def __init__(self, space: Space, amplitudes):
        amps = np.array(amplitudes, dtype=complex)
        if amps.shape != (space.dim,):
            raise ValueError(
                f"expected {space.dim} amplitudes for n_max={space.n_max}, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        self.space = space
        self.amplitudes = amps

    @property
    def n_max(self) -> int:
        return self.space.n_max

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def __getitem__(self, b) -> complex:
        return complex(self.amplitudes[self.space.index(b)])

    def overlap(self, other: StateVector) -> complex:
        """``<self|other>``."""
        self._check_same_space(other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def normalized(self) -> StateVector:
        norm2 = self.norm_squared
        if norm2 == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.space, self.amplitudes / np.sqrt(norm2))

    def embed(self, n_max: int) -> StateVector:
        """Copy into a larger space (zero amplitudes for the new phonon levels)."""
        if n_max < self.n_max:
            raise ValueError("embed only enlarges the space; use truncation explicitly")
        space = Space(n_max)
        amps = np.zeros(space.dim, dtype=complex)
        amps[: self.space.dim] = self.amplitudes
        return StateVector(space, amps)

    def _check_same_space(self, other: StateVector):
        if other.space != self.space:
            raise ValueError("states live in different spaces")

    def __add__(self, other: StateVector) -> StateVector:
        self._check_same_space(other)
        return StateVector(self.space, self.amplitudes + other.amplitudes)

    def __sub__(self, other: StateVector) -> StateVector:
        self._check_same_space(other)
        return StateVector(self.space, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar: complex) -> StateVector:
        return StateVector(self.space, self.amplitudes * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> StateVector:
        return StateVector(self.space, self.amplitudes / scalar)

    def __neg__(self) -> StateVector:
        return StateVector(self.space, -self.amplitudes)

    def __repr__(self) -> str:
        nz = np.flatnonzero(np.abs(self.amplitudes) > 1e-12)
        terms = ", ".join(f"{self.space.basis(i).label()}: {self.amplitudes[i]:.6g}" for i in nz[:6])
        more = ", ..." if len(nz) > 6 else ""
        return f"StateVector(n_max={self.n_max}, {{{terms}{more}}})"

    def to_text(self) -> str:
        """Rows ``n,l1,l2,re,im`` in canonical order."""
        out = io.StringIO()
        for i, b in enumerate(self.space):
            a = self.amplitudes[i]
            out.write(f"{b.n},{b.l1},{b.l2},{float(a.real)!r},{float(a.imag)!r}\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> StateVector:
        rows = [line.split(",") for line in text.splitlines() if line.strip()]
        if not rows or len(rows) % (N_LEVELS * N_LEVELS):
            raise ValueError("row count is not a multiple of 16")
        space = Space(len(rows) // (N_LEVELS * N_LEVELS) - 1)
        amps = np.zeros(space.dim, dtype=complex)
        for i, row in enumerate(rows):
            if len(row) != 5:
                raise ValueError(f"line {i + 1}: expected 5 fields, got {len(row)}")
            n, l1, l2 = (int(x) for x in row[:3])
            if space.index((n, l1, l2)) != i:
                raise ValueError(f"line {i + 1}: basis {(n, l1, l2)} out of canonical order")
            amps[i] = complex(float(row[3]), float(row[4]))
        return cls(space, amps)


def basis_state(space: Space, b: BasisIndex | tuple[int, int, int]) -> StateVector:
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index(b)] = 1.0
    return StateVector(space, amps)


class NamedState(enum.Enum):
    Q00 = "00"
    Q01 = "01"
    Q10 = "10"
    Q11 = "11"
    A = "a"
    S = "s"

    @classmethod
    def parse(cls, text: str) -> NamedState:
        key = text.strip().lower()
        if key.startswith("q"):
            key = key[1:]
        for s in cls:
            if s.value == key:
                return s
        raise ValueError(f"unknown named state {text!r}")


QUBIT_STATES = (NamedState.Q00, NamedState.Q01, NamedState.Q10, NamedState.Q11)


def named_state(space: Space, s: NamedState) -> StateVector:
    if s in QUBIT_STATES:
        i, j = int(s.value[0]), int(s.value[1])
        return basis_state(space, (0, i, j))
    sign = -1.0 if s is NamedState.A else 1.0
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index((0, 1, 2))] = SQRT1_2
    amps[space.index((0, 2, 1))] = sign * SQRT1_2
    return StateVector(space, amps)


def qubit_state(space: Space, c00=0.0, c01=0.0, c10=0.0, c11=0.0) -> StateVector:
    """Zero-phonon ground-level state with the given (unnormalized) amplitudes."""
    amps = np.zeros(space.dim, dtype=complex)
    for (i, j), c in zip(((0, 0), (0, 1), (1, 0), (1, 1)), (c00, c01, c10, c11)):
        amps[space.index((0, i, j))] = c
    return StateVector(space, amps)


def qubit_amplitudes(psi: StateVector) -> np.ndarray:
    """Amplitudes ``(c000, c001, c010, c011)``."""
    sp = psi.space
    return np.array([psi.amplitudes[sp.index((0, i, j))] for i in (0, 1) for j in (0, 1)])


def qubit_sector_mask(space: Space) -> np.ndarray:
    l1, l2 = space.levels()
    return (space.phonon_numbers() == 0) & (l1 < 2) & (l2 < 2)


def in_qubit_sector(psi: StateVector, atol: float = 1e-12) -> bool:
    outside = psi.amplitudes[~qubit_sector_mask(psi.space)]
    return bool(np.all(np.abs(outside) <= atol))
