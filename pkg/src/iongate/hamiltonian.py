"""Hamiltonians of the ion-phonon system (hbar = 1, rates in units of g2).

The coherent generator couples level ``j`` (2 or 3) of each ion to level 1
while creating a phonon, ``i g_j |1><j| b^dag + h.c.``, and a weak resonant
laser drives ``0 <-> 2`` with ``(Omega/2) |0><2| + h.c.``.  The conditional
(no-photon) generator adds ``-(i/2) Gamma3 |3><3|`` for both ions.

Detuning and Lamb-Dicke parameter do not appear: everything is in the
interaction picture, valid for ``g2**2 << nu**2``.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hilbert import SQRT1_2, NamedState, Space, named_state


class GateKind(enum.Enum):
    PHASE = "phase"
    SWAP = "swap"

    def gate_time(self, omega: float) -> float:
        """Pulse length: ``2 sqrt(2) pi / Omega`` (phase) or ``2 pi / Omega`` (swap)."""
        if not omega > 0:
            raise ValueError(f"gate time needs omega > 0, got {omega!r}")
        if self is GateKind.PHASE:
            return 2.0 * np.sqrt(2.0) * np.pi / omega
        return 2.0 * np.pi / omega


@dataclass(frozen=True)
class GateParams:
    """Physical parameters in units of ``g2`` (which is fixed to 1)."""

    omega: float
    g3: float = 0.0
    gamma3: float = 0.0
    n_max: int = 3
    g2: float = 1.0

    def __post_init__(self):
        if self.g2 != 1.0:
            raise ValueError("g2 is the unit of rate and must be 1")
        if not self.omega >= 0:
            raise ValueError(f"omega must be >= 0, got {self.omega!r}")
        if not self.g3 >= 0 or not self.gamma3 >= 0:
            raise ValueError("g3 and gamma3 must be non-negative")
        Space(self.n_max)  # validates n_max

    @property
    def space(self) -> Space:
        return Space(self.n_max)

    @property
    def recommended_regime(self) -> bool:
        """``g3 ~ g2`` and ``10 g2 <= Gamma3 <= 100 g2``."""
        return 0.5 <= self.g3 / self.g2 <= 2.0 and 10.0 <= self.gamma3 <= 100.0

    def replace(self, **changes) -> GateParams:
        fields = dict(omega=self.omega, g3=self.g3, gamma3=self.gamma3, n_max=self.n_max)
        fields.update(changes)
        return GateParams(**fields)


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: sp.csr_array
    hermitian: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def space(self) -> Space:
        return Space(self.dim // 16 - 1)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def element(self, row, col) -> complex:
        sp_ = self.space
        return complex(self.matrix[sp_.index(row), sp_.index(col)])

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.matrix @ amplitudes

    def anti_hermitian_part(self) -> np.ndarray:
        """``(H - H^dag) / 2`` as a dense matrix."""
        h = self.dense()
        return 0.5 * (h - h.conj().T)

    def norm_bound(self) -> float:
        """Upper bound on the spectral radius (max absolute column sum)."""
        if self.matrix.nnz == 0:
            return 0.0
        return float(np.max(np.asarray(abs(self.matrix).sum(axis=0)).ravel()))

    def to_text(self) -> str:
        """Nonzero entries as ``row,col,re,im`` in row-major order."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        out = io.StringIO()
        for k in order:
            v = coo.data[k]
            out.write(f"{coo.row[k]},{coo.col[k]},{float(v.real)!r},{float(v.imag)!r}\n")
        return out.getvalue()


class _Builder:
    """Collects matrix elements; ``hc`` adds the conjugate partner."""

    def __init__(self, space: Space):
        self.space = space
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.vals: list[complex] = []

    def add(self, row, col, value, hc=True):
        r, c = self.space.index(row), self.space.index(col)
        self.rows.append(r)
        self.cols.append(c)
        self.vals.append(complex(value))
        if hc:
            self.rows.append(c)
            self.cols.append(r)
            self.vals.append(complex(value).conjugate())

    def build(self, hermitian: bool) -> Operator:
        d = self.space.dim
        m = sp.coo_array(
            (np.array(self.vals, dtype=complex), (np.array(self.rows, dtype=np.int64), np.array(self.cols, dtype=np.int64))),
            shape=(d, d),
        ).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return Operator(m, hermitian)


def _sideband_terms(b: _Builder, level: int, g: float):
    # i g |1><level| b^dag on each ion; the state with n = n_max cannot gain a phonon.
    if g == 0:
        return
    space = b.space
    for n in range(space.n_max):
        amp = 1j * g * np.sqrt(n + 1)
        for other in range(4):
            b.add((n + 1, 1, other), (n, level, other), amp)
            b.add((n + 1, other, 1), (n, other, level), amp)


def _laser_terms(b: _Builder, omega: float, ions: tuple[int, ...]):
    if omega == 0:
        return
    for n in range(b.space.n_max + 1):
        for other in range(4):
            if 1 in ions:
                b.add((n, 0, other), (n, 2, other), 0.5 * omega)
            if 2 in ions:
                b.add((n, other, 0), (n, other, 2), 0.5 * omega)


def _decay_terms(b: _Builder, gamma3: float):
    if gamma3 == 0:
        return
    for n in range(b.space.n_max + 1):
        for l1 in range(4):
            for l2 in range(4):
                count = (l1 == 3) + (l2 == 3)
                if count:
                    b.add((n, l1, l2), (n, l1, l2), -0.5j * gamma3 * count, hc=False)


def _check_space(space: Space, params: GateParams):
    if space.n_max != params.n_max:
        raise ValueError(f"space n_max={space.n_max} does not match params n_max={params.n_max}")


def build_coherent(space: Space, params: GateParams) -> Operator:
    """Sideband coupling on the 1-2 transition plus the laser on ion 1."""
    _check_space(space, params)
    b = _Builder(space)
    _sideband_terms(b, 2, params.g2)
    _laser_terms(b, params.omega, (1,))
    return b.build(hermitian=True)


def _build_conditional(space: Space, params: GateParams, ions: tuple[int, ...]) -> Operator:
    _check_space(space, params)
    b = _Builder(space)
    _sideband_terms(b, 2, params.g2)
    _sideband_terms(b, 3, params.g3)
    _laser_terms(b, params.omega, ions)
    _decay_terms(b, params.gamma3)
    return b.build(hermitian=params.gamma3 == 0)


def build_conditional_phase(space: Space, params: GateParams) -> Operator:
    return _build_conditional(space, params, (1,))


def build_conditional_swap(space: Space, params: GateParams) -> Operator:
    """As :func:`build_conditional_phase` with the laser on both ions."""
    return _build_conditional(space, params, (1, 2))


def build_conditional(space: Space, params: GateParams, gate: GateKind) -> Operator:
    if gate is GateKind.PHASE:
        return build_conditional_phase(space, params)
    return build_conditional_swap(space, params)


def build_effective(space: Space, params: GateParams, gate: GateKind) -> Operator:
    """Adiabatically eliminated Hamiltonian on the zero-phonon sector."""
    _check_space(space, params)
    k = params.omega * SQRT1_2 / 2.0
    q01 = named_state(space, NamedState.Q01).amplitudes
    q10 = named_state(space, NamedState.Q10).amplitudes
    a = named_state(space, NamedState.A).amplitudes
    if gate is GateKind.PHASE:
        bright = -q01
    else:
        bright = q10 - q01
    # k (|bright><A| + h.c.); all vectors are real.
    h = k * (np.outer(bright, a) + np.outer(a, bright))
    m = sp.csr_array(h.astype(complex))
    m.eliminate_zeros()
    m.sort_indices()
    return Operator(m, hermitian=True)
