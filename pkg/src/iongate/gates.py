"""Phase gate and SWAP protocols, fidelities and the adiabatic predictions.

Numerical fidelities are ``|<ideal|psi(T)>|**2`` with ``psi(T)`` normalized;
global phases therefore never matter, and the relative sign produced by the
phase gate only shows up for superposition inputs.

The analytic fidelity and success rate are first-order phase-gate results.
SWAP reports carry ``None`` in those fields.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .evolve import DEFAULT_TOL, evolve, project_phonon_ground
from .hamiltonian import (
    GateKind,
    GateParams,
    Operator,
    build_coherent,
    build_conditional,
    build_conditional_swap,
)
from .hilbert import (
    SQRT1_2,
    NamedState,
    StateVector,
    in_qubit_sector,
    named_state,
    qubit_amplitudes,
)

__all__ = [
    "GateKind",
    "Mode",
    "GateReport",
    "LEAK_LABELS",
    "ideal_gate",
    "run_gate",
    "analytic_fidelity",
    "analytic_success",
    "perturbative_leakage",
    "adiabatic_oracle",
    "gate_operator",
]

LEAK_LABELS = ("020", "110", "030", "0s", "111", "013", "031")


class Mode(enum.Enum):
    COHERENT = "coherent"
    CONDITIONAL = "conditional"
    PROJECTION = "coherent+projection"


def _require_qubit_sector(psi: StateVector):
    if not in_qubit_sector(psi):
        raise ValueError("initial state must be supported on the zero-phonon qubit sector")


def ideal_gate(kind: GateKind, psi0: StateVector) -> StateVector:
    _require_qubit_sector(psi0)
    sp = psi0.space
    amps = np.array(psi0.amplitudes)
    i01, i10 = sp.index((0, 0, 1)), sp.index((0, 1, 0))
    if kind is GateKind.PHASE:
        amps[i01] = -amps[i01]
    else:
        amps[i01], amps[i10] = amps[i10], amps[i01]
    return StateVector(sp, amps)


def _weights(psi0: StateVector) -> tuple[complex, complex]:
    _require_qubit_sector(psi0)
    c = qubit_amplitudes(psi0.normalized())
    return c[0], c[1]


def analytic_fidelity(params: GateParams, psi0: StateVector) -> float:
    """``1 - (Omega^2 / 4 g2^2) (|c000|^2 + |c001|^2 / 4)``."""
    c000, c001 = _weights(psi0)
    return 1.0 - params.omega**2 / (4.0 * params.g2**2) * (abs(c000) ** 2 + 0.25 * abs(c001) ** 2)


def analytic_success(params: GateParams, psi0: StateVector) -> float:
    """No-photon probability to first order in ``Omega / g2``."""
    c000, c001 = _weights(psi0)
    if params.g3 == 0:
        return 1.0
    if params.gamma3 == 0:
        raise ValueError("analytic success rate needs gamma3 > 0 when g3 > 0")
    rate = params.omega * params.g3**2 / (params.g2**2 * params.gamma3)
    return 1.0 - 2.0 * math.sqrt(2.0) * math.pi * rate * (abs(c000) ** 2 + 0.25 * abs(c001) ** 2)


def perturbative_leakage(params: GateParams, psi0: StateVector, dissipative: bool) -> dict[str, complex]:
    """First-order amplitudes of the unintentionally populated states.

    Eliminating level 3 from the conditional generator gives
    ``c013 = c031 = -(2 g3 / Gamma3) c111``, the same relation as
    ``c030 = -(2 g3 / Gamma3) c110``.  The ``013`` and ``031`` entries
    returned here follow the reference closed form, which has the opposite
    overall sign.  Populations are unaffected.
    """
    c000, c001 = _weights(psi0)
    x = params.omega / params.g2
    if not dissipative:
        return {"110": -0.5j * x * c000, "111": -0.25j * x * c001}
    if params.g3 == 0:
        r = 0.0
    elif params.gamma3 == 0:
        raise ValueError("dissipative leakage needs gamma3 > 0 when g3 > 0")
    else:
        r = params.g3 / params.gamma3
    r2 = params.g3 * r / params.g2
    a = -0.5j * x * c001
    b = -1j * x * c000
    return {
        "020": b * r2,
        "110": b * 0.5,
        "030": -b * r,
        "0s": a * math.sqrt(2.0) * r2,
        "111": a * 0.5,
        "013": a * r,
        "031": a * r,
    }


def adiabatic_oracle(kind: GateKind, params: GateParams, psi0: StateVector, t: float) -> StateVector:
    """Closed-form evolution under the effective Hamiltonian."""
    sp = psi0.space
    a_vec = named_state(sp, NamedState.A)
    c_a = a_vec.overlap(psi0)
    rest = psi0 - a_vec * c_a
    _require_qubit_sector(rest)
    c00, c01, c10, c11 = qubit_amplitudes(rest)

    if kind is GateKind.PHASE:
        th = params.omega * t * SQRT1_2 / 2.0
        cos, sin = math.cos(th), math.sin(th)
        n01 = cos * c01 + 1j * sin * c_a
        na = cos * c_a + 1j * sin * c01
        n10 = c10
    else:
        th = params.omega * t / 2.0
        cos, sin = math.cos(th), math.sin(th)
        dark = SQRT1_2 * (c01 + c10)
        bright = SQRT1_2 * (c10 - c01)
        nb = cos * bright - 1j * sin * c_a
        na = cos * c_a - 1j * sin * bright
        n01 = SQRT1_2 * (dark - nb)
        n10 = SQRT1_2 * (dark + nb)

    amps = np.zeros(sp.dim, dtype=complex)
    amps[sp.index((0, 0, 0))] = c00
    amps[sp.index((0, 0, 1))] = n01
    amps[sp.index((0, 1, 0))] = n10
    amps[sp.index((0, 1, 1))] = c11
    return StateVector(sp, amps) + a_vec * na


def gate_operator(kind: GateKind, params: GateParams, mode: Mode) -> Operator:
    space = params.space
    if mode is Mode.CONDITIONAL:
        return build_conditional(space, params, kind)
    coherent = params.replace(g3=0.0, gamma3=0.0)
    if kind is GateKind.PHASE:
        return build_coherent(space, coherent)
    return build_conditional_swap(space, coherent)


def _leak_index(label: str):
    if label == "0s":
        return None
    return tuple(int(ch) for ch in label)


def leaked_populations(psi: StateVector) -> dict[str, float]:
    """Populations of the labelled leak states in the normalized ``psi``."""
    psi = psi.normalized()
    s = named_state(psi.space, NamedState.S)
    out = {}
    for label in LEAK_LABELS:
        idx = _leak_index(label)
        amp = s.overlap(psi) if idx is None else psi[idx]
        out[label] = abs(amp) ** 2
    return out


@dataclass
class GateReport:
    kind: GateKind
    mode: Mode
    params: GateParams
    initial_state: str
    fidelity_numeric: float
    fidelity_analytic: float | None
    success_numeric: float
    success_analytic: float | None
    norm_final: float
    steps_taken: int
    error_estimate: float
    gate_time: float
    leaked_populations: dict[str, float] = field(default_factory=dict)
    leaked_predicted: dict[str, float] = field(default_factory=dict)

    @property
    def fidelity_delta(self) -> float | None:
        if self.fidelity_analytic is None:
            return None
        return self.fidelity_numeric - self.fidelity_analytic

    @property
    def success_delta(self) -> float | None:
        if self.success_analytic is None:
            return None
        return self.success_numeric - self.success_analytic

    def to_text(self) -> str:
        """Flat ``key=value`` lines."""
        def fmt(v):
            if v is None:
                return "na"
            if isinstance(v, float):
                return f"{v:.12g}"
            return str(v)

        pairs = [
            ("gate", self.kind.value),
            ("mode", self.mode.value),
            ("initial_state", self.initial_state),
            ("omega_over_g2", self.params.omega),
            ("g3", self.params.g3),
            ("gamma3", self.params.gamma3),
            ("n_max", self.params.n_max),
            ("recommended_regime", self.params.recommended_regime),
            ("gate_time", self.gate_time),
            ("fidelity_numeric", self.fidelity_numeric),
            ("fidelity_analytic", self.fidelity_analytic),
            ("fidelity_delta", self.fidelity_delta),
            ("success_numeric", self.success_numeric),
            ("success_analytic", self.success_analytic),
            ("success_delta", self.success_delta),
            ("norm_final", self.norm_final),
            ("steps_taken", self.steps_taken),
            ("error_estimate", self.error_estimate),
        ]
        pairs += [(f"leak_{k}", v) for k, v in self.leaked_populations.items()]
        pairs += [(f"leak_predicted_{k}", v) for k, v in self.leaked_predicted.items()]
        return "".join(f"{k}={fmt(v)}\n" for k, v in pairs)


def run_gate(
    kind: GateKind,
    params: GateParams,
    psi0: StateVector,
    mode: Mode = Mode.COHERENT,
    *,
    tol: float = DEFAULT_TOL,
    method: str = "rk4",
    label: str = "",
) -> GateReport:
    """Evolve ``psi0`` for one gate time and score it against the ideal gate."""
    _require_qubit_sector(psi0)
    if psi0.space.n_max != params.n_max:
        raise ValueError("initial state and params disagree on n_max")
    psi0 = psi0.normalized()
    t_gate = kind.gate_time(params.omega)
    result = evolve(gate_operator(kind, params, mode), psi0, t_gate, tol, method=method)
    final = result.final_state
    target = ideal_gate(kind, psi0)

    if mode is Mode.COHERENT:
        scored, success = final, 1.0
    elif mode is Mode.CONDITIONAL:
        scored, success = final, result.norm_squared
    else:
        scored, success = project_phonon_ground(final)
    fidelity = abs(target.overlap(scored.normalized())) ** 2

    fid_an = succ_an = None
    predicted: dict[str, float] = {}
    if kind is GateKind.PHASE:
        fid_an = analytic_fidelity(params, psi0)
        dissipative = mode is Mode.CONDITIONAL
        amps = perturbative_leakage(params, psi0, dissipative)
        predicted = {k: abs(v) ** 2 for k, v in amps.items()}
        if mode is Mode.COHERENT:
            succ_an = 1.0
        elif mode is Mode.CONDITIONAL:
            succ_an = analytic_success(params, psi0)
        else:
            # first-order population left in n > 0
            succ_an = 1.0 - sum(p for k, p in predicted.items() if k[0] != "0")

    return GateReport(
        kind=kind,
        mode=mode,
        params=params,
        initial_state=label,
        fidelity_numeric=float(fidelity),
        fidelity_analytic=fid_an,
        success_numeric=float(success),
        success_analytic=succ_an,
        norm_final=result.norm_squared,
        steps_taken=result.steps_taken,
        error_estimate=result.error_estimate,
        gate_time=t_gate,
        leaked_populations=leaked_populations(final),
        leaked_predicted=predicted,
    )
