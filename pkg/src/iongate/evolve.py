"""Time evolution under Hermitian and conditional (non-Hermitian) generators.

The default integrator is classical fourth-order Runge-Kutta with a fixed
step.  Because every generator here is time independent, ``N`` RK4 steps
are the matrix power ``P(h)**N`` of the one-step propagator

    P(h) = 1 + z + z**2/2 + z**3/6 + z**4/24,   z = -i h H,

which is evaluated by repeated squaring.  The result is the RK4 answer
(not an approximation to it) and costs ``O(log N)`` dense products.

Accuracy is certified by step halving: with ``y_N`` and ``y_2N`` the
Richardson estimate of the error of ``y_2N`` is ``max|y_N - y_2N| / 15``.
The step count doubles until the estimate is below ``tol``.

The conditional norm is never renormalized; it is the no-photon
probability.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .hamiltonian import GateParams, Operator
from .hilbert import BasisIndex, NamedState, Space, StateVector, named_state

RK4_ORDER = 4
INITIAL_STEP_BOUND = 0.05  # ||H|| * h for the first attempt
DEFAULT_TOL = 1e-8
MAX_STEPS = 2**34


class IntegrationError(RuntimeError):
    """Step halving ran out of budget before reaching the tolerance."""

    def __init__(self, message: str, estimate: float, steps: int):
        super().__init__(message)
        self.estimate = estimate
        self.steps = steps


@dataclass
class EvolutionResult:
    final_state: StateVector
    norm_squared: float
    steps_taken: int
    step_size: float
    error_estimate: float
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    trajectory: list[StateVector] = field(default_factory=list)

    @property
    def checkpoint_norms(self) -> np.ndarray:
        return np.array([s.norm_squared for s in self.trajectory])


def rk4_propagator(h_dense: np.ndarray, step: float) -> np.ndarray:
    z = -1j * step * h_dense
    eye = np.eye(h_dense.shape[0], dtype=complex)
    # Horner form of the degree-4 Taylor polynomial.
    return eye + z @ (eye + z @ (eye + z @ (eye + z / 4) / 3) / 2)


def rk4_fixed(op: Operator, psi0: StateVector, t_final: float, steps: int) -> np.ndarray:
    """Amplitudes after ``steps`` equal RK4 steps (no certification)."""
    p = rk4_propagator(op.dense(), t_final / steps)
    return np.linalg.matrix_power(p, steps) @ psi0.amplitudes


def _check_inputs(op: Operator, psi0: StateVector, t_final: float, tol: float):
    if op.dim != psi0.space.dim:
        raise ValueError(f"operator dimension {op.dim} does not match state dimension {psi0.space.dim}")
    if not t_final > 0:
        raise ValueError(f"t_final must be > 0, got {t_final!r}")
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol!r}")


def _initial_steps(op: Operator, t_final: float, checkpoints: int) -> int:
    n = max(1, math.ceil(t_final * op.norm_bound() / INITIAL_STEP_BOUND))
    if checkpoints:
        n = checkpoints * math.ceil(n / checkpoints)
    return n


def evolve(
    op: Operator,
    psi0: StateVector,
    t_final: float,
    tol: float = DEFAULT_TOL,
    *,
    method: str = "rk4",
    checkpoints: int = 0,
    max_steps: int = MAX_STEPS,
) -> EvolutionResult:
    """Propagate ``psi0`` by ``exp(-i H t_final)``.

    ``method="expm"`` uses a dense matrix exponential instead; its estimate
    is the disagreement with two half-interval exponentials.  With
    ``checkpoints=k`` the state is also recorded at ``k`` uniform times
    (the last one is ``t_final``).
    """
    _check_inputs(op, psi0, t_final, tol)
    h = op.dense()
    if method == "expm":
        return _evolve_expm(h, psi0, t_final, tol, checkpoints)
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")

    n = _initial_steps(op, t_final, checkpoints)
    y_coarse = np.linalg.matrix_power(rk4_propagator(h, t_final / n), n) @ psi0.amplitudes
    estimate = math.inf
    while True:
        fine = 2 * n
        if fine > max_steps:
            raise IntegrationError(
                f"step halving exceeded {max_steps} steps (estimate {estimate:.3g} > tol {tol:.3g})",
                estimate=estimate,
                steps=n,
            )
        p_fine = rk4_propagator(h, t_final / fine)
        y_fine = np.linalg.matrix_power(p_fine, fine) @ psi0.amplitudes
        estimate = float(np.max(np.abs(y_fine - y_coarse))) / (2**RK4_ORDER - 1)
        if estimate <= tol:
            break
        n, y_coarse = fine, y_fine

    times = np.zeros(0)
    trajectory: list[StateVector] = []
    if checkpoints:
        chunk = np.linalg.matrix_power(p_fine, fine // checkpoints)
        y = psi0.amplitudes
        for _ in range(checkpoints):
            y = chunk @ y
            trajectory.append(StateVector(psi0.space, y))
        times = t_final * np.arange(1, checkpoints + 1) / checkpoints
        y_fine = trajectory[-1].amplitudes

    final = StateVector(psi0.space, y_fine)
    return EvolutionResult(
        final_state=final,
        norm_squared=final.norm_squared,
        steps_taken=fine,
        step_size=t_final / fine,
        error_estimate=estimate,
        times=times,
        trajectory=trajectory,
    )


def _evolve_expm(h: np.ndarray, psi0: StateVector, t_final: float, tol: float, checkpoints: int) -> EvolutionResult:
    y = scipy.linalg.expm(-1j * t_final * h) @ psi0.amplitudes
    half = scipy.linalg.expm(-0.5j * t_final * h)
    estimate = float(np.max(np.abs(half @ (half @ psi0.amplitudes) - y)))
    if estimate > tol:
        raise IntegrationError(f"matrix exponential inconsistent at {estimate:.3g}", estimate=estimate, steps=1)
    times = np.zeros(0)
    trajectory: list[StateVector] = []
    if checkpoints:
        times = t_final * np.arange(1, checkpoints + 1) / checkpoints
        chunk = scipy.linalg.expm(-1j * (t_final / checkpoints) * h)
        z = psi0.amplitudes
        for _ in range(checkpoints):
            z = chunk @ z
            trajectory.append(StateVector(psi0.space, z))
    final = StateVector(psi0.space, y)
    return EvolutionResult(final, final.norm_squared, 1, t_final, estimate, times, trajectory)


def project_phonon_ground(psi: StateVector, strict: bool = False) -> tuple[StateVector, float]:
    """Zero every amplitude with ``n > 0``.

    Returns the unnormalized projected state and the conditional success
    probability ``||P psi||**2 / ||psi||**2``.  With ``strict=True`` the
    zero-phonon states with an ion in level 2 or 3 are rejected as well.
    """
    norm2 = psi.norm_squared
    if norm2 == 0.0:
        raise ValueError("cannot project the zero vector")
    space = psi.space
    keep = space.phonon_numbers() == 0
    if strict:
        l1, l2 = space.levels()
        keep &= (l1 < 2) & (l2 < 2)
    projected = StateVector(space, np.where(keep, psi.amplitudes, 0.0))
    return projected, projected.norm_squared / norm2


@dataclass
class TruncationReport:
    n_max: int
    max_difference: float
    threshold: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.max_difference < self.threshold


def check_truncation(
    builder: Callable[[Space, GateParams], Operator],
    params: GateParams,
    psi0: StateVector,
    t_final: float,
    tol: float = DEFAULT_TOL,
    threshold: float = 1e-6,
) -> TruncationReport:
    """Compare evolution at ``n_max`` and ``n_max + 1`` amplitude by amplitude."""
    small = params
    large = params.replace(n_max=params.n_max + 1)
    r_small = evolve(builder(small.space, small), psi0, t_final, tol)
    r_large = evolve(builder(large.space, large), psi0.embed(large.n_max), t_final, tol)
    diff = np.abs(r_small.final_state.embed(large.n_max).amplitudes - r_large.final_state.amplitudes)
    return TruncationReport(params.n_max, float(np.max(diff)), threshold)


TRAJECTORY_COLUMNS = ("t", "norm2", "p000", "p001", "p010", "p011", "p0a", "p0s")


def trajectory_rows(result: EvolutionResult) -> list[tuple[float, ...]]:
    if not result.trajectory:
        raise ValueError("result has no checkpoints; evolve with checkpoints > 0")
    space = result.final_state.space
    a = named_state(space, NamedState.A)
    s = named_state(space, NamedState.S)
    qubits = [space.index(BasisIndex(0, i, j)) for i in (0, 1) for j in (0, 1)]
    rows = []
    for t, psi in zip(result.times, result.trajectory):
        pops = [abs(psi.amplitudes[k]) ** 2 for k in qubits]
        rows.append((float(t), psi.norm_squared, *pops, abs(a.overlap(psi)) ** 2, abs(s.overlap(psi)) ** 2))
    return rows


def write_trajectory(result: EvolutionResult, path) -> None:
    buf = io.StringIO()
    buf.write(",".join(TRAJECTORY_COLUMNS) + "\n")
    for row in trajectory_rows(result):
        buf.write(",".join(f"{x:.12g}" for x in row) + "\n")
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
