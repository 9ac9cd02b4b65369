import sys

import numpy as np
import pytest
import scipy.linalg

from iongate.hilbert import NamedState, Space, named_state


def ket_bra(i, j, d=4):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


def kron_hamiltonian(n_max, omega, g2=1.0, g3=0.0, gamma3=0.0, laser_ions=(1,)):
    """Dense reference built from Kronecker products (phonon x ion1 x ion2)."""
    d = n_max + 1
    bdag = np.diag(np.sqrt(np.arange(1, d)), -1).astype(complex)
    eye_p, eye_i = np.eye(d), np.eye(4)

    def ion1(op):
        return np.kron(np.kron(eye_p, op), eye_i)

    def ion2(op):
        return np.kron(np.kron(eye_p, eye_i), op)

    def phonon(op):
        return np.kron(op, np.kron(eye_i, eye_i))

    h = np.zeros((16 * d, 16 * d), dtype=complex)
    for j, g in ((2, g2), (3, g3)):
        for ion in (ion1, ion2):
            h += 1j * g * ion(ket_bra(1, j)) @ phonon(bdag)
    for i, ion in ((1, ion1), (2, ion2)):
        if i in laser_ions:
            h += 0.5 * omega * ion(ket_bra(0, 2))
    h = h + h.conj().T
    h += -0.5j * gamma3 * (ion1(ket_bra(3, 3)) + ion2(ket_bra(3, 3)))
    return h


def expm_evolve(h, amplitudes, t):
    return scipy.linalg.expm(-1j * t * h) @ amplitudes


@pytest.fixture
def space():
    return Space(3)


@pytest.fixture
def q(space):
    def get(label):
        return named_state(space, NamedState.parse(label))

    return get


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion, whether or not output is captured
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        passed, detail = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
