import numpy as np
import pytest

from locc_forge import (
    phase_five,
    qubit_pair,
    rotated_dominoes,
    seven_outcome_family,
)

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
PLUS = (KET0 + KET1) / np.sqrt(2)
MINUS = (KET0 - KET1) / np.sqrt(2)

P0 = np.outer(KET0, KET0.conj())
P1 = np.outer(KET1, KET1.conj())
PPLUS = np.outer(PLUS, PLUS.conj())
PMINUS = np.outer(MINUS, MINUS.conj())

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
EYE2 = np.eye(2, dtype=complex)


@pytest.fixture(scope="session")
def m_pair():
    return qubit_pair()


@pytest.fixture(scope="session")
def m_phase():
    return phase_five()


@pytest.fixture(scope="session")
def m_dominoes():
    return rotated_dominoes()


@pytest.fixture(scope="session")
def m_seven():
    return seven_outcome_family(0)


@pytest.fixture(scope="session")
def catalog_all(m_pair, m_phase, m_dominoes, m_seven):
    return {
        "qubit-pair": m_pair,
        "phase-five": m_phase,
        "rotated-dominoes": m_dominoes,
        "seven-outcome-family": m_seven,
    }
