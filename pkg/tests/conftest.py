import functools
from pathlib import Path

import numpy as np
import pytest

from uccscreen.integrals import IntegralTable, eri_key

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"

_I2 = np.eye(2)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def kron_chain(factors):
    """Dense operator from per-qubit factors, qubit 0 least significant."""
    return functools.reduce(np.kron, reversed(list(factors)))


def dense_annihilation(p: int, n_qubits: int) -> np.ndarray:
    """Independent Jordan-Wigner a_p as a dense matrix (Z chain below p)."""
    lowering = 0.5 * (_X + 1j * _Y)  # |0><1|
    factors = [_Z if q < p else lowering if q == p else _I2 for q in range(n_qubits)]
    return kron_chain(factors)


def dense_creation(p: int, n_qubits: int) -> np.ndarray:
    return dense_annihilation(p, n_qubits).conj().T


def dense_excitor(exc, n_qubits: int) -> np.ndarray:
    """tau = a+_{a1} a+_{a2} a_{i2} a_{i1} as a dense matrix (index sets
    ascending), the aligned-pairing convention used across the package."""
    mat = np.eye(1 << n_qubits, dtype=complex)
    for a in exc.to_orbs:
        mat = mat @ dense_creation(a, n_qubits)
    for i in reversed(exc.from_orbs):
        mat = mat @ dense_annihilation(i, n_qubits)
    return mat


def make_random_table(n_orb: int, n_elec: int, ms2: int = 0, seed: int = 0) -> IntegralTable:
    """Small synthetic integral table with full 8-fold ERI symmetry."""
    rng = np.random.default_rng(seed)
    h = {}
    for p in range(1, n_orb + 1):
        for q in range(1, p + 1):
            h[(p, q)] = rng.normal() * 0.1
        h[(p, p)] = -2.0 + 0.7 * p  # spread diagonal for a clean Aufbau gap
    eri = {}
    for p in range(1, n_orb + 1):
        for q in range(1, n_orb + 1):
            for r in range(1, n_orb + 1):
                for s in range(1, n_orb + 1):
                    key = eri_key(p, q, r, s)
                    if key not in eri:
                        eri[key] = rng.normal() * 0.05
    return IntegralTable(
        n_orb=n_orb,
        n_elec=n_elec,
        ms2=ms2,
        orb_sym=tuple([1] * n_orb),
        e_core=rng.normal(),
        h_core=h,
        eri=eri,
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


def fixture_path(name: str) -> Path:
    path = FIXTURE_DIR / name
    if not path.exists():
        pytest.skip(f"fixture {name} not generated")
    return path
