"""Dense state-vector simulation and exact-diagonalization oracles.

Basis index bits follow the determinant convention: bit q of a basis index
is the occupation of spin orbital q.  Pauli rotations are applied exactly
(each string pairs basis states connected by its X/Y support), so no Trotter
error is introduced beyond the ansatz's own single-step splitting.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError
from .fockspace import (
    alpha_count,
    beta_count,
    det_from_orbitals,
    irrep_xor,
    occupied_orbitals,
    slater_condon,
)
from .integrals import IntegralTable
from .jw import QubitOperator, axes_to_masks

MAX_QUBITS = 16


class StateVector:
    """Complex amplitudes over the full 2^n register."""

    __slots__ = ("n_qubits", "amps")

    def __init__(self, n_qubits: int, amps: np.ndarray | None = None):
        if n_qubits > MAX_QUBITS:
            raise DomainError(f"register of {n_qubits} qubits exceeds cap {MAX_QUBITS}")
        self.n_qubits = n_qubits
        if amps is None:
            amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        if amps.shape != (1 << n_qubits,):
            raise DomainError("amplitude vector has wrong length")
        self.amps = np.asarray(amps, dtype=np.complex128)

    @classmethod
    def basis_state(cls, n_qubits: int, det: int) -> "StateVector":
        state = cls(n_qubits)
        state.amps[det] = 1.0
        return state

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def _term_action(amps: np.ndarray, x: int, z: int) -> np.ndarray:
    """P|psi> for the true Pauli string with masks (x, z)."""
    n = amps.shape[0]
    idx = np.arange(n, dtype=np.int64)
    src = idx ^ x
    par = np.bitwise_count(np.bitwise_and(src, z)) & 1
    phase = (1j) ** ((x & z).bit_count() & 3)
    return phase * (1.0 - 2.0 * par) * amps[src]


def apply_operator(state: StateVector, op: QubitOperator) -> StateVector:
    out = np.zeros_like(state.amps)
    for (x, z), c in op.terms.items():
        out += c * _term_action(state.amps, x, z)
    return StateVector(state.n_qubits, out)


def apply_gadget(state: StateVector, axes: str, angle: float) -> StateVector:
    """exp(-i*angle/2 * P) applied exactly; unitary, norm preserving."""
    if len(axes) != state.n_qubits:
        raise DomainError(f"axes length {len(axes)} != register {state.n_qubits}")
    x, z = axes_to_masks(axes)
    half = 0.5 * angle
    rotated = np.cos(half) * state.amps - 1j * np.sin(half) * _term_action(state.amps, x, z)
    return StateVector(state.n_qubits, rotated)


def expectation(state: StateVector, op: QubitOperator) -> float:
    if not op.is_hermitian():
        raise DomainError("expectation requires a Hermitian operator")
    val = 0.0 + 0.0j
    amps = state.amps
    n = amps.shape[0]
    idx = np.arange(n, dtype=np.int64)
    for (x, z), c in op.terms.items():
        par = np.bitwise_count(np.bitwise_and(idx, z)) & 1
        phase = (1j) ** ((x & z).bit_count() & 3)
        val += c * phase * np.sum(np.conj(amps[idx ^ x]) * (1.0 - 2.0 * par) * amps)
    assert abs(val.imag) < 1e-10, f"imaginary expectation residue {val.imag:.3e}"
    return float(val.real)


def dense_matrix(op: QubitOperator) -> np.ndarray:
    """Dense matrix of the operator; intended for oracle-sized registers."""
    n = op.n_qubits
    if n > 12:
        raise DomainError("dense matrix only supported up to 12 qubits")
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for (x, z), c in op.terms.items():
        par = np.bitwise_count(np.bitwise_and(idx, z)) & 1
        phase = (1j) ** ((x & z).bit_count() & 3)
        mat[idx ^ x, idx] += c * phase * (1.0 - 2.0 * par)
    return mat


def sector_basis(
    n_orb: int,
    n_alpha: int,
    n_beta: int,
    orb_sym=None,
    sym_sector: int | None = None,
) -> np.ndarray:
    """Sorted determinant indices with the given particle/spin content,
    optionally restricted to a spatial irrep (0-based XOR label)."""
    dets = []
    for alpha in combinations(range(n_orb), n_alpha):
        det_a = det_from_orbitals(2 * p for p in alpha)
        for beta in combinations(range(n_orb), n_beta):
            det = det_a | det_from_orbitals(2 * p + 1 for p in beta)
            if sym_sector is not None and irrep_xor(orb_sym, occupied_orbitals(det)) != sym_sector:
                continue
            dets.append(det)
    return np.array(sorted(dets), dtype=np.int64)


def sector_matrix(op: QubitOperator, basis: np.ndarray) -> sp.csr_matrix:
    """The operator restricted to the given sorted basis of determinants."""
    rows, cols, vals = [], [], []
    positions = np.arange(len(basis))
    for (x, z), c in op.terms.items():
        dst = basis ^ x
        pos = np.searchsorted(basis, dst)
        ok = (pos < len(basis)) & (basis[np.minimum(pos, len(basis) - 1)] == dst)
        par = np.bitwise_count(np.bitwise_and(basis[ok], z)) & 1
        phase = (1j) ** ((x & z).bit_count() & 3)
        rows.append(pos[ok])
        cols.append(positions[ok])
        vals.append(c * phase * (1.0 - 2.0 * par))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(basis), len(basis)),
        dtype=np.complex128,
    )
    return mat.tocsr()


def _connected_excitations(det: int, n_spin: int):
    """Spin-conserving single and double excitations of a determinant."""
    occ = occupied_orbitals(det)
    occ_set = set(occ)
    virt = [q for q in range(n_spin) if q not in occ_set]
    for i in occ:
        for a in virt:
            if i % 2 == a % 2:
                yield det ^ (1 << i) | (1 << a)
    for ii, i in enumerate(occ):
        for j in occ[ii + 1 :]:
            for ai, a in enumerate(virt):
                for b in virt[ai + 1 :]:
                    if (i % 2) + (j % 2) == (a % 2) + (b % 2):
                        yield det ^ (1 << i) ^ (1 << j) | (1 << a) | (1 << b)


def slater_condon_matrix(table: IntegralTable, basis: np.ndarray) -> sp.csr_matrix:
    """CI Hamiltonian over a determinant basis, built from Slater-Condon rules."""
    index = {int(d): i for i, d in enumerate(basis)}
    n_spin = table.n_spin_orb
    rows, cols, vals = [], [], []
    for i, d in enumerate(basis):
        d = int(d)
        rows.append(i)
        cols.append(i)
        vals.append(slater_condon(table, d, d))
        for d2 in _connected_excitations(d, n_spin):
            j = index.get(d2)
            if j is None or j <= i:
                continue
            hij = slater_condon(table, d, d2)
            if hij != 0.0:
                rows.extend((i, j))
                cols.extend((j, i))
                vals.extend((hij, hij))
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(basis), len(basis)))


def fci_oracle(
    table: IntegralTable,
    n_elec: int | None = None,
    ms2: int | None = None,
    sym_sector: int | None = None,
) -> float:
    """Ground-state energy in the (particle number, M_s, irrep) sector by
    direct diagonalization of the Slater-Condon CI matrix."""
    n_elec = table.n_elec if n_elec is None else n_elec
    ms2 = table.ms2 if ms2 is None else ms2
    n_alpha = (n_elec + ms2) // 2
    n_beta = (n_elec - ms2) // 2
    basis = sector_basis(table.n_orb, n_alpha, n_beta, table.orb_sym, sym_sector)
    if len(basis) == 0:
        raise DomainError("empty symmetry sector")
    if len(basis) > 20000:
        raise DomainError(f"sector dimension {len(basis)} too large for the oracle")
    mat = slater_condon_matrix(table, basis)
    if len(basis) <= 400:
        return float(np.linalg.eigvalsh(mat.toarray()).min())
    vals = spla.eigsh(mat, k=1, which="SA", return_eigenvectors=False)
    return float(vals[0])
