from itertools import combinations

import numpy as np
import pytest
import scipy.linalg

from uccscreen.errors import DomainError
from uccscreen.fockspace import Excitor, reference_determinant, slater_condon
from uccscreen.jw import (
    QubitOperator,
    jw_annihilation,
    jw_creation,
    jw_excitation,
    jw_hamiltonian,
    pauli_gadget_sequence,
    strings_commute,
)
from uccscreen.simulator import dense_matrix, sector_basis, slater_condon_matrix

from conftest import dense_annihilation, dense_creation, dense_excitor, make_random_table


def test_jw_ops_match_independent_dense_construction():
    n = 4
    for p in range(n):
        assert np.allclose(dense_matrix(jw_creation(p, n)), dense_creation(p, n))
        assert np.allclose(dense_matrix(jw_annihilation(p, n)), dense_annihilation(p, n))


def test_canonical_anticommutation_relations():
    n = 6
    eye = np.eye(1 << n)
    for p in range(n):
        for q in range(n):
            a_p = dense_matrix(jw_annihilation(p, n))
            adag_q = dense_matrix(jw_creation(q, n))
            a_q = dense_matrix(jw_annihilation(q, n))
            anti = a_p @ adag_q + adag_q @ a_p
            assert np.allclose(anti, eye if p == q else 0.0, atol=1e-12)
            assert np.allclose(a_p @ a_q + a_q @ a_p, 0.0, atol=1e-12)


def test_number_operator_identity_minus_z():
    n = 3
    for j in range(n):
        num = jw_creation(j, n) * jw_annihilation(j, n)
        axes = ["I"] * n
        axes[j] = "Z"
        expected = QubitOperator.identity(n, 0.5) - QubitOperator.from_axes("".join(axes), 0.5)
        assert num.terms.keys() == expected.terms.keys()
        for key, coeff in expected.terms.items():
            assert num.terms[key] == pytest.approx(coeff)


def test_single_excitation_strings():
    op = jw_excitation(Excitor((0,), (2,)), 4)
    assert len(op) == 2
    coeffs = sorted(c.imag for c in op.terms.values())
    assert coeffs == pytest.approx([-0.5, 0.5])
    for term in op.pauli_terms():
        assert term.coeff.real == pytest.approx(0.0)
        letters = set(term.axes)
        assert letters <= {"I", "X", "Y", "Z"}
        assert term.axes[1] == "Z"  # chain between orbital 0 and 2
        assert {term.axes[0], term.axes[2]} == {"X", "Y"}


def test_single_excitation_long_chain():
    op = jw_excitation(Excitor((0,), (3,)), 4)
    for term in op.pauli_terms():
        assert term.axes[1] == "Z"
        assert term.axes[2] == "Z"


def test_double_excitation_term_count_and_weights():
    op = jw_excitation(Excitor((0, 1), (2, 3)), 4)
    assert len(op) == 8
    imags = sorted(c.imag for c in op.terms.values())
    assert imags == pytest.approx([-0.125] * 4 + [0.125] * 4)


def test_unsupported_level():
    with pytest.raises(DomainError):
        jw_excitation(Excitor((0, 1, 2), (3, 4, 5)), 6)


def test_excitation_matches_dense_antihermitian():
    n = 4
    for exc in [Excitor((0,), (2,)), Excitor((1,), (3,)), Excitor((0, 1), (2, 3))]:
        tau = dense_excitor(exc, n)
        assert np.allclose(dense_matrix(jw_excitation(exc, n)), tau - tau.conj().T)


def test_excitation_strings_commute():
    for exc in [Excitor((0,), (3,)), Excitor((0, 1), (2, 3)), Excitor((1, 2), (4, 5))]:
        terms = jw_excitation(exc, 6).pauli_terms()
        for t1 in terms:
            for t2 in terms:
                assert strings_commute(t1.axes, t2.axes)


def test_hamiltonian_hermitian_and_reference_energy():
    table = make_random_table(2, 2, seed=13)
    ham = jw_hamiltonian(table)
    assert ham.is_hermitian()
    mat = dense_matrix(ham)
    assert np.abs(mat - mat.conj().T).max() < 1e-12
    ref = reference_determinant(table)
    assert mat[ref, ref].real == pytest.approx(
        slater_condon(table, ref, ref), abs=1e-12
    )


def test_hamiltonian_sector_eigenvalues_match_ci_matrix():
    table = make_random_table(3, 2, seed=8)
    mat = dense_matrix(jw_hamiltonian(table))
    basis = sector_basis(table.n_orb, table.n_alpha, table.n_beta)
    sub = mat[np.ix_(basis, basis)]
    eigs_qubit = np.linalg.eigvalsh(sub)
    eigs_ci = np.linalg.eigvalsh(slater_condon_matrix(table, basis).toarray())
    assert np.allclose(eigs_qubit, eigs_ci, atol=1e-10)


def test_gadget_sequence_zero_amplitude_and_counts():
    single = pauli_gadget_sequence(Excitor((0,), (2,)), 0.0, 4)
    assert len(single) == 2
    assert all(angle == 0.0 for _, angle in single)
    double = pauli_gadget_sequence(Excitor((0, 1), (2, 3)), 0.3, 4)
    assert len(double) == 8
    assert [axes for axes, _ in double] == sorted(axes for axes, _ in double)


def test_gadget_sequence_composes_to_exponential():
    from uccscreen.simulator import StateVector, apply_gadget

    n = 4
    t = 0.37
    for exc in [Excitor((0,), (2,)), Excitor((0, 1), (2, 3))]:
        tau = dense_excitor(exc, n)
        target = scipy.linalg.expm(t * (tau - tau.conj().T))
        composed = np.eye(1 << n, dtype=complex)
        for axes, angle in pauli_gadget_sequence(exc, t, n):
            gate = np.zeros((1 << n, 1 << n), dtype=complex)
            for col in range(1 << n):
                state = StateVector(n)
                state.amps[col] = 1.0
                gate[:, col] = apply_gadget(state, axes, angle).amps
            composed = gate @ composed
        assert np.abs(composed - target).max() < 1e-12
