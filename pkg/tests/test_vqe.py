import numpy as np
import pytest

from uccscreen.errors import ConvergenceError, DomainError
from uccscreen.fockspace import Excitor, enumerate_uccsd, reference_determinant
from uccscreen.integrals import freeze_core, load_fcidump
from uccscreen.jw import jw_hamiltonian
from uccscreen.simulator import expectation, fci_oracle
from uccscreen.vqe import (
    AnsatzSpec,
    VqeEngine,
    energy_and_gradient,
    minimize,
    prepare_state,
    reorder_ansatz,
    solve_vqe,
    uccsd_ansatz,
)

from conftest import fixture_path, make_random_table


def _random_spec(table, seed=0, symmetric=False):
    ref = reference_determinant(table)
    excitors = enumerate_uccsd(ref, table.orb_sym, apply_symmetry=symmetric)
    rng = np.random.default_rng(seed)
    params = rng.normal(scale=0.15, size=len(excitors))
    spec = uccsd_ansatz(table, ref, excitors=excitors, init_params=params)
    return spec, params


def test_prepare_state_zero_params_is_reference():
    table = make_random_table(3, 2, seed=1)
    spec, _ = _random_spec(table)
    state = prepare_state(spec, np.zeros(len(spec)))
    ref = reference_determinant(table)
    assert state.amps[ref] == pytest.approx(1.0)
    assert np.abs(np.delete(state.amps, ref)).max() < 1e-14


def test_prepare_state_single_excitation_rotation():
    # one single excitation on a 2-qubit register: cos/sin amplitudes
    spec = AnsatzSpec(2, 0b01, (Excitor((0,), (1,)),), (0.0,))
    t = 0.3
    state = prepare_state(spec, [t])
    assert abs(state.amps[0b01]) == pytest.approx(np.cos(t))
    assert abs(state.amps[0b10]) == pytest.approx(np.sin(t))


def test_engine_matches_public_gadget_path():
    table = make_random_table(3, 4, seed=5)
    spec, params = _random_spec(table, seed=3)
    ham = jw_hamiltonian(table)
    engine = VqeEngine(spec, ham)
    sector_state = engine.to_statevector(params)
    gadget_state = prepare_state(spec, params)
    # global phase is fixed to +1 on the reference by both paths
    assert np.abs(sector_state.amps - gadget_state.amps).max() < 1e-12
    assert engine.energy(params) == pytest.approx(
        expectation(gadget_state, ham), abs=1e-12
    )


def test_gradient_matches_finite_differences():
    table = make_random_table(3, 2, seed=9)
    spec, params = _random_spec(table, seed=11)
    ham = jw_hamiltonian(table)
    engine = VqeEngine(spec, ham)
    energy, grad = engine.energy_and_gradient(params)
    step = 1e-5
    for k in range(len(params)):
        shifted = params.copy()
        shifted[k] += step
        e_plus = engine.energy(shifted)
        shifted[k] -= 2 * step
        e_minus = engine.energy(shifted)
        fd = (e_plus - e_minus) / (2 * step)
        assert grad[k] == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_gradient_brillouin_zero_singles():
    table = fixture_and_table("lih_r1.595.fcidump")
    t = freeze_core(table, 1)
    ref = reference_determinant(t)
    spec = uccsd_ansatz(t, ref)
    ham = jw_hamiltonian(t)
    _, grad = energy_and_gradient(spec, np.zeros(len(spec)), ham)
    for exc, g in zip(spec.excitors, grad):
        if exc.level == 1:
            assert abs(g) < 1e-10


def fixture_and_table(name):
    return load_fcidump(fixture_path(name))


def test_h2_uccd_reaches_fci():
    table = fixture_and_table("h2_r0.74.fcidump")
    result, spec, engine = solve_vqe(table)
    fci = fci_oracle(table, sym_sector=0)
    assert result.energy == pytest.approx(fci, abs=1e-9)
    assert result.energy >= fci - 1e-10  # variational bound


def test_minimize_restart_is_stationary():
    table = fixture_and_table("h2_r0.74.fcidump")
    result, spec, engine = solve_vqe(table)
    restart = AnsatzSpec(
        spec.n_qubits, spec.reference, spec.excitors, tuple(result.params)
    )
    again = minimize(restart, jw_hamiltonian(table), engine=engine)
    assert again.iterations <= 1
    assert again.energy == pytest.approx(result.energy, abs=1e-12)


def test_minimize_tol_validation_and_convergence_error():
    table = fixture_and_table("h2_r0.74.fcidump")
    ref = reference_determinant(table)
    spec = uccsd_ansatz(table, ref)
    ham = jw_hamiltonian(table)
    with pytest.raises(DomainError):
        minimize(spec, ham, tol=0.0)
    with pytest.raises(ConvergenceError) as err:
        minimize(spec, ham, max_iter=1, tol=1e-12)
    assert err.value.result is not None
    assert err.value.result.energy < 0.0


def test_reorder_ansatz_permutes_and_validates():
    table = make_random_table(3, 2, seed=2)
    spec, params = _random_spec(table)
    identity = reorder_ansatz(spec, range(len(spec)))
    assert identity.excitors == spec.excitors
    rev = reorder_ansatz(spec, range(len(spec) - 1, -1, -1))
    assert rev.excitors == spec.excitors[::-1]
    assert rev.init_params == spec.init_params[::-1]
    with pytest.raises(DomainError):
        reorder_ansatz(spec, [0] * len(spec))
    # both orders at zero parameters prepare the same reference state
    zero = np.zeros(len(spec))
    assert np.allclose(
        prepare_state(spec, zero).amps, prepare_state(rev, zero).amps
    )


def test_prepare_state_norm_for_any_params(rng):
    table = make_random_table(3, 4, seed=8)
    spec, _ = _random_spec(table)
    params = rng.normal(scale=2.0, size=len(spec))
    assert prepare_state(spec, params).norm() == pytest.approx(1.0, abs=1e-10)
