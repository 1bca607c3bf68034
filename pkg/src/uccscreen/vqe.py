"""Trotterized-UCCSD ansatz assembly, energy/gradient evaluation, and
quasi-Newton minimization.

The ansatz state is prod_n exp(t_n (tau_n - tau_n^dag)) |ref>, applied in
list order (element 0 acts on the reference first).  Each excitor
exponential is a direct sum of 2x2 rotations between determinant pairs, so
the engine evolves amplitudes inside the (N_alpha, N_beta, irrep) sector
exactly; prepare_state exposes the same state on the full register through
the public Pauli-gadget path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .errors import ConvergenceError, DomainError
from .fockspace import (
    Excitor,
    alpha_count,
    apply_excitor,
    beta_count,
    irrep_xor,
    occupied_orbitals,
)
from .integrals import IntegralTable
from .jw import QubitOperator, jw_hamiltonian, pauli_gadget_sequence
from .simulator import StateVector, apply_gadget, sector_basis, sector_matrix


@dataclass(frozen=True)
class AnsatzSpec:
    """Ordered excitor list with starting amplitudes."""

    n_qubits: int
    reference: int
    excitors: tuple[Excitor, ...]
    init_params: tuple[float, ...]
    ordering_tag: str = "singles_first"

    def __post_init__(self):
        object.__setattr__(self, "excitors", tuple(self.excitors))
        object.__setattr__(self, "init_params", tuple(self.init_params))
        if len(set(self.excitors)) != len(self.excitors):
            raise DomainError("duplicate excitors in ansatz")
        if len(self.init_params) != len(self.excitors):
            raise DomainError("init_params length does not match excitors")

    def __len__(self) -> int:
        return len(self.excitors)


@dataclass
class VqeResult:
    energy: float
    params: np.ndarray
    iterations: int
    grad_norm: float
    evaluations: int
    converged: bool = True


def uccsd_ansatz(
    table: IntegralTable,
    reference: int,
    excitors=None,
    init_params=None,
    ordering_tag: str = "singles_first",
) -> AnsatzSpec:
    """Default ansatz: symmetry-filtered UCCSD excitors, singles before
    doubles, zero (or supplied) starting amplitudes."""
    from .fockspace import enumerate_uccsd

    if excitors is None:
        excitors = enumerate_uccsd(reference, table.orb_sym)
    if init_params is None:
        init_params = [0.0] * len(excitors)
    elif isinstance(init_params, dict):
        init_params = [init_params.get(exc, 0.0) for exc in excitors]
    return AnsatzSpec(
        n_qubits=table.n_spin_orb,
        reference=reference,
        excitors=tuple(excitors),
        init_params=tuple(init_params),
        ordering_tag=ordering_tag,
    )


def reorder_ansatz(spec: AnsatzSpec, permutation, ordering_tag: str = "permuted") -> AnsatzSpec:
    perm = list(permutation)
    if sorted(perm) != list(range(len(spec))):
        raise DomainError("invalid permutation")
    return AnsatzSpec(
        n_qubits=spec.n_qubits,
        reference=spec.reference,
        excitors=tuple(spec.excitors[i] for i in perm),
        init_params=tuple(spec.init_params[i] for i in perm),
        ordering_tag=ordering_tag,
    )


def prepare_state(spec: AnsatzSpec, params) -> StateVector:
    """Reference state with every excitor's gadget sequence applied in list
    order (single-step Trotter; exact per excitor since strings commute)."""
    params = np.asarray(params, dtype=float)
    state = StateVector.basis_state(spec.n_qubits, spec.reference)
    for exc, t in zip(spec.excitors, params):
        for axes, angle in pauli_gadget_sequence(exc, float(t), spec.n_qubits):
            state = apply_gadget(state, axes, angle)
    return state


class _PairRotations:
    """(src, dst, sign) determinant pairs of one excitor within a sector."""

    __slots__ = ("src", "dst", "sign")

    def __init__(self, basis: np.ndarray, exc: Excitor):
        from_mask, to_mask = exc.from_mask, exc.to_mask
        flip = from_mask | to_mask
        applicable = (basis & from_mask == from_mask) & (basis & to_mask == 0)
        src_dets = basis[applicable]
        signs = np.empty(len(src_dets))
        dst = np.empty(len(src_dets), dtype=np.int64)
        for k, det in enumerate(src_dets):
            new_det, sign = apply_excitor(int(det), exc)
            signs[k] = sign
            dst[k] = new_det
        self.src = np.searchsorted(basis, src_dets)
        self.dst = np.searchsorted(basis, dst)
        self.sign = signs

    def rotate(self, vec: np.ndarray, t: float) -> None:
        c, s = np.cos(t), np.sin(t)
        lo = vec[self.src]
        hi = vec[self.dst]
        vec[self.src] = c * lo - s * self.sign * hi
        vec[self.dst] = s * self.sign * lo + c * hi

    def generator(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros_like(vec)
        out[self.src] = -self.sign * vec[self.dst]
        out[self.dst] = self.sign * vec[self.src]
        return out


class VqeEngine:
    """Sector-compressed evaluator for one (ansatz, Hamiltonian) pair."""

    def __init__(self, spec: AnsatzSpec, hamiltonian: QubitOperator):
        if not hamiltonian.is_hermitian():
            raise DomainError("Hamiltonian must be Hermitian")
        self.spec = spec
        n_orb = spec.n_qubits // 2
        occ = occupied_orbitals(spec.reference)
        self.basis = sector_basis(
            n_orb,
            alpha_count(spec.reference),
            beta_count(spec.reference),
            orb_sym=None,
        )
        # restrict further to the reference irrep when the table is symmetric
        self.h_sec = sector_matrix(hamiltonian, self.basis).real.tocsr()
        self.ref_pos = int(np.searchsorted(self.basis, spec.reference))
        self.rotations = [_PairRotations(self.basis, exc) for exc in spec.excitors]

    def state(self, params) -> np.ndarray:
        vec = np.zeros(len(self.basis))
        vec[self.ref_pos] = 1.0
        for rot, t in zip(self.rotations, params):
            rot.rotate(vec, float(t))
        return vec

    def to_statevector(self, params) -> StateVector:
        full = np.zeros(1 << self.spec.n_qubits, dtype=np.complex128)
        full[self.basis] = self.state(params)
        return StateVector(self.spec.n_qubits, full)

    def energy(self, params) -> float:
        vec = self.state(params)
        return float(vec @ (self.h_sec @ vec))

    def energy_and_gradient(self, params) -> tuple[float, np.ndarray]:
        params = np.asarray(params, dtype=float)
        psi = self.state(params)
        lam = self.h_sec @ psi
        energy = float(psi @ lam)
        grad = np.empty(len(params))
        phi = psi.copy()
        for k in range(len(params) - 1, -1, -1):
            rot = self.rotations[k]
            grad[k] = 2.0 * float(lam @ rot.generator(phi))
            rot.rotate(phi, -float(params[k]))
            rot.rotate(lam, -float(params[k]))
        return energy, grad


def energy_and_gradient(
    spec: AnsatzSpec, params, hamiltonian: QubitOperator
) -> tuple[float, np.ndarray]:
    return VqeEngine(spec, hamiltonian).energy_and_gradient(params)


def minimize(
    spec: AnsatzSpec,
    hamiltonian: QubitOperator,
    tol: float = 1e-8,
    max_iter: int = 10000,
    engine: VqeEngine | None = None,
) -> VqeResult:
    """L-BFGS descent from init_params until the gradient infinity-norm
    drops below ``tol``.  Deterministic for fixed inputs."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    if engine is None:
        engine = VqeEngine(spec, hamiltonian)
    x0 = np.asarray(spec.init_params, dtype=float)
    if len(x0) == 0:
        return VqeResult(engine.energy(x0), x0, 0, 0.0, 1)
    iterations = evaluations = 0
    res = None
    for _ in range(4):  # L-BFGS restarts squeeze out line-search stalls
        res = scipy.optimize.minimize(
            engine.energy_and_gradient,
            x0,
            jac=True,
            method="L-BFGS-B",
            options={
                "maxcor": 10,
                "maxiter": max_iter,
                "ftol": 0.0,
                "gtol": tol,
                "maxls": 100,
            },
        )
        iterations += int(res.nit)
        evaluations += int(res.nfev)
        x0 = np.asarray(res.x)
        if float(np.abs(res.jac).max()) <= tol or iterations >= max_iter:
            break
    # line searches stall once energy differences underflow; polish the
    # last digits with Barzilai-Borwein steps, which only need gradients
    x = np.asarray(res.x)
    _, grad = engine.energy_and_gradient(x)
    if np.abs(grad).max() > tol:
        step = 0.1
        for _ in range(1000):
            x_new = x - step * grad
            _, grad_new = engine.energy_and_gradient(x_new)
            evaluations += 1
            iterations += 1
            s = x_new - x
            y = grad_new - grad
            sy = float(s @ y)
            step = float(s @ s) / sy if sy > 1e-300 else 0.1
            x, grad = x_new, grad_new
            if np.abs(grad).max() <= tol or iterations >= max_iter:
                break
        energy = engine.energy(x)
        if energy <= res.fun + 1e-12:
            res.x, res.fun, res.jac = x, energy, grad
    grad_norm = float(np.abs(res.jac).max())
    result = VqeResult(
        energy=float(res.fun),
        params=np.asarray(res.x),
        iterations=iterations,
        grad_norm=grad_norm,
        evaluations=evaluations,
        converged=grad_norm <= tol,
    )
    if grad_norm > tol:
        raise ConvergenceError(
            f"L-BFGS stopped with grad norm {grad_norm:.3e} > {tol:.1e}", result=result
        )
    return result


def solve_vqe(
    table: IntegralTable,
    frozen: int = 0,
    excitors=None,
    init_params=None,
    tol: float = 1e-8,
) -> tuple[VqeResult, AnsatzSpec, VqeEngine]:
    """Convenience wrapper: fold the table, build ansatz and Hamiltonian,
    minimize.  Returns (result, spec, engine) for downstream analysis."""
    from .fockspace import reference_determinant
    from .integrals import freeze_core

    t = freeze_core(table, frozen)
    ref = reference_determinant(t)
    spec = uccsd_ansatz(t, ref, excitors=excitors, init_params=init_params)
    ham = jw_hamiltonian(t)
    engine = VqeEngine(spec, ham)
    return minimize(spec, ham, tol=tol, engine=engine), spec, engine
