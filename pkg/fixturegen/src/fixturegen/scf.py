"""Restricted and restricted-open-shell Hartree-Fock with DIIS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass
class SCFResult:
    energy: float
    mo_coeff: np.ndarray
    mo_energy: np.ndarray
    n_alpha: int
    n_beta: int
    converged: bool
    n_iter: int


def _coulomb(g, D):
    return np.einsum("pqrs,rs->pq", g, D, optimize=True)


def _exchange(g, D):
    return np.einsum("prsq,rs->pq", g, D, optimize=True)


class _DIIS:
    def __init__(self, max_vec=8):
        self.focks: list[np.ndarray] = []
        self.errors: list[np.ndarray] = []
        self.max_vec = max_vec

    def extrapolate(self, fock, error):
        self.focks.append(fock)
        self.errors.append(error)
        if len(self.focks) > self.max_vec:
            self.focks.pop(0)
            self.errors.pop(0)
        n = len(self.focks)
        if n < 2:
            return fock
        B = -np.ones((n + 1, n + 1))
        B[n, n] = 0.0
        for i in range(n):
            for j in range(n):
                B[i, j] = np.vdot(self.errors[i], self.errors[j])
        rhs = np.zeros(n + 1)
        rhs[n] = -1.0
        try:
            coeff = np.linalg.solve(B, rhs)[:n]
        except np.linalg.LinAlgError:
            return fock
        return sum(c * f for c, f in zip(coeff, self.focks))


def _electronic_energy(h, g, Da, Db):
    D = Da + Db
    e = np.sum(h * D)
    e += 0.5 * (np.sum(_coulomb(g, D) * D))
    e -= 0.5 * (np.sum(_exchange(g, Da) * Da) + np.sum(_exchange(g, Db) * Db))
    return e


def _gwh_fock(S, h, k=1.75):
    diag = np.diag(h)
    return 0.5 * k * S * (diag[:, None] + diag[None, :]) - np.diag(
        (k - 1.0) * diag
    )


def rohf(
    S,
    h,
    g,
    n_alpha: int,
    n_beta: int,
    e_nuc: float,
    c0: np.ndarray | None = None,
    guess: str = "core",
    max_iter: int = 500,
    conv: float = 1e-11,
    damp: float = 0.3,
) -> SCFResult:
    """Roothaan single-Fock ROHF (RHF falls out when n_alpha == n_beta).

    Densities are damped while the orbital gradient is large; DIIS takes
    over once it drops below 5e-3.  Canonical orbital energies are the
    eigenvalues of the effective Fock with Guest-Saunders block weights.
    """
    n = S.shape[0]
    X = scipy.linalg.fractional_matrix_power(S, -0.5).real
    if c0 is None:
        f0 = h if guess == "core" else _gwh_fock(S, h)
        eps, U = np.linalg.eigh(X.T @ f0 @ X)
        C = X @ U
    else:
        C = c0.copy()
    diis = _DIIS()
    energy = 0.0
    err_norm = 1.0
    Da_prev = Db_prev = None
    for iteration in range(1, max_iter + 1):
        Ca, Cb = C[:, :n_alpha], C[:, :n_beta]
        Da, Db = Ca @ Ca.T, Cb @ Cb.T
        if err_norm > 5e-3 and Da_prev is not None:
            Da = damp * Da + (1.0 - damp) * Da_prev
            Db = damp * Db + (1.0 - damp) * Db_prev
        Da_prev, Db_prev = Da, Db
        D = Da + Db
        J = _coulomb(g, D)
        Fa = h + J - _exchange(g, Da)
        Fb = h + J - _exchange(g, Db)

        # effective Fock in the current MO basis, Guest-Saunders weights
        Fa_mo = C.T @ Fa @ C
        Fb_mo = C.T @ Fb @ C
        avg = 0.5 * (Fa_mo + Fb_mo)
        F_mo = avg.copy()
        closed = slice(0, n_beta)
        open_ = slice(n_beta, n_alpha)
        virt = slice(n_alpha, n)
        F_mo[closed, open_] = Fb_mo[closed, open_]
        F_mo[open_, closed] = Fb_mo[open_, closed]
        F_mo[open_, virt] = Fa_mo[open_, virt]
        F_mo[virt, open_] = Fa_mo[virt, open_]

        # back to AO for DIIS; error = orbital-rotation gradient
        F_ao = np.linalg.multi_dot([S, C, F_mo, C.T, S])
        err = np.linalg.multi_dot([X.T, F_ao @ (0.5 * D) @ S - S @ (0.5 * D) @ F_ao, X])
        err_norm = np.abs(err).max()
        if err_norm < 5e-3:
            F_ao = diis.extrapolate(F_ao, err)

        eps, U = np.linalg.eigh(X.T @ F_ao @ X)
        C = X @ U
        new_energy = _electronic_energy(h, g, Da, Db) + e_nuc
        delta = abs(new_energy - energy)
        energy = new_energy
        if delta < conv and err_norm < 1e-8:
            return SCFResult(energy, C, eps, n_alpha, n_beta, True, iteration)
    return SCFResult(energy, C, eps, n_alpha, n_beta, False, max_iter)


def rhf(S, h, g, n_elec: int, e_nuc: float, **kw) -> SCFResult:
    assert n_elec % 2 == 0
    return rohf(S, h, g, n_elec // 2, n_elec // 2, e_nuc, **kw)


def mo_integrals(C: np.ndarray, h: np.ndarray, g: np.ndarray):
    """AO -> MO transform of the one- and two-electron integrals."""
    h_mo = C.T @ h @ C
    g_mo = np.einsum("pi,pqrs->iqrs", C, g, optimize=True)
    g_mo = np.einsum("qj,iqrs->ijrs", C, g_mo, optimize=True)
    g_mo = np.einsum("rk,ijrs->ijks", C, g_mo, optimize=True)
    g_mo = np.einsum("sl,ijks->ijkl", C, g_mo, optimize=True)
    return h_mo, g_mo
