"""Small determinant-basis FCI, independent of the consuming package.

Determinants are (alpha_occ, beta_occ) tuples of 0-based spatial orbitals;
the fermion ordering is all alpha orbitals ascending, then all beta.  Only
the lowest eigenvalue is ever needed, for reference sidecars.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.sparse
import scipy.sparse.linalg


def _phase_single(occ: tuple[int, ...], i: int, a: int) -> float:
    lo, hi = (i, a) if i < a else (a, i)
    crossings = sum(1 for o in occ if lo < o < hi)
    return -1.0 if crossings & 1 else 1.0


def _replace(occ: tuple[int, ...], i: int, a: int) -> tuple[int, ...]:
    return tuple(sorted(o for o in occ if o != i) + [a])


def _diagonal(h, g, alpha, beta) -> float:
    e = sum(h[p, p] for p in alpha) + sum(h[p, p] for p in beta)
    both = [(p, 0) for p in alpha] + [(p, 1) for p in beta]
    for x, (p, sp) in enumerate(both):
        for q, sq in both[x + 1 :]:
            e += g[p, p, q, q]
            if sp == sq:
                e -= g[p, q, q, p]
    return e


def _single_element(h, g, alpha, beta, spin, i, a) -> float:
    same = alpha if spin == 0 else beta
    other = beta if spin == 0 else alpha
    val = h[i, a]
    for q in same:
        if q != i:
            val += g[i, a, q, q] - g[i, q, q, a]
    for q in other:
        val += g[i, a, q, q]
    return val * _phase_single(same, i, a)


def _double_same(g, occ, i, j, a, b) -> float:
    # i<j annihilated, a<b created within one spin channel
    phase = _phase_single(occ, i, a)
    intermediate = _replace(occ, i, a)
    phase *= _phase_single(intermediate, j, b)
    direct = g[i, a, j, b] - g[i, b, j, a]
    return phase * direct


def _spin_diff(occ1, occ2):
    s1, s2 = set(occ1), set(occ2)
    return tuple(sorted(s1 - s2)), tuple(sorted(s2 - s1))


def element(h, g, det1, det2) -> float:
    a1, b1 = det1
    a2, b2 = det2
    da, ca = _spin_diff(a1, a2)
    db, cb = _spin_diff(b1, b2)
    degree = len(da) + len(db)
    if degree > 2:
        return 0.0
    if degree == 0:
        return _diagonal(h, g, a1, b1)
    if degree == 1:
        if da:
            return _single_element(h, g, a1, b1, 0, da[0], ca[0])
        return _single_element(h, g, a1, b1, 1, db[0], cb[0])
    if len(da) == 2:
        return _double_same(g, a1, da[0], da[1], ca[0], ca[1])
    if len(db) == 2:
        return _double_same(g, b1, db[0], db[1], cb[0], cb[1])
    # one excitation in each channel
    pa = _phase_single(a1, da[0], ca[0])
    pb = _phase_single(b1, db[0], cb[0])
    return pa * pb * g[da[0], ca[0], db[0], cb[0]]


def sector_determinants(n_orb, n_alpha, n_beta, orbsym=None, irrep=None):
    """All (alpha, beta) determinants, optionally of one spatial irrep
    (0-based XOR label over 1-based Molpro ids)."""
    out = []
    for alpha in combinations(range(n_orb), n_alpha):
        for beta in combinations(range(n_orb), n_beta):
            if irrep is not None:
                acc = 0
                for p in alpha:
                    acc ^= orbsym[p] - 1
                for p in beta:
                    acc ^= orbsym[p] - 1
                if acc != irrep:
                    continue
            out.append((alpha, beta))
    return out


def fci_ground_state(h, g, e_core, n_alpha, n_beta, orbsym=None, irrep=None) -> tuple[float, int]:
    """Lowest eigenvalue in the sector and the sector dimension."""
    n_orb = h.shape[0]
    dets = sector_determinants(n_orb, n_alpha, n_beta, orbsym, irrep)
    dim = len(dets)
    if dim == 0:
        raise ValueError("empty sector")
    masks = [
        (sum(1 << p for p in a), sum(1 << p for p in b)) for a, b in dets
    ]
    mat = np.zeros((dim, dim))
    for i in range(dim):
        mat[i, i] = _diagonal(h, g, *dets[i])
        ma1, mb1 = masks[i]
        for j in range(i + 1, dim):
            ma2, mb2 = masks[j]
            if ((ma1 ^ ma2).bit_count() + (mb1 ^ mb2).bit_count()) > 4:
                continue
            val = element(h, g, dets[i], dets[j])
            mat[i, j] = mat[j, i] = val
    if dim <= 1200:
        lowest = float(np.linalg.eigvalsh(mat)[0])
    else:
        lowest = float(
            scipy.sparse.linalg.eigsh(
                scipy.sparse.csr_matrix(mat), k=1, which="SA", return_eigenvectors=False
            )[0]
        )
    return lowest + e_core, dim


def freeze_core_integrals(h, g, e_core, n_frozen):
    """Fold doubly occupied lowest orbitals into effective integrals."""
    if n_frozen == 0:
        return h, g, e_core
    core = range(n_frozen)
    e = e_core
    for c in core:
        e += 2.0 * h[c, c]
        for d in core:
            e += 2.0 * g[c, c, d, d] - g[c, d, d, c]
    act = slice(n_frozen, h.shape[0])
    h_eff = h[act, act].copy()
    for c in core:
        h_eff += 2.0 * g[act, act, c, c] - g[act, c, c, act]
    return h_eff, g[act, act, act, act].copy(), e
