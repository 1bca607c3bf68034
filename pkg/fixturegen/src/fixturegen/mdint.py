"""McMurchie-Davidson one- and two-electron integrals over contracted
Cartesian Gaussians (s and p shells are all STO-3G needs)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import hyp1f1

from .basis import BasisFunction


def boys(n_max: int, x: float) -> np.ndarray:
    return np.array([hyp1f1(n + 0.5, n + 1.5, -x) / (2 * n + 1) for n in range(n_max + 1)])


def _hermite_e(i: int, j: int, t: int, Q: float, a: float, b: float, memo) -> float:
    if t < 0 or t > i + j:
        return 0.0
    key = (i, j, t)
    hit = memo.get(key)
    if hit is not None:
        return hit
    p = a + b
    if i == j == t == 0:
        val = np.exp(-a * b / p * Q * Q)
    elif j == 0:
        val = (
            _hermite_e(i - 1, j, t - 1, Q, a, b, memo) / (2 * p)
            - (b * Q / p) * _hermite_e(i - 1, j, t, Q, a, b, memo)
            + (t + 1) * _hermite_e(i - 1, j, t + 1, Q, a, b, memo)
        )
    else:
        val = (
            _hermite_e(i, j - 1, t - 1, Q, a, b, memo) / (2 * p)
            + (a * Q / p) * _hermite_e(i, j - 1, t, Q, a, b, memo)
            + (t + 1) * _hermite_e(i, j - 1, t + 1, Q, a, b, memo)
        )
    memo[key] = val
    return val


def hermite_coeffs(i: int, j: int, Q: float, a: float, b: float) -> np.ndarray:
    memo: dict = {}
    return np.array([_hermite_e(i, j, t, Q, a, b, memo) for t in range(i + j + 1)])


def _hermite_coulomb(t, u, v, n, p, PC, memo, boys_table):
    if t < 0 or u < 0 or v < 0:
        return 0.0
    key = (t, u, v, n)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if t == u == v == 0:
        val = (-2.0 * p) ** n * boys_table[n]
    elif t > 0:
        val = (t - 1) * _hermite_coulomb(t - 2, u, v, n + 1, p, PC, memo, boys_table)
        val += PC[0] * _hermite_coulomb(t - 1, u, v, n + 1, p, PC, memo, boys_table)
    elif u > 0:
        val = (u - 1) * _hermite_coulomb(t, u - 2, v, n + 1, p, PC, memo, boys_table)
        val += PC[1] * _hermite_coulomb(t, u - 1, v, n + 1, p, PC, memo, boys_table)
    else:
        val = (v - 1) * _hermite_coulomb(t, u, v - 2, n + 1, p, PC, memo, boys_table)
        val += PC[2] * _hermite_coulomb(t, u, v - 1, n + 1, p, PC, memo, boys_table)
    memo[key] = val
    return val


def _primitive_overlap(la, lb, A, B, a, b) -> float:
    p = a + b
    out = (np.pi / p) ** 1.5
    for d in range(3):
        memo: dict = {}
        out *= _hermite_e(la[d], lb[d], 0, A[d] - B[d], a, b, memo)
    return out


def _primitive_kinetic(la, lb, A, B, a, b) -> float:
    p = a + b
    root = np.sqrt(np.pi / p)

    def s1d(i, j, d):
        if i < 0 or j < 0:
            return 0.0
        return _hermite_e(i, j, 0, A[d] - B[d], a, b, {}) * root

    def t1d(i, j, d):
        val = -2.0 * b * b * s1d(i, j + 2, d)
        val += b * (2 * j + 1) * s1d(i, j, d)
        val -= 0.5 * j * (j - 1) * s1d(i, j - 2, d)
        return val

    s = [s1d(la[d], lb[d], d) for d in range(3)]
    t = [t1d(la[d], lb[d], d) for d in range(3)]
    return t[0] * s[1] * s[2] + s[0] * t[1] * s[2] + s[0] * s[1] * t[2]


def _primitive_nuclear(la, lb, A, B, a, b, C) -> float:
    p = a + b
    P = (a * A + b * B) / p
    PC = P - C
    L = sum(la) + sum(lb)
    boys_table = boys(L, p * float(PC @ PC))
    e_x = hermite_coeffs(la[0], lb[0], A[0] - B[0], a, b)
    e_y = hermite_coeffs(la[1], lb[1], A[1] - B[1], a, b)
    e_z = hermite_coeffs(la[2], lb[2], A[2] - B[2], a, b)
    memo: dict = {}
    val = 0.0
    for t in range(len(e_x)):
        for u in range(len(e_y)):
            for v in range(len(e_z)):
                val += (
                    e_x[t]
                    * e_y[u]
                    * e_z[v]
                    * _hermite_coulomb(t, u, v, 0, p, PC, memo, boys_table)
                )
    return 2.0 * np.pi / p * val


class _PairData:
    """Per primitive-pair Hermite expansion, reused across ERI quartets."""

    __slots__ = ("p", "P", "ex", "ey", "ez", "weight")

    def __init__(self, la, lb, A, B, a, b, weight):
        self.p = a + b
        self.P = (a * A + b * B) / self.p
        self.ex = hermite_coeffs(la[0], lb[0], A[0] - B[0], a, b)
        self.ey = hermite_coeffs(la[1], lb[1], A[1] - B[1], a, b)
        self.ez = hermite_coeffs(la[2], lb[2], A[2] - B[2], a, b)
        self.weight = weight


def _pair_list(bf1: BasisFunction, bf2: BasisFunction) -> list[_PairData]:
    pairs = []
    for a, ca in zip(bf1.exponents, bf1.coeffs):
        for b, cb in zip(bf2.exponents, bf2.coeffs):
            pairs.append(_PairData(bf1.powers, bf2.powers, bf1.center, bf2.center, a, b, ca * cb))
    return pairs


def _contract(bf1, bf2, primitive) -> float:
    val = 0.0
    for a, ca in zip(bf1.exponents, bf1.coeffs):
        for b, cb in zip(bf2.exponents, bf2.coeffs):
            val += ca * cb * primitive(bf1.powers, bf2.powers, bf1.center, bf2.center, a, b)
    return val


def overlap_contracted(bf1, bf2) -> float:
    return _contract(bf1, bf2, _primitive_overlap)


def kinetic_contracted(bf1, bf2) -> float:
    return _contract(bf1, bf2, _primitive_kinetic)


def nuclear_contracted(bf1, bf2, charges, coords) -> float:
    val = 0.0
    for Z, C in zip(charges, coords):
        val -= Z * _contract(
            bf1, bf2, lambda la, lb, A, B, a, b: _primitive_nuclear(la, lb, A, B, a, b, C)
        )
    return val


def eri_pair_contracted(pairs_ab, pairs_cd) -> float:
    val = 0.0
    for pab in pairs_ab:
        for pcd in pairs_cd:
            p, q = pab.p, pcd.p
            alpha = p * q / (p + q)
            PQ = pab.P - pcd.P
            L = len(pab.ex) + len(pab.ey) + len(pab.ez) + len(pcd.ex) + len(pcd.ey) + len(pcd.ez) - 6
            boys_table = boys(L, alpha * float(PQ @ PQ))
            memo: dict = {}
            term = 0.0
            for t in range(len(pab.ex)):
                for u in range(len(pab.ey)):
                    for v in range(len(pab.ez)):
                        e_ab = pab.ex[t] * pab.ey[u] * pab.ez[v]
                        if e_ab == 0.0:
                            continue
                        for tt in range(len(pcd.ex)):
                            for uu in range(len(pcd.ey)):
                                for vv in range(len(pcd.ez)):
                                    e_cd = pcd.ex[tt] * pcd.ey[uu] * pcd.ez[vv]
                                    if e_cd == 0.0:
                                        continue
                                    sign = -1.0 if (tt + uu + vv) & 1 else 1.0
                                    term += (
                                        e_ab
                                        * e_cd
                                        * sign
                                        * _hermite_coulomb(
                                            t + tt, u + uu, v + vv, 0, alpha, PQ, memo, boys_table
                                        )
                                    )
            val += (
                pab.weight
                * pcd.weight
                * term
                * 2.0
                * np.pi ** 2.5
                / (p * q * np.sqrt(p + q))
            )
    return val


def overlap_matrix(basis) -> np.ndarray:
    n = len(basis)
    S = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = overlap_contracted(basis[i], basis[j])
    return S


def kinetic_matrix(basis) -> np.ndarray:
    n = len(basis)
    T = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            T[i, j] = T[j, i] = kinetic_contracted(basis[i], basis[j])
    return T


def nuclear_matrix(basis, charges, coords) -> np.ndarray:
    n = len(basis)
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            V[i, j] = V[j, i] = nuclear_contracted(basis[i], basis[j], charges, coords)
    return V


def eri_tensor(basis) -> np.ndarray:
    n = len(basis)
    pair_cache = {}

    def pairs(i, j):
        key = (i, j) if i >= j else (j, i)
        hit = pair_cache.get(key)
        if hit is None:
            hit = _pair_list(basis[key[0]], basis[key[1]])
            pair_cache[key] = hit
        return hit

    g = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                l_top = j if k == i else k
                for l in range(l_top + 1):
                    val = eri_pair_contracted(pairs(i, j), pairs(k, l))
                    for a, b in ((i, j), (j, i)):
                        for c, d in ((k, l), (l, k)):
                            g[a, b, c, d] = val
                            g[c, d, a, b] = val
    return g


def nuclear_repulsion(charges, coords) -> float:
    e = 0.0
    for i in range(len(charges)):
        for j in range(i):
            e += charges[i] * charges[j] / np.linalg.norm(coords[i] - coords[j])
    return e
