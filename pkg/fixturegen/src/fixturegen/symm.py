"""Abelian point-group detection and MO irrep labeling.

Molecules are expected in a canonical frame where every symmetry element is
a signed coordinate permutation: C2 axes along x/y/z, mirror planes on the
coordinate planes, inversion at the origin.  Irrep ids follow the Molpro
FCIDUMP convention, which is XOR-composable on (id - 1).
"""

from __future__ import annotations

import numpy as np

# the eight signed-diagonal operations of D2h, identity excluded
_OPS = {
    "C2z": np.diag([-1.0, -1.0, 1.0]),
    "C2y": np.diag([-1.0, 1.0, -1.0]),
    "C2x": np.diag([1.0, -1.0, -1.0]),
    "i": np.diag([-1.0, -1.0, -1.0]),
    "sxy": np.diag([1.0, 1.0, -1.0]),
    "sxz": np.diag([1.0, -1.0, 1.0]),
    "syz": np.diag([-1.0, 1.0, 1.0]),
}

# group -> (required ops, Molpro-ordered irreps as (name, representative monomial))
_GROUPS = [
    ("D2h", {"C2z", "C2y", "C2x", "i", "sxy", "sxz", "syz"},
     [("Ag", ""), ("B3u", "x"), ("B2u", "y"), ("B1g", "xy"),
      ("B1u", "z"), ("B2g", "xz"), ("B3g", "yz"), ("Au", "xyz")]),
    ("D2", {"C2z", "C2y", "C2x"},
     [("A", ""), ("B3", "x"), ("B2", "y"), ("B1", "z")]),
    ("C2v", {"C2z", "sxz", "syz"},
     [("A1", ""), ("B1", "x"), ("B2", "y"), ("A2", "xy")]),
    ("C2h", {"C2z", "i", "sxy"},
     [("Ag", ""), ("Au", "z"), ("Bu", "x"), ("Bg", "xz")]),
    ("C2", {"C2z"}, [("A", ""), ("B", "x")]),
    ("Cs", {"sxy"}, [("A'", ""), ("A''", "z")]),
    ("Ci", {"i"}, [("Ag", ""), ("Au", "x")]),
    ("C1", set(), [("A", "")]),
]


def _op_preserves(symbols, coords, op, tol=1e-8) -> list[int] | None:
    """Atom permutation realized by the operation, or None."""
    mapped = coords @ op.T
    perm = []
    for i, (sym, pos) in enumerate(zip(symbols, mapped)):
        dist = np.linalg.norm(coords - pos, axis=1)
        j = int(np.argmin(dist))
        if dist[j] > tol or symbols[j] != sym or j in perm:
            return None
        perm.append(j)
    return perm


def detect_group(symbols, coords):
    """(group name, {op name: atom permutation}) for the largest group whose
    required operations all map the geometry onto itself."""
    found = {}
    for name, op in _OPS.items():
        perm = _op_preserves(symbols, coords, op)
        if perm is not None:
            found[name] = perm
    for group, required, irreps in _GROUPS:
        if required <= set(found):
            return group, {name: found[name] for name in required}, irreps
    raise AssertionError("C1 fallback failed")


def _monomial_character(monomial: str, op: np.ndarray) -> float:
    val = 1.0
    for axis, letter in enumerate("xyz"):
        if letter in monomial:
            val *= op[axis, axis]
    return val


def ao_representation(basis, op: np.ndarray, perm: list[int]) -> np.ndarray:
    """Matrix of the symmetry operation in the AO basis (s and p functions)."""
    n = len(basis)
    # locate functions by (atom, powers, ordinal); ordinal separates shells
    # of the same angular type on one atom (e.g. Li 1s vs 2s)
    ordinals = []
    seen: dict = {}
    for bf in basis:
        key = (bf.atom_index, bf.powers)
        ordinals.append(seen.get(key, 0))
        seen[key] = ordinals[-1] + 1
    lookup = {
        (bf.atom_index, bf.powers, ordinals[i]): i for i, bf in enumerate(basis)
    }
    T = np.zeros((n, n))
    for i, bf in enumerate(basis):
        target_atom = perm[bf.atom_index]
        sign = 1.0
        for axis in range(3):
            if bf.powers[axis] == 1:
                sign *= op[axis, axis]
        j = lookup[(target_atom, bf.powers, ordinals[i])]
        T[j, i] = sign
    return T


def assign_irreps(basis, S, C, eps, symbols, coords, degeneracy_tol=1e-7):
    """Molpro irrep id (1-based) per MO; degenerate blocks are rotated to be
    symmetry pure first.  Returns (group name, ids, possibly-rotated C)."""
    group, perms, irreps = detect_group(symbols, coords)
    ops = [(name, _OPS[name], ao_representation(basis, _OPS[name], perms[name]))
           for name in perms]
    C = C.copy()

    # symmetry-purify degenerate MO blocks
    n = C.shape[1]
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(eps[stop] - eps[start]) < degeneracy_tol:
            stop += 1
        if stop - start > 1 and ops:
            block = slice(start, stop)
            mix = np.zeros((stop - start, stop - start))
            for k, (_, _, T) in enumerate(ops):
                M = C[:, block].T @ S @ T @ C[:, block]
                mix += (k + 1.37) * 0.5 * (M + M.T)
            _, rot = np.linalg.eigh(mix)
            C[:, block] = C[:, block] @ rot
        start = stop

    ids = []
    for mo in range(n):
        chars = {}
        for name, op, T in ops:
            chi = float(C[:, mo] @ S @ T @ C[:, mo])
            if abs(abs(chi) - 1.0) > 1e-6:
                raise RuntimeError(
                    f"MO {mo} not symmetry pure under {name} (chi={chi:.6f})"
                )
            chars[name] = 1.0 if chi > 0 else -1.0
        for idx, (_, monomial) in enumerate(irreps):
            if all(
                _monomial_character(monomial, op) == chars[name]
                for name, op, _ in ops
            ):
                ids.append(idx + 1)
                break
        else:
            raise RuntimeError(f"no irrep matches characters {chars}")
    return group, ids, C


def fix_phases(C: np.ndarray) -> np.ndarray:
    """Deterministic MO phases: largest-magnitude coefficient positive."""
    C = C.copy()
    for j in range(C.shape[1]):
        k = int(np.argmax(np.abs(C[:, j])))
        if C[k, j] < 0:
            C[:, j] = -C[:, j]
    return C
