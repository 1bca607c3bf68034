"""Determinant and excitor algebra over spin-orbital bitstrings.

A determinant is a plain int: bit 2*(p-1)+s set means spatial orbital p
(1-based) with spin s (0 alpha, 1 beta) is occupied.  All fermionic phases
count occupied orbitals below the acted-on index, matching the Jordan-Wigner
Z-string convention used by the qubit mapping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError
from .integrals import IntegralTable


def occupied_orbitals(det: int) -> list[int]:
    """Set bit positions, ascending."""
    out = []
    while det:
        low = det & -det
        out.append(low.bit_length() - 1)
        det ^= low
    return out


def det_from_orbitals(orbs: Iterable[int]) -> int:
    det = 0
    for o in orbs:
        det |= 1 << o
    return det


def alpha_count(det: int) -> int:
    return (det & 0x5555555555555555).bit_count()


def beta_count(det: int) -> int:
    return (det & 0xAAAAAAAAAAAAAAAA).bit_count()


def reference_determinant(table: IntegralTable) -> int:
    """Aufbau reference: alpha on the lowest n_alpha spatials, beta likewise."""
    det = 0
    for p in range(table.n_alpha):
        det |= 1 << (2 * p)
    for p in range(table.n_beta):
        det |= 1 << (2 * p + 1)
    return det


@dataclass(frozen=True, order=True)
class Excitor:
    """An excitation operator: occupied spin orbitals ``from_orbs`` to
    virtuals ``to_orbs``, both strictly ascending and disjoint."""

    from_orbs: tuple[int, ...]
    to_orbs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "from_orbs", tuple(self.from_orbs))
        object.__setattr__(self, "to_orbs", tuple(self.to_orbs))
        if list(self.from_orbs) != sorted(set(self.from_orbs)):
            raise DomainError(f"from_orbs not strictly ascending: {self.from_orbs}")
        if list(self.to_orbs) != sorted(set(self.to_orbs)):
            raise DomainError(f"to_orbs not strictly ascending: {self.to_orbs}")
        if set(self.from_orbs) & set(self.to_orbs):
            raise DomainError("from/to overlap")
        if len(self.from_orbs) != len(self.to_orbs):
            raise DomainError("unbalanced excitation")

    @property
    def level(self) -> int:
        return len(self.from_orbs)

    @property
    def from_mask(self) -> int:
        return det_from_orbitals(self.from_orbs)

    @property
    def to_mask(self) -> int:
        return det_from_orbitals(self.to_orbs)

    def label(self) -> str:
        return ",".join(map(str, self.from_orbs)) + "->" + ",".join(map(str, self.to_orbs))

    @classmethod
    def from_label(cls, text: str) -> "Excitor":
        lhs, rhs = text.split("->")
        return cls(
            tuple(int(t) for t in lhs.split(",") if t),
            tuple(int(t) for t in rhs.split(",") if t),
        )


def _parity_below(det: int, orb: int) -> int:
    """+1/-1 parity of the number of occupied orbitals below ``orb``."""
    return -1 if (det & ((1 << orb) - 1)).bit_count() & 1 else 1


def apply_excitor(det: int, exc: Excitor, dagger: bool = False):
    """Apply the excitor (or its adjoint) to a determinant.

    Returns (new_det, sign) or None when the operator annihilates the state.
    Operator convention: tau = a+_{a1} a+_{a2} a_{i2} a_{i1} for ascending
    index sets, i.e. annihilations act in ascending order and creations in
    descending order; the adjoint reverses the product, which gives the same
    processing rule with the roles of the index sets swapped.  This is the
    aligned-pairing convention of the Slater-Condon rules, and it keeps
    sign(apply) * sign(apply dagger) = +1.
    """
    if not dagger:
        annihilate, create = exc.from_orbs, exc.to_orbs[::-1]
    else:
        annihilate, create = exc.to_orbs, exc.from_orbs[::-1]
    sign = 1
    for o in annihilate:
        bit = 1 << o
        if not det & bit:
            return None
        sign *= _parity_below(det, o)
        det ^= bit
    for o in create:
        bit = 1 << o
        if det & bit:
            return None
        sign *= _parity_below(det, o)
        det |= bit
    return det, sign


def excitation_degree(d1: int, d2: int) -> int:
    return (d1 ^ d2).bit_count() // 2


def excitor_between(reference: int, det: int) -> Excitor:
    """The excitor mapping ``reference`` onto ``det`` (phase not included)."""
    diff = reference ^ det
    return Excitor(
        tuple(occupied_orbitals(diff & reference)),
        tuple(occupied_orbitals(diff & det)),
    )


def _spin_spatial(so: int) -> tuple[int, int]:
    """Spin orbital -> (1-based spatial, spin)."""
    return so // 2 + 1, so & 1


def slater_condon(table: IntegralTable, d1: int, d2: int) -> float:
    """Hamiltonian matrix element <d1|H|d2> by the Slater-Condon rules."""
    if d1.bit_count() != d2.bit_count():
        raise DomainError("determinants carry different particle numbers")
    diff = d1 ^ d2
    degree = diff.bit_count() // 2
    if degree > 2:
        return 0.0
    if degree == 0:
        occ = occupied_orbitals(d1)
        e = table.e_core
        for ii, i in enumerate(occ):
            pi, si = _spin_spatial(i)
            e += table.h(pi, pi)
            for j in occ[ii + 1 :]:
                pj, sj = _spin_spatial(j)
                e += table.g(pi, pi, pj, pj)
                if si == sj:
                    e -= table.g(pi, pj, pj, pi)
        return e
    only1 = occupied_orbitals(diff & d1)
    only2 = occupied_orbitals(diff & d2)
    exc = Excitor(tuple(only1), tuple(only2))
    applied = apply_excitor(d1, exc)
    assert applied is not None and applied[0] == d2
    sign = applied[1]
    if degree == 1:
        (m,), (p,) = only1, only2
        pm, sm = _spin_spatial(m)
        pp, sp = _spin_spatial(p)
        if sm != sp:
            return 0.0
        val = table.h(pm, pp)
        common = d1 & d2
        for i in occupied_orbitals(common):
            pi, si = _spin_spatial(i)
            val += table.g(pm, pp, pi, pi)
            if si == sm:
                val -= table.g(pm, pi, pi, pp)
        return sign * val
    (m, n), (p, q) = only1, only2
    pm, sm = _spin_spatial(m)
    pn, sn = _spin_spatial(n)
    pp, sp = _spin_spatial(p)
    pq, sq = _spin_spatial(q)
    val = 0.0
    if sm == sp and sn == sq:
        val += table.g(pm, pp, pn, pq)
    if sm == sq and sn == sp:
        val -= table.g(pm, pq, pn, pp)
    return sign * val


def irrep_xor(orb_sym: Sequence[int], spin_orbitals: Iterable[int]) -> int:
    """XOR-composed irrep (0-based) over spin orbitals; labels are the
    1-based Molpro-convention integers stored in the FCIDUMP."""
    acc = 0
    for so in spin_orbitals:
        acc ^= orb_sym[so // 2] - 1
    return acc


def symmetry_filter(
    excitors: Iterable[Excitor],
    orb_sym: Sequence[int],
    ms_conserving: bool = True,
) -> list[Excitor]:
    """Keep excitors whose orbital-irrep product is totally symmetric and,
    optionally, whose alpha/beta counts balance between from and to."""
    kept = []
    for exc in excitors:
        if irrep_xor(orb_sym, exc.from_orbs) != irrep_xor(orb_sym, exc.to_orbs):
            continue
        if ms_conserving:
            n_alpha_from = sum(1 for o in exc.from_orbs if o % 2 == 0)
            n_alpha_to = sum(1 for o in exc.to_orbs if o % 2 == 0)
            if n_alpha_from != n_alpha_to:
                continue
        kept.append(exc)
    return kept


def enumerate_uccsd(
    reference: int,
    orb_sym: Sequence[int],
    frozen: int = 0,
    apply_symmetry: bool = True,
) -> list[Excitor]:
    """All spin-conserving singles and doubles from the reference, in
    canonical order (singles ascending, then doubles ascending), filtered to
    the totally symmetric irrep unless ``apply_symmetry`` is false.

    ``frozen`` masks the lowest spatial orbitals from the excitation space;
    indices always refer to the orbitals of ``orb_sym``.
    """
    n_spin = 2 * len(orb_sym)
    active = range(2 * frozen, n_spin)
    occ = [o for o in active if reference >> o & 1]
    virt = [o for o in active if not reference >> o & 1]
    singles = [
        Excitor((i,), (a,))
        for i in occ
        for a in virt
        if i % 2 == a % 2
    ]
    doubles = []
    for ii, i in enumerate(occ):
        for j in occ[ii + 1 :]:
            for ai, a in enumerate(virt):
                for b in virt[ai + 1 :]:
                    if (i % 2 == 0) + (j % 2 == 0) == (a % 2 == 0) + (b % 2 == 0):
                        doubles.append(Excitor((i, j), (a, b)))
    singles.sort()
    doubles.sort()
    excitors = singles + doubles
    if apply_symmetry:
        excitors = symmetry_filter(excitors, orb_sym)
    return excitors
