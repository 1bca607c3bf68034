"""Jordan-Wigner mapping of the Hamiltonian and excitation operators.

Pauli strings are stored symplectically: a term is keyed by (x_mask, z_mask)
with Y wherever both masks are set, and its coefficient multiplies the true
Pauli string (Y included).  Qubit q corresponds to spin orbital q, so the
creation operator on q carries a Z chain over qubits 0..q-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import DomainError
from .fockspace import Excitor
from .integrals import IntegralTable, freeze_core

PRUNE_TOL = 1e-12

_AXES = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


def axes_to_masks(axes: str) -> tuple[int, int]:
    x = z = 0
    for q, letter in enumerate(axes):
        try:
            xb, zb = _AXES[letter]
        except KeyError:
            raise DomainError(f"bad Pauli letter {letter!r}") from None
        x |= xb << q
        z |= zb << q
    return x, z


def masks_to_axes(x: int, z: int, n_qubits: int) -> str:
    return "".join(_LETTER[(x >> q & 1, z >> q & 1)] for q in range(n_qubits))


@dataclass(frozen=True)
class PauliTerm:
    coeff: complex
    axes: str


class QubitOperator:
    """Weighted sum of Pauli strings with merge-on-add semantics."""

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None):
        self.n_qubits = n_qubits
        self.terms: dict[tuple[int, int], complex] = dict(terms or {})

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "QubitOperator":
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def from_axes(cls, axes: str, coeff: complex = 1.0) -> "QubitOperator":
        return cls(len(axes), {axes_to_masks(axes): coeff})

    def copy(self) -> "QubitOperator":
        return QubitOperator(self.n_qubits, self.terms)

    def items(self) -> Iterator[tuple[tuple[int, int], complex]]:
        return iter(self.terms.items())

    def pauli_terms(self) -> list[PauliTerm]:
        return [
            PauliTerm(c, masks_to_axes(x, z, self.n_qubits))
            for (x, z), c in sorted(self.terms.items())
        ]

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "QubitOperator") -> "QubitOperator":
        out = QubitOperator(self.n_qubits, self.terms)
        for key, c in other.terms.items():
            out.terms[key] = out.terms.get(key, 0.0) + c
        return out._pruned()

    def __sub__(self, other: "QubitOperator") -> "QubitOperator":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return QubitOperator(
                self.n_qubits, {k: c * other for k, c in self.terms.items()}
            )
        out: dict[tuple[int, int], complex] = {}
        _accumulate_product(out, self.terms, other.terms, 1.0)
        return QubitOperator(self.n_qubits, out)._pruned()

    __rmul__ = __mul__

    def dagger(self) -> "QubitOperator":
        return QubitOperator(
            self.n_qubits, {k: c.conjugate() for k, c in self.terms.items()}
        )

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def _pruned(self) -> "QubitOperator":
        self.terms = {k: c for k, c in self.terms.items() if abs(c) > PRUNE_TOL}
        return self


def _accumulate_product(dst, terms1, terms2, scale):
    """dst += scale * terms1 * terms2 using the symplectic product rule."""
    for (x1, z1), c1 in terms1.items():
        y1 = (x1 & z1).bit_count()
        for (x2, z2), c2 in terms2.items():
            x3, z3 = x1 ^ x2, z1 ^ z2
            k = y1 + (x2 & z2).bit_count() - (x3 & z3).bit_count()
            phase = (1j) ** (k & 3)
            if (z1 & x2).bit_count() & 1:
                phase = -phase
            key = (x3, z3)
            dst[key] = dst.get(key, 0.0) + scale * phase * c1 * c2


def jw_creation(so: int, n_qubits: int) -> QubitOperator:
    """a_dag on spin orbital ``so``: Z-chain below, (X - iY)/2 on the site."""
    chain = (1 << so) - 1
    bit = 1 << so
    return QubitOperator(n_qubits, {(bit, chain): 0.5, (bit, chain | bit): -0.5j})


def jw_annihilation(so: int, n_qubits: int) -> QubitOperator:
    chain = (1 << so) - 1
    bit = 1 << so
    return QubitOperator(n_qubits, {(bit, chain): 0.5, (bit, chain | bit): 0.5j})


def jw_hamiltonian(table: IntegralTable, frozen: int = 0) -> QubitOperator:
    """Qubit Hamiltonian of the (optionally frozen-core-folded) table."""
    t = freeze_core(table, frozen)
    n_q = t.n_spin_orb
    adag = [jw_creation(q, n_q).terms for q in range(n_q)]
    ann = [jw_annihilation(q, n_q).terms for q in range(n_q)]

    # Number-conserving pair operators E[p][q] = a_dag(p) a(q).
    pair: list[list[dict]] = [[None] * n_q for _ in range(n_q)]
    for p in range(n_q):
        for q in range(n_q):
            if (p - q) % 2:
                continue  # spin-off-diagonal pairs never enter H
            acc: dict = {}
            _accumulate_product(acc, adag[p], ann[q], 1.0)
            pair[p][q] = acc

    out: dict[tuple[int, int], complex] = {(0, 0): complex(t.e_core)}
    for p in range(1, t.n_orb + 1):
        for q in range(1, t.n_orb + 1):
            hpq = t.h(p, q)
            if hpq == 0.0:
                continue
            for s in (0, 1):
                for key, c in pair[2 * (p - 1) + s][2 * (q - 1) + s].items():
                    out[key] = out.get(key, 0.0) + hpq * c
    for p in range(1, t.n_orb + 1):
        for q in range(1, t.n_orb + 1):
            for r in range(1, t.n_orb + 1):
                for s in range(1, t.n_orb + 1):
                    g = t.g(p, q, r, s)
                    if g == 0.0:
                        continue
                    half_g = 0.5 * g
                    for s1 in (0, 1):
                        pp = 2 * (p - 1) + s1
                        qq = 2 * (q - 1) + s1
                        for s2 in (0, 1):
                            rr = 2 * (r - 1) + s2
                            ss = 2 * (s - 1) + s2
                            # a+_p a+_r a_s a_q = E_pq E_rs - d_qr E_ps
                            _accumulate_product(out, pair[pp][qq], pair[rr][ss], half_g)
                            if qq == rr:
                                for key, c in pair[pp][ss].items():
                                    out[key] = out.get(key, 0.0) - half_g * c
    op = QubitOperator(n_q, out)._pruned()
    return op


def jw_excitation(exc: Excitor, n_qubits: int) -> QubitOperator:
    """Anti-Hermitian qubit operator tau - tau_dag for a single excitor.

    Singles expand to 2 strings with +-i/2 weights, doubles to 8 strings with
    +-i/8 weights; all strings within one excitor commute.
    """
    if exc.level not in (1, 2):
        raise DomainError(f"unsupported excitation level {exc.level}")
    tau = QubitOperator.identity(n_qubits)
    for a in exc.to_orbs:
        tau = tau * jw_creation(a, n_qubits)
    for i in reversed(exc.from_orbs):
        tau = tau * jw_annihilation(i, n_qubits)
    return (tau - tau.dagger())._pruned()


def pauli_gadget_sequence(
    exc: Excitor, amplitude: float, n_qubits: int
) -> list[tuple[str, float]]:
    """Ordered (axes, angle) gadgets whose composition is exp(t(tau-tau_dag)).

    Each gadget realizes exp(-i*angle/2 * P); since exp(t*c*P) with c = i*w
    requires angle = -2*t*w, the angle is -2*t*imag(coeff).  The strings of
    one excitor commute, so the composition is exact for any order; the order
    is fixed by sorting the axes strings.
    """
    op = jw_excitation(exc, n_qubits)
    gadgets = [
        (masks_to_axes(x, z, n_qubits), -2.0 * amplitude * c.imag)
        for (x, z), c in op.terms.items()
    ]
    gadgets.sort(key=lambda g: g[0])
    return gadgets


def strings_commute(axes1: str, axes2: str) -> bool:
    """True when the two Pauli strings commute (symplectic form is even)."""
    x1, z1 = axes_to_masks(axes1)
    x2, z2 = axes_to_masks(axes2)
    return ((x1 & z2).bit_count() + (x2 & z1).bit_count()) % 2 == 0
