"""FCIDUMP parsing, orbital energies, frozen-core folding and MP2 amplitudes.

Integrals are stored in chemists' notation (pq|rs) with 1-based spatial
orbital indices, exactly as they appear in the file.  Spin orbitals used
everywhere downstream interleave spins: spatial p (1-based), spin s (0 for
alpha, 1 for beta) map to the 0-based spin-orbital index 2*(p-1)+s.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .errors import ConsistencyError, DegeneracyError, DomainError, ParseError

if TYPE_CHECKING:
    from .fockspace import Excitor

DUPLICATE_TOL = 1e-10  # writer round-off allowance for repeated lines


def spin_orbital(p: int, spin: int) -> int:
    """0-based spin orbital for 1-based spatial orbital ``p``."""
    return 2 * (p - 1) + spin


def eri_key(p: int, q: int, r: int, s: int) -> tuple[int, int, int, int]:
    """Canonical storage key of (pq|rs) under its 8-fold symmetry."""
    if p < q:
        p, q = q, p
    if r < s:
        r, s = s, r
    if (p, q) < (r, s):
        p, q, r, s = r, s, p, q
    return p, q, r, s


@dataclass(frozen=True)
class IntegralTable:
    """One- and two-electron molecular integrals in the MO basis (Hartree)."""

    n_orb: int
    n_elec: int
    ms2: int
    orb_sym: tuple[int, ...]
    e_core: float
    h_core: dict[tuple[int, int], float] = field(repr=False)
    eri: dict[tuple[int, int, int, int], float] = field(repr=False)

    def __post_init__(self):
        if len(self.orb_sym) != self.n_orb:
            raise DomainError(
                f"orb_sym has {len(self.orb_sym)} labels for {self.n_orb} orbitals"
            )

    @property
    def n_alpha(self) -> int:
        return (self.n_elec + self.ms2) // 2

    @property
    def n_beta(self) -> int:
        return (self.n_elec - self.ms2) // 2

    @property
    def n_spin_orb(self) -> int:
        return 2 * self.n_orb

    def h(self, p: int, q: int) -> float:
        """One-electron integral h(p,q), symmetric in p,q (1-based)."""
        if p < q:
            p, q = q, p
        return self.h_core.get((p, q), 0.0)

    def g(self, p: int, q: int, r: int, s: int) -> float:
        """Two-electron integral (pq|rs) in chemists' notation (1-based)."""
        return self.eri.get(eri_key(p, q, r, s), 0.0)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense (h, g) arrays, 0-based; g[p,q,r,s] = (pq|rs) with p.. 0-based."""
        n = self.n_orb
        h = np.zeros((n, n))
        for (p, q), v in self.h_core.items():
            h[p - 1, q - 1] = v
            h[q - 1, p - 1] = v
        g = np.zeros((n, n, n, n))
        for (p, q, r, s), v in self.eri.items():
            for a, b in ((p, q), (q, p)):
                for c, d in ((r, s), (s, r)):
                    g[a - 1, b - 1, c - 1, d - 1] = v
                    g[c - 1, d - 1, a - 1, b - 1] = v
        return h, g


_NAMELIST_END = re.compile(r"(&END|/|\$END)", re.IGNORECASE)
_FLOAT = re.compile(r"[-+]?\d*\.?\d+([DdEe][-+]?\d+)?")


def _parse_header(header: str, n_line: int) -> dict:
    body = re.sub(r"^\s*(&FCI|\$FCI)", "", header.strip(), flags=re.IGNORECASE)
    fields: dict[str, str] = {}
    for item in re.finditer(r"([A-Za-z0-9_]+)\s*=\s*([^=]*?)(?=(,?\s*[A-Za-z0-9_]+\s*=|$))", body):
        fields[item.group(1).upper()] = item.group(2).strip().rstrip(",")
    out = {}
    try:
        out["norb"] = int(fields["NORB"])
        out["nelec"] = int(fields["NELEC"])
    except KeyError as exc:
        raise ParseError(f"header missing {exc.args[0]}", line=n_line) from None
    except ValueError as exc:
        raise ParseError(f"bad header value: {exc}", line=n_line) from None
    out["ms2"] = int(fields.get("MS2", "0") or "0")
    if "ORBSYM" in fields and fields["ORBSYM"]:
        try:
            out["orbsym"] = tuple(
                int(tok) for tok in re.split(r"[,\s]+", fields["ORBSYM"].strip(", ")) if tok
            )
        except ValueError:
            raise ParseError("bad ORBSYM list", line=n_line) from None
    return out


def parse_fcidump(text: str) -> IntegralTable:
    """Parse FCIDUMP text (Molpro namelist header plus integral lines).

    Fortran ``1.0D-01`` exponents are accepted.  Duplicate lines must agree
    to ``DUPLICATE_TOL`` or a :class:`ConsistencyError` is raised.
    """
    lines = text.splitlines()
    # Collect the namelist header, which may span several lines.
    header_parts = []
    data_start = None
    for i, line in enumerate(lines):
        if i == 0 and not line.strip().upper().startswith(("&FCI", "$FCI")):
            raise ParseError("expected &FCI namelist header", line=1)
        m = _NAMELIST_END.search(line)
        if m:
            header_parts.append(line[: m.start()])
            data_start = i + 1
            break
        header_parts.append(line)
    if data_start is None:
        raise ParseError("namelist header never terminated", line=len(lines))
    head = _parse_header(" ".join(header_parts), n_line=data_start)
    n_orb = head["norb"]
    orb_sym = head.get("orbsym", tuple([1] * n_orb))
    if len(orb_sym) != n_orb:
        raise ParseError(f"ORBSYM lists {len(orb_sym)} labels, NORB={n_orb}", line=data_start)

    h_core: dict[tuple[int, int], float] = {}
    eri: dict[tuple[int, int, int, int], float] = {}
    e_core = 0.0
    saw_core = False

    def store(table, key, value, n_line):
        old = table.get(key)
        if old is not None and abs(old - value) > DUPLICATE_TOL:
            raise ConsistencyError(
                f"line {n_line}: conflicting values for {key}: {old!r} vs {value!r}"
            )
        table[key] = value

    for n_line, line in enumerate(lines[data_start:], start=data_start + 1):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 5:
            raise ParseError(f"expected 'value p q r s', got {line.strip()!r}", line=n_line)
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            p, q, r, s = (int(t) for t in tokens[1:])
        except ValueError:
            raise ParseError(f"unparseable integral line {line.strip()!r}", line=n_line) from None
        for idx in (p, q, r, s):
            if idx < 0 or idx > n_orb:
                raise IndexError(f"line {n_line}: orbital index {idx} outside 1..{n_orb}")
        if p == q == r == s == 0:
            if saw_core and abs(e_core - value) > DUPLICATE_TOL:
                raise ConsistencyError(f"line {n_line}: conflicting core energies")
            e_core, saw_core = value, True
        elif r == 0 and s == 0:
            if p == 0 or q == 0:
                raise IndexError(f"line {n_line}: one-electron line with zero index")
            store(h_core, (max(p, q), min(p, q)), value, n_line)
        elif 0 in (p, q, r, s):
            raise IndexError(f"line {n_line}: mixed zero/nonzero indices")
        else:
            store(eri, eri_key(p, q, r, s), value, n_line)

    return IntegralTable(
        n_orb=n_orb,
        n_elec=head["nelec"],
        ms2=head["ms2"],
        orb_sym=orb_sym,
        e_core=e_core,
        h_core=h_core,
        eri=eri,
    )


def load_fcidump(path) -> IntegralTable:
    with open(path) as fh:
        return parse_fcidump(fh.read())


def dump_fcidump(table: IntegralTable) -> str:
    """Serialize back to FCIDUMP text; reparsing yields identical lookups."""
    out = [
        f"&FCI NORB={table.n_orb},NELEC={table.n_elec},MS2={table.ms2},",
        " ORBSYM=" + ",".join(str(s) for s in table.orb_sym) + ",",
        " ISYM=1,",
        "&END",
    ]

    def fmt(value, p, q, r, s):
        return f"{value:23.16E} {p:4d} {q:4d} {r:4d} {s:4d}"

    for (p, q, r, s), v in sorted(table.eri.items()):
        out.append(fmt(v, p, q, r, s))
    for (p, q), v in sorted(table.h_core.items()):
        out.append(fmt(v, p, q, 0, 0))
    out.append(fmt(table.e_core, 0, 0, 0, 0))
    return "\n".join(out) + "\n"


def freeze_core(table: IntegralTable, frozen: int) -> IntegralTable:
    """Fold the lowest ``frozen`` spatial orbitals into an effective table.

    The frozen orbitals are assumed doubly occupied; their interaction is
    absorbed into the core energy and an effective one-electron operator.
    """
    if frozen == 0:
        return table
    if frozen < 0 or 2 * frozen > table.n_elec:
        raise DomainError(f"cannot freeze {frozen} orbitals with {table.n_elec} electrons")
    core = range(1, frozen + 1)
    e_core = table.e_core
    for c in core:
        e_core += 2.0 * table.h(c, c)
        for d in core:
            e_core += 2.0 * table.g(c, c, d, d) - table.g(c, d, d, c)
    n_act = table.n_orb - frozen
    h_core: dict[tuple[int, int], float] = {}
    for p in range(1, n_act + 1):
        for q in range(1, p + 1):
            po, qo = p + frozen, q + frozen
            val = table.h(po, qo)
            for c in core:
                val += 2.0 * table.g(po, qo, c, c) - table.g(po, c, c, qo)
            if val != 0.0:
                h_core[(p, q)] = val
    eri: dict[tuple[int, int, int, int], float] = {}
    for (p, q, r, s), v in table.eri.items():
        if min(p, q, r, s) > frozen:
            eri[(p - frozen, q - frozen, r - frozen, s - frozen)] = v
    return IntegralTable(
        n_orb=n_act,
        n_elec=table.n_elec - 2 * frozen,
        ms2=table.ms2,
        orb_sym=table.orb_sym[frozen:],
        e_core=e_core,
        h_core=h_core,
        eri=eri,
    )


def orbital_energies(table: IntegralTable) -> np.ndarray:
    """Diagonal-Fock spin-orbital energies for the Aufbau reference.

    eps_p = h(p,p) + sum over occupied spin orbitals i of
    (pp|ii) - (pi|ip)*[same spin], with alpha/beta interleaved as documented
    in the module header.  For an RHF reference this is the canonical HF
    orbital energy of each spatial orbital, duplicated over spins.
    """
    if table.n_elec > table.n_spin_orb:
        raise DomainError(f"{table.n_elec} electrons exceed {table.n_spin_orb} spin orbitals")
    occ = _aufbau_occupation(table)
    eps = np.zeros(table.n_spin_orb)
    for p in range(1, table.n_orb + 1):
        for spin in (0, 1):
            val = table.h(p, p)
            for i, ispin in occ:
                val += table.g(p, p, i, i)
                if ispin == spin:
                    val -= table.g(p, i, i, p)
            eps[spin_orbital(p, spin)] = val
    return eps


def _aufbau_occupation(table: IntegralTable) -> list[tuple[int, int]]:
    """Occupied (spatial, spin) pairs of the Aufbau reference determinant."""
    occ = [(p, 0) for p in range(1, table.n_alpha + 1)]
    occ += [(p, 1) for p in range(1, table.n_beta + 1)]
    return occ


def mp2_amplitudes(table: IntegralTable, frozen: int = 0) -> dict["Excitor", float]:
    """First-order doubles amplitudes keyed by excitor; singles are omitted
    (they vanish at first order and carry amplitude zero).

    t_ij^ab = <ij||ab> / (eps_i + eps_j - eps_a - eps_b) over spin orbitals
    of the frozen-core-folded table.  Spin-forbidden excitations have a
    vanishing numerator and are not stored.
    """
    from .fockspace import Excitor

    t = freeze_core(table, frozen)
    eps = orbital_energies(t)
    occ = sorted(spin_orbital(p, s) for p, s in _aufbau_occupation(t))
    virt = [i for i in range(t.n_spin_orb) if i not in set(occ)]

    def spat(i):
        return i // 2 + 1, i % 2

    amps: dict[Excitor, float] = {}
    for ii, i in enumerate(occ):
        for j in occ[ii + 1 :]:
            for ai, a in enumerate(virt):
                for b in virt[ai + 1 :]:
                    (pi, si), (pj, sj) = spat(i), spat(j)
                    (pa, sa), (pb, sb) = spat(a), spat(b)
                    if si + sj != sa + sb:
                        continue
                    # <ij||ab> = (ia|jb)d(si,sa)d(sj,sb) - (ib|ja)d(si,sb)d(sj,sa)
                    num = 0.0
                    if si == sa and sj == sb:
                        num += t.g(pi, pa, pj, pb)
                    if si == sb and sj == sa:
                        num -= t.g(pi, pb, pj, pa)
                    if num == 0.0:
                        continue
                    denom = eps[i] + eps[j] - eps[a] - eps[b]
                    if abs(denom) < 1e-8:
                        raise DegeneracyError(
                            f"near-degenerate denominator for excitation "
                            f"({i},{j})->({a},{b}): {denom:.3e}"
                        )
                    amps[Excitor((i, j), (a, b))] = num / denom
    return amps


def mp2_energy(amps: dict["Excitor", float], table: IntegralTable, frozen: int = 0) -> float:
    """MP2 correlation energy from the amplitude map (pair-energy sum)."""
    t = freeze_core(table, frozen)

    def spat(i):
        return i // 2 + 1, i % 2

    e = 0.0
    for exc, amp in amps.items():
        (i, j), (a, b) = exc.from_orbs, exc.to_orbs
        (pi, si), (pj, sj) = spat(i), spat(j)
        (pa, sa), (pb, sb) = spat(a), spat(b)
        num = 0.0
        if si == sa and sj == sb:
            num += t.g(pi, pa, pj, pb)
        if si == sb and sj == sa:
            num -= t.g(pi, pb, pj, pa)
        e += amp * num
    return e
