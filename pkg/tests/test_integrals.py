import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uccscreen.errors import ConsistencyError, DegeneracyError, DomainError, ParseError
from uccscreen.integrals import (
    IntegralTable,
    dump_fcidump,
    eri_key,
    freeze_core,
    mp2_amplitudes,
    mp2_energy,
    orbital_energies,
    parse_fcidump,
    spin_orbital,
)

from conftest import make_random_table

HEADER = "&FCI NORB=4,NELEC=2,MS2=0,\n ORBSYM=1,1,1,1,\n&END\n"


def test_parse_header_and_core():
    table = parse_fcidump(HEADER + " 0.7137 0 0 0 0\n")
    assert table.n_orb == 4
    assert table.n_elec == 2
    assert table.ms2 == 0
    assert table.e_core == pytest.approx(0.7137)


def test_eightfold_symmetry_lookup():
    table = parse_fcidump(HEADER + " 0.5 1 1 2 2\n 0.0 0 0 0 0\n")
    for p, q, r, s in [(1, 1, 2, 2), (2, 2, 1, 1), (1, 1, 2, 2)]:
        assert table.g(p, q, r, s) == 0.5
    table = parse_fcidump(HEADER + " 0.25 2 1 4 3\n 0.0 0 0 0 0\n")
    for key in [(2, 1, 4, 3), (1, 2, 4, 3), (2, 1, 3, 4), (4, 3, 2, 1), (3, 4, 1, 2)]:
        assert table.g(*key) == 0.25


def test_fortran_exponents():
    table = parse_fcidump(HEADER + " 1.0D-01 1 1 0 0\n -2.5d+00 0 0 0 0\n")
    assert table.h(1, 1) == pytest.approx(0.1)
    assert table.e_core == pytest.approx(-2.5)


def test_header_errors():
    with pytest.raises(ParseError):
        parse_fcidump("NORB=2\n&END\n")
    with pytest.raises(ParseError) as err:
        parse_fcidump("&FCI NELEC=2,MS2=0,\n&END\n")
    assert "NORB" in str(err.value)
    with pytest.raises(ParseError):
        parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n not a line\n")


def test_index_out_of_range():
    with pytest.raises(IndexError):
        parse_fcidump(HEADER + " 0.5 1 1 5 5\n")


def test_conflicting_duplicates():
    with pytest.raises(ConsistencyError):
        parse_fcidump(HEADER + " 0.5 1 1 2 2\n 0.6 2 2 1 1\n")
    # agreement within the writer round-off tolerance is accepted
    table = parse_fcidump(HEADER + " 0.5 1 1 2 2\n 0.50000000000001 2 2 1 1\n")
    assert table.g(1, 1, 2, 2) == pytest.approx(0.5)


def test_roundtrip_random_table():
    table = make_random_table(3, 2, seed=7)
    again = parse_fcidump(dump_fcidump(table))
    assert again.n_orb == table.n_orb
    assert again.e_core == pytest.approx(table.e_core, abs=1e-15)
    for key, val in table.h_core.items():
        assert again.h(*key) == pytest.approx(val, abs=1e-14)
    for key, val in table.eri.items():
        assert again.g(*key) == pytest.approx(val, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=9999))
def test_roundtrip_property(n_orb, seed):
    table = make_random_table(n_orb, min(2, n_orb * 2), seed=seed)
    again = parse_fcidump(dump_fcidump(table))
    assert again.eri == pytest.approx(table.eri)
    assert again.h_core == pytest.approx(table.h_core)


def test_minimal_h2_orbital_energy():
    # one doubly occupied orbital: eps_0 = h(1,1) + (11|11)
    text = (
        "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n"
        " 0.7 1 1 1 1\n 0.2 2 1 2 1\n -1.25 1 1 0 0\n -0.47 2 2 0 0\n 0.71 0 0 0 0\n"
    )
    table = parse_fcidump(text)
    eps = orbital_energies(table)
    assert eps[0] == pytest.approx(-1.25 + 0.7)
    assert eps[1] == pytest.approx(eps[0])  # alpha/beta partners equal at ms2=0


def test_orbital_energy_spin_pairing():
    table = make_random_table(4, 4, seed=3)
    eps = orbital_energies(table)
    for p in range(1, 5):
        assert eps[spin_orbital(p, 0)] == pytest.approx(eps[spin_orbital(p, 1)], abs=1e-14)


def test_orbital_energy_domain_error():
    table = make_random_table(2, 2, seed=1)
    bad = IntegralTable(
        n_orb=2, n_elec=6, ms2=0, orb_sym=(1, 1), e_core=0.0,
        h_core=table.h_core, eri=table.eri,
    )
    with pytest.raises(DomainError):
        orbital_energies(bad)


def _dense_mp2_energy(table):
    """Brute-force spin-orbital MP2 energy from dense arrays."""
    h, g = table.to_arrays()
    n_so = table.n_spin_orb
    eps = orbital_energies(table)
    occ = [spin_orbital(p, 0) for p in range(1, table.n_alpha + 1)]
    occ += [spin_orbital(p, 1) for p in range(1, table.n_beta + 1)]
    virt = [q for q in range(n_so) if q not in occ]

    def anti(i, j, a, b):
        term = 0.0
        if i % 2 == a % 2 and j % 2 == b % 2:
            term += g[i // 2, a // 2, j // 2, b // 2]
        if i % 2 == b % 2 and j % 2 == a % 2:
            term -= g[i // 2, b // 2, j // 2, a // 2]
        return term

    e = 0.0
    for i in occ:
        for j in occ:
            for a in virt:
                for b in virt:
                    num = anti(i, j, a, b)
                    if num:
                        e += 0.25 * num * num / (eps[i] + eps[j] - eps[a] - eps[b])
    return e


def test_mp2_against_dense_brute_force():
    table = make_random_table(4, 4, seed=11)
    amps = mp2_amplitudes(table)
    assert mp2_energy(amps, table) == pytest.approx(_dense_mp2_energy(table), abs=1e-10)


def test_mp2_doubles_only_and_spin_conserving():
    table = make_random_table(4, 2, seed=5)
    amps = mp2_amplitudes(table)
    assert amps
    for exc in amps:
        assert exc.level == 2
        assert sum(o % 2 for o in exc.from_orbs) == sum(o % 2 for o in exc.to_orbs)


def test_mp2_degenerate_denominator():
    table = make_random_table(3, 2, seed=2)
    h_core = dict(table.h_core)
    # all orbitals at the same energy: eps_i + eps_j - eps_a - eps_b = 0
    h_core[(1, 1)] = h_core[(2, 2)] = h_core[(3, 3)] = 0.5
    h_core[(2, 1)] = h_core[(3, 1)] = h_core[(3, 2)] = 0.0
    eri = {k: 0.0 for k in table.eri}
    eri[eri_key(1, 2, 1, 3)] = 0.1  # nonzero numerator over the zero denominator
    degen = IntegralTable(
        n_orb=3, n_elec=2, ms2=0, orb_sym=(1, 1, 1), e_core=0.0,
        h_core=h_core, eri=eri,
    )
    with pytest.raises(DegeneracyError):
        mp2_amplitudes(degen)


def test_freeze_core_preserves_reference_energy():
    from uccscreen.fockspace import reference_determinant, slater_condon

    table = make_random_table(4, 4, seed=9)
    folded = freeze_core(table, 1)
    assert folded.n_orb == 3
    assert folded.n_elec == 2
    e_full = slater_condon(table, reference_determinant(table), reference_determinant(table))
    e_fold = slater_condon(folded, reference_determinant(folded), reference_determinant(folded))
    assert e_fold == pytest.approx(e_full, abs=1e-12)


def test_freeze_core_errors():
    table = make_random_table(3, 2, seed=4)
    with pytest.raises(DomainError):
        freeze_core(table, 2)
