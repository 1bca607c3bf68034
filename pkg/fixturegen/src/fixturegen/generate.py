"""Fixture generation driver: FCIDUMP files plus reference sidecars.

Each generated system gets <name>.fcidump and <name>.json; a manifest.json
records geometries, point groups and reference energies for the whole set.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import comb
from pathlib import Path

import numpy as np

from . import ci, systems
from .basis import CHARGES, build_basis
from .fcidump import write_fcidump
from .mdint import (
    eri_tensor,
    kinetic_matrix,
    nuclear_matrix,
    nuclear_repulsion,
    overlap_matrix,
)
from .scf import mo_integrals, rohf
from .symm import assign_irreps, fix_phases

FCI_DIM_CAP = 6500


def _reference_irrep(orbsym, n_alpha, n_beta) -> int:
    acc = 0
    for p in range(n_alpha):
        acc ^= orbsym[p] - 1
    for p in range(n_beta):
        acc ^= orbsym[p] - 1
    return acc


def run_system(symbols, coords, ms2: int, frozen_recommended: int):
    """SCF + integral transform + reference data for one geometry."""
    charges = [CHARGES[s] for s in symbols]
    n_elec = sum(charges)
    n_alpha = (n_elec + ms2) // 2
    n_beta = (n_elec - ms2) // 2
    basis = build_basis(symbols, coords)
    S = overlap_matrix(basis)
    T = kinetic_matrix(basis)
    V = nuclear_matrix(basis, charges, coords)
    g_ao = eri_tensor(basis)
    e_nuc = nuclear_repulsion(charges, coords)
    solutions = []
    for guess in ("gwh", "core"):
        trial = rohf(S, T + V, g_ao, n_alpha, n_beta, e_nuc, guess=guess)
        if trial.converged:
            solutions.append(trial)
    if not solutions:
        raise RuntimeError("SCF failed to converge from every guess")
    scf = min(solutions, key=lambda r: r.energy)
    C = fix_phases(scf.mo_coeff)
    group, orbsym, C = assign_irreps(basis, S, C, scf.mo_energy, symbols, coords)
    C = fix_phases(C)
    h_mo, g_mo = mo_integrals(C, T + V, g_ao)

    # reference-determinant energy must reproduce the SCF energy
    alpha_occ = tuple(range(n_alpha))
    beta_occ = tuple(range(n_beta))
    e_ref = ci._diagonal(h_mo, g_mo, alpha_occ, beta_occ) + e_nuc
    if abs(e_ref - scf.energy) > 1e-8:
        raise RuntimeError(
            f"Aufbau determinant energy {e_ref:.10f} != SCF energy {scf.energy:.10f}"
        )

    ref_irrep = _reference_irrep(orbsym, n_alpha, n_beta)
    fci_entries = []
    n_orb = h_mo.shape[0]
    for frozen in sorted({0, frozen_recommended}):
        act = n_orb - frozen
        na, nb = n_alpha - frozen, n_beta - frozen
        if na < 0 or nb < 0 or comb(act, na) * comb(act, nb) > FCI_DIM_CAP:
            continue
        h_eff, g_eff, e_eff = ci.freeze_core_integrals(h_mo, g_mo, e_nuc, frozen)
        energy, dim = ci.fci_ground_state(
            h_eff, g_eff, e_eff, na, nb, orbsym[frozen:], ref_irrep
        )
        fci_entries.append(
            {"frozen": frozen, "sector_irrep": ref_irrep, "dim": dim, "e_fci": energy}
        )

    sidecar = {
        "basis": "STO-3G",
        "point_group": group,
        "n_orb": n_orb,
        "n_elec": n_elec,
        "ms2": ms2,
        "orb_sym": list(orbsym),
        "frozen_recommended": frozen_recommended,
        "e_nuc": e_nuc,
        "e_hf": scf.energy,
        "mo_energies": [float(x) for x in scf.mo_energy],
        "reference_irrep": ref_irrep,
        "fci": fci_entries,
        "scf_iterations": scf.n_iter,
    }
    text = write_fcidump(h_mo, g_mo, e_nuc, n_elec, ms2, orbsym, isym=ref_irrep + 1)
    return text, sidecar


def _all_jobs():
    jobs = []
    jobs.append(("h2_r0.74", *systems.h2(0.74), 0, 0))
    for r in (0.995, 1.395, 1.595, 1.795, 2.195):
        jobs.append((f"lih_r{r}", *systems.lih(r), 0, 1))
    for r in (1.06, 1.08, 1.10, 1.12, 1.14, 1.16, 1.18):
        jobs.append((f"ch2_t_a135_r{r:.2f}", *systems.ch2(135.0, r), 2, 1))
        jobs.append((f"ch2_s_a102_r{r:.2f}", *systems.ch2(102.0, r), 0, 1))
    for a in (95, 105, 115, 125, 145, 155):
        jobs.append((f"ch2_t_a{a}_r1.10", *systems.ch2(float(a), 1.10), 2, 1))
        jobs.append((f"ch2_s_a{a}_r1.10", *systems.ch2(float(a), 1.10), 0, 1))
    for r in (0.9, 1.1, 1.3, 1.5, 1.7, 1.9):
        jobs.append((f"n2_r{r}", *systems.n2(r), 0, 2))
    for rot in (0, 30, 60, 90, 120, 150, 180):
        jobs.append((f"n2h2_A_rot{rot}", *systems.n2h2(float(rot)), 0, 4))
        jobs.append((f"n2h2_B_rot{rot}", *systems.n2h2(float(rot)), 2, 4))
    return jobs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("fixtures"))
    parser.add_argument(
        "--only", default="", help="comma-separated name prefixes to generate"
    )
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    prefixes = [p for p in args.only.split(",") if p]

    manifest = {
        "basis": "STO-3G",
        "geometry_notes": {
            "lih": "Li at origin, H on +z; bond length in angstrom in the name",
            "ch2": "C2v frame, C2 along z, molecule in xz; a=HCH angle, r=CH in angstrom",
            "n2": "centered on origin along z",
            "n2h2": (
                "rigid rotation about N-N from planar trans (rot0) to cis (rot180); "
                f"r(NN)={systems.N2H2_R_NN} A, r(NH)={systems.N2H2_R_NH} A, "
                f"angle(NNH)={systems.N2H2_A_NNH} deg; A = ms2 0, B = ms2 2; "
                "SCF from a core-Hamiltonian guess at every angle"
            ),
        },
        "entries": [],
    }
    failures = []
    for name, symbols, coords, ms2, frozen in _all_jobs():
        if prefixes and not any(name.startswith(p) for p in prefixes):
            continue
        print(f"[fixturegen] {name} ...", flush=True)
        try:
            text, sidecar = run_system(symbols, coords, ms2, frozen)
        except Exception as exc:  # record and continue: fixture skipped
            print(f"[fixturegen]   FAILED: {exc}", file=sys.stderr, flush=True)
            failures.append({"name": name, "error": str(exc)})
            continue
        (args.out / f"{name}.fcidump").write_text(text)
        sidecar["geometry"] = {
            "symbols": symbols,
            "coords_bohr": [list(map(float, row)) for row in coords],
        }
        (args.out / f"{name}.json").write_text(json.dumps(sidecar, indent=1))
        manifest["entries"].append(
            {
                "name": name,
                "fcidump": f"{name}.fcidump",
                "sidecar": f"{name}.json",
                "n_orb": sidecar["n_orb"],
                "n_elec": sidecar["n_elec"],
                "ms2": ms2,
                "frozen_recommended": frozen,
                "point_group": sidecar["point_group"],
                "e_hf": sidecar["e_hf"],
            }
        )
    manifest["failures"] = failures
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    print(f"[fixturegen] wrote {len(manifest['entries'])} fixtures to {args.out}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
