"""FCIDUMP text writer (Molpro namelist convention, chemists' integrals)."""

from __future__ import annotations

import numpy as np

WRITE_TOL = 1e-12


def write_fcidump(h_mo, g_mo, e_core, n_elec, ms2, orbsym, isym=1) -> str:
    n = h_mo.shape[0]
    lines = [
        f"&FCI NORB={n},NELEC={n_elec},MS2={ms2},",
        " ORBSYM=" + ",".join(str(s) for s in orbsym) + ",",
        f" ISYM={isym},",
        "&END",
    ]

    def emit(value, p, q, r, s):
        lines.append(f"{value:23.16E} {p:4d} {q:4d} {r:4d} {s:4d}")

    for p in range(n):
        for q in range(p + 1):
            for r in range(p + 1):
                s_top = q if r == p else r
                for s in range(s_top + 1):
                    val = g_mo[p, q, r, s]
                    if abs(val) > WRITE_TOL:
                        emit(val, p + 1, q + 1, r + 1, s + 1)
    for p in range(n):
        for q in range(p + 1):
            if abs(h_mo[p, q]) > WRITE_TOL:
                emit(h_mo[p, q], p + 1, q + 1, 0, 0)
    emit(e_core, 0, 0, 0, 0)
    return "\n".join(lines) + "\n"
