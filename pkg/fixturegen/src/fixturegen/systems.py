"""Molecular geometry builders in canonical symmetry frames.

All coordinates are returned in bohr, oriented so that every point-group
element is a signed coordinate operation (C2 along z, mirrors on coordinate
planes); see symm.py.
"""

from __future__ import annotations

import numpy as np

from .basis import ANGSTROM_TO_BOHR

# trans-diazene equilibrium internals adopted from the rotational-analysis
# literature; recorded here because the downstream tables depend on them.
N2H2_R_NN = 1.247  # angstrom
N2H2_R_NH = 1.028  # angstrom
N2H2_A_NNH = 106.3  # degrees


def h2(r_angstrom: float):
    r = r_angstrom * ANGSTROM_TO_BOHR
    return ["H", "H"], np.array([[0.0, 0.0, r / 2], [0.0, 0.0, -r / 2]])


def lih(r_angstrom: float):
    r = r_angstrom * ANGSTROM_TO_BOHR
    return ["Li", "H"], np.array([[0.0, 0.0, 0.0], [0.0, 0.0, r]])


def n2(r_angstrom: float):
    r = r_angstrom * ANGSTROM_TO_BOHR
    return ["N", "N"], np.array([[0.0, 0.0, r / 2], [0.0, 0.0, -r / 2]])


def ch2(angle_deg: float, r_angstrom: float):
    """C2 axis along z, molecule in the xz plane."""
    r = r_angstrom * ANGSTROM_TO_BOHR
    half = np.radians(angle_deg) / 2
    return (
        ["C", "H", "H"],
        np.array(
            [
                [0.0, 0.0, 0.0],
                [r * np.sin(half), 0.0, r * np.cos(half)],
                [-r * np.sin(half), 0.0, r * np.cos(half)],
            ]
        ),
    )


def n2h2(rotation_deg: float):
    """HNNH with rigid internals, rotated ``rotation_deg`` about N-N away
    from the planar trans arrangement (0 = trans, 180 = cis).

    Built with N-N along z and the C2 axis along y, then rotated into the
    canonical frame (C2 -> z): trans is C2h with sigma_h = xy, cis is C2v,
    intermediate angles are C2.
    """
    r_nn = N2H2_R_NN * ANGSTROM_TO_BOHR
    r_nh = N2H2_R_NH * ANGSTROM_TO_BOHR
    tau = np.radians(N2H2_A_NNH)
    phi1 = np.radians(rotation_deg) / 2
    phi2 = np.pi - phi1
    n1 = np.array([0.0, 0.0, r_nn / 2])
    n2_ = np.array([0.0, 0.0, -r_nn / 2])
    h1 = n1 + r_nh * np.array([np.sin(tau) * np.cos(phi1), np.sin(tau) * np.sin(phi1), -np.cos(tau)])
    h2_ = n2_ + r_nh * np.array([np.sin(tau) * np.cos(phi2), np.sin(tau) * np.sin(phi2), np.cos(tau)])
    coords = np.array([n1, n2_, h1, h2_])
    rot = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])  # y -> z
    return ["N", "N", "H", "H"], coords @ rot.T
