"""STO-3G basis data and contracted-shell construction.

Exponents/coefficients are the standard published STO-3G parameters
(universal 1s and 2sp expansions scaled by the element zeta values).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# element -> list of (shell_type, exponents, coefficients)
STO3G = {
    "H": [
        ("S", [3.42525091, 0.62391373, 0.16885540],
              [0.15432897, 0.53532814, 0.44463454]),
    ],
    "Li": [
        ("S", [16.1195750, 2.9362007, 0.7946505],
              [0.15432897, 0.53532814, 0.44463454]),
        ("SP", [0.6362897, 0.1478601, 0.0480887],
               [-0.09996723, 0.39951283, 0.70011547],
               [0.15591627, 0.60768372, 0.39195739]),
    ],
    "C": [
        ("S", [71.6168370, 13.0450960, 3.5305122],
              [0.15432897, 0.53532814, 0.44463454]),
        ("SP", [2.9412494, 0.6834831, 0.2222899],
               [-0.09996723, 0.39951283, 0.70011547],
               [0.15591627, 0.60768372, 0.39195739]),
    ],
    "N": [
        ("S", [99.1061690, 18.0523120, 4.8856602],
              [0.15432897, 0.53532814, 0.44463454]),
        ("SP", [3.7804559, 0.8784966, 0.2857144],
               [-0.09996723, 0.39951283, 0.70011547],
               [0.15591627, 0.60768372, 0.39195739]),
    ],
}

CHARGES = {"H": 1, "Li": 3, "C": 6, "N": 7}

ANGSTROM_TO_BOHR = 1.0 / 0.52917721092


@dataclass
class BasisFunction:
    """Contracted Cartesian Gaussian: sum_k c_k (x-Ax)^l (y-Ay)^m (z-Az)^n
    exp(-a_k |r-A|^2), with normalized primitives and a normalized contraction."""

    center: np.ndarray
    powers: tuple[int, int, int]
    exponents: np.ndarray
    coeffs: np.ndarray
    atom_index: int

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.exponents = np.asarray(self.exponents, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=float)


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def primitive_norm(alpha: float, powers) -> float:
    l, m, n = powers
    L = l + m + n
    pref = (2.0 * alpha / np.pi) ** 0.75 * (4.0 * alpha) ** (L / 2.0)
    denom = np.sqrt(
        _double_factorial(2 * l - 1)
        * _double_factorial(2 * m - 1)
        * _double_factorial(2 * n - 1)
    )
    return pref / denom


def build_basis(symbols, coords_bohr) -> list[BasisFunction]:
    """Basis functions for a molecule; p shells expand to (x, y, z) order."""
    from .mdint import overlap_contracted

    functions: list[BasisFunction] = []
    for atom_index, (symbol, center) in enumerate(zip(symbols, coords_bohr)):
        for shell in STO3G[symbol]:
            if shell[0] == "S":
                _, exps, cs = shell
                functions.append(
                    _normalized(BasisFunction(center, (0, 0, 0), exps, cs, atom_index))
                )
            elif shell[0] == "SP":
                _, exps, cs_s, cs_p = shell
                functions.append(
                    _normalized(BasisFunction(center, (0, 0, 0), exps, cs_s, atom_index))
                )
                for powers in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    functions.append(
                        _normalized(BasisFunction(center, powers, exps, cs_p, atom_index))
                    )
            else:
                raise ValueError(f"unsupported shell {shell[0]}")
    return functions


def _normalized(bf: BasisFunction) -> BasisFunction:
    from .mdint import overlap_contracted

    scaled = bf.coeffs * np.array([primitive_norm(a, bf.powers) for a in bf.exponents])
    bf = BasisFunction(bf.center, bf.powers, bf.exponents, scaled, bf.atom_index)
    self_overlap = overlap_contracted(bf, bf)
    bf.coeffs = bf.coeffs / np.sqrt(self_overlap)
    return bf
