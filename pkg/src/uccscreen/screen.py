"""Threshold screening of amplitude maps, correlation-energy accounting,
and two-qubit-gate cost estimates for the screened circuits."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .errors import DomainError
from .fockspace import Excitor
from .jw import jw_excitation, masks_to_axes


@dataclass(frozen=True)
class DepthEstimate:
    cnot_count: int
    gadget_count: int
    parameter_count: int


@dataclass
class ScreenReport:
    threshold: float
    kept: list[tuple[Excitor, float]]
    hilbert_size: int
    source: str
    depth: DepthEstimate | None = None
    pct_ecorr: float | None = None
    energy: float | None = None

    def to_json(self) -> str:
        payload = {
            "threshold": self.threshold,
            "source": self.source,
            "hilbert_size": self.hilbert_size,
            "kept": {exc.label(): amp for exc, amp in self.kept},
            "depth": asdict(self.depth) if self.depth else None,
            "pct_ecorr": self.pct_ecorr,
            "energy": self.energy,
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ScreenReport":
        payload = json.loads(text)
        depth = DepthEstimate(**payload["depth"]) if payload.get("depth") else None
        return cls(
            threshold=payload["threshold"],
            kept=[(Excitor.from_label(k), v) for k, v in payload["kept"].items()],
            hilbert_size=payload["hilbert_size"],
            source=payload["source"],
            depth=depth,
            pct_ecorr=payload.get("pct_ecorr"),
            energy=payload.get("energy"),
        )


def screen(amplitudes: dict[Excitor, float], threshold: float) -> list[tuple[Excitor, float]]:
    """Excitors with |t| strictly above the threshold, canonically ordered
    (singles ascending then doubles ascending), amplitudes carried along as
    starting values for the screened VQE."""
    if threshold <= 0:
        raise DomainError("threshold must be positive")
    kept = [(exc, amp) for exc, amp in amplitudes.items() if abs(amp) > threshold]
    kept.sort(key=lambda pair: (pair[0].level, pair[0]))
    return kept


def pct_ecorr(screened_energy: float, full_energy: float, hf_energy: float) -> float:
    """Percentage of the full-ansatz correlation energy recovered."""
    if full_energy >= hf_energy:
        raise DomainError("full ansatz energy must lie below the reference energy")
    return 100.0 * (hf_energy - screened_energy) / (hf_energy - full_energy)


def depth_estimate(excitors, n_qubits: int) -> DepthEstimate:
    """CNOT-ladder cost of the screened circuit: a weight-k Pauli gadget
    costs 2(k-1) CNOTs; no cross-gadget cancellation is assumed."""
    cnots = 0
    gadgets = 0
    excitors = list(excitors)
    for exc in excitors:
        for (x, z), _ in jw_excitation(exc, n_qubits).items():
            weight = (x | z).bit_count()
            cnots += 2 * (weight - 1)
            gadgets += 1
    return DepthEstimate(cnot_count=cnots, gadget_count=gadgets, parameter_count=len(excitors))


def save_amplitudes(amplitudes: dict[Excitor, float], extra: dict | None = None) -> str:
    payload = {"amplitudes": {exc.label(): amp for exc, amp in amplitudes.items()}}
    payload.update(extra or {})
    return json.dumps(payload, indent=1)


def load_amplitudes(text: str) -> tuple[dict[Excitor, float], dict]:
    payload = json.loads(text)
    amps = {Excitor.from_label(k): v for k, v in payload.pop("amplitudes").items()}
    return amps, payload
