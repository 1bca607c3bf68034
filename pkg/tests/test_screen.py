import pytest

from uccscreen.errors import DomainError
from uccscreen.fockspace import Excitor
from uccscreen.screen import (
    DepthEstimate,
    ScreenReport,
    depth_estimate,
    load_amplitudes,
    pct_ecorr,
    save_amplitudes,
    screen,
)


AMPS = {
    Excitor((0,), (2,)): 0.05,
    Excitor((1,), (3,)): -0.2,
    Excitor((0, 1), (2, 3)): 0.008,
}


def test_screen_strict_threshold_and_order():
    kept = screen(AMPS, 0.01)
    assert [exc.level for exc, _ in kept] == [1, 1]
    assert kept[0][0] == Excitor((0,), (2,))  # canonical order, amplitude carried
    assert kept[0][1] == 0.05
    assert screen(AMPS, 0.05) == [(Excitor((1,), (3,)), -0.2)]  # strictly above
    assert screen(AMPS, 0.5) == []


def test_screen_rejects_zero_threshold():
    with pytest.raises(DomainError):
        screen(AMPS, 0.0)


def test_screen_idempotent():
    kept = screen(AMPS, 0.01)
    assert screen(dict(kept), 0.01) == kept


def test_pct_ecorr_endpoints():
    assert pct_ecorr(-1.5, -1.5, -1.0) == pytest.approx(100.0)
    assert pct_ecorr(-1.0, -1.5, -1.0) == pytest.approx(0.0)
    with pytest.raises(DomainError):
        pct_ecorr(-1.2, -1.0, -1.0)


def test_depth_estimate_counts():
    assert depth_estimate([], 4) == DepthEstimate(0, 0, 0)
    # single excitation 0->1: two weight-2 gadgets, 2 CNOTs each
    est = depth_estimate([Excitor((0,), (1,))], 4)
    assert est == DepthEstimate(cnot_count=4, gadget_count=2, parameter_count=1)
    # single 0->3 picks up a two-qubit Z chain: weight 4 strings
    est = depth_estimate([Excitor((0,), (3,))], 4)
    assert est.cnot_count == 2 * 2 * 3
    # adjacent double: eight weight-4 gadgets
    est = depth_estimate([Excitor((0, 1), (2, 3))], 4)
    assert est.gadget_count == 8
    assert est.cnot_count == 8 * 2 * 3


def test_depth_monotone_in_kept_set():
    small = depth_estimate([Excitor((0,), (2,))], 6)
    large = depth_estimate([Excitor((0,), (2,)), Excitor((0, 1), (2, 3))], 6)
    assert large.cnot_count >= small.cnot_count


def test_report_and_amplitude_roundtrip(tmp_path):
    report = ScreenReport(
        threshold=0.01,
        kept=screen(AMPS, 0.01),
        hilbert_size=3,
        source="tpUCCMC",
        depth=depth_estimate([e for e, _ in screen(AMPS, 0.01)], 4),
        pct_ecorr=98.5,
        energy=-1.23,
    )
    again = ScreenReport.from_json(report.to_json())
    assert again.kept == report.kept
    assert again.depth == report.depth
    assert again.pct_ecorr == report.pct_ecorr

    text = save_amplitudes(AMPS, {"at_tau": 12.0})
    amps, extra = load_amplitudes(text)
    assert amps == AMPS
    assert extra["at_tau"] == 12.0
