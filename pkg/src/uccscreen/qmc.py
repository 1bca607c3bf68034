"""Stochastic coupled-cluster walker dynamics: FCIQMC, CCMC, and the
projective unitary variants (pUCCMC, trotterized tpUCCMC).

Walker populations are real-valued; amplitudes are populations relative to
the reference population N_0.  One step selects and collapses clusters
(whole-product traversal for tpUCCMC), spawns onto connected slots with a
uniform spin-conserving excitation generator, applies diagonal death with
the shift, annihilates, and stochastically rounds small weights away.
Everything is driven by one seeded generator, so a (seed, config) pair
reproduces a run exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, EstimatorUndefined, PopulationCollapseError
from .fockspace import (
    Excitor,
    apply_excitor,
    enumerate_uccsd,
    excitor_between,
    occupied_orbitals,
    reference_determinant,
    slater_condon,
)
from .integrals import IntegralTable, freeze_core, spin_orbital

MODES = ("FCIQMC", "CCMC", "pUCCMC", "tpUCCMC")


@dataclass
class QmcConfig:
    mode: str = "tpUCCMC"
    dtau: float = 1e-3
    target_pop: float = 5e3
    zeta: float = 0.05
    shift_period: int = 10
    max_cluster_size: int = 4
    seed: int = 1
    init_pop: float = 100.0
    round_threshold: float = 1e-2
    equilibration: int = 1000  # post-onset steps before statistics start
    analysis_blocks: int = 10

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if self.dtau <= 0:
            raise DomainError("dtau must be positive")
        if not 0 < self.zeta <= 1:
            raise DomainError("zeta must lie in (0, 1]")
        if self.max_cluster_size < 2:
            raise DomainError("max_cluster_size must cover the SD truncation")


@dataclass
class WalkerEnsemble:
    pops: np.ndarray
    n_ref: float
    shift: float
    tau: float = 0.0
    variable_shift: bool = False

    def total_population(self) -> float:
        return float(np.abs(self.pops).sum() + abs(self.n_ref))


@dataclass
class AmplitudeSnapshot:
    t: dict[Excitor, float]
    at_tau: float
    normalizer: float
    window_steps: int


@dataclass
class QmcTrace:
    step: np.ndarray
    n_w: np.ndarray
    n_ref: np.ndarray
    shift: np.ndarray
    proj_num: np.ndarray
    proj_den: np.ndarray
    onset_step: int | None = None

    HEADER = "# step n_w n_ref shift proj_num proj_den"

    def to_text(self) -> str:
        lines = [self.HEADER]
        if self.onset_step is not None:
            lines.append(f"# variable_shift_onset {self.onset_step}")
        for k in range(len(self.step)):
            lines.append(
                f"{self.step[k]} {self.n_w[k]:.10e} {self.n_ref[k]:.10e} "
                f"{self.shift[k]:.10e} {self.proj_num[k]:.10e} {self.proj_den[k]:.10e}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QmcTrace":
        onset = None
        rows = []
        for line in text.splitlines():
            if line.startswith("# variable_shift_onset"):
                onset = int(line.split()[-1])
            elif line.startswith("#") or not line.strip():
                continue
            else:
                rows.append([float(x) for x in line.split()])
        arr = np.array(rows) if rows else np.zeros((0, 6))
        return cls(
            step=arr[:, 0].astype(int),
            n_w=arr[:, 1],
            n_ref=arr[:, 2],
            shift=arr[:, 3],
            proj_num=arr[:, 4],
            proj_den=arr[:, 5],
            onset_step=onset,
        )


@dataclass
class BlockStats:
    pops_sum: np.ndarray
    ref_sum: float
    num_sum: float
    den_sum: float
    shift_sum: float
    steps: int


@dataclass
class QmcResult:
    trace: QmcTrace
    snapshot: AmplitudeSnapshot
    blocks: list[BlockStats]
    e_ref: float
    config: QmcConfig


class QmcSystem:
    """Precomputed immutable context: slot space, diagonals, phase masks."""

    def __init__(self, table: IntegralTable, cfg_mode: str, frozen: int = 0):
        self.table = freeze_core(table, frozen)
        self.n_spin = self.table.n_spin_orb
        self.reference = reference_determinant(self.table)
        self.mode = cfg_mode
        if cfg_mode == "FCIQMC":
            from .simulator import sector_basis

            basis = sector_basis(
                self.table.n_orb,
                self.table.n_alpha,
                self.table.n_beta,
            )
            self.slot_dets = np.array([d for d in basis if d != self.reference])
            self.excitors = tuple(
                excitor_between(self.reference, int(d)) for d in self.slot_dets
            )
        else:
            self.excitors = tuple(enumerate_uccsd(self.reference, self.table.orb_sym))
            dets = []
            for exc in self.excitors:
                applied = apply_excitor(self.reference, exc)
                dets.append(applied[0])
            self.slot_dets = np.array(dets, dtype=np.int64)
        self.n_slots = len(self.slot_dets)

        self.det_to_slot = np.full(1 << self.n_spin, -1, dtype=np.int64)
        self.det_to_slot[self.slot_dets] = np.arange(self.n_slots)

        self.diag_ref = slater_condon(self.table, self.reference, self.reference)
        self.diag = np.array(
            [slater_condon(self.table, int(d), int(d)) for d in self.slot_dets]
        )
        self.h_row0 = np.array(
            [slater_condon(self.table, self.reference, int(d)) for d in self.slot_dets]
        )
        # slot populations are excitor-gauge amplitudes: N_j multiplies
        # tau_j|D0> = ref_sign_j |D_j>, so determinant-basis increments are
        # converted by ref_sign when deposited onto a slot
        if cfg_mode == "FCIQMC":
            self.ref_signs = np.ones(self.n_slots)
        else:
            self.ref_signs = np.array(
                [apply_excitor(self.reference, exc)[1] for exc in self.excitors],
                dtype=np.float64,
            )

        # phase machinery: sign(tau applied to D) =
        #   const * (-1)^popcount(D & phase_mask) on applicable determinants
        self.from_masks = np.array([e.from_mask for e in self.excitors], dtype=np.int64)
        self.to_masks = np.array([e.to_mask for e in self.excitors], dtype=np.int64)
        self.flip_masks = self.from_masks | self.to_masks
        phase_masks = []
        consts = []
        for exc in self.excitors:
            mask = 0
            for orb in exc.from_orbs + exc.to_orbs:
                mask ^= (1 << orb) - 1
            phase_masks.append(mask)
            probe_det = exc.from_mask  # minimal applicable determinant
            _, sign = apply_excitor(probe_det, exc)
            par = (probe_det & mask).bit_count() & 1
            consts.append(sign * (1 - 2 * par))
        self.phase_masks = np.array(phase_masks, dtype=np.int64)
        self.phase_consts = np.array(consts, dtype=np.float64)
        self._spawn_cache: dict = {}

        # dense spin-orbital integral tables for the fast spawn kernels
        n_so = self.n_spin
        h_arr, g_arr = self.table.to_arrays()
        so = np.arange(n_so)
        spat = so // 2
        same_spin = (so[:, None] % 2) == (so[None, :] % 2)
        self.h_so = np.where(same_spin, h_arr[spat[:, None], spat[None, :]], 0.0)
        # antisymmetrized double element W[i,j,a,b] (phase excluded)
        sp = spat
        W = np.zeros((n_so,) * 4)
        for i in range(n_so):
            for j in range(n_so):
                for a in range(n_so):
                    for b in range(n_so):
                        val = 0.0
                        if i % 2 == a % 2 and j % 2 == b % 2:
                            val += g_arr[sp[i], sp[a], sp[j], sp[b]]
                        if i % 2 == b % 2 and j % 2 == a % 2:
                            val -= g_arr[sp[i], sp[b], sp[j], sp[a]]
                        W[i, j, a, b] = val
        self.w_so = W
        # A[i,a,k] = (ia|kk) - (ik|ka) d_spin, for single-excitation elements
        A = np.zeros((n_so, n_so, n_so))
        for i in range(n_so):
            for a in range(n_so):
                if i % 2 != a % 2:
                    continue
                for k in range(n_so):
                    val = g_arr[sp[i], sp[a], sp[k], sp[k]]
                    if k % 2 == i % 2:
                        val -= g_arr[sp[i], sp[k], sp[k], sp[a]]
                    A[i, a, k] = val
        self.a_so = A

    def excitor_signs(self, slots: np.ndarray, dets: np.ndarray) -> np.ndarray:
        """Vectorized sign of tau_slot applied to each determinant."""
        par = np.bitwise_count(np.bitwise_and(dets, self.phase_masks[slots])) & 1
        return self.phase_consts[slots] * (1.0 - 2.0 * par)

    def spawn_context(self, det: int):
        """Cached occupied/virtual index arrays for the excitation generator."""
        ctx = self._spawn_cache.get(det)
        if ctx is None:
            occ = occupied_orbitals(det)
            occ_a = np.array([o for o in occ if o % 2 == 0], dtype=np.int64)
            occ_b = np.array([o for o in occ if o % 2 == 1], dtype=np.int64)
            virt_a = np.array(
                [q for q in range(0, self.n_spin, 2) if not det >> q & 1],
                dtype=np.int64,
            )
            virt_b = np.array(
                [q for q in range(1, self.n_spin, 2) if not det >> q & 1],
                dtype=np.int64,
            )
            ctx = (np.array(occ, dtype=np.int64), occ_a, occ_b, virt_a, virt_b)
            if len(self._spawn_cache) < 200_000:
                self._spawn_cache[det] = ctx
        return ctx


def make_system(table: IntegralTable, cfg: QmcConfig, frozen: int = 0) -> QmcSystem:
    return QmcSystem(table, cfg.mode, frozen=frozen)


def initial_ensemble(system: QmcSystem, cfg: QmcConfig) -> WalkerEnsemble:
    return WalkerEnsemble(
        pops=np.zeros(system.n_slots),
        n_ref=cfg.init_pop,
        shift=system.diag_ref,
    )


# --------------------------------------------------------------------------
# cluster selection and collapse


def select_cluster_sizes(rng, n_att: int, max_size: int) -> np.ndarray:
    """Sizes with p(s) = 1/2^(s+1) and the truncation tail on max_size."""
    sizes = rng.geometric(0.5, size=n_att) - 1
    return np.minimum(sizes, max_size)


def size_probability(s: int, max_size: int) -> float:
    return 0.5 ** (s + 1) if s < max_size else 0.5**max_size


def collapse_composite(
    system: QmcSystem,
    picks: np.ndarray,
    daggers: np.ndarray,
    dets: np.ndarray,
    signs: np.ndarray,
):
    """Apply excitors (or adjoints) in drawn order; annihilated paths get
    sign 0.  ``picks``/``daggers`` have shape (n, s); dets/signs are updated
    in place."""
    n, s = picks.shape
    for pos in range(s):
        slot = picks[:, pos]
        dag = daggers[:, pos]
        frm = np.where(dag, system.to_masks[slot], system.from_masks[slot])
        to = np.where(dag, system.from_masks[slot], system.to_masks[slot])
        ok = (dets & frm == frm) & (dets & to == 0) & (signs != 0.0)
        # adjoint sign equals the forward sign evaluated on the flipped det
        flipped = dets ^ system.flip_masks[slot]
        sign_det = np.where(dag, flipped, dets)
        step_sign = system.excitor_signs(slot, sign_det)
        signs = np.where(ok, signs * step_sign, 0.0)
        dets = np.where(ok, flipped, dets)
    return dets, signs


def select_and_collapse(
    system: QmcSystem, ens: WalkerEnsemble, cfg: QmcConfig, rng, n_att: int
):
    """One batch of cluster selections, collapsed to (determinant, weight)
    pairs whose total expectation reproduces the sampled wavefunction."""
    if cfg.mode == "tpUCCMC":
        return _tpucc_traversal(system, ens, rng, n_att)
    if cfg.mode == "FCIQMC":
        # walkers live on determinants directly; clusters are single slots
        weights = np.concatenate(([ens.n_ref], ens.pops))
        dets = np.concatenate(([system.reference], system.slot_dets))
        live = weights != 0.0
        return dets[live], weights[live] / 1.0
    abs_pops = np.abs(ens.pops)
    n_ex = float(abs_pops.sum())
    max_size = cfg.max_cluster_size if cfg.mode == "pUCCMC" else 2
    sizes = select_cluster_sizes(rng, n_att, max_size)
    if n_ex == 0.0:
        sizes = np.zeros_like(sizes)
    out_dets = [np.array([system.reference])]
    p0 = size_probability(0, max_size)
    n0_weight = ens.n_ref * np.count_nonzero(sizes == 0) / (p0 * n_att)
    out_weights = [np.array([n0_weight])]
    probs = abs_pops / n_ex if n_ex > 0 else None
    for s in range(1, max_size + 1):
        group = np.where(sizes == s)[0]
        if len(group) == 0 or probs is None:
            continue
        m = len(group)
        picks = rng.choice(system.n_slots, size=(m, s), p=probs)
        if cfg.mode == "pUCCMC" and s > 1:
            daggers = np.zeros((m, s), dtype=bool)
            daggers[:, 1:] = rng.random((m, s - 1)) < 0.5
            coin_factor = 2.0 ** (s - 1)
        else:
            daggers = np.zeros((m, s), dtype=bool)
            coin_factor = 1.0
        dets = np.full(m, system.reference, dtype=np.int64)
        signs = np.ones(m)
        dets, signs = collapse_composite(system, picks, daggers, dets, signs)
        pick_pops = ens.pops[picks]
        amp = np.prod(pick_pops, axis=1) * ens.n_ref ** (1 - s)
        amp *= np.where(daggers, -1.0, 1.0).prod(axis=1)
        p_ord = np.prod(np.abs(pick_pops) / n_ex, axis=1)
        weight = (
            signs
            * amp
            * coin_factor
            / (p_ord * size_probability(s, max_size) * math.factorial(s) * n_att)
        )
        live = weight != 0.0
        out_dets.append(dets[live])
        out_weights.append(weight[live])
    return np.concatenate(out_dets), np.concatenate(out_weights)


def _tpucc_traversal(system: QmcSystem, ens: WalkerEnsemble, rng, n_att: int):
    """Walk the full ordered excitor product once per attempt."""
    if ens.n_ref == 0.0:
        raise PopulationCollapseError("reference population vanished")
    dets = np.full(n_att, system.reference, dtype=np.int64)
    weights = np.full(n_att, ens.n_ref / n_att)
    amps = ens.pops / ens.n_ref
    for k in range(system.n_slots):
        t = amps[k]
        if t == 0.0:
            continue  # p_excit = 0: never applied, cos(0) factor is 1
        sin_t, cos_t = math.sin(t), math.cos(t)
        p_exc = abs(sin_t) / (abs(sin_t) + abs(cos_t))
        frm, to, flip = (
            system.from_masks[k],
            system.to_masks[k],
            system.flip_masks[k],
        )
        can_exc = (dets & frm == frm) & (dets & to == 0)
        can_dex = (dets & to == to) & (dets & frm == 0)
        can = can_exc | can_dex
        if not can.any():
            continue
        apply_mask = can & (rng.random(n_att) < p_exc)
        keep_mask = can & ~apply_mask
        flipped = dets ^ np.where(apply_mask, flip, 0)
        # forward sign on the current det (excitation) or on the flipped det
        # (de-excitation), with the de-excitation branch carrying -sin(t)
        sign_det = np.where(can_dex, dets ^ flip, dets)
        par = np.bitwise_count(np.bitwise_and(sign_det, system.phase_masks[k])) & 1
        sign = system.phase_consts[k] * (1.0 - 2.0 * par)
        branch = np.where(can_dex, -1.0, 1.0)
        factor = np.where(
            apply_mask,
            branch * sign * sin_t / p_exc,
            np.where(keep_mask, cos_t / (1.0 - p_exc), 1.0),
        )
        weights = weights * factor
        dets = flipped
    return dets, weights


# --------------------------------------------------------------------------
# spawning, death, annihilation


def _decode_pair(k: np.ndarray, n: int):
    """k-th pair (i<j) from the triangular enumeration of C(n,2)."""
    j = (np.floor((1.0 + np.sqrt(1.0 + 8.0 * k)) / 2.0)).astype(np.int64)
    i = (k - j * (j - 1) // 2).astype(np.int64)
    return i, j


def _single_phase(dets, i, a):
    lo = np.minimum(i, a)
    hi = np.maximum(i, a)
    mask = (1 << hi) - (1 << (lo + 1))
    par = np.bitwise_count(np.bitwise_and(dets, mask)) & 1
    return 1.0 - 2.0 * par


def _double_phase(dets, i1, i2, a1, a2):
    mask = ((1 << i1) - 1) ^ ((1 << i2) - 1) ^ ((1 << a1) - 1) ^ ((1 << a2) - 1)
    par = np.bitwise_count(np.bitwise_and(dets, mask)) & 1
    const_par = (
        1 + (i1 < a1).astype(int) + (i1 < a2) + (i2 < a1) + (i2 < a2)
    ) & 1
    return (1.0 - 2.0 * par) * (1.0 - 2.0 * const_par)


def spawn_step(
    system: QmcSystem,
    det: int,
    weight: float,
    cfg: QmcConfig,
    rng,
    delta: np.ndarray,
    delta_ref: list,
):
    """Stochastic spawning from one collapsed determinant.

    Samples connected determinants with the uniform spin-conserving
    single/double generator (exact p_gen) and accumulates the signed spawn
    -dtau*H_ji*w/(p_gen*n_samples) onto slots inside the stored space.
    """
    occ, occ_a, occ_b, virt_a, virt_b = system.spawn_context(det)
    nao, nbo, nav, nbv = len(occ_a), len(occ_b), len(virt_a), len(virt_b)
    n_singles = nao * nav + nbo * nbv
    n_aa = (nao * (nao - 1) // 2) * (nav * (nav - 1) // 2)
    n_bb = (nbo * (nbo - 1) // 2) * (nbv * (nbv - 1) // 2)
    n_ab = nao * nbo * nav * nbv
    n_moves = n_singles + n_aa + n_bb + n_ab
    if n_moves == 0:
        return
    p_gen = 1.0 / n_moves
    n_samples = max(1, int(round(abs(weight))))
    base = -cfg.dtau * weight / (p_gen * n_samples)

    kind = rng.integers(0, n_moves, size=n_samples)
    # singles: kind < n_singles
    singles = np.where(kind < n_singles)[0]
    if len(singles) > 0:
        ks = kind[singles]
        alpha_sel = ks < nao * nav
        # decode separately per spin to keep the mapping uniform
        ka = ks[alpha_sel]
        kb = ks[~alpha_sel] - nao * nav
        i_arr = np.empty(len(ks), dtype=np.int64)
        a_arr = np.empty(len(ks), dtype=np.int64)
        if ka.size:
            i_arr[alpha_sel] = occ_a[ka // nav]
            a_arr[alpha_sel] = virt_a[ka % nav]
        if kb.size:
            i_arr[~alpha_sel] = occ_b[kb // nbv]
            a_arr[~alpha_sel] = virt_b[kb % nbv]
        h_el = system.h_so[i_arr, a_arr] + system.a_so[i_arr, a_arr][:, occ].sum(axis=1)
        phase = _single_phase(det, i_arr, a_arr)
        targets = det ^ (1 << i_arr) | (1 << a_arr)
        slots = system.det_to_slot[targets]
        good = (slots >= 0) & (h_el != 0.0)
        gauge = system.ref_signs[slots[good]]
        np.add.at(delta, slots[good], gauge * base * phase[good] * h_el[good])
        ref_hits = targets == system.reference
        if ref_hits.any():
            delta_ref.append(float((base * phase * h_el)[ref_hits].sum()))

    # doubles
    doubles = kind >= n_singles
    if doubles.any():
        kd = kind[doubles] - n_singles
        i1 = np.empty(kd.shape, dtype=np.int64)
        i2 = np.empty(kd.shape, dtype=np.int64)
        a1 = np.empty(kd.shape, dtype=np.int64)
        a2 = np.empty(kd.shape, dtype=np.int64)
        sel_aa = kd < n_aa
        sel_bb = (kd >= n_aa) & (kd < n_aa + n_bb)
        sel_ab = kd >= n_aa + n_bb
        if sel_aa.any():
            k = kd[sel_aa]
            n_vp = nav * (nav - 1) // 2
            oi, oj = _decode_pair(k // n_vp, nao)
            vi, vj = _decode_pair(k % n_vp, nav)
            i1[sel_aa], i2[sel_aa] = occ_a[oi], occ_a[oj]
            a1[sel_aa], a2[sel_aa] = virt_a[vi], virt_a[vj]
        if sel_bb.any():
            k = kd[sel_bb] - n_aa
            n_vp = nbv * (nbv - 1) // 2
            oi, oj = _decode_pair(k // n_vp, nbo)
            vi, vj = _decode_pair(k % n_vp, nbv)
            i1[sel_bb], i2[sel_bb] = occ_b[oi], occ_b[oj]
            a1[sel_bb], a2[sel_bb] = virt_b[vi], virt_b[vj]
        if sel_ab.any():
            k = kd[sel_ab] - n_aa - n_bb
            ia = occ_a[(k // (nbo * nav * nbv))]
            rem = k % (nbo * nav * nbv)
            ib = occ_b[rem // (nav * nbv)]
            rem = rem % (nav * nbv)
            va = virt_a[rem // nbv]
            vb = virt_b[rem % nbv]
            i1[sel_ab], i2[sel_ab] = np.minimum(ia, ib), np.maximum(ia, ib)
            a1[sel_ab], a2[sel_ab] = np.minimum(va, vb), np.maximum(va, vb)
        lo_i, hi_i = np.minimum(i1, i2), np.maximum(i1, i2)
        lo_a, hi_a = np.minimum(a1, a2), np.maximum(a1, a2)
        h_el = system.w_so[lo_i, hi_i, lo_a, hi_a]
        phase = _double_phase(det, lo_i, hi_i, lo_a, hi_a)
        targets = det ^ (1 << lo_i) ^ (1 << hi_i) | (1 << lo_a) | (1 << hi_a)
        slots = system.det_to_slot[targets]
        good = (slots >= 0) & (h_el != 0.0)
        gauge = system.ref_signs[slots[good]]
        np.add.at(delta, slots[good], gauge * base * phase[good] * h_el[good])
        ref_hits = targets == system.reference
        if ref_hits.any():
            delta_ref.append(float((base * phase * h_el)[ref_hits].sum()))


def death_step(
    diag: float, shift: float, weight: float, cfg: QmcConfig, rng=None, quantize=False
) -> float:
    """Diagonal population change -dtau (H_DD - S) w; exact for real weights,
    optionally quantized to integer + Bernoulli remainder."""
    change = -cfg.dtau * (diag - shift) * weight
    if not quantize:
        return change
    magnitude = abs(change)
    whole = math.floor(magnitude)
    if rng.random() < magnitude - whole:
        whole += 1
    return math.copysign(whole, change)


def annihilate(pops: np.ndarray, cfg: QmcConfig, rng) -> np.ndarray:
    """Merge signed weights (already summed per slot) and stochastically
    round magnitudes below the threshold to zero or the threshold."""
    thr = cfg.round_threshold
    if thr <= 0:
        return pops
    small = (pops != 0.0) & (np.abs(pops) < thr)
    if small.any():
        keep = rng.random(int(small.sum())) < np.abs(pops[small]) / thr
        pops[small] = np.where(keep, np.sign(pops[small]) * thr, 0.0)
    return pops


def update_shift(ens: WalkerEnsemble, cfg: QmcConfig, prev_pop: float) -> float:
    total = ens.total_population()
    if total == 0.0:
        raise PopulationCollapseError("total walker population reached zero")
    return ens.shift - cfg.zeta / (cfg.shift_period * cfg.dtau) * math.log(
        total / prev_pop
    )


# --------------------------------------------------------------------------
# the step loop


class QmcRun:
    def __init__(self, system: QmcSystem, cfg: QmcConfig):
        self.system = system
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.ens = initial_ensemble(system, cfg)
        self.prev_pop = self.ens.total_population()
        self.onset_step: int | None = None

    def step(self, step_index: int):
        system, cfg, ens = self.system, self.cfg, self.ens
        n_att = max(20, int(round(ens.total_population())))
        dets, weights = select_and_collapse(system, ens, cfg, self.rng, n_att)
        uniq, inverse = np.unique(dets, return_inverse=True)
        agg = np.zeros(len(uniq))
        np.add.at(agg, inverse, weights)

        # estimators use the raw collapse weights
        is_ref = uniq == system.reference
        slots = system.det_to_slot[uniq]
        in_space = (slots >= 0) & ~is_ref
        den = float(agg[is_ref].sum())
        num = float((system.h_row0[slots[in_space]] * agg[in_space]).sum())

        # tiny collapse weights are stochastically rounded away before the
        # spawn/death work, which keeps the dynamics unbiased but avoids
        # paying per-determinant overhead for negligible contributions
        agg = annihilate(agg, cfg, self.rng)

        delta = np.zeros(system.n_slots)
        delta_ref_parts: list[float] = []
        live = agg != 0.0
        sl_live = slots[live & in_space]
        w_live = agg[live & in_space]
        delta[sl_live] += (
            system.ref_signs[sl_live]
            * -cfg.dtau
            * (system.diag[sl_live] - ens.shift)
            * w_live
        )
        if (live & is_ref).any():
            w_ref = float(agg[live & is_ref].sum())
            delta_ref_parts.append(death_step(system.diag_ref, ens.shift, w_ref, cfg))
        for det, w in zip(uniq[live], agg[live]):
            spawn_step(system, int(det), float(w), cfg, self.rng, delta, delta_ref_parts)

        ens.pops = ens.pops + delta
        ens.n_ref = ens.n_ref + sum(delta_ref_parts)
        ens.pops = annihilate(ens.pops, cfg, self.rng)
        ens.tau += cfg.dtau

        if not ens.variable_shift and ens.total_population() > cfg.target_pop:
            ens.variable_shift = True
            self.onset_step = step_index
            self.prev_pop = ens.total_population()
        if ens.variable_shift and (step_index + 1) % cfg.shift_period == 0:
            ens.shift = update_shift(ens, cfg, self.prev_pop)
            self.prev_pop = ens.total_population()
        if ens.total_population() == 0.0:
            raise PopulationCollapseError(f"population collapsed at step {step_index}")
        return num, den


def run(
    table: IntegralTable,
    cfg: QmcConfig,
    n_steps: int,
    frozen: int = 0,
    system: QmcSystem | None = None,
) -> QmcResult:
    """Execute the select->collapse->spawn->death->annihilate->shift loop.

    Populations are accumulated online into fixed chunks; after the run the
    chunks following (variable-shift onset + equilibration) are merged into
    ``analysis_blocks`` blocks, which also define the amplitude snapshot
    t_i = sum(N_i) / sum(N_0) over the analysis window.
    """
    if system is None:
        system = make_system(table, cfg, frozen=frozen)
    runner = QmcRun(system, cfg)
    cols = {k: np.zeros(n_steps) for k in ("n_w", "n_ref", "shift", "num", "den")}

    n_chunks = min(64, n_steps) if n_steps else 0
    chunk_pops = np.zeros((max(n_chunks, 1), system.n_slots))
    chunk_scalars = np.zeros((max(n_chunks, 1), 4))  # ref, num, den, shift
    chunk_steps = np.zeros(max(n_chunks, 1), dtype=int)
    chunk_start = np.zeros(max(n_chunks, 1), dtype=int)

    for k in range(n_steps):
        num, den = runner.step(k)
        ens = runner.ens
        cols["n_w"][k] = ens.total_population()
        cols["n_ref"][k] = ens.n_ref
        cols["shift"][k] = ens.shift
        cols["num"][k] = num
        cols["den"][k] = den
        c = k * n_chunks // n_steps
        if chunk_steps[c] == 0:
            chunk_start[c] = k
        chunk_pops[c] += ens.pops
        chunk_scalars[c] += (ens.n_ref, num, den, ens.shift)
        chunk_steps[c] += 1

    onset = runner.onset_step
    trace = QmcTrace(
        step=np.arange(n_steps),
        n_w=cols["n_w"],
        n_ref=cols["n_ref"],
        shift=cols["shift"],
        proj_num=cols["num"],
        proj_den=cols["den"],
        onset_step=onset,
    )

    if n_steps == 0:
        snapshot = AmplitudeSnapshot(
            t={exc: 0.0 for exc in system.excitors},
            at_tau=0.0,
            normalizer=cfg.init_pop,
            window_steps=0,
        )
        return QmcResult(trace, snapshot, [], system.diag_ref, cfg)

    start = (
        min(onset + cfg.equilibration, n_steps - 1)
        if onset is not None
        else (3 * n_steps) // 4
    )
    chosen = [c for c in range(n_chunks) if chunk_start[c] >= start and chunk_steps[c]]
    if not chosen:
        chosen = [n_chunks - 1]
    n_blocks = min(cfg.analysis_blocks, len(chosen))
    blocks: list[BlockStats] = []
    for b in range(n_blocks):
        group = chosen[b * len(chosen) // n_blocks : (b + 1) * len(chosen) // n_blocks]
        if not group:
            continue
        blocks.append(
            BlockStats(
                pops_sum=chunk_pops[group].sum(axis=0),
                ref_sum=float(chunk_scalars[group, 0].sum()),
                num_sum=float(chunk_scalars[group, 1].sum()),
                den_sum=float(chunk_scalars[group, 2].sum()),
                shift_sum=float(chunk_scalars[group, 3].sum()),
                steps=int(chunk_steps[group].sum()),
            )
        )

    pops_total = sum((b.pops_sum for b in blocks), np.zeros(system.n_slots))
    ref_total = sum(b.ref_sum for b in blocks)
    window_steps = sum(b.steps for b in blocks)
    if ref_total == 0.0:
        raise EstimatorUndefined("reference population averaged to zero")
    snapshot = AmplitudeSnapshot(
        t={exc: float(p / ref_total) for exc, p in zip(system.excitors, pops_total)},
        at_tau=runner.ens.tau,
        normalizer=float(ref_total / window_steps),
        window_steps=window_steps,
    )
    return QmcResult(trace, snapshot, blocks, system.diag_ref, cfg)


# --------------------------------------------------------------------------
# estimator analysis and exact enumeration oracles


def projected_energy_blocks(result: QmcResult) -> tuple[float, float, np.ndarray]:
    """Total projected energy per analysis block: H_00 + num/den; returns
    (mean, standard error, per-block values)."""
    values = []
    for b in result.blocks:
        if b.den_sum == 0.0:
            raise EstimatorUndefined("projected-energy denominator is zero")
        values.append(result.e_ref + b.num_sum / b.den_sum)
    values = np.array(values)
    stderr = values.std(ddof=1) / math.sqrt(len(values)) if len(values) > 1 else 0.0
    return float(values.mean()), float(stderr), values


def shift_blocks(result: QmcResult) -> tuple[float, float, np.ndarray]:
    values = np.array([b.shift_sum / b.steps for b in result.blocks])
    stderr = values.std(ddof=1) / math.sqrt(len(values)) if len(values) > 1 else 0.0
    return float(values.mean()), float(stderr), values


def amplitude_blocks(result: QmcResult) -> list[np.ndarray]:
    """Per-block amplitude vectors t = sum(N)/sum(N_0)."""
    return [b.pops_sum / b.ref_sum for b in result.blocks]


def exact_tpucc_state(system: QmcSystem, amplitudes: np.ndarray) -> dict[int, float]:
    """<D| prod_n exp(t_n (tau_n - tau_n^dag)) |D0> for every determinant,
    by exact traversal of the ordered product (the zero-variance limit of
    the tpUCCMC collapse)."""
    state = {system.reference: 1.0}
    for k in range(system.n_slots):
        t = float(amplitudes[k])
        if t == 0.0:
            continue
        sin_t, cos_t = math.sin(t), math.cos(t)
        frm = int(system.from_masks[k])
        to = int(system.to_masks[k])
        flip = int(system.flip_masks[k])
        new_state: dict[int, float] = {}
        for det, coeff in state.items():
            can_exc = det & frm == frm and det & to == 0
            can_dex = det & to == to and det & frm == 0
            if not (can_exc or can_dex):
                new_state[det] = new_state.get(det, 0.0) + coeff
                continue
            sign_det = det ^ flip if can_dex else det
            par = (sign_det & int(system.phase_masks[k])).bit_count() & 1
            sign = system.phase_consts[k] * (1 - 2 * par)
            branch = -1.0 if can_dex else 1.0
            new_state[det] = new_state.get(det, 0.0) + coeff * cos_t
            flipped = det ^ flip
            new_state[flipped] = new_state.get(flipped, 0.0) + coeff * branch * sign * sin_t
        state = {d: c for d, c in new_state.items() if c != 0.0}
    return state


def exact_pucc_state(
    system: QmcSystem, amplitudes: np.ndarray, max_order: int = 14
) -> dict[int, float]:
    """Taylor expansion of exp(sum_n t_n (tau_n - tau_n^dag)) |D0> through
    the given order, with repeated excitors included."""
    total = {system.reference: 1.0}
    current = {system.reference: 1.0}
    for order in range(1, max_order + 1):
        nxt: dict[int, float] = {}
        for det, coeff in current.items():
            for k in range(system.n_slots):
                t = float(amplitudes[k])
                if t == 0.0:
                    continue
                frm = int(system.from_masks[k])
                to = int(system.to_masks[k])
                flip = int(system.flip_masks[k])
                if det & frm == frm and det & to == 0:
                    par = (det & int(system.phase_masks[k])).bit_count() & 1
                    sign = system.phase_consts[k] * (1 - 2 * par)
                    tgt = det ^ flip
                    nxt[tgt] = nxt.get(tgt, 0.0) + coeff * t * sign
                if det & to == to and det & frm == 0:
                    tgt = det ^ flip
                    par = (tgt & int(system.phase_masks[k])).bit_count() & 1
                    sign = system.phase_consts[k] * (1 - 2 * par)
                    nxt[tgt] = nxt.get(tgt, 0.0) - coeff * t * sign
        current = {d: c / order for d, c in nxt.items()}
        for det, coeff in current.items():
            total[det] = total.get(det, 0.0) + coeff
    return total


def projected_energy_of_state(system: QmcSystem, state: dict[int, float]) -> float:
    """H_00 + sum_i H_0i c_i / c_0 for an explicit wavefunction."""
    den = state.get(system.reference, 0.0)
    if den == 0.0:
        raise EstimatorUndefined("state has no reference component")
    num = 0.0
    for det, coeff in state.items():
        slot = int(system.det_to_slot[det])
        if det != system.reference and slot >= 0:
            num += system.h_row0[slot] * coeff
    return system.diag_ref + num / den
