"""The three chain architectures, the six-setting global switch, the
barrier-collapse trajectory engine, and the refocusing demo.

Architecture 1 places qubits on alternate sites of an ...ABAB... chain with
barrier spins between them (guards up, the gate-mediating barrier down);
architecture 2 encodes a qubit in a site pair of an ABCABC chain next to an
up barrier; architecture 3 drives an ABCABC chain through two global knobs
(the Zeeman energy of all even-group and all odd-group tunable sites).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidGrouping, IoFailure
from .evolve import ZeemanSchedule, apply_hold, evolve, propagator
from .gates import EncodingMap
from .model import ChainSpec, ZeemanLevels, pauli_site, site_energies

ARCH1_SECTION_SITES = 9
ARCH1_GATE_BARRIER = 4
DEFAULT_PAD = 0.2


def _passive(chain: ChainSpec, levels: ZeemanLevels) -> tuple[float, ...]:
    return tuple(site_energies(chain, levels))


def _steps(*segments: tuple[float, Sequence[float]]) -> ZeemanSchedule:
    return ZeemanSchedule.from_steps([(d, e) for d, e in segments if d > 0])


# ---------------------------------------------------------------------------
# architecture 1: single-site qubits on alternate spins


@dataclass(frozen=True)
class ArchitectureOne:
    chain: ChainSpec
    levels: ZeemanLevels
    enc: EncodingMap              # all four qubits of the nine-site section
    enc_gate_pair: EncodingMap    # just the two qubits adjacent to the gate barrier
    gate_barrier: int

    @property
    def passive_energies(self) -> tuple[float, ...]:
        return _passive(self.chain, self.levels)


def arch1_section(levels: ZeemanLevels, coupling: float = 1.0) -> ArchitectureOne:
    """Nine-site section: barriers at even sites, qubits at odd sites.

    Barrier references alternate down/up from the chain ends so that the
    central gate barrier sits in the down state with up guards beside it.
    """
    n = ARCH1_SECTION_SITES
    chain = ChainSpec(n=n, coupling=coupling, roles="BA" * (n // 2) + "B")
    barrier_refs = {site: (1 if (site // 2) % 2 == 0 else 0) for site in range(0, n, 2)}
    enc = EncodingMap.single_site(n, [1, 3, 5, 7], barrier_refs)
    pair_refs = dict(barrier_refs)
    pair_refs.update({1: 0, 7: 0})
    enc_pair = EncodingMap.single_site(n, [3, 5], pair_refs)
    return ArchitectureOne(chain=chain, levels=levels, enc=enc,
                           enc_gate_pair=enc_pair, gate_barrier=ARCH1_GATE_BARRIER)


def arch1_two_qubit_schedule(levels: ZeemanLevels, t_gate: float,
                             coupling: float = 1.0,
                             pad: float = DEFAULT_PAD) -> tuple[ZeemanSchedule, EncodingMap]:
    """Passive hold, gate barrier at A+J for t_gate, passive hold."""
    arch = arch1_section(levels, coupling)
    passive = arch.passive_energies
    gate = list(passive)
    gate[arch.gate_barrier] = levels.a + coupling
    return _steps((pad, passive), (t_gate, gate), (pad, passive)), arch.enc


def arch1_gate_family(levels: ZeemanLevels, coupling: float = 1.0,
                      pad: float = DEFAULT_PAD) -> Callable[[float], ZeemanSchedule]:
    def family(t: float) -> ZeemanSchedule:
        return arch1_two_qubit_schedule(levels, t, coupling, pad)[0]
    return family


# ---------------------------------------------------------------------------
# architecture 2: paired-site qubits on an ABC chain


@dataclass(frozen=True)
class ArchitectureTwo:
    chain: ChainSpec
    levels: ZeemanLevels
    enc: EncodingMap

    @property
    def passive_energies(self) -> tuple[float, ...]:
        return _passive(self.chain, self.levels)


def arch2_section(levels: ZeemanLevels, coupling: float = 1.0,
                  n_triples: int = 2) -> ArchitectureTwo:
    chain = ChainSpec(n=3 * n_triples, coupling=coupling, roles="ABC" * n_triples)
    pairs = [(3 * k, 3 * k + 1) for k in range(n_triples)]
    refs = {3 * k + 2: 0 for k in range(n_triples)}
    return ArchitectureTwo(chain=chain, levels=levels,
                           enc=EncodingMap.paired(chain.n, pairs, refs))


def arch2_single_qubit_schedule(levels: ZeemanLevels, delta: float, t: float,
                                coupling: float = 1.0) -> tuple[ZeemanSchedule, EncodingMap]:
    """Four-site guarded section (C A B C); the qubit's upper site is tuned
    to A + delta for time t, driving a logical rotation in the x-z plane."""
    chain = ChainSpec(n=4, coupling=coupling, roles="CABC")
    enc = EncodingMap.paired(4, [(1, 2)], {0: 0, 3: 0})
    passive = _passive(chain, levels)
    gate = list(passive)
    gate[2] = levels.a + delta
    return _steps((t, gate)), enc


def arch2_working_point(levels: ZeemanLevels, coupling: float = 1.0) -> float:
    """Tunable-site energy giving equal two-level detunings on both logical
    branches of the two-qubit gate, hence a simultaneous barrier revival."""
    return levels.c - coupling


def arch2_two_qubit_schedule(levels: ZeemanLevels, t_gate: float,
                             coupling: float = 1.0,
                             eps: float | None = None) -> tuple[ZeemanSchedule, EncodingMap]:
    """Six-site section (two full triples); the left qubit's upper site is
    tuned near the barrier level C for t_gate.

    eps defaults to C + J.  Note the measured simultaneous revival of both
    logical branches occurs at arch2_working_point (C - J), not C + J; pass
    it explicitly to operate there.
    """
    arch = arch2_section(levels, coupling, n_triples=2)
    passive = arch.passive_energies
    gate = list(passive)
    gate[1] = (levels.c + coupling) if eps is None else eps
    return _steps((t_gate, gate)), arch.enc


def arch2_gate_family(levels: ZeemanLevels, coupling: float = 1.0,
                      eps: float | None = None) -> Callable[[float], ZeemanSchedule]:
    def family(t: float) -> ZeemanSchedule:
        return arch2_two_qubit_schedule(levels, t, coupling, eps)[0]
    return family


# ---------------------------------------------------------------------------
# architecture 3: two global knobs, six settings


@dataclass(frozen=True)
class SixSetting:
    label: str
    eps_even: float
    eps_odd: float
    duration: float


def six_settings(levels: ZeemanLevels, coupling: float = 1.0) -> tuple[SixSetting, ...]:
    """The six (eps_even, eps_odd) pairs driving universal control.

    One side always idles at B.  Resonant and shifted single-qubit values
    (A, A+J) carry a quarter-flip duration; the entangling value (C+J)
    carries the nominal two-qubit revival duration.  The all-passive pair
    (B, B) is represented by the absence of a segment, not a setting.
    """
    j = coupling
    t1 = np.pi / (4.0 * j)
    t2 = np.pi / (np.sqrt(5.0) * j)
    a, b, c = levels.a, levels.b, levels.c
    return (
        SixSetting("even:B odd:A", b, a, t1),
        SixSetting("even:B odd:A+J", b, a + j, t1),
        SixSetting("even:B odd:C+J", b, c + j, t2),
        SixSetting("even:A odd:B", a, b, t1),
        SixSetting("even:A+J odd:B", a + j, b, t1),
        SixSetting("even:C+J odd:B", c + j, b, t2),
    )


@dataclass(frozen=True)
class ArchitectureThree:
    chain: ChainSpec
    levels: ZeemanLevels
    enc: EncodingMap
    even_sites: tuple[int, ...]   # tunable (upper) sites of even-group qubits
    odd_sites: tuple[int, ...]


def arch3_section(levels: ZeemanLevels, coupling: float = 1.0,
                  n_triples: int = 4) -> ArchitectureThree:
    arch2 = arch2_section(levels, coupling, n_triples)
    tunable = [3 * k + 1 for k in range(n_triples)]
    return ArchitectureThree(chain=arch2.chain, levels=levels, enc=arch2.enc,
                             even_sites=tuple(tunable[0::2]),
                             odd_sites=tuple(tunable[1::2]))


def arch3_apply(setting: SixSetting, chain: ChainSpec,
                levels: ZeemanLevels) -> ZeemanSchedule:
    """Schedule moving every even-group tunable site to eps_even and every
    odd-group one to eps_odd for the setting's duration."""
    if chain.n % 3 != 0 or chain.n < 6 or chain.roles != "ABC" * (chain.n // 3):
        raise InvalidGrouping(
            f"chain of length {chain.n} with roles {chain.roles!r} has no even/odd qubit grouping")
    arch = arch3_section(levels, chain.coupling, chain.n // 3)
    energies = list(_passive(chain, levels))
    for site in arch.even_sites:
        energies[site] = setting.eps_even
    for site in arch.odd_sites:
        energies[site] = setting.eps_odd
    return _steps((setting.duration, energies))


def qubit_encoding(arch_enc: EncodingMap, qubit: int) -> EncodingMap:
    """Single-qubit view: every other qubit frozen in its |0>_L pattern."""
    refs = dict(arch_enc.barrier_refs)
    for q, group in enumerate(arch_enc.qubit_sites):
        if q == qubit:
            continue
        bits = arch_enc.chain_bits(0)
        for site in group:
            refs[site] = bits[site]
    return EncodingMap(arch_enc.n, (arch_enc.qubit_sites[qubit],), tuple(sorted(refs.items())))


def pair_encoding(arch_enc: EncodingMap, qubit_a: int, qubit_b: int) -> EncodingMap:
    """Two-qubit view of a multi-qubit encoding, rest frozen in |0>_L."""
    refs = dict(arch_enc.barrier_refs)
    for q, group in enumerate(arch_enc.qubit_sites):
        if q in (qubit_a, qubit_b):
            continue
        bits = arch_enc.chain_bits(0)
        for site in group:
            refs[site] = bits[site]
    keep = (arch_enc.qubit_sites[qubit_a], arch_enc.qubit_sites[qubit_b])
    return EncodingMap(arch_enc.n, keep, tuple(sorted(refs.items())))


# ---------------------------------------------------------------------------
# state preparation


def initialize_barriers(chain: ChainSpec, enc: EncodingMap) -> np.ndarray:
    """Product state with every qubit in |0>_L and barriers at reference."""
    if enc.n != chain.n:
        raise InvalidGrouping(f"encoding is for {enc.n} sites, chain has {chain.n}")
    return enc.embed_basis()[:, 0].copy()


# ---------------------------------------------------------------------------
# barrier-collapse (Zeno) trajectories


@dataclass(frozen=True)
class ZenoConfig:
    collapse_interval: float      # nominal time between barrier collapses; inf = final readout only
    jitter_stddev: float          # relative per-gate timing error
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.jitter_stddev < 0:
            raise ValueError("jitter_stddev must be >= 0")


@dataclass
class ZenoStats:
    wrong_collapse: np.ndarray    # bool per trial: any off-reference outcome
    fidelity: np.ndarray          # per trial, vs the jitter-free final state
    n_collapse_points: int
    config: ZenoConfig

    @property
    def wrong_collapse_probability(self) -> float:
        return float(self.wrong_collapse.mean())

    @property
    def mean_fidelity(self) -> float:
        return float(self.fidelity.mean())

    def to_json(self) -> str:
        doc = {
            "wrong_collapse_probability": self.wrong_collapse_probability,
            "mean_fidelity": self.mean_fidelity,
            "n_collapse_points": self.n_collapse_points,
            "trials": int(self.wrong_collapse.size),
            "collapse_interval": self.config.collapse_interval,
            "jitter_stddev": self.config.jitter_stddev,
            "seed": self.config.seed,
        }
        return json.dumps(doc, sort_keys=True)

    def write_csv(self, path) -> None:
        try:
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["trial", "wrong_collapse", "fidelity"])
                for i, (w, f) in enumerate(zip(self.wrong_collapse, self.fidelity)):
                    writer.writerow([i, int(w), f"{f:.12g}"])
        except OSError as exc:
            raise IoFailure(str(exc)) from exc


def _collapse_after(schedules: Sequence[ZeemanSchedule], interval: float) -> list[bool]:
    """Collapse flags per gate boundary, by nominal elapsed time; the final
    boundary always carries a barrier readout."""
    flags = []
    since = 0.0
    for sched in schedules:
        since += sched.total_duration
        if since >= interval * (1.0 - 1e-9):
            flags.append(True)
            since = 0.0
        else:
            flags.append(False)
    if flags:
        flags[-1] = True
    return flags


def zeno_run(chain: ChainSpec, base_schedule_sequence: Sequence[ZeemanSchedule],
             enc: EncodingMap, cfg: ZenoConfig,
             psi0: np.ndarray | None = None,
             jitter_mode: str = "independent") -> ZenoStats:
    """Monte-Carlo trajectories of a gate train with timing jitter and
    projective barrier collapses between gates.

    Every gate's segment durations are scaled by 1 + N(0, jitter_stddev);
    at each collapse point all barrier sites are measured in the z basis
    (outcomes recorded, never fed forward) and the run ends with a readout.
    Jitter and collapse randomness come from separate streams of cfg.seed,
    so runs with different collapse intervals see identical timing noise.

    jitter_mode "independent" draws a fresh error for every gate;
    "systematic" draws one error per trial and applies it to every gate
    (a miscalibrated resonance period).  Collapse suppresses the coherent
    accumulation of the systematic kind; independent errors random-walk
    and gain nothing from intermediate collapses.
    """
    n_gates = len(base_schedule_sequence)
    trials = cfg.trials
    flags = _collapse_after(base_schedule_sequence, cfg.collapse_interval)
    n_points = int(sum(flags))
    barriers = enc.barrier_refs

    rng_jit = np.random.default_rng([cfg.seed, 1])
    rng_col = np.random.default_rng([cfg.seed, 2])
    if jitter_mode == "independent":
        noise = rng_jit.standard_normal((trials, n_gates))
    elif jitter_mode == "systematic":
        noise = np.broadcast_to(rng_jit.standard_normal((trials, 1)), (trials, n_gates))
    else:
        raise ValueError(f"unknown jitter_mode {jitter_mode!r}")
    factors = 1.0 + cfg.jitter_stddev * noise
    factors = np.clip(factors, 0.05, None)
    uniforms = rng_col.random((n_points, len(barriers), trials))

    if psi0 is None:
        psi0 = initialize_barriers(chain, enc)
    psi = np.repeat(np.asarray(psi0, dtype=complex)[:, None], trials, axis=1)
    ideal = np.asarray(psi0, dtype=complex).copy()

    dim_idx = np.arange(chain.dim)
    site_masks = {site: ((dim_idx >> (chain.n - 1 - site)) & 1) == ref
                  for site, ref in barriers}

    wrong = np.zeros(trials, dtype=bool)
    point = 0
    for g, sched in enumerate(base_schedule_sequence):
        for seg in sched.segments:
            psi = apply_hold(chain, seg.energies, seg.duration * factors[:, g], psi)
        ideal = evolve(chain, sched, ideal)
        if flags[g]:
            for b, (site, _ref) in enumerate(barriers):
                mask = site_masks[site]
                p_ref = (np.abs(psi[mask]) ** 2).sum(axis=0)
                hit_ref = uniforms[point, b] < p_ref
                wrong |= ~hit_ref
                keep = np.where(hit_ref[None, :], mask[:, None], ~mask[:, None])
                psi = np.where(keep, psi, 0.0)
                norm = np.sqrt((np.abs(psi) ** 2).sum(axis=0))
                psi /= norm
            point += 1
    fid = np.abs(ideal.conj() @ psi) ** 2
    return ZenoStats(wrong_collapse=wrong, fidelity=fid,
                     n_collapse_points=n_points, config=cfg)


# ---------------------------------------------------------------------------
# refocusing demo (adjacent-qubit layout)


@dataclass(frozen=True)
class RefocusRecord:
    pulse_period: float
    residual: float   # deviation of the echo cycle from the identity class


def _echo_cycle(chain: ChainSpec, energies: Sequence[float], tau: float,
                pulsed_sites: Sequence[int], cycles: int = 1) -> np.ndarray:
    pulse = np.eye(chain.dim, dtype=complex)
    for site in pulsed_sites:
        pulse = pauli_site("x", site, chain.n) @ pulse
    hold = _steps((tau, energies))
    u = np.eye(chain.dim, dtype=complex)
    for _ in range(cycles):
        u = pulse @ propagator(chain, hold) @ pulse @ propagator(chain, hold) @ u
    return u


def refocus_demo(chain: ChainSpec, levels: ZeemanLevels,
                 pulse_periods: Sequence[float],
                 cycles: int = 1) -> list[RefocusRecord]:
    """Residual entangling power of an echo cycle versus pulse period.

    Instantaneous x pulses on even sites alternate with free evolution for
    tau; the cycle's two-qubit local invariants are compared to the identity
    class.  The residual vanishes as tau -> 0 (up to the detuning floor).
    """
    from .gates import IDENTITY_INVARIANTS, local_equivalence_invariants

    if chain.n != 2:
        raise InvalidGrouping("the refocusing demo uses an adjacent two-qubit chain")
    energies = _passive(chain, levels)
    out = []
    for tau in pulse_periods:
        u = _echo_cycle(chain, energies, tau, pulsed_sites=(0,), cycles=cycles)
        g1, g2 = local_equivalence_invariants(u)
        residual = max(abs(g1 - IDENTITY_INVARIANTS[0]), abs(g2 - IDENTITY_INVARIANTS[1]))
        out.append(RefocusRecord(pulse_period=float(tau), residual=float(residual)))
    return out
