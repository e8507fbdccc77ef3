"""Detuning sweeps and convergence studies.

The central study evaluates the mediated two-qubit gate of the alternate-site
architecture across barrier detunings: for each detuning the gate schedule is
rebuilt, the revival relocated, and the full nine-spin propagator compared
against the ideal exchange gate on all sixteen four-qubit basis inputs.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import ConfigInvalid, IoFailure, NoRevivalFound
from .evolve import evolve, rotating_frame_strip, zeeman_frame
from .gates import exchange_gate_target, find_revival
from .model import ZeemanLevels
from .schemes import arch1_gate_family, arch1_section

DEFAULT_DELTA_GRID = (5.0, 10.0, 20.0, 50.0, 100.0, 300.0, 1000.0)
SWEEP_METRICS = ("defect_worst", "phase_noise", "leakage", "trace_distance")
SWEEP_REVIVAL_THRESHOLD = 0.5   # strongly detuned points never reach 0.999
SWEEP_REVIVAL_DIP = 0.85
CHI_SCAN_POINTS = 720


@dataclass(frozen=True)
class SweepSpec:
    delta_values: tuple[float, ...]
    scheme: str = "alternate_site_exchange"
    metrics: tuple[str, ...] = ("defect_worst", "phase_noise", "leakage")
    coupling: float = 1.0

    def __post_init__(self):
        dv = tuple(float(d) for d in self.delta_values)
        object.__setattr__(self, "delta_values", dv)
        if len(dv) < 2:
            raise ConfigInvalid("delta_values needs at least 2 points")
        if any(d <= 0 for d in dv):
            raise ConfigInvalid("delta_values must be positive")
        if list(dv) != sorted(dv):
            raise ConfigInvalid("delta_values must be ascending")
        if self.scheme != "alternate_site_exchange":
            raise ConfigInvalid(f"unknown sweep scheme {self.scheme!r}")
        unknown = set(self.metrics) - set(SWEEP_METRICS)
        if unknown:
            raise ConfigInvalid(f"unknown metrics {sorted(unknown)}")


@dataclass(frozen=True)
class DefectRecord:
    delta: float
    t_r: float
    defect_worst: float     # max over basis inputs of 1 - |<ideal|actual>|^2
    phase_noise_rad: float  # max basis-state phase deviation after frame fit
    leakage: float


def _middle_pair_dressing(enc, chi: float) -> np.ndarray:
    """Per-logical-basis phase of a differential z rotation on the two gate
    qubits.  Only the difference angle can change overlap moduli; common
    z phases factor into the global/linear fit."""
    phases = np.zeros(enc.logical_dim)
    for j in range(enc.logical_dim):
        bits = [enc.chain_bits(j)[g[0]] for g in enc.qubit_sites]
        s1, s2 = 1 - 2 * bits[1], 1 - 2 * bits[2]
        phases[j] = 0.5 * chi * (s1 - s2)
    return np.exp(1j * phases)


def _walsh_phase_residual(overlaps: Sequence[complex], signs: np.ndarray) -> float:
    """Largest phase deviation unexplained by a global phase plus one z angle
    per sign column, computed wrap-free from products of unit phasors."""
    phasors = np.asarray(overlaps, dtype=complex)
    phasors = phasors / np.abs(phasors)
    n, k = signs.shape
    # Walsh functions outside the model span: products of >= 2 sign columns
    residual = np.zeros(n)
    for m in range(2, k + 1):
        for combo in combinations(range(k), m):
            w = np.prod(signs[:, list(combo)], axis=1).astype(float)
            coeff = np.angle(np.prod(phasors ** w)) / n
            residual += coeff * w
    return float(np.max(np.abs(residual)))


def _sweep_point(delta: float, coupling: float) -> DefectRecord:
    levels = ZeemanLevels.from_delta(coupling, delta)
    arch = arch1_section(levels, coupling)
    family = arch1_gate_family(levels, coupling)
    nominal = np.pi / (3.0 * coupling)
    t_r, _ = find_revival(arch.chain, family, barrier_site=arch.gate_barrier,
                          window=(0.4 * nominal, 2.2 * nominal),
                          enc=arch.enc_gate_pair,
                          threshold=SWEEP_REVIVAL_THRESHOLD,
                          dip_level=SWEEP_REVIVAL_DIP)
    sched = family(t_r)
    enc = arch.enc
    basis = enc.embed_basis()
    actual = evolve(arch.chain, sched, basis)
    actual = rotating_frame_strip(actual, arch.chain, arch.passive_energies,
                                  sched.total_duration)

    target = np.kron(np.kron(np.eye(2), exchange_gate_target()), np.eye(2))
    logical = basis.conj().T @ actual          # logical-subspace block, per input
    # overlap_j(chi) = sum_k conj(dress_k * target[k, j]) * logical[k, j]
    amp = target.conj() * logical

    def worst_defect(chi: float) -> float:
        ov = _middle_pair_dressing(enc, chi).conj() @ amp
        return float(np.max(1.0 - np.abs(ov) ** 2))

    grid = np.linspace(-np.pi, np.pi, CHI_SCAN_POINTS, endpoint=False)
    vals = [worst_defect(c) for c in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[k] - 2 * np.pi / CHI_SCAN_POINTS, grid[k] + 2 * np.pi / CHI_SCAN_POINTS
    # golden-section minimize
    invphi = (np.sqrt(5.0) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = worst_defect(c), worst_defect(d)
    while b - a > 1e-10:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = worst_defect(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = worst_defect(d)
    chi_opt = 0.5 * (a + b)
    defect_worst = worst_defect(chi_opt)

    # phase noise over the inputs whose middle pair is |00> or |11>: there the
    # ideal map is diagonal and any honest phase model is global + per-qubit z
    undressed = amp.sum(axis=0)
    mid_diag = []
    signs = []
    for j in range(enc.logical_dim):
        bits = [enc.chain_bits(j)[g[0]] for g in enc.qubit_sites]
        if bits[1] == bits[2]:
            mid_diag.append(undressed[j])
            signs.append([1 - 2 * bits[0], 1 - 2 * bits[1], 1 - 2 * bits[3]])
    phase_noise = _walsh_phase_residual(mid_diag, np.array(signs))

    mass = (np.abs(logical) ** 2).sum(axis=0)
    leakage = float(np.clip(1.0 - mass.min(), 0.0, 1.0))
    return DefectRecord(delta=float(delta), t_r=float(t_r),
                        defect_worst=defect_worst, phase_noise_rad=phase_noise,
                        leakage=leakage)


def defect_sweep(spec: SweepSpec, threads: int | None = None) -> list[DefectRecord]:
    """One DefectRecord per detuning; points without a barrier revival are
    skipped (missing row) rather than failing the sweep."""
    def safe(delta: float) -> DefectRecord | None:
        try:
            return _sweep_point(delta, spec.coupling)
        except NoRevivalFound:
            return None

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(safe, spec.delta_values))
    else:
        results = [safe(d) for d in spec.delta_values]
    return [r for r in results if r is not None]


# ---------------------------------------------------------------------------
# effective-Ising convergence


@dataclass(frozen=True)
class IsingRecord:
    delta: float
    distance: float   # propagator difference after frame stripping
    leakage: float    # worst diagonal population deficit of the full model


@dataclass(frozen=True)
class IsingFit:
    records: tuple[IsingRecord, ...]
    distance_slope: float
    leakage_slope: float


def ising_convergence(delta_grid: Sequence[float], coupling: float = 1.0,
                      time: float | None = None, n: int = 4) -> IsingFit:
    """Full-chain vs effective-Ising propagators on a passive alternating
    chain.  Leakage (population escaping each computational basis state)
    falls off two decades per detuning decade; the unitary distance one."""
    from .evolve import ZeemanSchedule, propagator
    from .linalg import op_distance
    from .model import ChainSpec, build_effective_ising, site_energies

    grid = [float(d) for d in delta_grid]
    if len(grid) < 3 or max(grid) < 10 * min(grid):
        raise ConfigInvalid("delta_grid needs >= 3 points spanning a decade")
    t = (1.0 / coupling) if time is None else time
    chain = ChainSpec(n=n, coupling=coupling, roles=("AB" * n)[:n])
    records = []
    for delta in grid:
        levels = ZeemanLevels.from_delta(coupling, delta)
        energies = site_energies(chain, levels)
        u = propagator(chain, ZeemanSchedule.from_steps([(t, energies)]))
        u = rotating_frame_strip(u, chain, energies, t)
        h_ising = build_effective_ising(chain, energies)
        # strip the same Zeeman frame from the Ising propagator
        frame = zeeman_frame(chain, energies, t)
        u_ising = np.diag(np.exp(-1j * np.diag(h_ising) * t) * frame.conj())
        dist = op_distance(u, u_ising)
        leak = float(np.max(1.0 - np.abs(np.diag(u)) ** 2))
        records.append(IsingRecord(delta=delta, distance=float(dist), leakage=leak))
    logd = np.log10(grid)
    dslope = float(np.polyfit(logd, np.log10([r.distance for r in records]), 1)[0])
    lslope = float(np.polyfit(logd, np.log10([r.leakage for r in records]), 1)[0])
    return IsingFit(records=tuple(records), distance_slope=dslope, leakage_slope=lslope)


# ---------------------------------------------------------------------------
# tabular output


def emit_table(records: Sequence, path, fmt: str = "csv") -> None:
    """Write dataclass records as CSV or JSON with 12-significant-digit
    floats, header from the field names, rows in input order."""
    if not records:
        raise ConfigInvalid("emit_table needs at least one record")
    names = [f.name for f in fields(records[0])]
    rows = [[getattr(r, name) for name in names] for r in records]

    def fmt_val(v):
        if isinstance(v, float):
            return f"{v:.12g}"
        return v

    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(names)
                for row in rows:
                    w.writerow([fmt_val(v) for v in row])
        elif fmt == "json":
            doc = [{name: (float(f"{v:.12g}") if isinstance(v, float) else v)
                    for name, v in zip(names, row)} for row in rows]
            with open(path, "w") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True)
                fh.write("\n")
        else:
            raise ConfigInvalid(f"unknown table format {fmt!r}")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_table_csv(path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            return [dict(row) for row in csv.DictReader(fh)]
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
