"""Piecewise-constant Zeeman schedules and the propagators they generate.

Control is a sequence of (duration, per-site energies) segments with abrupt
switching between them.  Every segment Hamiltonian commutes with total
sigma^z, so each one is diagonalized once per distinct energy vector, in
magnetization sector blocks, and cached; time evolution for any duration is
then a cheap phase rotation.  The optional linear-ramp helper approximates
non-sudden switching with a stack of short constant segments and is off
unless explicitly invoked.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import LengthMismatch
from .model import ChainSpec, classical_ising_energies, sigma_z_values

STATE_NORM_ATOL = 1e-10


@dataclass(frozen=True)
class Segment:
    duration: float
    energies: tuple[float, ...]

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"segment duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class ZeemanSchedule:
    segments: tuple[Segment, ...]

    @classmethod
    def from_steps(cls, steps: Sequence[tuple[float, Sequence[float]]]) -> "ZeemanSchedule":
        return cls(tuple(Segment(float(d), tuple(float(x) for x in e)) for d, e in steps))

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def to_json(self) -> str:
        doc = {"segments": [{"duration": s.duration, "energies": list(s.energies)} for s in self.segments]}
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ZeemanSchedule":
        doc = json.loads(text)
        return cls.from_steps([(seg["duration"], seg["energies"]) for seg in doc["segments"]])


def with_linear_ramps(schedule: ZeemanSchedule, ramp_time: float, steps: int = 8) -> ZeemanSchedule:
    """Replace abrupt switches with piecewise-constant linear ramps.

    Between consecutive segments whose energies differ, inserts `steps` short
    segments interpolating the energy vectors over `ramp_time`.  The ramp is
    carved out of the two neighbors (half each), so total duration and the
    hold energy vectors are unchanged.
    """
    if not schedule.segments or ramp_time <= 0:
        return schedule
    half = ramp_time / 2.0
    if any(s.duration <= half for s in schedule.segments):
        raise ValueError("ramp_time too long for the shortest segment")
    segs = list(schedule.segments)
    out: list[Segment] = []
    for j, seg in enumerate(segs):
        lead = half if j > 0 and segs[j - 1].energies != seg.energies else 0.0
        trail = half if j + 1 < len(segs) and segs[j + 1].energies != seg.energies else 0.0
        out.append(Segment(seg.duration - lead - trail, seg.energies))
        if trail:
            e0 = np.array(seg.energies)
            e1 = np.array(segs[j + 1].energies)
            for k in range(1, steps + 1):
                frac = (k - 0.5) / steps
                out.append(Segment(ramp_time / steps, tuple(e0 + frac * (e1 - e0))))
    return ZeemanSchedule(tuple(out))


def check_state_norm(psi: np.ndarray, atol: float = STATE_NORM_ATOL) -> None:
    norms = np.linalg.norm(psi, axis=0)
    if not np.allclose(norms, 1.0, atol=atol):
        raise ValueError(f"state norm deviates from 1 by {abs(norms - 1.0).max():.3e}")


# ---------------------------------------------------------------------------
# sector-blocked eigensystems, cached per (n, J, energies)

@dataclass(frozen=True)
class _SectorEig:
    perm: np.ndarray          # basis indices grouped by magnetization sector
    rank: np.ndarray          # inverse of perm
    starts: np.ndarray        # block offsets into perm, len = n_blocks + 1
    values: list[np.ndarray]
    vectors: list[np.ndarray]


_EIG_CACHE: dict[tuple, _SectorEig] = {}
_EIG_LOCK = threading.Lock()


def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    counts = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        counts += (idx >> i) & 1
    return counts


def _sector_eig(chain: ChainSpec, energies: tuple[float, ...]) -> _SectorEig:
    key = (chain.n, chain.coupling, energies)
    hit = _EIG_CACHE.get(key)
    if hit is not None:
        return hit

    n, dim, J = chain.n, chain.dim, chain.coupling
    counts = _popcounts(n)
    perm = np.argsort(counts, kind="stable")
    rank = np.empty(dim, dtype=np.int64)
    rank[perm] = np.arange(dim)
    starts = np.searchsorted(counts[perm], np.arange(n + 2))

    diag_all = classical_ising_energies(chain, np.asarray(energies))
    s = sigma_z_values(n)
    values: list[np.ndarray] = []
    vectors: list[np.ndarray] = []
    for k in range(n + 1):
        sector = perm[starts[k]:starts[k + 1]]
        m = sector.size
        block = np.zeros((m, m), dtype=complex)
        local = np.arange(m)
        block[local, local] = diag_all[sector]
        for i in range(n - 1):
            anti = s[i, sector] * s[i + 1, sector] < 0
            src = sector[anti]
            dst = src ^ ((1 << (n - 1 - i)) | (1 << (n - 2 - i)))
            block[rank[dst] - starts[k], rank[src] - starts[k]] += 2.0 * J
        w, v = np.linalg.eigh(block)
        values.append(w)
        vectors.append(v)

    out = _SectorEig(perm=perm, rank=rank, starts=starts, values=values, vectors=vectors)
    with _EIG_LOCK:
        _EIG_CACHE.setdefault(key, out)
    return out


def _apply_segment(eig: _SectorEig, t: float, psi: np.ndarray) -> np.ndarray:
    flat = psi.ndim == 1
    cols = psi[:, None] if flat else psi
    out = np.empty_like(cols)
    grouped = cols[eig.perm]
    for k, (w, v) in enumerate(zip(eig.values, eig.vectors)):
        lo, hi = eig.starts[k], eig.starts[k + 1]
        amp = v.conj().T @ grouped[lo:hi]
        amp *= np.exp(-1j * w * t)[:, None]
        grouped[lo:hi] = v @ amp
    out[eig.perm] = grouped
    return out[:, 0] if flat else out


# ---------------------------------------------------------------------------
# public evolution API

def _segment_eigs(chain: ChainSpec, schedule: ZeemanSchedule) -> list[tuple[_SectorEig, float]]:
    out = []
    for seg in schedule.segments:
        if len(seg.energies) != chain.n:
            raise LengthMismatch(f"segment has {len(seg.energies)} energies, chain has {chain.n} sites")
        out.append((_sector_eig(chain, seg.energies), seg.duration))
    return out


def evolve(chain: ChainSpec, schedule: ZeemanSchedule, psi0: np.ndarray) -> np.ndarray:
    """Apply the schedule to a state (or a (dim, m) batch of states).

    An empty schedule is the zero-duration limit and returns the input.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    for eig, t in _segment_eigs(chain, schedule):
        psi = _apply_segment(eig, t, psi)
    return psi


def propagator(chain: ChainSpec, schedule: ZeemanSchedule) -> np.ndarray:
    """Full unitary of the schedule; later segments act on the left."""
    if not schedule.segments:
        raise ValueError("schedule must contain at least one segment")
    u = np.eye(chain.dim, dtype=complex)
    for eig, t in _segment_eigs(chain, schedule):
        u = _apply_segment(eig, t, u)
    return u


def apply_hold(chain: ChainSpec, energies: Sequence[float], durations: np.ndarray,
               psi: np.ndarray) -> np.ndarray:
    """Evolve each column of psi under one energy vector for its own duration.

    durations has one entry per column; used for jittered-timing ensembles
    where every trajectory sees the same Hamiltonian for a different time.
    """
    e = tuple(float(x) for x in energies)
    if len(e) != chain.n:
        raise LengthMismatch(f"expected {chain.n} energies, got {len(e)}")
    durations = np.asarray(durations, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 2 or durations.shape != (psi.shape[1],):
        raise LengthMismatch("durations must match the number of state columns")
    eig = _sector_eig(chain, e)
    grouped = psi[eig.perm]
    out = np.empty_like(grouped)
    for k in range(len(eig.starts) - 1):
        lo, hi = eig.starts[k], eig.starts[k + 1]
        v, w = eig.vectors[k], eig.values[k]
        amp = v.conj().T @ grouped[lo:hi]
        amp *= np.exp(-1j * np.outer(w, durations))
        out[lo:hi] = v @ amp
    result = np.empty_like(out)
    result[eig.perm] = out
    return result


def zeeman_frame(chain: ChainSpec, energies: Sequence[float], t: float) -> np.ndarray:
    """Diagonal of R(t) = exp(-i t sum_i E_i sigma^z_i)."""
    e = np.asarray(energies, dtype=float)
    if e.shape != (chain.n,):
        raise LengthMismatch(f"expected {chain.n} energies, got shape {e.shape}")
    zphase = e @ sigma_z_values(chain.n)
    return np.exp(-1j * t * zphase)


def rotating_frame_strip(u: np.ndarray, chain: ChainSpec, energies_passive: Sequence[float],
                         t_total: float) -> np.ndarray:
    """Remove the passive Zeeman winding: returns R(t_total)^dagger applied to u.

    Accepts a full propagator or a (dim, m) stack of evolved columns; only
    trivial single-site phases are removed, so any gate content is intact.
    """
    frame = zeeman_frame(chain, energies_passive, t_total)
    return u * frame.conj()[:, None] if u.ndim == 2 else u * frame.conj()


def schedule_function(chain: ChainSpec,
                      build: Callable[[float], ZeemanSchedule]) -> Callable[[float, np.ndarray], np.ndarray]:
    """Convenience wrapper turning a schedule family into a state map t, psi -> psi(t)."""
    def run(t: float, psi: np.ndarray) -> np.ndarray:
        return evolve(chain, build(t), psi)
    return run
