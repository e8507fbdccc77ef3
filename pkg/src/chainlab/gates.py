"""Logical-gate extraction and identification on top of full-chain propagators.

A logical qubit is carried by one physical site (up = |0>) or by a site pair
(|0>_L = down-up, |1>_L = up-down); every non-qubit site is a barrier pinned
to a reference z-state.  Gates are compared frame-free: once through explicit
per-qubit z-phase dressing against a target matrix, and once through local
equivalence invariants that no single-qubit dressing can move.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .errors import (DimensionMismatch, ExcessiveLeakage, NoRevivalFound,
                     NotDiagonalizableLocally, NotUnitary, SynthesisFailed)
from .evolve import ZeemanSchedule, evolve
from .model import ChainSpec, basis_index

REVIVAL_THRESHOLD = 0.999
REVIVAL_DIP_LEVEL = 0.9
REVIVAL_REFINE_TOL = 1e-6
LEAKAGE_REUNITARIZE = 1e-3
LEAKAGE_MEANINGLESS = 0.1
UNITARY_CHECK_ATOL = 1e-8

# |0>_L, |1>_L bit patterns on a (lower-level, upper-level) site pair
PAIR_LOGICAL_BITS = ((1, 0), (0, 1))


@dataclass(frozen=True)
class EncodingMap:
    """Assignment of chain sites to logical qubits and reference barriers."""

    n: int
    qubit_sites: tuple[tuple[int, ...], ...]
    barrier_refs: tuple[tuple[int, int], ...]  # (site, reference bit), 0 = up

    def __post_init__(self):
        seen: set[int] = set()
        for group in self.qubit_sites:
            if len(group) not in (1, 2):
                raise ValueError(f"a logical qubit spans 1 or 2 sites, got {group}")
            seen.update(group)
        for site, bit in self.barrier_refs:
            if bit not in (0, 1):
                raise ValueError(f"barrier reference bit must be 0 or 1, got {bit}")
            seen.add(site)
        want = set(range(self.n))
        total = sum(len(g) for g in self.qubit_sites) + len(self.barrier_refs)
        if seen != want or total != self.n:
            raise ValueError("qubit and barrier sites must partition the chain")

    @classmethod
    def single_site(cls, n: int, qubits: Sequence[int], barrier_refs: dict[int, int]) -> "EncodingMap":
        return cls(n, tuple((q,) for q in qubits), tuple(sorted(barrier_refs.items())))

    @classmethod
    def paired(cls, n: int, pairs: Sequence[tuple[int, int]], barrier_refs: dict[int, int]) -> "EncodingMap":
        return cls(n, tuple(tuple(p) for p in pairs), tuple(sorted(barrier_refs.items())))

    @property
    def n_qubits(self) -> int:
        return len(self.qubit_sites)

    @property
    def logical_dim(self) -> int:
        return 2 ** self.n_qubits

    def barrier_sites(self) -> tuple[int, ...]:
        return tuple(site for site, _ in self.barrier_refs)

    def reference_bit(self, site: int) -> int:
        for s, bit in self.barrier_refs:
            if s == site:
                return bit
        raise ValueError(f"site {site} is not a barrier")

    def chain_bits(self, logical_index: int) -> tuple[int, ...]:
        """Full-chain bit pattern carrying the given logical basis state."""
        bits = [0] * self.n
        for site, ref in self.barrier_refs:
            bits[site] = ref
        for q, group in enumerate(self.qubit_sites):
            lbit = (logical_index >> (self.n_qubits - 1 - q)) & 1
            if len(group) == 1:
                bits[group[0]] = lbit
            else:
                bits[group[0]], bits[group[1]] = PAIR_LOGICAL_BITS[lbit]
        return tuple(bits)

    def basis_indices(self) -> np.ndarray:
        return np.array([basis_index(self.chain_bits(j)) for j in range(self.logical_dim)])

    def embed_basis(self) -> np.ndarray:
        """(2^n, logical_dim) matrix whose columns are the encoded basis states."""
        out = np.zeros((2 ** self.n, self.logical_dim), dtype=complex)
        out[self.basis_indices(), np.arange(self.logical_dim)] = 1.0
        return out

    def embed_state(self, logical: np.ndarray) -> np.ndarray:
        return self.embed_basis() @ np.asarray(logical, dtype=complex)


def _matrix_json(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


@dataclass
class GateReport:
    logical_unitary: np.ndarray
    leakage: float
    revival_time: float | None = None
    residual_local_phases: tuple | None = None
    invariants_pair: tuple[complex, complex] | None = None
    defect_worst: float | None = None

    def to_json(self) -> str:
        doc = {
            "logical_unitary": _matrix_json(self.logical_unitary),
            "leakage": self.leakage,
            "revival_time": self.revival_time,
            "residual_local_phases": self.residual_local_phases,
            "invariants_pair": None if self.invariants_pair is None else
                [[z.real, z.imag] for z in map(complex, self.invariants_pair)],
            "defect_worst": self.defect_worst,
        }
        return json.dumps(doc, sort_keys=True)


# ---------------------------------------------------------------------------
# revival search


def reference_population(psi: np.ndarray, site: int, ref_bit: int, n: int) -> np.ndarray:
    """Probability of finding `site` in its reference z-state, per column."""
    idx = np.arange(2 ** n)
    mask = ((idx >> (n - 1 - site)) & 1) == ref_bit
    psi2 = np.abs(np.atleast_2d(psi.T).T) ** 2
    return psi2[mask].sum(axis=0)


def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - inv * (b - a)
    x2 = a + inv * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = f(x1)
    t = (a + b) / 2.0
    return t, f(t)


def find_revival(chain: ChainSpec,
                 schedule_family: Callable[[float], ZeemanSchedule],
                 barrier_site: int,
                 window: tuple[float, float],
                 enc: EncodingMap,
                 threshold: float = REVIVAL_THRESHOLD,
                 dip_level: float = REVIVAL_DIP_LEVEL,
                 grid_points: int = 800,
                 refine_tol: float = REVIVAL_REFINE_TOL) -> tuple[float, float]:
    """Earliest time the barrier returns to its reference state after leaving it.

    The figure of merit p(t) is the minimum, over encoded logical basis
    inputs, of the barrier's reference-state population.  A revival requires
    p to first dip below `dip_level` and then recover above `threshold`;
    the earliest grid maximum doing so is refined by golden section to
    `refine_tol` (in units of 1/J).
    """
    ref = enc.reference_bit(barrier_site)
    basis = enc.embed_basis()

    def prob(t: float) -> float:
        psi = evolve(chain, schedule_family(t), basis)
        return float(reference_population(psi, barrier_site, ref, chain.n).min())

    ts = np.linspace(window[0], window[1], grid_points)
    ps = np.array([prob(t) for t in ts])
    dipped = np.flatnonzero(ps < dip_level)
    if dipped.size == 0:
        raise NoRevivalFound(
            f"barrier {barrier_site} never left its reference state "
            f"(min population {ps.min():.6f})")
    start = dipped[0]
    best_i, best_p = None, 0.0
    for i in range(start + 1, grid_points - 1):
        if ps[i] >= ps[i - 1] and ps[i] >= ps[i + 1]:
            if ps[i] > best_p:
                best_p = float(ps[i])
            if ps[i] >= threshold:
                best_i = i
                break
    if best_i is None:
        raise NoRevivalFound(
            f"no revival above {threshold} in window (best {best_p:.6f})",
            best_probability=best_p,
            best_time=float(ts[np.argmax(ps[start:]) + start]))
    tol = refine_tol / chain.coupling
    t_r, p_r = _golden_max(prob, ts[best_i - 1], ts[best_i + 1], tol)
    return float(t_r), float(p_r)


# ---------------------------------------------------------------------------
# extraction and comparison


def extract_gate(u_full: np.ndarray, enc: EncodingMap) -> GateReport:
    """Restrict a full-chain unitary to the encoded subspace.

    The block is re-unitarized by polar projection when leakage is small;
    the raw leakage is always reported.
    """
    u_full = np.asarray(u_full)
    if u_full.shape != (2 ** enc.n, 2 ** enc.n):
        raise DimensionMismatch(f"propagator shape {u_full.shape} does not match n={enc.n}")
    idx = enc.basis_indices()
    block = u_full[np.ix_(idx, idx)]
    col_mass = (np.abs(block) ** 2).sum(axis=0)
    leakage = float(np.clip(1.0 - col_mass.min(), 0.0, 1.0))
    if leakage > LEAKAGE_MEANINGLESS:
        raise ExcessiveLeakage(
            f"leakage {leakage:.4f} exceeds {LEAKAGE_MEANINGLESS}; extracted block is meaningless",
            leakage=leakage)
    logical = linalg.polar_unitary(block) if leakage < LEAKAGE_REUNITARIZE else block
    return GateReport(logical_unitary=logical, leakage=leakage)


_MAGIC = np.array([
    [1, 0, 0, 1j],
    [0, 1j, 1, 0],
    [0, 1j, -1, 0],
    [1, 0, 0, -1j],
], dtype=complex) / np.sqrt(2.0)


def local_equivalence_invariants(u: np.ndarray, atol: float = UNITARY_CHECK_ATOL) -> tuple[complex, complex]:
    """Two-qubit local invariants (g1, g2); equal iff gates differ by local unitaries."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 matrix, got {u.shape}")
    defect = linalg.unitarity_defect(u)
    if defect > atol:
        raise NotUnitary(f"unitarity defect {defect:.3e} exceeds {atol}")
    m = _MAGIC.conj().T @ u @ _MAGIC
    mm = m.T @ m
    det = np.linalg.det(u)
    tr = np.trace(mm)
    g1 = tr ** 2 / (16.0 * det)
    g2 = (tr ** 2 - np.trace(mm @ mm)) / (4.0 * det)
    return complex(g1), complex(g2)


def invariant_deviation(u: np.ndarray, v: np.ndarray) -> float:
    gu, gv = local_equivalence_invariants(u), local_equivalence_invariants(v)
    return float(max(abs(gu[0] - gv[0]), abs(gu[1] - gv[1])))


def operator_schmidt_factor(mat: np.ndarray, n_qubits: int,
                            group: Sequence[int]) -> tuple[np.ndarray, float]:
    """Leading product factor of a multi-qubit operator across a bipartition.

    For mat close to A_group (x) B_rest, returns the group factor (normalized
    to Frobenius norm sqrt(dim), phase arbitrary) and the Schmidt weight
    s_0 / ||s||, which is 1 exactly when mat is a product across the cut.
    Unlike postselected blocks, this stays well conditioned when the other
    qubits are driven far from their input states.
    """
    mat = np.asarray(mat, dtype=complex)
    dim = 2 ** n_qubits
    if mat.shape != (dim, dim):
        raise DimensionMismatch(f"expected {dim}x{dim}, got {mat.shape}")
    group = tuple(group)
    rest = tuple(q for q in range(n_qubits) if q not in group)
    if not group or sorted(set(group)) != sorted(group):
        raise DimensionMismatch("group must be a nonempty set of distinct qubits")
    t = mat.reshape((2,) * (2 * n_qubits))   # axes: out 0..n-1, in n..2n-1
    perm = ([q for q in group] + [n_qubits + q for q in group]
            + [q for q in rest] + [n_qubits + q for q in rest])
    dg, dr = 2 ** len(group), 2 ** len(rest)
    realigned = t.transpose(perm).reshape(dg * dg, dr * dr)
    u, s, _ = np.linalg.svd(realigned, full_matrices=False)
    factor = u[:, 0].reshape(dg, dg)
    factor = factor * (np.sqrt(dg) / np.linalg.norm(factor))
    weight = float(s[0] / np.linalg.norm(s))
    return factor, weight


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def euler_zyz(a: float, b: float, c: float) -> np.ndarray:
    return rz(a) @ ry(b) @ rz(c)


@dataclass
class PhaseAlignment:
    distance: float
    dressed: np.ndarray
    pre_angles: tuple[float, ...]
    post_angles: tuple[float, ...]


def _z_dress(gate: np.ndarray, pre: np.ndarray, post: np.ndarray) -> np.ndarray:
    if gate.shape[0] == 4:
        zpre = np.kron(rz(pre[0]), rz(pre[1]))
        zpost = np.kron(rz(post[0]), rz(post[1]))
    else:
        zpre, zpost = rz(pre[0]), rz(post[0])
    return zpost @ gate @ zpre


def align_phases(gate: np.ndarray, target: np.ndarray, two_sided: bool = True,
                 n_starts: int = 8, seed: int = 0) -> PhaseAlignment:
    """Dress a gate with per-qubit z-rotations to best match a target.

    Minimizes global-phase-invariant distance over pre and post z-angles
    (post only, if two_sided is false).  Deterministic multi-start.
    """
    gate = np.asarray(gate, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if gate.shape != target.shape or gate.shape[0] not in (2, 4):
        raise DimensionMismatch(f"cannot align shapes {gate.shape} and {target.shape}")
    per_side = 2 if gate.shape[0] == 4 else 1
    n_par = per_side * 2 if two_sided else per_side
    dim = gate.shape[0]

    def split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if two_sided:
            return x[:per_side], x[per_side:]
        return np.zeros(per_side), x

    def trace_cost(x: np.ndarray) -> float:
        pre, post = split(x)
        return 1.0 - abs(np.trace(target.conj().T @ _z_dress(gate, pre, post))) / dim

    rng = np.random.default_rng(seed)
    starts = [np.zeros(n_par)] + [rng.uniform(-np.pi, np.pi, n_par) for _ in range(n_starts - 1)]
    best_x, best_c = None, np.inf
    for x0 in starts:
        res = minimize(trace_cost, x0, method="Powell",
                       options={"xtol": 1e-12, "ftol": 1e-14, "maxfev": 20000})
        if res.fun < best_c:
            best_c, best_x = res.fun, res.x

    def dist_cost(x: np.ndarray) -> float:
        pre, post = split(x)
        return linalg.op_distance(_z_dress(gate, pre, post), target)

    res = minimize(dist_cost, best_x, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxfev": 20000})
    if res.fun < dist_cost(best_x):
        best_x = res.x
    pre, post = split(best_x)
    dressed = _z_dress(gate, pre, post)
    return PhaseAlignment(distance=float(dist_cost(best_x)), dressed=dressed,
                          pre_angles=tuple(pre), post_angles=tuple(post))


def derive_local_corrections(k: np.ndarray, atol: float = UNITARY_CHECK_ATOL
                             ) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Split a (near-)diagonal two-qubit gate into local z-phases and a
    controlled phase: (Q1 x Q2) K = diag(1, 1, 1, e^{i phi}).

    Returns (Q1, Q2, phi, off_diagonal_residual), phi in (-pi, pi].
    """
    k = np.asarray(k, dtype=complex)
    if k.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 matrix, got {k.shape}")
    defect = linalg.unitarity_defect(k)
    if defect > atol:
        raise NotUnitary(f"unitarity defect {defect:.3e} exceeds {atol}")
    off = k - np.diag(np.diag(k))
    residual = float(np.abs(off).max())
    if residual > 1e-3:
        raise NotDiagonalizableLocally(
            f"off-diagonal residual {residual:.3e} exceeds 1e-3")
    a, b, c, d = np.angle(np.diag(k))
    phi = float(np.angle(np.exp(1j * (a - b - c + d))))
    # q1 = (0, a - c) and q2 = (-a, -b) solve the three unit-entry equations
    q1 = np.diag([1.0, np.exp(1j * (a - c))]).astype(complex)
    q2 = np.diag([np.exp(-1j * a), np.exp(-1j * b)])
    return q1, q2, phi, residual


# ---------------------------------------------------------------------------
# reference gates


def exchange_gate_target() -> np.ndarray:
    """Two-qubit gate produced by the resonant barrier exchange."""
    w = 0.5 * np.exp(1j * np.pi / 3.0)
    return np.array([
        [1, 0, 0, 0],
        [0, w, 1j * np.sqrt(3.0) * w, 0],
        [0, 1j * np.sqrt(3.0) * w, w, 0],
        [0, 0, 0, 1],
    ], dtype=complex)


def controlled_phase(phi: float) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * phi)]).astype(complex)


def cnot_target() -> np.ndarray:
    return np.array([
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ], dtype=complex)


# invariants of the synthesis target, fixed by direct evaluation on CNOT
CNOT_INVARIANTS = (0.0 + 0.0j, 1.0 + 0.0j)
IDENTITY_INVARIANTS = (1.0 + 0.0j, 3.0 + 0.0j)


# ---------------------------------------------------------------------------
# CNOT synthesis


@dataclass
class SynthesisResult:
    fidelity: float
    n_uses: int
    local_angles: np.ndarray  # (n_uses + 1, 6): ZYZ angles for each qubit pair
    n_starts_used: int

    def local_gates(self) -> list[np.ndarray]:
        return [_local_layer(row) for row in self.local_angles]

    def to_json(self) -> str:
        doc = {
            "fidelity": self.fidelity,
            "n_uses": self.n_uses,
            "local_angles": [[float(a) for a in row] for row in self.local_angles],
            "n_starts_used": self.n_starts_used,
        }
        return json.dumps(doc, sort_keys=True)


def _local_layer(angles: np.ndarray) -> np.ndarray:
    return np.kron(euler_zyz(*angles[:3]), euler_zyz(*angles[3:]))


def circuit_fidelity(entangler: np.ndarray, angles: np.ndarray, target: np.ndarray) -> float:
    """F = |tr(target^dag L_n E ... E L_0)|^2 / 16 for interleaved local layers."""
    u = _local_layer(angles[0])
    for row in angles[1:]:
        u = _local_layer(row) @ entangler @ u
    t = np.trace(target.conj().T @ u)
    return float(abs(t) ** 2 / 16.0)


def synthesize_cnot(entangler: np.ndarray, n_uses: int, seed: int = 0,
                    n_starts: int = 64, threads: int | None = None,
                    target: np.ndarray | None = None,
                    success_fidelity: float = 1.0 - 1e-6,
                    fail_fidelity: float = 0.999) -> SynthesisResult:
    """Search interleaving single-qubit layers for a CNOT realization.

    Multi-start derivative-free maximization of circuit fidelity; start k
    draws its initial angles from a stream seeded by (seed, k), so the
    result does not depend on evaluation order or worker count.  Starts run
    in fixed batches with early stop once a batch contains a success.
    """
    entangler = np.asarray(entangler, dtype=complex)
    defect = linalg.unitarity_defect(entangler)
    if defect > UNITARY_CHECK_ATOL:
        raise NotUnitary(f"entangler unitarity defect {defect:.3e}")
    if target is None:
        target = cnot_target()
    shape = (n_uses + 1, 6)

    def run_start(k: int) -> tuple[float, np.ndarray]:
        rng = np.random.default_rng([seed, k])
        x0 = rng.uniform(-np.pi, np.pi, shape).ravel()
        res = minimize(
            lambda x: 1.0 - circuit_fidelity(entangler, x.reshape(shape), target),
            x0, method="Powell",
            options={"xtol": 1e-11, "ftol": 1e-13, "maxfev": 40000})
        return 1.0 - res.fun, res.x.reshape(shape)

    best_f, best_x, used = -1.0, None, 0
    batch = 8
    for lo in range(0, n_starts, batch):
        ids = range(lo, min(lo + batch, n_starts))
        if threads and threads > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(run_start, ids))
        else:
            results = [run_start(k) for k in ids]
        used = max(ids) + 1
        for f, x in results:
            if f > best_f:
                best_f, best_x = f, x
        if best_f > success_fidelity:
            break
    if best_f < fail_fidelity:
        raise SynthesisFailed(
            f"best fidelity {best_f:.6f} after {used} starts",
            best_fidelity=best_f)
    return SynthesisResult(fidelity=best_f, n_uses=n_uses,
                           local_angles=best_x, n_starts_used=used)
