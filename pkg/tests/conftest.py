"""Shared fixtures for the expensive end-to-end pipelines.

The nine-site extraction and the default detuning sweep take seconds each;
they are computed once per session and reused by the unit and acceptance
tests.
"""

import numpy as np
import pytest

from chainlab import analysis, gates, schemes
from chainlab.evolve import propagator, rotating_frame_strip
from chainlab.model import ZeemanLevels


@pytest.fixture(scope="session")
def arch1_pipeline():
    """Nine-site exchange gate at detuning 1000: revival, extraction, alignment."""
    coupling = 1.0
    levels = ZeemanLevels.from_delta(coupling=coupling, delta=1000.0)
    arch = schemes.arch1_section(levels, coupling)
    family = schemes.arch1_gate_family(levels, coupling, pad=schemes.DEFAULT_PAD)
    nominal = np.pi / (3.0 * coupling)
    t_r, p_r = gates.find_revival(
        arch.chain, family, arch.gate_barrier,
        window=(0.4 * nominal, 2.2 * nominal), enc=arch.enc_gate_pair,
        threshold=0.5, dip_level=0.85)
    sched, _ = schemes.arch1_two_qubit_schedule(levels, t_r, coupling,
                                                pad=schemes.DEFAULT_PAD)
    u = propagator(arch.chain, sched)
    u = rotating_frame_strip(u, arch.chain, arch.passive_energies,
                             sched.total_duration)
    report = gates.extract_gate(u, arch.enc_gate_pair)
    alignment = gates.align_phases(report.logical_unitary,
                                   gates.exchange_gate_target())
    return {
        "coupling": coupling,
        "levels": levels,
        "arch": arch,
        "t_r": t_r,
        "p_r": p_r,
        "report": report,
        "alignment": alignment,
    }


@pytest.fixture(scope="session")
def default_sweep():
    """Defect sweep over the default detuning grid."""
    spec = analysis.SweepSpec(delta_values=analysis.DEFAULT_DELTA_GRID)
    return analysis.defect_sweep(spec)
