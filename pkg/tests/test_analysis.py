import itertools
import json

import numpy as np
import pytest

from chainlab import analysis, linalg
from chainlab.errors import ConfigInvalid, IoFailure
from chainlab.evolve import propagator, rotating_frame_strip, zeeman_frame
from chainlab.model import ChainSpec, ZeemanLevels, build_effective_ising, build_heisenberg
from chainlab.evolve import ZeemanSchedule


# ---------------------------------------------------------------------------
# sweep configuration


def test_sweep_spec_validation():
    with pytest.raises(ConfigInvalid):
        analysis.SweepSpec(delta_values=(10.0,))
    with pytest.raises(ConfigInvalid):
        analysis.SweepSpec(delta_values=(10.0, -1.0))
    with pytest.raises(ConfigInvalid):
        analysis.SweepSpec(delta_values=(100.0, 10.0))
    with pytest.raises(ConfigInvalid):
        analysis.SweepSpec(delta_values=(10.0, 100.0), scheme="other")
    with pytest.raises(ConfigInvalid):
        analysis.SweepSpec(delta_values=(10.0, 100.0), metrics=("defect_worst", "bogus"))
    spec = analysis.SweepSpec(delta_values=[10, 100])
    assert spec.delta_values == (10.0, 100.0)


# ---------------------------------------------------------------------------
# the default sweep (session fixture)


def test_sweep_covers_grid_in_order(default_sweep):
    assert [r.delta for r in default_sweep] == list(analysis.DEFAULT_DELTA_GRID)


def test_sweep_frozen_rows(default_sweep):
    by_delta = {r.delta: r for r in default_sweep}
    r = by_delta[1000.0]
    assert r.t_r == pytest.approx(1.047861622, rel=1e-6)
    assert r.defect_worst == pytest.approx(2.787568e-5, rel=1e-3)
    assert r.phase_noise_rad == pytest.approx(4.475519e-6, rel=1e-3)
    assert r.leakage == pytest.approx(2.307694e-5, rel=1e-3)
    assert by_delta[100.0].defect_worst == pytest.approx(2.732300e-3, rel=1e-3)
    assert by_delta[5.0].defect_worst == pytest.approx(0.5697030, rel=1e-3)


def test_sweep_defect_monotone(default_sweep):
    defects = [r.defect_worst for r in default_sweep]
    assert all(b < a for a, b in zip(defects, defects[1:]))


def test_sweep_phase_noise_subdominant(default_sweep):
    # the residual phase wobble never explains more than the worst defect
    for r in default_sweep:
        assert np.sin(r.phase_noise_rad / 2.0) ** 2 <= r.defect_worst


def test_sweep_revival_time_approaches_nominal(default_sweep):
    r = default_sweep[-1]
    assert r.t_r == pytest.approx(np.pi / 3.0, rel=1e-3)


def test_sweep_has_rows_even_at_strong_coupling():
    recs = analysis.defect_sweep(analysis.SweepSpec(delta_values=(0.3, 1.0)))
    assert len(recs) == 2
    # in this regime the trend inverts; downstream monotonicity checks flag it
    assert recs[0].defect_worst < recs[1].defect_worst


# ---------------------------------------------------------------------------
# wrap-free phase-model fit


def all_sign_rows(k):
    return np.array([[1 - 2 * b for b in bits]
                     for bits in itertools.product((0, 1), repeat=k)], dtype=float)


def test_walsh_residual_ignores_modelled_phases():
    signs = all_sign_rows(3)
    theta = 3.0 + 2.5 * signs[:, 0] - 1.7 * signs[:, 1] + 0.9 * signs[:, 2]
    resid = analysis._walsh_phase_residual(np.exp(1j * theta), signs)
    assert resid < 1e-12


def test_walsh_residual_detects_cross_terms():
    signs = all_sign_rows(3)
    theta = 0.4 * signs[:, 0] + 0.05 * signs[:, 0] * signs[:, 1]
    resid = analysis._walsh_phase_residual(np.exp(1j * theta), signs)
    assert resid == pytest.approx(0.05, abs=1e-12)
    # a three-way product is also outside the model
    theta3 = theta + 0.02 * signs.prod(axis=1)
    resid3 = analysis._walsh_phase_residual(np.exp(1j * theta3), signs)
    assert resid3 == pytest.approx(0.07, abs=1e-12)


def test_walsh_residual_immune_to_branch_cuts():
    # model angles far beyond pi must not alias into the residual
    signs = all_sign_rows(2)
    theta = 40.0 + 11.0 * signs[:, 0] + 7.0 * signs[:, 1] + 0.03 * signs.prod(axis=1)
    resid = analysis._walsh_phase_residual(np.exp(1j * theta), signs)
    assert resid == pytest.approx(0.03, abs=1e-12)


# ---------------------------------------------------------------------------
# effective Ising convergence


def test_ising_convergence_slopes():
    fit = analysis.ising_convergence((10.0, 30.0, 100.0, 300.0, 1000.0))
    assert fit.distance_slope == pytest.approx(-0.9967, abs=0.02)
    assert fit.leakage_slope == pytest.approx(-2.0284, abs=0.05)
    by_delta = {r.delta: r for r in fit.records}
    assert by_delta[10.0].distance == pytest.approx(0.5912804, rel=1e-3)
    assert by_delta[1000.0].leakage == pytest.approx(9.036911e-6, rel=1e-3)


def test_ising_convergence_grid_validation():
    with pytest.raises(ConfigInvalid):
        analysis.ising_convergence((10.0, 20.0))
    with pytest.raises(ConfigInvalid):
        analysis.ising_convergence((10.0, 20.0, 40.0))


def test_effective_ising_fails_at_equal_levels():
    # with no level separation the frozen-neighbor picture has no basis
    from scipy.linalg import expm
    chain = ChainSpec(n=4, coupling=1.0, roles="ABAB")
    energies = (0.0, 0.0, 0.0, 0.0)
    u = expm(-1j * build_heisenberg(chain, energies))
    ui = expm(-1j * build_effective_ising(chain, energies))
    assert linalg.op_distance(u, ui) == pytest.approx(1.221062, rel=1e-3)


# ---------------------------------------------------------------------------
# tabular output


def test_emit_table_csv_round_trip(tmp_path, default_sweep):
    path = tmp_path / "sweep.csv"
    analysis.emit_table(default_sweep, path, fmt="csv")
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "delta,t_r,defect_worst,phase_noise_rad,leakage"
    assert len(lines) == len(default_sweep) + 1
    rows = analysis.read_table_csv(path)
    for row, rec in zip(rows, default_sweep):
        assert float(row["delta"]) == rec.delta
        assert float(row["defect_worst"]) == pytest.approx(rec.defect_worst, rel=1e-10)


def test_emit_table_json(tmp_path, default_sweep):
    path = tmp_path / "sweep.json"
    analysis.emit_table(default_sweep, path, fmt="json")
    doc = json.loads(path.read_text())
    assert len(doc) == len(default_sweep)
    assert doc[0]["delta"] == default_sweep[0].delta
    assert set(doc[0]) == {"delta", "t_r", "defect_worst", "phase_noise_rad", "leakage"}


def test_emit_table_uses_twelve_digits(tmp_path):
    rec = analysis.DefectRecord(delta=1.0, t_r=np.pi, defect_worst=1e-5,
                                phase_noise_rad=0.0, leakage=0.0)
    path = tmp_path / "one.csv"
    analysis.emit_table([rec], path, fmt="csv")
    assert "3.14159265359" in path.read_text()


def test_emit_table_rejects_bad_input(tmp_path):
    with pytest.raises(ConfigInvalid):
        analysis.emit_table([], tmp_path / "x.csv")
    rec = analysis.DefectRecord(delta=1.0, t_r=1.0, defect_worst=0.0,
                                phase_noise_rad=0.0, leakage=0.0)
    with pytest.raises(ConfigInvalid):
        analysis.emit_table([rec], tmp_path / "x.tsv", fmt="tsv")
    with pytest.raises(IoFailure):
        analysis.emit_table([rec], tmp_path / "missing" / "x.csv")
