import numpy as np
import pytest

from pydantic import ValidationError

from mfclife.ca_engine import GAME_OF_LIFE, Boundary, Grid, OuterTotalisticRule, run
from mfclife.lattice import (
    PRESETS,
    SAMPLING_PHASE,
    CellDynamics,
    DynamicsPreset,
    ShapeMismatchError,
    Trace,
    TraceTooShortError,
    UnverifiedPlanError,
    build_lattice_config,
    equivalence_report,
    sample,
    settling_report,
    simulate,
)
from mfclife.rule_synth import BandPlan


CIRCUIT = PRESETS[DynamicsPreset.CIRCUIT_1MS]
MFC = PRESETS[DynamicsPreset.MFC_4MIN]


def simulate_steps(rule, initial, n_steps, dynamics=CIRCUIT, **kwargs):
    config = build_lattice_config(rule, initial.width, initial.height, initial.boundary, dynamics=dynamics, **kwargs)
    trace = simulate(config, initial, (n_steps + SAMPLING_PHASE) * dynamics.delay_d)
    return config, trace


def test_cell_dynamics_presets():
    assert CIRCUIT.steps_per_delay == 200
    assert MFC.steps_per_delay == 200
    assert MFC.tau * 3 == 240.0

    derived = CellDynamics.for_delay(1e-3)
    assert derived.tau == pytest.approx(CIRCUIT.tau)
    assert derived.dt == pytest.approx(CIRCUIT.dt)
    assert derived.steps_per_delay == 200


@pytest.mark.parametrize("kwargs", [
    {"delay_d": 1e-3, "tau": 1e-4, "dt": 1e-5},
    {"delay_d": 5e-4, "tau": 1e-4, "dt": 5e-6},
    {"delay_d": 1e-3 + 2e-6, "tau": 1e-4, "dt": 5e-6},
    {"delay_d": 1e-3, "tau": 0.0, "dt": 5e-6},
])
def test_cell_dynamics_invalid(kwargs):
    with pytest.raises(ValidationError):
        CellDynamics(**kwargs)


def test_preset_aliases():
    assert DynamicsPreset.from_text("circuit") == DynamicsPreset.CIRCUIT_1MS
    assert DynamicsPreset.from_text("mfc") == DynamicsPreset.MFC_4MIN
    assert DynamicsPreset.from_text("custom") == DynamicsPreset.CUSTOM
    with pytest.raises(ValueError):
        DynamicsPreset.from_text("fast")


def test_all_dead_stays_low():
    config, trace = simulate_steps(GAME_OF_LIFE, Grid.empty(4, 4), 3)

    assert np.all(trace.outputs == config.p_low)
    assert all(g == Grid.empty(4, 4) for g in sample(trace, config, 3))


def test_block_stays_high(block_grid):
    config, trace = simulate_steps(GAME_OF_LIFE, block_grid, 5)

    settled = trace.times >= 5 * CIRCUIT.tau
    block_cells = trace.outputs[settled][:, 1:3, 1:3]
    assert np.all(block_cells >= config.p_high - 0.01)
    assert all(g == block_grid for g in sample(trace, config, 5))


def test_blinker_center_stays_high(blinker_grid):
    config, trace = simulate_steps(GAME_OF_LIFE, blinker_grid, 4)

    assert np.all(trace.outputs[:, 1, 1] == config.p_high)
    assert sample(trace, config, 4) == run(blinker_grid, GAME_OF_LIFE, 4)


def test_blinker_transitions_within_window(blinker_grid):
    config, trace = simulate_steps(GAME_OF_LIFE, blinker_grid, 1)
    d = CIRCUIT.delay_d

    before = trace.index_at(0.9 * d)
    after = trace.index_at(1.9 * d)

    # East/west fall, north/south rise during the first transition window.
    assert trace.outputs[before, 1, 0] == config.p_high
    assert trace.outputs[after, 1, 0] < 0.01
    assert trace.outputs[before, 0, 1] == config.p_low
    assert trace.outputs[after, 0, 1] > 0.99


@pytest.mark.parametrize("boundary", list(Boundary))
def test_sampled_lattice_matches_automaton(boundary):
    n_steps = 30
    for seed in range(10):
        initial = Grid.random(12, 12, seed=seed, boundary=boundary)
        config, trace = simulate_steps(GAME_OF_LIFE, initial, n_steps)

        report = equivalence_report(sample(trace, config, n_steps), run(initial, GAME_OF_LIFE, n_steps))
        assert report.equal, (seed, report.first_divergence)
        assert report.steps_compared == n_steps + 1

        settling = settling_report(trace, config, n_steps)
        assert settling.within(0.01), (seed, settling.max_deviation)

        assert trace.outputs.min() >= config.p_low
        assert trace.outputs.max() <= config.p_high


def test_timescale_invariance(blinker_grid):
    circuit_config, circuit_trace = simulate_steps(GAME_OF_LIFE, blinker_grid, 10, CIRCUIT)
    mfc_config, mfc_trace = simulate_steps(GAME_OF_LIFE, blinker_grid, 10, MFC)

    assert sample(circuit_trace, circuit_config, 10) == sample(mfc_trace, mfc_config, 10)


def test_other_rules_match_automaton():
    highlife = OuterTotalisticRule({3, 6}, {2, 3})
    initial = Grid.random(10, 10, seed=21, boundary=Boundary.TORUS)
    config, trace = simulate_steps(highlife, initial, 12)

    assert len(config.band_params) == 2
    assert equivalence_report(sample(trace, config, 12), run(initial, highlife, 12)).equal


def test_sample_needs_long_enough_trace(blinker_grid):
    config, trace = simulate_steps(GAME_OF_LIFE, blinker_grid, 2)

    with pytest.raises(TraceTooShortError):
        sample(trace, config, 3)
    with pytest.raises(ValueError):
        sample(trace, config, -1)


def test_simulate_rejects_wrong_shape(blinker_grid):
    config = build_lattice_config(GAME_OF_LIFE, 4, 4)

    with pytest.raises(ShapeMismatchError):
        simulate(config, blinker_grid, 1e-3)
    with pytest.raises(ValueError):
        simulate(config, Grid.empty(4, 4), 0.0)


def test_build_lattice_config_calibration():
    config = build_lattice_config(GAME_OF_LIFE, 3, 3, volt_window=(2.0, 7.0))

    assert config.calibration.gain_a == pytest.approx(10 / 3)
    assert config.band_params[0].v_thr_low == pytest.approx(2.0)
    assert config.plan.w_self == 0.5


def test_build_lattice_config_unverified():
    with pytest.raises(UnverifiedPlanError):
        build_lattice_config(GAME_OF_LIFE, 3, 3, plan=BandPlan(0.0, [(2.5, 3.5)]))
    with pytest.raises(UnverifiedPlanError):
        build_lattice_config(OuterTotalisticRule((), ()), 3, 3)


def test_equivalence_report_locates_divergence(blinker_grid):
    oracle = run(blinker_grid, GAME_OF_LIFE, 5)
    sampled = list(oracle)
    cells = oracle[3].cells.copy()
    cells[1, 2] = 1 - cells[1, 2]
    sampled[3] = Grid(cells)

    report = equivalence_report(sampled, oracle)

    assert not report.equal
    assert report.first_divergence == (3, [(1, 2)])
    assert equivalence_report(oracle, oracle).equal


def test_equivalence_report_shape_mismatch(blinker_grid):
    with pytest.raises(ShapeMismatchError):
        equivalence_report([blinker_grid], [blinker_grid, blinker_grid])
    with pytest.raises(ShapeMismatchError):
        equivalence_report([blinker_grid], [Grid.empty(4, 3)])


def test_trace_shape_validation():
    with pytest.raises(ShapeMismatchError):
        Trace(times=np.arange(3.0), outputs=np.zeros((2, 1, 1)))
    with pytest.raises(ShapeMismatchError):
        Trace(times=np.arange(3.0), outputs=np.zeros((3, 1, 1)), inputs=np.zeros((3, 2, 1)))
