import math

import numpy as np
import pytest

from fmasim.errors import SimulationBlowUpError
from fmasim.fixtures import (
    compliant_scale_surface,
    fma_paper_plant,
    fma_paper_weighting,
    powercube6,
)
from fmasim.force_control import GainSet, diagonal_gain
from fmasim.simulation import (
    BurrDisturbance,
    FmaScenario,
    ForceControlScenario,
    Metrics,
    SimulationTrace,
    burr_disturbance,
    compute_metrics,
    envelope_points,
    metrics_text,
    pcb_insertion_profile,
    rk4_step,
    run_fma_scenario,
    run_force_control_scenario,
    sinusoidal_force_reference,
    trace_csv_text,
    trapezoidal_acceleration,
    trapezoidal_position,
    trapezoidal_velocity,
)
from fmasim.units import MM_PER_LBF_TO_M_PER_N


def test_rk4_is_fourth_order():
    def deriv(_t, y):
        return -y

    def err(n):
        y = np.array([1.0])
        dt = 1.0 / n
        for k in range(n):
            y = rk4_step(deriv, y, k * dt, dt)
        return abs(y[0] - math.exp(-1.0))

    order = math.log2(err(50) / err(100))
    assert order > 3.9


def test_rk4_accuracy_at_millisecond_steps():
    def deriv(t, y):
        return np.array([math.cos(t)])

    y = np.array([0.0])
    for k in range(1000):
        y = rk4_step(deriv, y, k * 1.0e-3, 1.0e-3)
    assert abs(y[0] - math.sin(1.0)) < 1.0e-9


def test_rk4_validation():
    with pytest.raises(ValueError):
        rk4_step(lambda t, y: y, np.array([1.0]), 0.0, 0.0)
    with pytest.raises(SimulationBlowUpError):
        rk4_step(lambda t, y: np.array([math.inf]), np.array([1.0]), 0.0, 1e-3)


def test_trapezoid_profile_values():
    w = 2.0 * math.pi / 10.0
    assert trapezoidal_velocity(0.0, 10.0, w) == 0.0
    assert trapezoidal_velocity(2.5, 10.0, w) == pytest.approx(w)
    assert trapezoidal_velocity(5.0, 10.0, w) == pytest.approx(w)
    # halfway down the deceleration ramp
    assert trapezoidal_velocity(8.75, 10.0, w) == pytest.approx(w / 2.0)
    assert trapezoidal_velocity(10.0, 10.0, w) == pytest.approx(0.0)
    assert trapezoidal_acceleration(1.0, 10.0, w) == pytest.approx(w / 2.5)
    assert trapezoidal_acceleration(5.0, 10.0, w) == 0.0
    assert trapezoidal_acceleration(9.0, 10.0, w) == pytest.approx(-w / 2.5)


def test_trapezoid_profile_domain():
    for fn in (trapezoidal_velocity, trapezoidal_position, trapezoidal_acceleration):
        with pytest.raises(ValueError):
            fn(-0.1, 10.0, 1.0)
        with pytest.raises(ValueError):
            fn(10.1, 10.0, 1.0)
        with pytest.raises(ValueError):
            fn(1.0, 0.0, 1.0)


def test_trapezoid_position_integrates_velocity():
    w = 0.62832
    total = 10.0
    ts = np.linspace(0.0, total, 2001)
    integral = 0.0
    prev_v = trapezoidal_velocity(0.0, total, w)
    for a, b in zip(ts[:-1], ts[1:]):
        v = trapezoidal_velocity(b, total, w)
        integral += 0.5 * (prev_v + v) * (b - a)
        prev_v = v
        assert trapezoidal_position(b, total, w) == pytest.approx(integral, abs=1e-6)
    # ramps average to half speed, so the sweep covers 3/4 of w * T
    w = 2.0 * math.pi / total
    assert trapezoidal_position(total, total, w) == pytest.approx(0.75 * w * total)


def test_sinusoidal_reference_is_rectified():
    assert sinusoidal_force_reference(0.0, -13.3, 50.0) == 0.0
    assert sinusoidal_force_reference(12.5, -13.3, 50.0) == pytest.approx(-13.3)
    assert sinusoidal_force_reference(37.5, -13.3, 50.0) == pytest.approx(-13.3)
    assert sinusoidal_force_reference(25.0, -13.3, 50.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        sinusoidal_force_reference(-1.0, 1.0, 50.0)
    with pytest.raises(ValueError):
        sinusoidal_force_reference(1.0, 1.0, 0.0)


def test_insertion_profile_knots():
    assert pcb_insertion_profile(0.0) == 0.0
    assert pcb_insertion_profile(1.2299) == 0.0
    eps = 1.0e-9
    # quintic blends land on the next segment start within the drawing tolerance
    assert abs(pcb_insertion_profile(1.485 - eps) - 30.0) < 0.5
    assert abs(pcb_insertion_profile(1.68 - eps) - 65.0) < 0.5
    assert abs(pcb_insertion_profile(1.86 - eps) - 28.0) < 0.5
    assert pcb_insertion_profile(2.0) == 28.0
    assert pcb_insertion_profile(2.22) == 28.0
    with pytest.raises(ValueError):
        pcb_insertion_profile(-0.01)
    with pytest.raises(ValueError):
        pcb_insertion_profile(2.23)


def test_burr_disturbance_band_gating():
    rng = np.random.default_rng(0)
    bands = ((1.0, 2.0, 5.0),)
    assert burr_disturbance(0.5, 3.0, rng, bands, noise_sigma=0.0) == 0.0
    # band edges are open
    assert burr_disturbance(1.0, 3.0, rng, bands, noise_sigma=0.0) == 0.0
    assert burr_disturbance(2.0, 3.0, rng, bands, noise_sigma=0.0) == 0.0
    assert burr_disturbance(1.5, 3.0, rng, bands, noise_sigma=0.0) == pytest.approx(15.0)


def test_burr_disturbance_noise_statistics():
    rng = np.random.default_rng(7)
    samples = np.array([burr_disturbance(0.0, 0.0, rng) for _ in range(100_000)])
    assert abs(samples.mean()) < 0.05
    assert abs(samples.std() - 2.0) / 2.0 < 0.05


def test_burr_disturbance_deterministic_under_seed():
    a = [burr_disturbance(1.5, 2.0, np.random.default_rng(42)) for _ in range(1)]
    b = [burr_disturbance(1.5, 2.0, np.random.default_rng(42)) for _ in range(1)]
    assert a == b


def test_burr_dataclass_validation():
    with pytest.raises(ValueError):
        BurrDisturbance(bands=((2.0, 1.0, 5.0),))
    with pytest.raises(ValueError):
        BurrDisturbance(noise_sigma=-1.0)


def test_fma_scenario_validation():
    plant = fma_paper_plant()
    with pytest.raises(ValueError):
        FmaScenario(plant, reference="cubic")
    with pytest.raises(ValueError):
        FmaScenario(plant, timestep=2.0e-3, control_period=3.0e-3)
    with pytest.raises(ValueError):
        FmaScenario(plant, duration=-1.0)
    assert FmaScenario(plant, duration=4.0).peak_speed == pytest.approx(2.0 * math.pi / 4.0)
    assert FmaScenario(plant, omega_peak=0.9).peak_speed == 0.9


def test_force_scenario_validation():
    chain = powercube6()
    surface = compliant_scale_surface()
    gains = GainSet(kp=diagonal_gain(0.0, 0.0, 1.0) * MM_PER_LBF_TO_M_PER_N)
    with pytest.raises(ValueError):
        ForceControlScenario(chain, surface, gains, law="impedance")
    with pytest.raises(ValueError):
        ForceControlScenario(chain, surface, gains, reference="square")
    with pytest.raises(ValueError):
        ForceControlScenario(chain, surface, gains, home=(0.0, 0.0))
    with pytest.raises(ValueError):
        ForceControlScenario(chain, surface, gains, physics_timestep=1.0)


def rest_scenario(duration=0.5):
    plant = fma_paper_plant()
    return FmaScenario(
        plant=plant,
        controller_model=plant,
        weighting=fma_paper_weighting(),
        kp=900.0,
        kv=60.0,
        reference="rest",
        duration=duration,
        disturbance=None,
        seed=0,
        name="rest-hold",
    )


def test_rest_scenario_holds_equilibrium():
    # breakaway friction flips sign between ticks, so the hold is a tight
    # limit cycle around zero rather than an exact fixed point
    trace = run_fma_scenario(rest_scenario())
    assert np.max(np.abs(trace.column("qd"))) < 5.0e-4
    assert np.max(np.abs(trace.column("q"))) < 2.0e-4


def test_fma_trace_structure_and_metrics():
    trace = run_fma_scenario(rest_scenario(0.2))
    assert trace.columns[:3] == ("t", "q", "q_ref")
    assert trace.n_samples == 201
    assert trace.meta["kind"] == "fma"
    metrics = compute_metrics(trace)
    assert metrics.kind == "fma"
    assert metrics.max_position_error < 2.0e-4
    # rotors hold still in a perfect hover, partition may be degenerate
    text = metrics_text(metrics)
    assert "max_position_error" in text
    assert "kind = fma" in text


def test_trace_csv_round_trips_floats():
    trace = run_fma_scenario(rest_scenario(0.05))
    text = trace_csv_text(trace)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(trace.columns)
    parsed = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    assert np.array_equal(parsed, trace.data)


def test_simulation_trace_validation():
    cols = ("t", "q")
    with pytest.raises(ValueError):
        SimulationTrace(cols, np.zeros((3, 3)), {}, {})
    with pytest.raises(ValueError):
        SimulationTrace(cols, np.array([[0.0, 1.0], [0.0, 2.0]]), {}, {})
    with pytest.raises(ValueError):
        SimulationTrace(cols, np.array([[0.0, 1.0], [1.0, 2.0], [1.5, 3.0]]), {}, {})
    trace = SimulationTrace(cols, np.array([[0.0, 1.0], [1.0, 2.0]]), {}, {})
    with pytest.raises(ValueError):
        trace.data[0, 0] = 5.0
    with pytest.raises(KeyError):
        trace.column("missing")


def test_metrics_validation_and_dispatch():
    with pytest.raises(ValueError):
        Metrics(kind="fma", pvke_percent=(50.0, 60.0))
    empty = SimulationTrace(("t",), np.zeros((0, 1)), {"kind": "fma"}, {})
    with pytest.raises(ValueError):
        compute_metrics(empty)
    bogus = SimulationTrace(("t",), np.zeros((1, 1)), {"kind": "thermal"}, {})
    with pytest.raises(ValueError):
        compute_metrics(bogus)


def test_envelope_points_pool_and_dedup():
    trace = run_fma_scenario(rest_scenario(0.1))
    points = envelope_points([trace])
    assert points
    assert all(p.tag == "rest-hold" for p in points)
    # a perfect hover visits essentially one operating point
    assert len(points) < trace.n_samples
    stripped = SimulationTrace(trace.columns, trace.data, trace.meta, {})
    with pytest.raises(ValueError):
        envelope_points([stripped])
    with pytest.raises(ValueError):
        envelope_points([])


def test_force_run_reaches_contact():
    scenario = ForceControlScenario(
        chain=powercube6(),
        surface=compliant_scale_surface(),
        gains=GainSet(
            kp=diagonal_gain(0.0, 0.0, 0.1) * MM_PER_LBF_TO_M_PER_N,
            kv=diagonal_gain(0.0, 0.0, 0.1) * MM_PER_LBF_TO_M_PER_N,
            ki=diagonal_gain(0.0, 0.0, 0.01) * MM_PER_LBF_TO_M_PER_N,
        ),
        duration=12.0,
        name="contact-smoke",
    )
    trace = run_force_control_scenario(scenario)
    assert trace.meta["kind"] == "force"
    assert trace.meta["contact_time"] is not None
    assert trace.columns[-1] == "f_ref"
    # pushing down on the scale: sensed force goes negative
    assert trace.column("tau_ext").min() < -1.0
