"""Scenario execution for the dual-actuator rig and the contact tasks.

Reference generators, the burr-disturbance model, a classic fixed-step
RK4 integrator, two scenario runners that produce uniformly sampled
traces, the metrics extracted from those traces, and performance-envelope
points. Runs are deterministic: all randomness flows from one seeded
PCG64 generator per run, and repeated runs of the same scenario yield
bit-identical traces.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from . import fma
from .errors import DegenerateConfigurationError, SimulationBlowUpError
from .fma import DualActuatorModel, WeightingPolicy, motor_dynamics_matrices
from .force_control import (
    ContactPhase,
    ContactSurface,
    GainSet,
    SignalConditioner,
    compliant_control_step,
    condition_signal,
    contact_state_step,
    contact_wrench,
    pure_force_control_step,
)
from .kinematics import SerialChainModel, frame_transforms, g_function
from .spatial import Wrench
from .units import GRAVITY, LBF_TO_N

TRACE_COLUMNS = ("t", "q", "q_ref", "qd", "qd_ref", "qM1", "qM2", "v1", "v2", "tau_ext")

# Burr bands as published: viscous gain over two narrow angle windows.
DEFAULT_BURR_BANDS = (
    (math.radians(1.0), math.radians(2.0), 5.0),
    (math.radians(3.0), math.radians(4.0), 25.0),
)


def rk4_step(deriv, state, t: float, dt: float):
    """One classic fourth-order Runge-Kutta step of d(state)/dt = deriv(t, state)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    y = np.asarray(state, dtype=float)
    k1 = np.asarray(deriv(t, y), dtype=float)
    k2 = np.asarray(deriv(t + 0.5 * dt, y + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(deriv(t + 0.5 * dt, y + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(deriv(t + dt, y + dt * k3), dtype=float)
    increment = (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0)
    if not np.all(np.isfinite(increment)):
        raise SimulationBlowUpError(f"non-finite derivative at t={t:.6g} s")
    return y + increment


def trapezoidal_velocity(t: float, total_time: float, omega_peak: float) -> float:
    """Ramp/plateau/ramp speed profile: quarter-period ramps at each end."""
    if total_time <= 0.0:
        raise ValueError("total_time must be positive")
    if t < 0.0 or t > total_time:
        raise ValueError(f"t={t} outside [0, {total_time}]")
    ramp = total_time / 4.0
    if t <= ramp:
        return omega_peak * t / ramp
    if t < 3.0 * ramp:
        return omega_peak
    return omega_peak * (total_time - t) / ramp


def trapezoidal_position(t: float, total_time: float, omega_peak: float) -> float:
    """Integral of the trapezoidal speed profile from zero initial position."""
    if total_time <= 0.0:
        raise ValueError("total_time must be positive")
    if t < 0.0 or t > total_time:
        raise ValueError(f"t={t} outside [0, {total_time}]")
    ramp = total_time / 4.0
    accel = omega_peak / ramp
    if t <= ramp:
        return 0.5 * accel * t * t
    if t < 3.0 * ramp:
        return omega_peak * ramp / 2.0 + omega_peak * (t - ramp)
    tau = t - 3.0 * ramp
    return omega_peak * ramp / 2.0 + 2.0 * omega_peak * ramp + omega_peak * tau - 0.5 * accel * tau * tau


def trapezoidal_acceleration(t: float, total_time: float, omega_peak: float) -> float:
    """Piecewise-constant acceleration of the trapezoidal profile."""
    if total_time <= 0.0:
        raise ValueError("total_time must be positive")
    if t < 0.0 or t > total_time:
        raise ValueError(f"t={t} outside [0, {total_time}]")
    ramp = total_time / 4.0
    if t <= ramp:
        return omega_peak / ramp
    if t < 3.0 * ramp:
        return 0.0
    return -omega_peak / ramp


def sinusoidal_force_reference(t_c: float, f_max: float, period: float) -> float:
    """Rectified sinusoid of one sign; f_max carries the (negative) push sign."""
    if t_c < 0.0:
        raise ValueError("t_c must be nonnegative")
    if period <= 0.0:
        raise ValueError("period must be positive")
    return f_max * abs(math.sin(2.0 * math.pi * t_c / period))


def pcb_insertion_profile(t: float) -> float:
    """Board-insertion force reference: rest, three quintic blends, dwell.

    The final quintic coefficient is taken with negative sign, pinned by
    the requirement that the profile be continuous at the 1.86 s knot.
    """
    if t < 0.0 or t > 2.22:
        raise ValueError(f"t={t} outside [0, 2.22]")
    if t < 1.23:
        return 0.0
    if t < 1.485:
        x = t - 1.23
        return 5789.63 * x**3 - 21994.91 * x**4 + 25041.65 * x**5
    if t < 1.68:
        x = t - 1.485
        return 30.0 + 200.0 * x + 15644.23 * x**3 - 147313.65 * x**4 + 329844.99 * x**5
    if t < 1.86:
        x = t - 1.68
        return 65.0 - 63443.07 * x**3 + 528692.27 * x**4 - 1174871.72 * x**5
    return 28.0


def burr_disturbance(q: float, qd: float, rng, bands=DEFAULT_BURR_BANDS, noise_sigma: float = 2.0) -> float:
    """Disturbance torque: banded viscous drag plus Gaussian sensor noise."""
    b = 0.0
    for lo, hi, gain in bands:
        if lo < q < hi:
            b = gain
            break
    tau = b * qd
    if noise_sigma > 0.0:
        tau += rng.normal(0.0, noise_sigma)
    return tau


@dataclass(frozen=True)
class BurrDisturbance:
    """Banded viscous disturbance parameters; bands are (lo, hi, gain) in rad."""

    bands: tuple = DEFAULT_BURR_BANDS
    noise_sigma: float = 2.0

    def __post_init__(self):
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be nonnegative")
        bands = tuple((float(lo), float(hi), float(g)) for lo, hi, g in self.bands)
        for lo, hi, _ in bands:
            if hi <= lo:
                raise ValueError("disturbance band must have hi > lo")
        object.__setattr__(self, "bands", bands)


@dataclass(frozen=True)
class FmaScenario:
    """One dual-actuator run: plant, controller beliefs, reference, disturbance."""

    plant: DualActuatorModel
    controller_model: DualActuatorModel | None = None
    weighting: WeightingPolicy | None = None
    kp: float = 100.0
    kv: float = 20.0
    reference: str = "trapezoid"
    duration: float = 10.0
    omega_peak: float | None = None
    disturbance: BurrDisturbance | None = None
    timestep: float = 1.0e-3
    control_period: float = 1.0e-3
    tau_filter_window: int = 16
    seed: int = 0
    q0: float = 0.0
    qd0: float = 0.0
    name: str = "fma"

    def __post_init__(self):
        if self.timestep <= 0.0 or self.duration <= 0.0:
            raise ValueError("timestep and duration must be positive")
        if self.reference not in ("trapezoid", "rest"):
            raise ValueError(f"unknown reference profile {self.reference!r}")
        substeps = self.control_period / self.timestep
        if substeps < 1.0 - 1e-9 or abs(substeps - round(substeps)) > 1e-9:
            raise ValueError("control_period must be an integer multiple of timestep")
        if self.tau_filter_window < 1:
            raise ValueError("tau_filter_window must be at least 1")

    @property
    def peak_speed(self) -> float:
        if self.omega_peak is not None:
            return self.omega_peak
        return 2.0 * math.pi / self.duration


@dataclass(frozen=True)
class ForceControlScenario:
    """One contact task: approach a surface, then regulate or track force.

    The chain is driven in resolved-rate fashion (commanded joint motion
    through the Jacobian inverse); the physical arm follows the commanded
    joints through an optional first-order lag standing in for the inner
    position servo. Forces are SI; the reference pushes along -Z.
    """

    chain: SerialChainModel
    surface: ContactSurface | None
    gains: GainSet
    law: str = "force-pid"
    control_rate: float = 15.0
    approach_speed: float = 2.25e-3
    start_height: float = 4.5e-3
    force_target: float = 5.0 * LBF_TO_N
    reference: str = "constant"
    sine_amplitude: float = 3.0 * LBF_TO_N
    sine_period: float = 50.0
    duration: float = 10.0
    deadband: float = 0.25 * LBF_TO_N
    contact_threshold: float = 0.25 * LBF_TO_N
    settle_rate: float = 5.0
    filter_window: int = 16
    arm_lag: float = 0.0
    physics_timestep: float = 1.0e-3
    home: tuple = (0.0, -0.6, 0.9, 0.0, 0.7, 0.0)
    seed: int = 0
    name: str = "force"

    def __post_init__(self):
        if self.law not in ("force-pid", "compliant"):
            raise ValueError(f"unknown control law {self.law!r}")
        if self.reference not in ("constant", "sine"):
            raise ValueError(f"unknown force reference {self.reference!r}")
        if self.control_rate <= 0.0 or self.duration <= 0.0:
            raise ValueError("control_rate and duration must be positive")
        if self.physics_timestep <= 0.0 or self.physics_timestep > 1.0 / self.control_rate + 1e-12:
            raise ValueError("physics_timestep must be positive and within a control period")
        if self.approach_speed <= 0.0 or self.start_height < 0.0:
            raise ValueError("approach_speed must be positive, start_height nonnegative")
        if self.arm_lag < 0.0:
            raise ValueError("arm_lag must be nonnegative")
        if self.chain.dof != 6:
            raise ValueError("resolved-rate drive needs a six-joint chain")
        if len(self.home) != self.chain.dof:
            raise ValueError("home configuration length must match the chain")
        object.__setattr__(self, "home", tuple(float(x) for x in self.home))


@dataclass(frozen=True)
class SimulationTrace:
    """Uniformly sampled run record.

    ``data`` columns follow ``columns``; ``meta`` carries scenario facts
    needed by the metrics, and ``aux`` carries extra per-sample arrays
    that are not part of the trace file format.
    """

    columns: tuple
    data: np.ndarray
    meta: dict
    aux: dict

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(self.columns):
            raise ValueError("data shape does not match columns")
        t = data[:, 0]
        if data.shape[0] >= 2:
            dt = np.diff(t)
            if np.any(dt <= 0.0):
                raise ValueError("time must be strictly increasing")
            if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(dt[0])):
                raise ValueError("sample interval must be constant")
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(f"trace has no column {name!r}") from None


def _ma_update(history: deque, sample: float) -> float:
    history.append(sample)
    return sum(history) / history.maxlen


def run_fma_scenario(scenario: FmaScenario) -> SimulationTrace:
    """Integrate the reduced dual-actuator model under inverse-model control.

    The allocation weight is re-evaluated every control tick from the
    moving-average-filtered disturbance measurement; voltages and the
    disturbance torque are held over the tick. The recorded controller
    and plant quantities agree with computed_torque_voltage and
    reduced_dynamics evaluated at the recorded states.
    """
    plant = scenario.plant
    ctrl = scenario.controller_model if scenario.controller_model is not None else plant
    policy = scenario.weighting

    weights = {"quiet": policy.quiet, "disturbed": policy.disturbed} if policy else {"fixed": None}
    plant_terms = {k: fma.reduced_terms(plant, w) for k, w in weights.items()}
    ctrl_terms = {k: fma.reduced_terms(ctrl, w) for k, w in weights.items()}
    _, _, k_m = motor_dynamics_matrices(ctrl)
    kminv_g = np.linalg.solve(k_m, ctrl.g_row)

    plant_arm = plant.link_mass * plant.link_com + plant.tool_mass * plant.link_length
    ctrl_arm = ctrl.link_mass * ctrl.link_com + ctrl.tool_mass * ctrl.link_length
    i_link = plant.output_inertia()
    plant_fric = plant.friction_model == "stribeck"
    ctrl_fric = ctrl.friction_model == "stribeck"

    if scenario.reference == "trapezoid":
        w_pk, total = scenario.peak_speed, scenario.duration
        ref = lambda t: (
            scenario.q0 + trapezoidal_position(t, total, w_pk),
            trapezoidal_velocity(t, total, w_pk),
            trapezoidal_acceleration(t, total, w_pk),
        )
    else:
        ref = lambda t: (scenario.q0, 0.0, 0.0)

    rng = np.random.default_rng(scenario.seed)
    tau_history = deque([0.0] * scenario.tau_filter_window, maxlen=scenario.tau_filter_window)

    dt = scenario.timestep
    tick = scenario.control_period
    substeps = round(tick / dt)
    n_ticks = round(scenario.duration / tick)

    rows = np.empty((n_ticks + 1, len(TRACE_COLUMNS)))
    tau_out = np.empty(n_ticks + 1)
    tau_filtered = np.empty(n_ticks + 1)
    disturbed_flag = np.zeros(n_ticks + 1, dtype=bool)

    q, qd = scenario.q0, scenario.qd0
    for k in range(n_ticks + 1):
        t = k * tick
        if not (math.isfinite(q) and math.isfinite(qd)) or abs(q) > 1e9 or abs(qd) > 1e9:
            raise SimulationBlowUpError(f"{scenario.name}: state diverged at t={t:.4f} s")

        if scenario.disturbance is not None:
            tau_ext = burr_disturbance(
                q, qd, rng, scenario.disturbance.bands, scenario.disturbance.noise_sigma
            )
        else:
            tau_ext = 0.0
        filt = _ma_update(tau_history, tau_ext)
        branch = ("quiet" if filt < policy.torque_threshold else "disturbed") if policy else "fixed"
        pt = plant_terms[branch]
        ct = ctrl_terms[branch]

        q_ref, qd_ref, qdd_ref = ref(t)
        accel_cmd = qdd_ref + scenario.kv * (qd_ref - qd) + scenario.kp * (q_ref - q)
        fric_hat = fma.stribeck_friction(qd) if ctrl_fric else 0.0
        tau_des = ct.inertia * accel_cmd + ct.damping * qd + fric_hat + ctrl_arm * GRAVITY * math.sin(q)
        v = kminv_g * tau_des
        drive = float(pt.voltage_row @ v)

        inertia, damping = pt.inertia, pt.damping

        def deriv(_t, y, drive=drive, tau_ext=tau_ext, inertia=inertia, damping=damping):
            qi, qdi = y
            fric = fma.stribeck_friction(qdi) if plant_fric else 0.0
            gravity = plant_arm * GRAVITY * math.sin(qi)
            qdd = (drive - tau_ext - damping * qdi - fric - gravity) / inertia
            return (qdi, qdd)

        _, qdd_now = deriv(t, (q, qd))
        fric_now = fma.stribeck_friction(qd) if plant_fric else 0.0
        rows[k] = (t, q, q_ref, qd, qd_ref, pt.g_plus[0] * qd, pt.g_plus[1] * qd, v[0], v[1], tau_ext)
        tau_out[k] = i_link * qdd_now + plant_arm * GRAVITY * math.sin(q) + fric_now + tau_ext
        tau_filtered[k] = filt
        disturbed_flag[k] = branch == "disturbed"

        if k == n_ticks:
            break
        state = np.array([q, qd])
        for s in range(substeps):
            state = rk4_step(deriv, state, t + s * dt, dt)
        q, qd = float(state[0]), float(state[1])

    meta = {
        "kind": "fma",
        "name": scenario.name,
        "control_period": tick,
        "reference": scenario.reference,
        "omega_peak": scenario.peak_speed if scenario.reference == "trapezoid" else 0.0,
        "rotor_inertias": (plant.motion_pm.rotor_inertia, plant.force_pm.rotor_inertia),
        "motor_constants": tuple(
            (pm.torque_constant, pm.back_emf_constant, pm.armature_resistance)
            for pm in (plant.motion_pm, plant.force_pm)
        ),
        "seed": scenario.seed,
    }
    aux = {"tau_out": tau_out, "tau_filtered": tau_filtered, "disturbed": disturbed_flag}
    return SimulationTrace(TRACE_COLUMNS, rows, meta, aux)


def _ee_z(chain: SerialChainModel, theta: np.ndarray) -> float:
    _, origins = frame_transforms(chain, theta)
    return float(origins[-1][2])


def run_force_control_scenario(scenario: ForceControlScenario) -> SimulationTrace:
    """Drive the chain onto the surface and run the selected force law.

    Approach descends along world -Z at constant speed until the sensed
    force crosses the contact threshold; afterwards the force law issues
    per-tick differential motions. The surface plane is placed below the
    home tool point by the configured start height.
    """
    chain = scenario.chain
    theta_cmd = np.array(scenario.home, dtype=float)
    theta_act = theta_cmd.copy()
    z0 = _ee_z(chain, theta_act)

    surface = scenario.surface
    if surface is not None:
        surface = replace(
            surface,
            point=np.array([0.0, 0.0, z0 - scenario.start_height]),
            normal=np.array([0.0, 0.0, 1.0]),
        )

    dt = 1.0 / scenario.control_rate
    n_ticks = round(scenario.duration * scenario.control_rate)
    # The sensor pipeline runs at the physics rate, so the filter window
    # spans milliseconds; only the control law waits for the next tick.
    substeps = max(1, round(dt / scenario.physics_timestep))
    gamma = 0.0 if scenario.arm_lag == 0.0 else math.exp(-dt / (substeps * scenario.arm_lag))
    conditioner = SignalConditioner(window=scenario.filter_window, deadband=scenario.deadband)

    def raw_at(p):
        if surface is None:
            return 0.0
        return -float(contact_wrench(surface, p).force[2])

    def sense(p):
        clean = condition_signal(conditioner, Wrench(np.array([0.0, 0.0, raw_at(p)]), np.zeros(3)))
        return float(clean.force[2])

    if scenario.law == "force-pid":
        # Per-period gains mapped onto the rate law: theta_dot * dt gives
        # kp*e + kv*de + ki*sum(e) meters of motion per tick.
        rate_gains = GainSet(
            kp=scenario.gains.kp / dt, kv=scenario.gains.kv, ki=scenario.gains.ki / dt**2
        )

    phase = ContactPhase.APPROACH
    contact_time = None
    integral = np.zeros(6)
    e_prev = np.zeros(6)
    f_meas = 0.0
    f_prev = 0.0
    _, origins = frame_transforms(chain, theta_act)
    p_now = origins[-1].copy()
    z_prev = p_now[2]

    columns = TRACE_COLUMNS + ("f_ref",)
    rows = np.empty((n_ticks + 1, len(columns)))
    raw_force = np.empty(n_ticks + 1)
    phase_code = np.empty(n_ticks + 1, dtype=int)

    for k in range(n_ticks + 1):
        t = k * dt
        if not np.all(np.isfinite(theta_act)):
            raise SimulationBlowUpError(f"{scenario.name}: joint state diverged at t={t:.4f} s")
        if abs(p_now[2] - z0) > 10.0:
            raise SimulationBlowUpError(f"{scenario.name}: tool ran away at t={t:.4f} s")

        f_rate = (f_meas - f_prev) / dt
        prev_phase = phase
        phase = contact_state_step(
            phase,
            f_meas,
            force_rate=f_rate,
            contact_threshold=scenario.contact_threshold,
            settle_rate=scenario.settle_rate,
        )
        if prev_phase is ContactPhase.APPROACH and phase is not ContactPhase.APPROACH:
            contact_time = t
            # Hand over from the current pose: any approach command the
            # lagging arm has not executed yet must not keep pressing.
            theta_cmd = theta_act.copy()

        if phase is ContactPhase.APPROACH:
            f_ref = 0.0
        elif scenario.reference == "constant":
            f_ref = -abs(scenario.force_target)
        else:
            f_ref = sinusoidal_force_reference(
                t - contact_time, -abs(scenario.sine_amplitude), scenario.sine_period
            )

        rows[k] = (
            t, p_now[2], _ee_z(chain, theta_cmd), (p_now[2] - z_prev) / dt if k else 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, f_meas, f_ref,
        )
        raw_force[k] = raw_at(p_now)
        phase_code[k] = list(ContactPhase).index(phase)
        z_prev = p_now[2]
        f_prev = f_meas
        if k == n_ticks:
            break

        jac = g_function(chain, theta_cmd)
        if phase is ContactPhase.APPROACH:
            du = np.array([0.0, 0.0, -scenario.approach_speed * dt, 0.0, 0.0, 0.0])
            try:
                dtheta = np.linalg.solve(jac, du)
            except np.linalg.LinAlgError as exc:
                raise DegenerateConfigurationError("jacobian is singular") from exc
        else:
            e = np.array([0.0, 0.0, f_ref - f_meas, 0.0, 0.0, 0.0])
            if scenario.law == "force-pid":
                integral += e
                rate = pure_force_control_step(jac, rate_gains, e, (e - e_prev) / dt, integral * dt)
                dtheta = rate * dt
            else:
                dtheta = compliant_control_step(jac, scenario.gains.kp, e)
            e_prev = e
        theta_cmd = theta_cmd + dtheta

        # Advance the arm and the sensor stream to the next tick. The arm
        # relaxes exponentially toward the command, a straight segment in
        # joint space, so the tool point is interpolated along it.
        fade = gamma**substeps
        theta_act = theta_cmd + (theta_act - theta_cmd) * fade
        _, origins = frame_transforms(chain, theta_act)
        p_end = origins[-1].copy()
        denom = 1.0 - fade
        for s in range(1, substeps + 1):
            w = (s / substeps) if denom < 1e-15 else (1.0 - gamma**s) / denom
            f_meas = sense(p_now + w * (p_end - p_now))
        p_now = p_end

    meta = {
        "kind": "force",
        "name": scenario.name,
        "control_period": dt,
        "reference": scenario.reference,
        "force_target": -abs(scenario.force_target),
        "sine_amplitude": abs(scenario.sine_amplitude),
        "sine_period": scenario.sine_period,
        "deadband": scenario.deadband,
        "contact_time": contact_time,
        "seed": scenario.seed,
    }
    aux = {"raw_force": raw_force, "phase": phase_code}
    return SimulationTrace(columns, rows, meta, aux)


@dataclass(frozen=True)
class Metrics:
    """Per-run summary figures; fields that do not apply are None."""

    kind: str
    max_position_error: float | None = None
    mean_position_error: float | None = None
    max_velocity_error: float | None = None
    mean_velocity_error: float | None = None
    pvke_percent: tuple | None = None
    mean_abs_speed: tuple | None = None
    mean_abs_torque: tuple | None = None
    impulse: float | None = None
    settling_time: float | None = None
    overshoot_percent: float | None = None
    lag_percent: float | None = None
    notes: tuple = ()

    def __post_init__(self):
        if self.pvke_percent is not None:
            if abs(sum(self.pvke_percent) - 100.0) > 1e-9:
                raise ValueError("kinetic-energy partition must sum to 100%")


def _fma_metrics(trace: SimulationTrace) -> Metrics:
    q_err = np.abs(trace.column("q") - trace.column("q_ref"))
    qd_err = np.abs(trace.column("qd") - trace.column("qd_ref"))
    qm = np.column_stack([trace.column("qM1"), trace.column("qM2")])
    vs = np.column_stack([trace.column("v1"), trace.column("v2")])
    i_m = trace.meta["rotor_inertias"]

    energies = [0.5 * i_m[j] * float(np.mean(qm[:, j] ** 2)) for j in range(2)]
    total = energies[0] + energies[1]
    notes = []
    if total > 0.0:
        pvke = (100.0 * energies[0] / total, 100.0 * energies[1] / total)
        pvke = (pvke[0], 100.0 - pvke[0])
    else:
        pvke = None
        notes.append("kinetic-energy partition undefined: rotors never moved")

    torques = []
    for j, (km, kb, ra) in enumerate(trace.meta["motor_constants"]):
        torques.append(float(np.mean(np.abs(km * (vs[:, j] - kb * qm[:, j]) / ra))))

    return Metrics(
        kind="fma",
        max_position_error=float(np.max(q_err)),
        mean_position_error=float(np.mean(q_err)),
        max_velocity_error=float(np.max(qd_err)),
        mean_velocity_error=float(np.mean(qd_err)),
        pvke_percent=pvke,
        mean_abs_speed=(float(np.mean(np.abs(qm[:, 0]))), float(np.mean(np.abs(qm[:, 1])))),
        mean_abs_torque=tuple(torques),
        notes=tuple(notes),
    )


def _impulse(trace: SimulationTrace) -> tuple[float | None, list]:
    if "raw_force" not in trace.aux:
        return None, ["impulse unavailable: trace carries no raw force record"]
    raw = trace.aux["raw_force"]
    t = trace.t
    deadband = trace.meta["deadband"]
    target = abs(trace.meta["force_target"])
    over = np.nonzero(np.abs(raw) > deadband)[0]
    if over.size == 0:
        return 0.0, ["no contact transient: force never exceeded the deadband"]
    start = over[0]
    near = np.nonzero(np.abs(np.abs(raw[start:]) - target) <= 0.1 * target)[0]
    notes = []
    if near.size == 0:
        end = raw.size - 1
        notes.append("transient never reached the regulation target; duration runs to end of trace")
    else:
        end = start + near[0]
    peak = float(np.max(np.abs(raw[start : end + 1])))
    return peak * float(t[end] - t[start]), notes


def _settling_time(trace: SimulationTrace) -> float | None:
    if trace.meta["reference"] != "constant" or trace.meta["contact_time"] is None:
        return None
    f = trace.column("tau_ext")
    ref = trace.column("f_ref")
    t = trace.t
    start = int(np.searchsorted(t, trace.meta["contact_time"]))
    tol = 0.02 * abs(trace.meta["force_target"])
    err = np.abs(f - ref)
    worst_after = np.maximum.accumulate(err[::-1])[::-1]
    inside = np.nonzero(worst_after[start:] <= tol)[0]
    if inside.size == 0:
        return None
    return float(t[start + inside[0]] - trace.meta["contact_time"])


def _overshoot(trace: SimulationTrace) -> float | None:
    if trace.meta["contact_time"] is None:
        return None
    target = (
        abs(trace.meta["force_target"])
        if trace.meta["reference"] == "constant"
        else abs(trace.meta["sine_amplitude"])
    )
    if target == 0.0:
        return None
    peak = float(np.max(np.abs(trace.column("tau_ext"))))
    overshoot = max(0.0, (peak - target) / target * 100.0)
    # Sub-0.5% excursions are measurement ripple, not overshoot.
    return 0.0 if overshoot < 0.5 else overshoot


def _lag_percent(trace: SimulationTrace) -> float | None:
    # Phase delay of the response at the reference fundamental. The
    # rectified sine repeats every half command period, so that is the
    # frequency compared; the result is quoted against the full period.
    if trace.meta["reference"] != "sine" or trace.meta["contact_time"] is None:
        return None
    t = trace.t
    period = trace.meta["sine_period"]
    start = int(np.searchsorted(t, trace.meta["contact_time"]))
    x = trace.column("f_ref")[start:]
    y = trace.column("tau_ext")[start:]
    if x.size < 8:
        return None
    omega = 4.0 * math.pi / period
    phasor = np.exp(-1j * omega * t[start:])
    zx = np.sum((x - np.mean(x)) * phasor)
    zy = np.sum((y - np.mean(y)) * phasor)
    if abs(zx) == 0.0 or abs(zy) == 0.0:
        return None
    wrapped = (float(np.angle(zx) - np.angle(zy)) + math.pi) % (2.0 * math.pi) - math.pi
    delay = max(0.0, wrapped) / omega
    return 100.0 * delay / period


def _force_metrics(trace: SimulationTrace) -> Metrics:
    impulse, notes = _impulse(trace)
    return Metrics(
        kind="force",
        impulse=impulse,
        settling_time=_settling_time(trace),
        overshoot_percent=_overshoot(trace),
        lag_percent=_lag_percent(trace),
        notes=tuple(notes),
    )


def compute_metrics(trace: SimulationTrace) -> Metrics:
    """Summary figures for one trace; raises on an empty trace."""
    if trace.n_samples == 0:
        raise ValueError("cannot compute metrics of an empty trace")
    if trace.meta.get("kind") == "fma":
        return _fma_metrics(trace)
    if trace.meta.get("kind") == "force":
        return _force_metrics(trace)
    raise ValueError(f"unknown trace kind {trace.meta.get('kind')!r}")


@dataclass(frozen=True)
class EnvelopePoint:
    """One attainable operating point of the output shaft."""

    torque: float
    speed: float
    tag: str

    def __post_init__(self):
        if not (math.isfinite(self.torque) and math.isfinite(self.speed)):
            raise ValueError("envelope point must be finite")


def envelope_points(traces) -> list:
    """Pool deduplicated (output torque, output speed) samples across runs."""
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    points = []
    for trace in traces:
        if "tau_out" not in trace.aux:
            raise ValueError("trace carries no output-torque record")
        pairs = np.column_stack([trace.aux["tau_out"], trace.column("qd")])
        for torque, speed in np.unique(np.round(pairs, 9), axis=0):
            points.append(EnvelopePoint(float(torque), float(speed), trace.meta["name"]))
    return points


def _format(x: float) -> str:
    return f"{x:.17g}"


def trace_csv_text(trace: SimulationTrace) -> str:
    lines = [",".join(trace.columns)]
    for row in trace.data:
        lines.append(",".join(_format(x) for x in row))
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: SimulationTrace, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(trace_csv_text(trace))


def metrics_text(metrics: Metrics) -> str:
    def render(value):
        if value is None:
            return "undefined"
        if isinstance(value, tuple):
            return ", ".join(f"{x:.9g}" for x in value)
        return f"{value:.9g}"

    lines = [f"kind = {metrics.kind}"]
    for name in (
        "max_position_error",
        "mean_position_error",
        "max_velocity_error",
        "mean_velocity_error",
        "pvke_percent",
        "mean_abs_speed",
        "mean_abs_torque",
        "impulse",
        "settling_time",
        "overshoot_percent",
        "lag_percent",
    ):
        lines.append(f"{name} = {render(getattr(metrics, name))}")
    for note in metrics.notes:
        lines.append(f"note = {note}")
    return "\n".join(lines) + "\n"


def write_metrics(metrics: Metrics, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(metrics_text(metrics))
