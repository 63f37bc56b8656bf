"""Chain dynamics assembled from influence coefficients.

The joint-space model is

    tau = I*(q) qdd + qd . P*(q) . qd + tau_g(q) + sum_k G_k^T w_k

where I* is the effective inertia matrix, P* the inertia power array
whose quadratic form in the joint rates gives the Coriolis/centripetal
torque, tau_g the torque needed to hold the chain against gravity, and
each external wrench w_k enters through the coefficient matrix of its
application point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DegenerateConfigurationError
from .kinematics import JointState, SerialChainModel, frame_transforms
from .spatial import Wrench, skew

CONDITION_LIMIT = 1.0e12


@dataclass(frozen=True)
class ExternalLoad:
    """A wrench applied to one link at a chosen target point."""

    wrench: Wrench
    link: int
    at: str = "frame"  # "frame" or "com"

    def target(self):
        if self.at not in ("frame", "com"):
            raise ValueError("load target must be 'frame' or 'com'")
        return (self.at, self.link)


@dataclass(frozen=True)
class DynamicsQuantities:
    """Configuration-dependent terms of the joint-space model."""

    inertia: np.ndarray
    power: np.ndarray
    gravity: np.ndarray


class _LinkCoefficients:
    """Per-link translational/rotational coefficients and their derivatives."""

    __slots__ = ("gc", "hc", "gw", "hw", "pi_world", "zs", "rots")

    def __init__(self, model: SerialChainModel, theta: np.ndarray):
        rots, origins = frame_transforms(model, theta)
        n = model.dof
        zs = rots[:, :, 2]
        coms = origins + np.einsum("nij,nj->ni", rots, model.coms)
        self.rots = rots
        self.zs = zs
        self.gc = np.zeros((n, 3, n))
        self.hc = np.zeros((n, n, 3, n))
        self.gw = np.zeros((n, 3, n))
        self.hw = np.zeros((n, n, 3, n))
        self.pi_world = np.einsum("nij,njk,nlk->nil", rots, model.inertias, rots)
        for link in range(n):
            point = coms[link]
            for i in range(link + 1):
                self.gc[link, :, i] = np.cross(zs[i], point - origins[i])
                self.gw[link, :, i] = zs[i]
            for j in range(link + 1):
                for i in range(link + 1):
                    if i <= j:
                        self.hc[link, i, :, j] = np.cross(
                            zs[i], np.cross(zs[j], point - origins[j])
                        )
                    else:
                        self.hc[link, i, :, j] = np.cross(
                            zs[j], np.cross(zs[i], point - origins[i])
                        )
                    if i < j:
                        self.hw[link, i, :, j] = np.cross(zs[i], zs[j])


def _inertia_from(model: SerialChainModel, coeff: _LinkCoefficients) -> np.ndarray:
    n = model.dof
    out = np.zeros((n, n))
    for j in range(n):
        gc = coeff.gc[j]
        gw = coeff.gw[j]
        out += model.masses[j] * gc.T @ gc + gw.T @ coeff.pi_world[j] @ gw
    return out


def _inertia_gradient(model: SerialChainModel, coeff: _LinkCoefficients) -> np.ndarray:
    """d I* / d theta_i stacked as (n, n, n), first index the derivative."""
    n = model.dof
    grad = np.zeros((n, n, n))
    for j in range(n):
        m = model.masses[j]
        gc, gw = coeff.gc[j], coeff.gw[j]
        pi = coeff.pi_world[j]
        pig = pi @ gw
        for i in range(j + 1):
            hc_i = coeff.hc[j, i]
            hw_i = coeff.hw[j, i]
            term = m * (hc_i.T @ gc) + hw_i.T @ pig
            term = term + term.T
            # Rotating the link rotates its world-frame inertia tensor.
            zi_skew = skew(coeff.zs[i])
            dpi = zi_skew @ pi - pi @ zi_skew
            grad[i] += term + gw.T @ dpi @ gw
    return grad


def compute_dynamics(
    model: SerialChainModel, theta: np.ndarray, gravity: np.ndarray | None = None
) -> DynamicsQuantities:
    """Inertia, power array, and gravity torque in one pass."""
    theta = np.asarray(theta, dtype=float)
    g_vec = np.array([0.0, 0.0, -9.81]) if gravity is None else np.asarray(gravity, dtype=float)
    coeff = _LinkCoefficients(model, theta)
    inertia = _inertia_from(model, coeff)
    grad = _inertia_gradient(model, coeff)
    power = grad - 0.5 * np.transpose(grad, (1, 0, 2))
    grav = np.zeros(model.dof)
    for j in range(model.dof):
        grav -= coeff.gc[j].T @ (model.masses[j] * g_vec)
    return DynamicsQuantities(inertia=inertia, power=power, gravity=grav)


def effective_inertia(model: SerialChainModel, theta: np.ndarray) -> np.ndarray:
    """Joint-space inertia matrix I*(q); kinetic energy is qd^T I* qd / 2."""
    coeff = _LinkCoefficients(model, np.asarray(theta, dtype=float))
    return _inertia_from(model, coeff)


def inertia_power_matrix(model: SerialChainModel, theta: np.ndarray) -> np.ndarray:
    """Power array P* (n,n,n); Coriolis torque component l is qd . P*[:, l, :] . qd."""
    coeff = _LinkCoefficients(model, np.asarray(theta, dtype=float))
    grad = _inertia_gradient(model, coeff)
    return grad - 0.5 * np.transpose(grad, (1, 0, 2))


def gravity_torque(
    model: SerialChainModel, theta: np.ndarray, gravity: np.ndarray | None = None
) -> np.ndarray:
    """Joint torque that statically balances gravity."""
    g_vec = np.array([0.0, 0.0, -9.81]) if gravity is None else np.asarray(gravity, dtype=float)
    coeff = _LinkCoefficients(model, np.asarray(theta, dtype=float))
    grav = np.zeros(model.dof)
    for j in range(model.dof):
        grav -= coeff.gc[j].T @ (model.masses[j] * g_vec)
    return grav


def _load_torques(model, theta, loads) -> np.ndarray:
    from .kinematics import g_function

    tau = np.zeros(model.dof)
    for load in loads:
        g = g_function(model, theta, load.target())
        tau += g.T @ load.wrench.as_array()
    return tau


def coriolis_torque(power: np.ndarray, theta_dot: np.ndarray) -> np.ndarray:
    qd = np.asarray(theta_dot, dtype=float)
    return np.einsum("i,ilj,j->l", qd, power, qd)


def inverse_dynamics(
    model: SerialChainModel,
    state: JointState,
    gravity: np.ndarray | None = None,
    loads: tuple[ExternalLoad, ...] = (),
    viscous: np.ndarray | None = None,
) -> np.ndarray:
    """Joint torques that realize the accelerations in ``state``."""
    quant = compute_dynamics(model, state.theta, gravity)
    tau = quant.inertia @ state.theta_ddot
    tau += coriolis_torque(quant.power, state.theta_dot)
    tau += quant.gravity
    tau += _load_torques(model, state.theta, loads)
    if viscous is not None:
        tau += np.asarray(viscous, dtype=float) * state.theta_dot
    return tau


def forward_dynamics(
    model: SerialChainModel,
    theta: np.ndarray,
    theta_dot: np.ndarray,
    tau: np.ndarray,
    gravity: np.ndarray | None = None,
    loads: tuple[ExternalLoad, ...] = (),
    viscous: np.ndarray | None = None,
) -> np.ndarray:
    """Joint accelerations from applied torques (symmetric positive solve)."""
    theta = np.asarray(theta, dtype=float)
    theta_dot = np.asarray(theta_dot, dtype=float)
    tau = np.asarray(tau, dtype=float)
    quant = compute_dynamics(model, theta, gravity)
    if np.linalg.cond(quant.inertia) > CONDITION_LIMIT:
        raise DegenerateConfigurationError(
            "effective inertia is numerically singular at this configuration"
        )
    rhs = tau - coriolis_torque(quant.power, theta_dot) - quant.gravity
    rhs -= _load_torques(model, theta, loads)
    if viscous is not None:
        rhs -= np.asarray(viscous, dtype=float) * theta_dot
    return cho_solve(cho_factor(quant.inertia), rhs)
