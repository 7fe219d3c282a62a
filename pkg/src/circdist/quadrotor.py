"""Small-angle 6-dof quadrotor with a cascaded PD controller.

State layout (12,): position x, y, z; world velocity; roll, pitch, yaw;
body rates p, q, r.  Attitude rates are taken equal to the body rates
(Coriolis terms dropped).

The per-step functions here are the readable reference; :func:`fly` runs
the same equations for a whole swarm in a compiled loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numba
import numpy as np

G = 9.81
Z_HOLD = 1.0
DT_DYN = 0.002
SETTLE_TIME = 10.0
BLOWUP = 1e6


class InstabilityError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadrotorParams:
    mass: float = 0.964
    J: tuple[float, float, float] = (8.55e-3, 8.55e-3, 1.47e-2)
    g: float = G

    def __post_init__(self):
        if self.mass <= 0 or min(self.J) <= 0 or self.g <= 0:
            raise ValueError("mass, inertias and gravity must be positive")


@dataclass(frozen=True)
class ControllerGains:
    K_P: tuple[float, float, float] = (7.76, 6.46, 7.02)
    K_D: tuple[float, float, float] = (4.56, 4.16, 5.16)
    K_Ptau: tuple[float, float, float] = (4.33, 3.45, 4.02)
    K_Dtau: tuple[float, float, float] = (1.59, 1.16, 2.37)

    def __post_init__(self):
        for name in ("K_P", "K_D", "K_Ptau", "K_Dtau"):
            v = getattr(self, name)
            if len(v) != 3 or min(v) <= 0:
                raise ValueError(f"{name} needs three positive entries")


def hover_state(x: float = 0.0, y: float = 0.0, z: float = Z_HOLD) -> np.ndarray:
    s = np.zeros(12)
    s[:3] = x, y, z
    return s


def rotation_matrix(attitude) -> np.ndarray:
    """Body-to-world rotation for ZYX Euler angles (roll, pitch, yaw)."""
    ph, th, ps = attitude
    cf, sf = math.cos(ph), math.sin(ph)
    ct, st = math.cos(th), math.sin(th)
    cp, sp = math.cos(ps), math.sin(ps)
    return np.array([
        [ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp],
        [ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp],
        [-st, sf * ct, cf * ct],
    ])


def commanded_attitude(acc_c, psi_d: float = 0.0, g: float = G) -> tuple[float, float]:
    """Roll/pitch that tilt the thrust toward the commanded planar acceleration.

    Small-angle inversion of the thrust direction: for zero yaw a positive
    pitch accelerates along +x and a positive roll along -y.
    """
    s, c = math.sin(psi_d), math.cos(psi_d)
    return (s * acc_c[0] - c * acc_c[1]) / g, (c * acc_c[0] + s * acc_c[1]) / g


def control_step(state, pos_d, vel_d, gains: ControllerGains = ControllerGains(),
                 params: QuadrotorParams = QuadrotorParams(), psi_d: float = 0.0):
    """Thrust and body torques for one control update.  Returns ``(F, tau)``."""
    state = np.asarray(state, float)
    acc_c = (np.asarray(gains.K_D) * (np.asarray(vel_d, float) - state[3:6])
             + np.asarray(gains.K_P) * (np.asarray(pos_d, float) - state[0:3]))
    phi_c, theta_c = commanded_attitude(acc_c, psi_d, params.g)
    F = params.mass * (params.g + acc_c[2])
    att_c = np.array([phi_c, theta_c, psi_d])
    tau = np.asarray(gains.K_Dtau) * (0.0 - state[9:12]) + np.asarray(gains.K_Ptau) * (att_c - state[6:9])
    return float(F), tau


def derivative(state, F: float, tau, params: QuadrotorParams = QuadrotorParams()) -> np.ndarray:
    d = np.empty(12)
    d[0:3] = state[3:6]
    d[3:6] = np.array([0.0, 0.0, -params.g]) + rotation_matrix(state[6:9]) @ np.array([0.0, 0.0, F / params.mass])
    d[6:9] = state[9:12]
    d[9:12] = np.asarray(tau, float) / np.asarray(params.J)
    return d


def integrate(state, F: float, tau, params: QuadrotorParams = QuadrotorParams(),
              dt_dyn: float = DT_DYN) -> np.ndarray:
    """One RK4 step with thrust and torques held over the step."""
    if dt_dyn <= 0:
        raise ValueError("dt_dyn must be positive")
    s = np.asarray(state, float)
    k1 = derivative(s, F, tau, params)
    k2 = derivative(s + 0.5 * dt_dyn * k1, F, tau, params)
    k3 = derivative(s + 0.5 * dt_dyn * k2, F, tau, params)
    k4 = derivative(s + dt_dyn * k3, F, tau, params)
    out = s + dt_dyn / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)) or np.abs(out).max() > BLOWUP:
        raise InstabilityError("quadrotor state diverged")
    return out


def sample_heterogeneity(nominal: QuadrotorParams, rng: np.random.Generator,
                         mode: str = "correlated", spread: float = 0.2) -> QuadrotorParams:
    """Per-agent parameters within +-``spread`` of nominal.

    ``correlated`` scales mass and all inertias by one factor, which keeps
    the mass/inertia ratio of the airframe; ``independent`` draws the mass,
    the roll/pitch inertia and the yaw inertia separately.
    """
    lo, hi = 1.0 - spread, 1.0 + spread
    if mode == "correlated":
        k = rng.uniform(lo, hi)
        return replace(nominal, mass=nominal.mass * k, J=tuple(j * k for j in nominal.J))
    if mode == "independent":
        km, kxy, kz = rng.uniform(lo, hi, size=3)
        jx, jy, jz = nominal.J
        return replace(nominal, mass=nominal.mass * km, J=(jx * kxy, jy * kxy, jz * kz))
    raise ValueError(f"unknown heterogeneity mode {mode!r}")


# ---------------------------------------------------------------- compiled swarm loop

@numba.njit(cache=True)
def _deriv(s, F, tx, ty, tz, m, jx, jy, jz, g, out):
    ph, th, ps = s[6], s[7], s[8]
    cf, sf = math.cos(ph), math.sin(ph)
    ct, st = math.cos(th), math.sin(th)
    cp, sp = math.cos(ps), math.sin(ps)
    a = F / m
    out[0] = s[3]
    out[1] = s[4]
    out[2] = s[5]
    out[3] = (cf * st * cp + sf * sp) * a
    out[4] = (cf * st * sp - sf * cp) * a
    out[5] = cf * ct * a - g
    out[6] = s[9]
    out[7] = s[10]
    out[8] = s[11]
    out[9] = tx / jx
    out[10] = ty / jy
    out[11] = tz / jz


@numba.njit(cache=True)
def _fly_kernel(x0, goals, delays, t_f, speed, mass, J, g, kp, kd, kpt, kdt,
                z_hold, dt, substeps, n_out, horizon):
    n = x0.shape[0]
    out = np.empty((n_out, n, 3))
    max_tilt = np.zeros(n)
    unstable = np.zeros(n, dtype=np.bool_)
    s = np.empty(12)
    tmp = np.empty(12)
    k1 = np.empty(12)
    k2 = np.empty(12)
    k3 = np.empty(12)
    k4 = np.empty(12)
    for i in range(n):
        dx = goals[i, 0] - x0[i, 0]
        dy = goals[i, 1] - x0[i, 1]
        if t_f[i] > 0:
            ux = dx / t_f[i]
            uy = dy / t_f[i]
        else:
            ux = 0.0
            uy = 0.0
        for k in range(12):
            s[k] = 0.0
        s[0] = x0[i, 0]
        s[1] = x0[i, 1]
        s[2] = z_hold
        m = mass[i]
        jx, jy, jz = J[i, 0], J[i, 1], J[i, 2]
        last = n_out - 1
        for j in range(n_out):
            out[j, i, 0] = s[0]
            out[j, i, 1] = s[1]
            out[j, i, 2] = s[2]
            if j == last:
                break
            if j * substeps * dt > horizon[i]:
                for jj in range(j + 1, n_out):
                    out[jj, i, 0] = s[0]
                    out[jj, i, 1] = s[1]
                    out[jj, i, 2] = s[2]
                break
            for sub in range(substeps):
                t = (j * substeps + sub) * dt
                tau = t - delays[i]
                if tau <= 0.0:
                    xd = x0[i, 0]
                    yd = x0[i, 1]
                    vxd = 0.0
                    vyd = 0.0
                elif tau < t_f[i]:
                    xd = x0[i, 0] + ux * tau
                    yd = x0[i, 1] + uy * tau
                    vxd = ux
                    vyd = uy
                else:
                    xd = goals[i, 0]
                    yd = goals[i, 1]
                    vxd = 0.0
                    vyd = 0.0
                ax = kd[0] * (vxd - s[3]) + kp[0] * (xd - s[0])
                ay = kd[1] * (vyd - s[4]) + kp[1] * (yd - s[1])
                az = kd[2] * (0.0 - s[5]) + kp[2] * (z_hold - s[2])
                # yaw held at zero; small-angle inversion of the thrust direction
                phi_c = -ay / g
                theta_c = ax / g
                F = m * (g + az)
                tx = kdt[0] * (0.0 - s[9]) + kpt[0] * (phi_c - s[6])
                ty = kdt[1] * (0.0 - s[10]) + kpt[1] * (theta_c - s[7])
                tz = kdt[2] * (0.0 - s[11]) + kpt[2] * (0.0 - s[8])
                _deriv(s, F, tx, ty, tz, m, jx, jy, jz, g, k1)
                for k in range(12):
                    tmp[k] = s[k] + 0.5 * dt * k1[k]
                _deriv(tmp, F, tx, ty, tz, m, jx, jy, jz, g, k2)
                for k in range(12):
                    tmp[k] = s[k] + 0.5 * dt * k2[k]
                _deriv(tmp, F, tx, ty, tz, m, jx, jy, jz, g, k3)
                for k in range(12):
                    tmp[k] = s[k] + dt * k3[k]
                _deriv(tmp, F, tx, ty, tz, m, jx, jy, jz, g, k4)
                big = 0.0
                for k in range(12):
                    s[k] = s[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
                    if not abs(s[k]) < BLOWUP:
                        big = 1.0
                if big > 0.0:
                    unstable[i] = True
                tilt = max(abs(s[6]), abs(s[7]))
                if tilt > max_tilt[i]:
                    max_tilt[i] = tilt
            if unstable[i]:
                for jj in range(j + 1, n_out):
                    out[jj, i, 0] = np.nan
                    out[jj, i, 1] = np.nan
                    out[jj, i, 2] = np.nan
                break
    return out, max_tilt, unstable


@dataclass
class FlightLog:
    times: np.ndarray
    positions: np.ndarray       # (steps, n, 3)
    max_tilt: np.ndarray
    unstable: np.ndarray
    params: list = field(default_factory=list)

    @property
    def planar(self) -> np.ndarray:
        return self.positions[..., :2]


def fly(start, goals, t_f, speed: float, delays=None, params=None,
        gains: ControllerGains = ControllerGains(), dt_out: float = 0.01,
        dt_dyn: float = DT_DYN, t_end: float | None = None,
        settle: float = SETTLE_TIME) -> FlightLog:
    """Fly every agent along its straight-line reference and sample positions.

    Each agent hovers at ``z = 1`` until its delay expires, tracks the
    constant-speed reference to its goal and then holds there. Integration
    for an agent stops ``settle`` seconds after it should have arrived; its
    last position is held from then on.
    """
    start = np.asarray(start, float)
    goals = np.asarray(goals, float)
    t_f = np.asarray(t_f, float)
    n = len(start)
    delays = np.zeros(n) if delays is None else np.asarray(delays, float)
    if params is None:
        params = [QuadrotorParams()] * n
    substeps = int(round(dt_out / dt_dyn))
    if substeps < 1 or abs(substeps * dt_dyn - dt_out) > 1e-12:
        raise ValueError("dt_out must be a whole multiple of dt_dyn")
    arrive = delays + t_f
    if t_end is None:
        t_end = float(arrive.max()) + settle
    n_out = int(math.ceil(t_end / dt_out - 1e-9)) + 1
    mass = np.array([p.mass for p in params], float)
    J = np.array([p.J for p in params], float)
    g = params[0].g
    out, tilt, bad = _fly_kernel(start, goals, delays, t_f, float(speed), mass, J, g,
                                 np.asarray(gains.K_P, float), np.asarray(gains.K_D, float),
                                 np.asarray(gains.K_Ptau, float), np.asarray(gains.K_Dtau, float),
                                 Z_HOLD, dt_dyn, substeps, n_out, arrive + settle)
    times = np.arange(n_out) * dt_out
    return FlightLog(times=times, positions=out, max_tilt=tilt, unstable=bad, params=list(params))
