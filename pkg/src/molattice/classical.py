"""Classical flow of a magnetic moment in the magneto-optical lattice.

State: position z, momentum p, and the unit moment direction n = mu/|mu|.
Equations of motion:

    dz/dt = p/m
    dp/dt = -d/dz [ U_J(z) - n . beta(z) ]
    dn/dt = (gyro_sign/F) n x beta(z)

with beta the Zeeman-energy field (bx, 0, bz0 - U0 sin(theta) sin 2kz).

The integrator is a Strang split: an exact potential flow at fixed z
(spin rotation about the local field via Rodrigues' formula, with the
force impulse integrated analytically along the rotating moment),
sandwiched around a free drift.  Both sub-flows are exact, so the step
is time-reversible and preserves |n| = 1 to rounding.  A Runge-Kutta
branch (scipy DOP853) is retained for cross-checks.

Also here: Poincare sections at p = 0, dp/dt > 0 with Henon-style event
refinement, the pendulum action-angle analysis of the B_x = 0 limit,
the adiabatic-surface frequency analysis, and Benettin-style largest
Lyapunov exponents.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange
from scipy.optimize import brentq, minimize_scalar

from .errors import NumericalError, PhysicsError
from .model import LatticeConfig, field_magnitude, scalar_potential

__all__ = [
    "ClassicalState",
    "PoincareSection",
    "PendulumActionAngle",
    "energy",
    "derivatives",
    "integrate",
    "integrate_ensemble",
    "poincare_section",
    "seeds_on_shell",
    "solve_z_on_shell",
    "elliptic_K",
    "pendulum_analysis",
    "pendulum_omega0",
    "adiabatic_analysis",
    "adiabatic_surface_minimum",
    "max_lyapunov",
]


@dataclass
class ClassicalState:
    """Phase-space point (z, p, n) with n the unit moment direction."""

    z: float
    p: float
    n: np.ndarray

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=float)
        if self.n.shape != (3,):
            raise PhysicsError(f"n must be a 3-vector, got shape {self.n.shape}")
        norm = np.linalg.norm(self.n)
        if abs(norm - 1.0) > 1e-9:
            raise PhysicsError(f"|n| must be 1, got {norm}")
        self.n = self.n / norm

    def as_array(self) -> np.ndarray:
        return np.array([self.z, self.p, *self.n], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "ClassicalState":
        arr = np.asarray(arr, dtype=float)
        return cls(z=float(arr[0]), p=float(arr[1]), n=arr[2:5].copy())

    @property
    def n_z(self) -> float:
        return float(self.n[2])

    @property
    def phi(self) -> float:
        """Azimuth of the moment about z, atan2(n_y, n_x) in (-pi, pi]."""
        return float(np.arctan2(self.n[1], self.n[0]))


@dataclass
class PoincareSection:
    """Section points (n_z, phi) collected at p = 0 crossings with dp/dt > 0."""

    energy: float
    points: np.ndarray          # (M, 2): columns n_z, phi
    seed_index: np.ndarray      # (M,) index of the originating seed
    crossing_z: np.ndarray = field(default=None)  # (M,) z at the crossing
    crossing_t: np.ndarray = field(default=None)  # (M,) crossing times
    crossing_rule: str = "p = 0, dp/dt > 0"

    @property
    def n_points(self) -> int:
        return 0 if self.points is None else len(self.points)


@dataclass
class PendulumActionAngle:
    """Integrable-limit (B_x = 0) pendulum parameters and frequencies."""

    C: float
    D: float
    kappa: float
    omega0: float
    omega1: float
    omega2: float


def _pack_params(cfg: LatticeConfig) -> np.ndarray:
    """Flatten the config into the float vector the jitted kernels use."""
    return np.array([
        2.0 * cfg.u0 * np.cos(cfg.theta_l),   # scalar amplitude 2 U0 cos(theta)
        cfg.u0 * np.sin(cfg.theta_l),         # fictitious amplitude U0 sin(theta)
        cfg.bx,
        cfg.bz,
        cfg.k_laser,
        cfg.mass,
        cfg.f_spin,
        cfg.gyro_sign,
    ], dtype=float)


@njit(cache=True, inline="always")
def _derivs_nb(s, par, out):
    uj_amp, fict_amp, bx, bz0, k, mass, f_spin, gyro = (
        par[0], par[1], par[2], par[3], par[4], par[5], par[6], par[7])
    z, p = s[0], s[1]
    nx, ny, nz = s[2], s[3], s[4]
    c2 = np.cos(2.0 * k * z)
    s2 = np.sin(2.0 * k * z)
    bzv = bz0 - fict_amp * s2
    duj = -2.0 * k * uj_amp * s2          # dU_J/dz
    dbz = -2.0 * k * fict_amp * c2        # d(beta_z)/dz
    g = gyro / f_spin
    out[0] = p / mass
    out[1] = -duj + nz * dbz
    out[2] = g * (ny * bzv)               # (n x beta)_x with beta_y = 0
    out[3] = g * (nz * bx - nx * bzv)
    out[4] = g * (-ny * bx)


@njit(cache=True, inline="always")
def _vflow_nb(s, par, tau):
    """Exact flow of the potential part over time tau at fixed z."""
    uj_amp, fict_amp, bx, bz0, k, mass, f_spin, gyro = (
        par[0], par[1], par[2], par[3], par[4], par[5], par[6], par[7])
    z = s[0]
    nx, ny, nz = s[2], s[3], s[4]
    c2 = np.cos(2.0 * k * z)
    s2 = np.sin(2.0 * k * z)
    bzv = bz0 - fict_amp * s2
    duj = -2.0 * k * uj_amp * s2
    dbz = -2.0 * k * fict_amp * c2
    bmag = np.sqrt(bx * bx + bzv * bzv)
    if bmag < 1e-300:
        s[1] += tau * (-duj + nz * dbz)
        return
    ux = bx / bmag
    uz = bzv / bmag
    # dn/dt = (gyro/F) n x beta  ==  rotation about u at rate -gyro*B/F
    omega = -gyro * bmag / f_spin
    th = omega * tau
    ct = np.cos(th)
    st = np.sin(th)
    npar = ux * nx + uz * nz              # u . n  (u_y = 0)
    perp_x = nx - ux * npar
    perp_y = ny
    perp_z = nz - uz * npar
    wx = -uz * ny                         # u x n
    wy = uz * nx - ux * nz
    wz = ux * ny
    # time integral of n_z(t) for the force impulse
    if abs(th) > 1e-8:
        ic = st / omega                   # int cos(omega t) dt
        is_ = (1.0 - ct) / omega          # int sin(omega t) dt
    else:
        ic = tau - omega * omega * tau**3 / 6.0
        is_ = 0.5 * omega * tau * tau
    int_nz = uz * npar * tau + perp_z * ic + wz * is_
    s[1] += -duj * tau + dbz * int_nz
    s[2] = ux * npar + perp_x * ct + wx * st
    s[3] = perp_y * ct + wy * st
    s[4] = uz * npar + perp_z * ct + wz * st


@njit(cache=True, inline="always")
def _step_nb(s, par, dt):
    _vflow_nb(s, par, 0.5 * dt)
    s[0] += s[1] * dt / par[5]
    _vflow_nb(s, par, 0.5 * dt)


@njit(cache=True)
def _integrate_nb(s0, par, dt, n_steps, save_every):
    n_saves = n_steps // save_every + 1
    out = np.empty((n_saves, 5))
    s = s0.copy()
    out[0] = s
    idx = 1
    for i in range(1, n_steps + 1):
        _step_nb(s, par, dt)
        if i % save_every == 0:
            out[idx] = s
            idx += 1
    return out[:idx]


@njit(cache=True, parallel=True)
def _integrate_ensemble_nb(states, par, dt, n_steps, save_every):
    n_seeds = states.shape[0]
    n_saves = n_steps // save_every + 1
    out = np.empty((n_seeds, n_saves, 5))
    for j in prange(n_seeds):
        s = states[j].copy()
        out[j, 0] = s
        idx = 1
        for i in range(1, n_steps + 1):
            _step_nb(s, par, dt)
            if i % save_every == 0:
                out[j, idx] = s
                idx += 1
    return out


@njit(cache=True, inline="always")
def _energy_nb(s, par):
    uj_amp, fict_amp, bx, bz0, k, mass = par[0], par[1], par[2], par[3], par[4], par[5]
    c2 = np.cos(2.0 * k * s[0])
    s2 = np.sin(2.0 * k * s[0])
    bzv = bz0 - fict_amp * s2
    return s[1] * s[1] / (2.0 * mass) + uj_amp * c2 - (s[2] * bx + s[4] * bzv)


@njit(cache=True, inline="always")
def _henon_rhs_nb(y, p_val, par, out):
    """Right side with p as the independent variable: d(z,t,n)/dp."""
    full = np.empty(5)
    full[0] = y[0]
    full[1] = p_val
    full[2] = y[2]
    full[3] = y[3]
    full[4] = y[4]
    ds = np.empty(5)
    _derivs_nb(full, par, ds)
    pdot = ds[1]
    if abs(pdot) < 1e-14:
        pdot = 1e-14
    out[0] = ds[0] / pdot
    out[1] = 1.0 / pdot
    out[2] = ds[2] / pdot
    out[3] = ds[3] / pdot
    out[4] = ds[4] / pdot


@njit(cache=True)
def _henon_refine_nb(s_pre, par, t_pre):
    """One RK4 step with p as the independent variable, from s_pre to p = 0.

    Returns (z, t, nx, ny, nz) at the crossing; Henon's trick makes the
    final p exactly zero by construction.
    """
    dp = -s_pre[1]
    p0 = s_pre[1]
    y = np.empty(5)
    y[0] = s_pre[0]
    y[1] = t_pre
    y[2] = s_pre[2]
    y[3] = s_pre[3]
    y[4] = s_pre[4]
    k1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    _henon_rhs_nb(y, p0, par, k1)
    _henon_rhs_nb(y + 0.5 * dp * k1, p0 + 0.5 * dp, par, k2)
    _henon_rhs_nb(y + 0.5 * dp * k2, p0 + 0.5 * dp, par, k3)
    _henon_rhs_nb(y + dp * k3, p0 + dp, par, k4)
    return y + (dp / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def _poincare_traj_nb(s0, par, dt, max_steps, max_crossings, out):
    """Collect up to max_crossings section points for one trajectory.

    out has shape (max_crossings, 4) holding (n_z, phi, z, t).
    Returns the number of crossings found; -1 flags a non-finite state.
    """
    s = s0.copy()
    s_pre = s0.copy()
    count = 0
    t = 0.0
    for i in range(max_steps):
        s_pre[:] = s
        _step_nb(s, par, dt)
        t += dt
        if not np.isfinite(s[0]):
            return -1
        if s_pre[1] < 0.0 and s[1] >= 0.0:
            ds = np.empty(5)
            _derivs_nb(s_pre, par, ds)
            if ds[1] <= 0.0:
                continue
            y = _henon_refine_nb(s_pre, par, t - dt)
            nleng = np.sqrt(y[2]**2 + y[3]**2 + y[4]**2)
            out[count, 0] = y[4] / nleng
            out[count, 1] = np.arctan2(y[3], y[2])
            out[count, 2] = y[0]
            out[count, 3] = y[1]
            count += 1
            if count >= max_crossings:
                return count
    return count


@njit(cache=True, parallel=True)
def _poincare_ensemble_nb(states, par, dt, max_steps, max_crossings):
    n_seeds = states.shape[0]
    out = np.empty((n_seeds, max_crossings, 4))
    counts = np.empty(n_seeds, dtype=np.int64)
    for j in prange(n_seeds):
        counts[j] = _poincare_traj_nb(states[j], par, dt, max_steps,
                                      max_crossings, out[j])
    return out, counts


@njit(cache=True)
def _lyapunov_nb(s0, par, dt, renorm_steps, n_intervals, d0):
    """Benettin two-trajectory estimate; returns running exponents.

    The shadow offset is renormalized with the spin part projected onto
    the tangent plane of the unit sphere at the reference moment, so the
    unit-norm restoration perturbs the offset only at O(d0^2); a naive
    renormalization would re-inject O(d0) direction noise every interval
    and fake a positive exponent on integrable orbits.
    """
    s1 = s0.copy()
    s2 = s0.copy()
    s2[0] += d0  # seed offset along z; direction is quickly forgotten
    log_sum = 0.0
    history = np.empty(n_intervals)
    tau = renorm_steps * dt
    for k in range(n_intervals):
        for _ in range(renorm_steps):
            _step_nb(s1, par, dt)
            _step_nb(s2, par, dt)
        d = 0.0
        for i in range(5):
            d += (s2[i] - s1[i])**2
        d = np.sqrt(d)
        if not np.isfinite(d) or d == 0.0:
            return history[:k]
        log_sum += np.log(d / d0)
        history[k] = log_sum / ((k + 1) * tau)
        scale = d0 / d
        dz = scale * (s2[0] - s1[0])
        dp = scale * (s2[1] - s1[1])
        dnx = scale * (s2[2] - s1[2])
        dny = scale * (s2[3] - s1[3])
        dnz = scale * (s2[4] - s1[4])
        dot = dnx * s1[2] + dny * s1[3] + dnz * s1[4]
        dnx -= dot * s1[2]
        dny -= dot * s1[3]
        dnz -= dot * s1[4]
        s2[0] = s1[0] + dz
        s2[1] = s1[1] + dp
        s2[2] = s1[2] + dnx
        s2[3] = s1[3] + dny
        s2[4] = s1[4] + dnz
        nrm = np.sqrt(s2[2]**2 + s2[3]**2 + s2[4]**2)
        for i in range(2, 5):
            s2[i] /= nrm
    return history


def energy(state: ClassicalState, cfg: LatticeConfig) -> float:
    """Total energy p^2/2m + U_J(z) - n . beta(z) in E_R."""
    return float(_energy_nb(state.as_array(), _pack_params(cfg)))


def derivatives(state: ClassicalState, cfg: LatticeConfig):
    """(dz/dt, dp/dt, dn/dt) of the flow at the given state."""
    out = np.empty(5)
    _derivs_nb(state.as_array(), _pack_params(cfg), out)
    return float(out[0]), float(out[1]), out[2:5].copy()


def integrate(state0: ClassicalState, cfg: LatticeConfig, dt: float,
              t_final: float, save_every: int = 1, method: str = "split"):
    """Integrate one trajectory, sampling every save_every steps.

    Returns (times, states) with states of shape (n_saves, 5) holding
    (z, p, nx, ny, nz).  method="rk" uses scipy DOP853 as a cross-check
    branch (no exact norm preservation).
    """
    if dt <= 0:
        raise PhysicsError("dt must be positive")
    n_steps = int(round(t_final / dt))
    if method == "split":
        out = _integrate_nb(state0.as_array(), _pack_params(cfg), dt,
                            n_steps, save_every)
        times = np.arange(out.shape[0]) * (save_every * dt)
    elif method == "rk":
        from scipy.integrate import solve_ivp
        par = _pack_params(cfg)

        def rhs(_t, y):
            ds = np.empty(5)
            _derivs_nb(y, par, ds)
            return ds

        times = np.arange(n_steps // save_every + 1) * (save_every * dt)
        sol = solve_ivp(rhs, (0.0, times[-1] if len(times) > 1 else t_final),
                        state0.as_array(), t_eval=times, method="DOP853",
                        rtol=1e-11, atol=1e-12)
        if not sol.success:
            raise NumericalError(f"RK integration failed: {sol.message}")
        out = sol.y.T
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite state encountered; reduce dt")
    return times, out


def integrate_ensemble(states: np.ndarray, cfg: LatticeConfig, dt: float,
                       t_final: float, save_every: int = 1):
    """Integrate many trajectories in parallel.

    states: (n_seeds, 5) array of initial (z, p, nx, ny, nz).
    Returns (times, out) with out of shape (n_seeds, n_saves, 5).
    """
    states = np.ascontiguousarray(states, dtype=float)
    n_steps = int(round(t_final / dt))
    out = _integrate_ensemble_nb(states, _pack_params(cfg), dt, n_steps,
                                 save_every)
    times = np.arange(out.shape[1]) * (save_every * dt)
    if not np.all(np.isfinite(out[:, -1])):
        raise NumericalError("non-finite state in ensemble; reduce dt")
    return times, out


def solve_z_on_shell(e_total: float, n: np.ndarray, cfg: LatticeConfig,
                     n_search: int = 720):
    """All z in [0, pi/k) where U_J(z) - n.beta(z) = e_total at p = 0."""
    period = cfg.lattice_period
    zs = np.linspace(0.0, period, n_search + 1)

    def f(z):
        s2 = np.sin(2.0 * cfg.k_laser * z)
        c2 = np.cos(2.0 * cfg.k_laser * z)
        bzv = cfg.bz - cfg.u0 * np.sin(cfg.theta_l) * s2
        uj = 2.0 * cfg.u0 * np.cos(cfg.theta_l) * c2
        return uj - (n[0] * cfg.bx + n[2] * bzv) - e_total

    vals = f(zs)
    roots = []
    for i in range(n_search):
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(zs[i]))
        elif fa * fb < 0.0:
            roots.append(brentq(f, zs[i], zs[i + 1], xtol=1e-13))
    return roots


def seeds_on_shell(e_total: float, cfg: LatticeConfig,
                   nz_values: np.ndarray, phi_values: np.ndarray) -> np.ndarray:
    """Grid of section seeds (p = 0) on the energy shell.

    For each (n_z, phi) the moment is n = (sqrt(1-nz^2) cos phi,
    sqrt(1-nz^2) sin phi, nz) and every z-root of the shell condition
    becomes one seed.  Points with no root are skipped.
    """
    seeds = []
    for nz in nz_values:
        ssin = np.sqrt(max(0.0, 1.0 - nz * nz))
        for phi in phi_values:
            n = np.array([ssin * np.cos(phi), ssin * np.sin(phi), nz])
            for z in solve_z_on_shell(e_total, n, cfg):
                seeds.append([z, 0.0, n[0], n[1], n[2]])
    return np.array(seeds) if seeds else np.empty((0, 5))


def poincare_section(seeds: np.ndarray, cfg: LatticeConfig, n_crossings: int,
                     dt: float = 2e-4, max_time: float = 4000.0,
                     energy_tol: float = 1e-10) -> PoincareSection:
    """Surface of section at p = 0, dp/dt > 0 from an ensemble of seeds.

    All seeds must share the same energy within energy_tol.  Crossings
    are located by switching the independent variable to p across the
    sign change (Henon's method).  Results are merged in seed order.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    par = _pack_params(cfg)
    energies = np.array([_energy_nb(s, par) for s in seeds])
    e0 = energies[0]
    spread = np.max(np.abs(energies - e0)) / max(1.0, abs(e0))
    if spread > energy_tol:
        raise PhysicsError(f"seed energies differ by {spread:.2e} (> {energy_tol})")
    max_steps = int(max_time / dt)
    out, counts = _poincare_ensemble_nb(np.ascontiguousarray(seeds), par, dt,
                                        max_steps, n_crossings)
    if np.any(counts < 0):
        raise NumericalError("non-finite trajectory during section scan")
    pts, idx, zs, ts = [], [], [], []
    for j, c in enumerate(counts):
        pts.append(out[j, :c, :2])
        zs.append(out[j, :c, 2])
        ts.append(out[j, :c, 3])
        idx.append(np.full(int(c), j, dtype=int))
    points = np.vstack(pts) if pts else np.empty((0, 2))
    return PoincareSection(energy=float(e0), points=points,
                           seed_index=np.concatenate(idx) if idx else np.empty(0, int),
                           crossing_z=np.concatenate(zs) if zs else np.empty(0),
                           crossing_t=np.concatenate(ts) if ts else np.empty(0))


def elliptic_K(kappa: float) -> float:
    """Complete elliptic integral of the first kind, modulus convention
    K(kappa) = int_0^{pi/2} dtheta / sqrt(1 - kappa^2 sin^2 theta).

    Computed by arithmetic-geometric-mean iteration.  Raises for
    kappa >= 1 - 1e-12 (logarithmic singularity at kappa = 1).
    """
    if kappa < 0.0:
        raise PhysicsError(f"kappa must be >= 0, got {kappa}")
    if kappa >= 1.0 - 1e-12:
        raise PhysicsError(f"K(kappa) diverges as kappa -> 1, got {kappa}")
    a, b = 1.0, np.sqrt(1.0 - kappa * kappa)
    while abs(a - b) > 1e-16 * a:
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return np.pi / (2.0 * a)


def pendulum_amplitude_phase(n_z: float, cfg: LatticeConfig):
    """Pendulum amplitude and phase of the B_x = 0 potential,
    C = U0 sqrt(4 cos^2 theta + n_z^2 sin^2 theta),
    D = arctan(n_z tan(theta)/2)."""
    c = cfg.u0 * np.sqrt(4.0 * np.cos(cfg.theta_l)**2
                         + n_z**2 * np.sin(cfg.theta_l)**2)
    d = np.arctan(0.5 * n_z * np.tan(cfg.theta_l))
    return float(c), float(d)


def pendulum_omega0(c_amp: float, cfg: LatticeConfig) -> float:
    """Harmonic frequency omega0 = sqrt(4 k^2 |C| / m) at the well bottom."""
    return float(np.sqrt(4.0 * cfg.k_laser**2 * abs(c_amp) / cfg.mass))


def pendulum_minimum(n_z: float, cfg: LatticeConfig) -> float:
    """Position of the B_x = 0 potential minimum in [0, pi/k).

    In this package's coordinates the pendulum potential reads
    C cos(2kz - D), so the well bottom sits at z = (pi + D) / (2k).
    """
    _, d_phase = pendulum_amplitude_phase(n_z, cfg)
    return float((np.pi + d_phase) / (2.0 * cfg.k_laser))


def pendulum_analysis(n_z: float, e_total: float, cfg: LatticeConfig) -> PendulumActionAngle:
    """Action-angle frequencies of the integrable (B_x = 0) pendulum.

    omega1 = (pi/2) omega0 / K(kappa) with 2 kappa^2 = 1 + E/|C| is the
    center-of-mass libration frequency; omega2 = (dC/dn_z)(gamma E)/(mu_B C)
    is the constant moment-precession frequency in the co-oscillating frame.
    Requires E inside the libration region [-|C|, |C|).
    """
    if abs(n_z) > 1.0:
        raise PhysicsError(f"|n_z| must be <= 1, got {n_z}")
    c_amp, d_phase = pendulum_amplitude_phase(n_z, cfg)
    kappa_sq = 0.5 * (1.0 + e_total / abs(c_amp))
    if kappa_sq < 0.0 or kappa_sq >= 1.0:
        raise PhysicsError(
            f"energy {e_total} outside the libration region of |C| = {c_amp}")
    kappa = np.sqrt(kappa_sq)
    omega0 = pendulum_omega0(c_amp, cfg)
    omega1 = 0.5 * np.pi * omega0 / elliptic_K(kappa)
    dc_dnz = cfg.u0**2 * n_z * np.sin(cfg.theta_l)**2 / c_amp
    # gamma/mu_B = gyro_sign/(hbar F) once fields are Zeeman energies
    omega2 = dc_dnz * (e_total / c_amp) * cfg.gyro_sign / cfg.f_spin
    return PendulumActionAngle(C=c_amp, D=d_phase, kappa=float(kappa),
                               omega0=omega0, omega1=float(omega1),
                               omega2=float(omega2))


def _alpha_surface(z, alpha: float, cfg: LatticeConfig):
    """Adiabatic surface U_J(z) + |mu_B B_eff(z)| cos(alpha).

    alpha is measured so that alpha = pi gives the lowest (double-well)
    surface, on which the moment is aligned with the local field.
    """
    return scalar_potential(z, cfg) + field_magnitude(z, cfg) * np.cos(alpha)


def adiabatic_surface_minimum(alpha: float, cfg: LatticeConfig):
    """(z_min, U_min) of the alpha-surface within one lattice period."""
    period = cfg.lattice_period
    zs = np.linspace(0.0, period, 2048, endpoint=False)
    vals = _alpha_surface(zs, alpha, cfg)
    i0 = int(np.argmin(vals))
    lo, hi = zs[i0] - period / 2048, zs[i0] + period / 2048
    res = minimize_scalar(lambda z: _alpha_surface(z, alpha, cfg),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x), float(res.fun)


def _turning_points(alpha: float, e_total: float, cfg: LatticeConfig):
    z_min, u_min = adiabatic_surface_minimum(alpha, cfg)
    if e_total <= u_min:
        raise PhysicsError(f"E = {e_total} at or below surface minimum {u_min}")
    period = cfg.lattice_period

    def f(z):
        return _alpha_surface(z, alpha, cfg) - e_total

    z1 = z2 = None
    n_probe = 4096
    for i in range(1, n_probe):
        z = z_min - i * period / n_probe
        if f(z) > 0.0:
            z1 = brentq(f, z, z + period / n_probe, xtol=1e-13)
            break
    for i in range(1, n_probe):
        z = z_min + i * period / n_probe
        if f(z) > 0.0:
            z2 = brentq(f, z - period / n_probe, z, xtol=1e-13)
            break
    if z1 is None or z2 is None:
        raise PhysicsError(
            f"no closed orbit at E = {e_total} on the alpha = {alpha} surface")
    return z1, z2


def adiabatic_analysis(alpha: float, e_total: float, cfg: LatticeConfig,
                       n_quad: int = 400):
    """Motional action, orbit frequency, and mean precession frequency on
    an adiabatic surface.

    Returns (action, omega1, omega2): action = (1/2pi) closed-orbit
    integral of p dz; omega1 = 2pi / period; omega2 = orbit-time-average
    of the local Larmor rate |B_eff|/F.  The quadrature substitutes
    z = zc - zh cos(s) to regularize the turning-point singularities.
    """
    if not 0.0 <= alpha <= np.pi:
        raise PhysicsError(f"alpha must lie in [0, pi], got {alpha}")
    z1, z2 = _turning_points(alpha, e_total, cfg)
    zc, zh = 0.5 * (z1 + z2), 0.5 * (z2 - z1)
    nodes, weights = np.polynomial.legendre.leggauss(n_quad)
    s = 0.5 * np.pi * (nodes + 1.0)
    ws = 0.5 * np.pi * weights
    z = zc - zh * np.cos(s)
    du = e_total - _alpha_surface(z, alpha, cfg)
    # E - U = (z - z1)(z2 - z) g(z); the substitution cancels the root
    denom = (z - z1) * (z2 - z)
    g = du / denom
    if np.any(g <= 0.0):
        raise NumericalError("orbit bracket contains an interior barrier above E")
    sqrt_g = np.sqrt(g)
    m = cfg.mass
    # period T = sqrt(m/2) * closed-orbit integral of dz / sqrt(E-U)
    t_half = np.sqrt(0.5 * m) * np.sum(ws / sqrt_g)
    period = 2.0 * t_half
    omega1 = 2.0 * np.pi / period
    action = (np.sqrt(2.0 * m) / np.pi) * zh**2 * np.sum(ws * np.sin(s)**2 * sqrt_g)
    larmor = field_magnitude(z, cfg) / cfg.f_spin
    omega2 = (np.sqrt(0.5 * m) / t_half) * np.sum(ws * larmor / sqrt_g)
    return float(action), float(omega1), float(omega2)


def max_lyapunov(state0: ClassicalState, cfg: LatticeConfig, t_final: float,
                 dt: float = 2e-4, renorm_interval: float | None = None,
                 offset: float = 1e-8):
    """Largest Lyapunov exponent by Benettin shadow-trajectory renormalization.

    renorm_interval defaults to one harmonic period 2pi/omega0 of the
    pendulum fit at the seed's n_z.  Returns (estimate, history) where
    history[k] is the running exponent after k+1 renormalizations.
    """
    if renorm_interval is None:
        c_amp, _ = pendulum_amplitude_phase(state0.n_z, cfg)
        renorm_interval = 2.0 * np.pi / pendulum_omega0(c_amp, cfg)
    renorm_steps = max(1, int(round(renorm_interval / dt)))
    n_intervals = max(1, int(t_final / (renorm_steps * dt)))
    history = _lyapunov_nb(state0.as_array(), _pack_params(cfg), dt,
                           renorm_steps, n_intervals, offset)
    if len(history) < n_intervals:
        raise NumericalError("non-finite dynamics in Lyapunov estimate")
    return float(history[-1]), history
