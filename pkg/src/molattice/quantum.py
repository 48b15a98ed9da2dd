"""Spinor-wavepacket dynamics on a periodic spatial grid.

The (2F+1)-component wavefunction evolves under the lattice potential
matrix via a symmetric split-operator step: half potential, full kinetic
(diagonal in momentum space via FFT), half potential.  The potential
half-step is an exact per-grid-point matrix exponential, computed by
rotating to the local-field spin basis where the Zeeman term is
diagonal, so each step is unitary to rounding.

Also here: Bloch band structure in a plane-wave x spin basis, the
left-well-localized initial state built from the band-edge tunneling
doublet, magnetization time series, joint Husimi Q distributions over
motional and spin coherent states, and phase-space sampling from Q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
import scipy.fft as sfft

from .errors import NumericalError, PhysicsError
from .model import (
    LatticeConfig,
    adiabatic_frame_rotations,
    adiabatic_surfaces,
    local_field_angle,
    magnetic_quantum_numbers,
    potential_matrices,
    spin_matrices,
)

__all__ = [
    "SpinorWavefunction",
    "BandStructure",
    "HusimiQ",
    "HusimiGrid",
    "make_grid",
    "split_step",
    "propagate",
    "energy_expectation",
    "band_structure",
    "bloch_state_on_grid",
    "doublet_states",
    "prepare_left_localized",
    "magnetization_series",
    "spin_coherent_amplitudes",
    "husimi_q",
    "default_husimi_grid",
    "sample_husimi",
    "adiabatic_populations",
]


@dataclass
class SpinorWavefunction:
    """Wavefunction psi[i, m] on N grid points x (2F+1) spin components.

    Normalization: sum |psi|^2 * dz = 1.
    """

    grid: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.shape[0] != self.grid.shape[0]:
            raise PhysicsError("psi and grid lengths differ")

    @property
    def dz(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def n_points(self) -> int:
        return self.grid.shape[0]

    @property
    def n_spin(self) -> int:
        return self.psi.shape[1]

    @property
    def box_length(self) -> float:
        return self.n_points * self.dz

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.dz))

    def normalized(self) -> "SpinorWavefunction":
        return SpinorWavefunction(self.grid, self.psi / self.norm())

    def density(self) -> np.ndarray:
        """Position density summed over spin."""
        return np.sum(np.abs(self.psi) ** 2, axis=1)

    def spin_populations(self) -> np.ndarray:
        """Populations of the m_F components (basis order F..-F)."""
        return np.sum(np.abs(self.psi) ** 2, axis=0) * self.dz

    def expect_fz(self) -> float:
        f = (self.n_spin - 1) / 2.0
        m = f - np.arange(self.n_spin)
        return float(np.dot(self.spin_populations(), m))

    def copy(self) -> "SpinorWavefunction":
        return SpinorWavefunction(self.grid, self.psi.copy())


def make_grid(cfg: LatticeConfig, n_points: int = 512, periods: int = 4) -> np.ndarray:
    """Periodic grid covering an integer number of lattice periods.

    n_points must be a power of two (FFT-sized); the spacing must
    resolve the state's momentum content, checked by the propagator.
    """
    if n_points & (n_points - 1):
        raise PhysicsError(f"n_points must be a power of two, got {n_points}")
    length = periods * cfg.lattice_period
    return np.arange(n_points) * (length / n_points)


@lru_cache(maxsize=8)
def _propagator_tables(cfg: LatticeConfig, n_points: int, periods: int, dt: float):
    """Precompute (grid, half potential propagators, kinetic phases)."""
    grid = make_grid(cfg, n_points, periods)
    umats = potential_matrices(grid, cfg)
    evals, evecs = np.linalg.eigh(umats)
    phase = np.exp(-0.5j * dt * evals)
    half_v = np.einsum("nab,nb,ncb->nac", evecs, phase, evecs.conj())
    k = 2.0 * np.pi * sfft.fftfreq(n_points, d=grid[1] - grid[0])
    kin = np.exp(-1j * dt * k**2 / (2.0 * cfg.mass))
    return grid, half_v, kin


def split_step(psi: SpinorWavefunction, cfg: LatticeConfig, dt: float) -> SpinorWavefunction:
    """One symmetric split-operator step of size dt."""
    if dt <= 0:
        raise PhysicsError("dt must be positive")
    periods = int(round(psi.box_length / cfg.lattice_period))
    _, half_v, kin = _propagator_tables(cfg, psi.n_points, periods, dt)
    out = np.einsum("nab,nb->na", half_v, psi.psi)
    out = sfft.fft(out, axis=0)
    out *= kin[:, None]
    out = sfft.ifft(out, axis=0)
    out = np.einsum("nab,nb->na", half_v, out)
    return SpinorWavefunction(psi.grid, out)


def propagate(psi: SpinorWavefunction, cfg: LatticeConfig, dt: float,
              n_steps: int, callback=None, callback_every: int = 1) -> SpinorWavefunction:
    """Propagate n_steps; callback(i, psi) runs every callback_every steps."""
    periods = int(round(psi.box_length / cfg.lattice_period))
    _, half_v, kin = _propagator_tables(cfg, psi.n_points, periods, dt)
    cur = psi.psi
    kin_col = kin[:, None]
    for i in range(1, n_steps + 1):
        cur = np.einsum("nab,nb->na", half_v, cur)
        cur = sfft.ifft(sfft.fft(cur, axis=0) * kin_col, axis=0)
        cur = np.einsum("nab,nb->na", half_v, cur)
        if callback is not None and i % callback_every == 0:
            callback(i, SpinorWavefunction(psi.grid, cur))
    return SpinorWavefunction(psi.grid, cur)


def energy_expectation(psi: SpinorWavefunction, cfg: LatticeConfig) -> float:
    """<H> = kinetic (spectral) + potential (grid) expectation."""
    k = 2.0 * np.pi * sfft.fftfreq(psi.n_points, d=psi.dz)
    psik = sfft.fft(psi.psi, axis=0)
    wk = np.sum(np.abs(psik) ** 2, axis=1)
    kin = np.sum(wk * k**2 / (2.0 * cfg.mass)) / np.sum(wk)
    umats = potential_matrices(psi.grid, cfg)
    pot = np.real(np.einsum("na,nab,nb->", psi.psi.conj(), umats, psi.psi)) * psi.dz
    return float(kin + pot / psi.norm() ** 2)


@dataclass
class BandStructure:
    """Bloch bands: energies[iq, band] ascending per quasimomentum."""

    quasimomenta: np.ndarray
    energies: np.ndarray
    eigenvectors: np.ndarray | None = None   # (nq, dim, nband) in plane-wave x spin basis
    plane_wave_orders: np.ndarray | None = None

    @property
    def n_bands(self) -> int:
        return self.energies.shape[1]


def _bloch_hamiltonian(q: float, cfg: LatticeConfig, orders: np.ndarray) -> np.ndarray:
    """Bloch Hamiltonian in the basis e^{i(q + 2kj)z} x |m>, j in orders."""
    fx, _, fz = spin_matrices(cfg.f_spin)
    d = cfg.n_spin
    npw = len(orders)
    eye = np.eye(d)
    w = -cfg.gyro_sign / cfg.f_spin
    h = np.zeros((npw, d, npw, d), dtype=complex)
    k = cfg.k_laser
    kin = (q + 2.0 * k * orders) ** 2 / (2.0 * cfg.mass)
    for j in range(npw):
        h[j, :, j, :] += kin[j] * eye
        h[j, :, j, :] += w * (cfg.bx * fx + cfg.bz * fz)
    # 2 U0 cos(theta) cos(2kz) -> U0 cos(theta) shifting j by +-1
    cc = cfg.u0 * np.cos(cfg.theta_l)
    # fictitious field: w Fz * (-U0 sin(theta) sin(2kz));
    # sin(2kz) couples j -> j+1 with -i/2 and j -> j-1 with +i/2
    sc = -w * cfg.u0 * np.sin(cfg.theta_l)
    for j in range(npw - 1):
        h[j + 1, :, j, :] += cc * eye + sc * (-0.5j) * fz
        h[j, :, j + 1, :] += cc * eye + sc * (+0.5j) * fz
    return h.reshape(npw * d, npw * d)


def band_structure(cfg: LatticeConfig, n_plane_waves: int = 41,
                   q_list=None, n_bands: int | None = None,
                   keep_vectors: bool = False) -> BandStructure:
    """Diagonalize the Bloch Hamiltonian over the first Brillouin zone.

    q_list defaults to 64 quasimomenta in [-k, k).  Raises when the
    plane-wave basis is too small: the lowest requested band must have
    population below 1e-8 in the outermost plane-wave shell.
    """
    if n_plane_waves % 2 == 0 or n_plane_waves < 3:
        raise PhysicsError("n_plane_waves must be odd and >= 3")
    if q_list is None:
        q_list = np.linspace(-cfg.k_laser, cfg.k_laser, 64, endpoint=False)
    q_list = np.atleast_1d(np.asarray(q_list, dtype=float))
    nmax = n_plane_waves // 2
    orders = np.arange(-nmax, nmax + 1)
    d = cfg.n_spin
    if n_bands is None:
        n_bands = min(8, n_plane_waves * d)
    energies = np.empty((len(q_list), n_bands))
    vectors = np.empty((len(q_list), n_plane_waves * d, n_bands), dtype=complex) if keep_vectors else None
    for i, q in enumerate(q_list):
        h = _bloch_hamiltonian(q, cfg, orders)
        evals, evecs = np.linalg.eigh(h)
        energies[i] = evals[:n_bands]
        shell = np.abs(evecs[:, 0].reshape(n_plane_waves, d))
        edge_weight = float(np.sum(shell[0] ** 2 + shell[-1] ** 2))
        if edge_weight > 1e-8:
            raise NumericalError(
                f"plane-wave basis too small: edge weight {edge_weight:.2e} at q={q}")
        if keep_vectors:
            vectors[i] = evecs[:, :n_bands]
    return BandStructure(quasimomenta=q_list, energies=energies,
                         eigenvectors=vectors, plane_wave_orders=orders)


def bloch_state_on_grid(bands: BandStructure, iq: int, band: int,
                        grid: np.ndarray, cfg: LatticeConfig) -> SpinorWavefunction:
    """Materialize an eigenvector as a normalized grid wavefunction."""
    if bands.eigenvectors is None:
        raise PhysicsError("band structure was computed without eigenvectors")
    q = bands.quasimomenta[iq]
    orders = bands.plane_wave_orders
    vec = bands.eigenvectors[iq, :, band].reshape(len(orders), cfg.n_spin)
    waves = np.exp(1j * np.outer(grid, q + 2.0 * cfg.k_laser * orders))
    return SpinorWavefunction(grid, waves @ vec).normalized()


def doublet_states(cfg: LatticeConfig, n_points: int = 512, periods: int = 4,
                   n_plane_waves: int = 41):
    """Lowest two band-edge (q = 0) eigenstates on the grid.

    Returns (e0, e1, psi0, psi1) with energies ascending.  Raises when
    the pair is not a near-degenerate tunneling doublet (its splitting
    must be small against the gap to the next band).
    """
    bands = band_structure(cfg, n_plane_waves=n_plane_waves, q_list=[0.0],
                           n_bands=3, keep_vectors=True)
    e0, e1, e2 = bands.energies[0]
    if (e1 - e0) > 0.5 * (e2 - e1):
        raise PhysicsError(
            f"lowest band-edge states are not a tunneling doublet: "
            f"splitting {e1 - e0:.3g} vs next gap {e2 - e1:.3g}")
    grid = make_grid(cfg, n_points, periods)
    psi0 = bloch_state_on_grid(bands, 0, 0, grid, cfg)
    psi1 = bloch_state_on_grid(bands, 0, 1, grid, cfg)
    return float(e0), float(e1), psi0, psi1


def left_well_mask(grid: np.ndarray, cfg: LatticeConfig) -> np.ndarray:
    """True on the left half (0, pi/2k) of every lattice period."""
    frac = np.mod(grid, cfg.lattice_period) / cfg.lattice_period
    return frac < 0.5


def prepare_left_localized(cfg: LatticeConfig, n_points: int = 512,
                           periods: int = 4, n_plane_waves: int = 41) -> SpinorWavefunction:
    """Even/odd superposition (psi0 +/- psi1)/sqrt(2) of the band-edge
    doublet, phased to localize in the left well of each double well
    with positive initial magnetization <F_z>."""
    _, _, psi0, psi1 = doublet_states(cfg, n_points, periods, n_plane_waves)
    # fix each state's arbitrary global phase against its dominant component
    def phase_fix(p):
        i = np.argmax(np.abs(p.psi))
        return SpinorWavefunction(p.grid, p.psi * np.exp(-1j * np.angle(p.psi.flat[i])))
    psi0, psi1 = phase_fix(psi0), phase_fix(psi1)
    mask = left_well_mask(psi0.grid, cfg)
    best = None
    for sign in (1.0, -1.0):
        cand = SpinorWavefunction(psi0.grid, (psi0.psi + sign * psi1.psi) / np.sqrt(2.0))
        cand = cand.normalized()
        left_pop = float(np.sum(cand.density()[mask]) * cand.dz)
        if best is None or left_pop > best[0]:
            best = (left_pop, cand)
    left_pop, cand = best
    if cand.expect_fz() < 0:
        raise NumericalError(
            "left-localized doublet state has negative <F_z>; field convention broken")
    return cand


def magnetization_series(psi0: SpinorWavefunction, cfg: LatticeConfig,
                         dt: float, t_final: float, sample_every: int = 10):
    """Propagate and record <F_z>(t).  Returns (times, values)."""
    n_steps = int(round(t_final / dt))
    n_samples = n_steps // sample_every
    times = np.empty(n_samples + 1)
    values = np.empty(n_samples + 1)
    times[0], values[0] = 0.0, psi0.expect_fz()
    idx = [0]

    def cb(i, p):
        idx[0] += 1
        times[idx[0]] = i * dt
        values[idx[0]] = p.expect_fz()

    propagate(psi0, cfg, dt, n_steps, callback=cb, callback_every=sample_every)
    return times[: idx[0] + 1], values[: idx[0] + 1]


def spin_coherent_amplitudes(f_spin: float, theta, phi) -> np.ndarray:
    """Amplitudes <F m|theta, phi> of spin coherent states, basis m = F..-F.

    |theta, phi> points the mean spin along (sin t cos p, sin t sin p, cos t):
    <F_z> = F cos(theta).
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    two_f = int(round(2 * f_spin))
    m = f_spin - np.arange(two_f + 1)
    binom = np.array([comb(two_f, int(round(f_spin - mm))) for mm in m])
    ct = np.cos(theta / 2.0)[..., None]
    st = np.sin(theta / 2.0)[..., None]
    amp = (np.sqrt(binom)[None, :]
           * ct ** (f_spin + m)[None, :]
           * st ** (f_spin - m)[None, :]).astype(complex)
    amp = amp * np.exp(1j * (f_spin - m)[None, :] * phi[..., None])
    return amp


@dataclass
class HusimiGrid:
    """Sample domain for the joint Husimi function."""

    z0: np.ndarray
    p0: np.ndarray
    theta: np.ndarray           # Gauss-Legendre nodes in cos(theta)
    theta_weights: np.ndarray
    phi: np.ndarray             # uniform azimuthal grid
    sigma_z: float              # motional coherent-state width


@dataclass
class HusimiQ:
    """Q[iz, ip, itheta, iphi] >= 0, integrating to 1 over the domain."""

    grid: HusimiGrid
    values: np.ndarray
    f_spin: float
    gyro_sign: float = -1.0

    def weights(self):
        dz0 = self.grid.z0[1] - self.grid.z0[0]
        dp0 = self.grid.p0[1] - self.grid.p0[0]
        dphi = 2.0 * np.pi / len(self.grid.phi)
        return dz0, dp0, self.grid.theta_weights, dphi

    def integral(self) -> float:
        dz0, dp0, wth, dphi = self.weights()
        return float(np.sum(self.values * wth[None, None, :, None])
                     * dz0 * dp0 * dphi)

    def reduced_z(self) -> np.ndarray:
        """Marginal Q(z0), normalized to integrate to ~1 over z0."""
        dz0, dp0, wth, dphi = self.weights()
        return np.sum(self.values * wth[None, None, :, None], axis=(1, 2, 3)) * dp0 * dphi


def harmonic_fit_width(cfg: LatticeConfig) -> float:
    """Ground-state width of the harmonic fit to the left well of the
    lowest adiabatic surface: sigma_z = sqrt(1/(2 m omega_well))."""
    from .classical import adiabatic_surface_minimum
    z_min, _ = adiabatic_surface_minimum(np.pi, cfg)
    h = 1e-4
    zs = np.array([z_min - h, z_min, z_min + h])
    u = adiabatic_surfaces(zs, cfg)[:, 0]
    curv = (u[0] - 2 * u[1] + u[2]) / h**2
    if curv <= 0:
        raise PhysicsError("lowest surface has no harmonic minimum")
    omega = np.sqrt(curv / cfg.mass)
    return float(np.sqrt(1.0 / (2.0 * cfg.mass * omega)))


def default_husimi_grid(psi: SpinorWavefunction, cfg: LatticeConfig,
                        n_z0: int = 128, n_p0: int = 64,
                        n_phi: int | None = None) -> HusimiGrid:
    """Grid spanning the box in z0 and the occupied momenta in p0.

    theta uses (2F+2)-point Gauss-Legendre in cos(theta) (exact for the
    degree-2F polynomial overlap), phi a uniform grid.
    """
    sigma_z = harmonic_fit_width(cfg)
    z0 = np.linspace(0.0, psi.box_length, n_z0, endpoint=False)
    k = 2.0 * np.pi * sfft.fftfreq(psi.n_points, d=psi.dz)
    w = np.sum(np.abs(sfft.fft(psi.psi, axis=0)) ** 2, axis=1)
    k_rms = np.sqrt(np.sum(w * k**2) / np.sum(w))
    p_max = 4.0 * k_rms + 4.0 / sigma_z
    p0 = np.linspace(-p_max, p_max, n_p0)
    n_nodes = int(round(2 * cfg.f_spin)) + 2
    x, wx = np.polynomial.legendre.leggauss(n_nodes)
    theta = np.arccos(x)
    if n_phi is None:
        n_phi = 2 * int(round(2 * cfg.f_spin)) + 4
    phi = np.linspace(-np.pi, np.pi, n_phi, endpoint=False)
    return HusimiGrid(z0=z0, p0=p0, theta=theta, theta_weights=wx,
                      phi=phi, sigma_z=sigma_z)


def _coherent_overlaps(psi: SpinorWavefunction, grid: HusimiGrid) -> np.ndarray:
    """G[m, iz0, ip0] = <z0,p0|psi_m> with periodic Gaussian kernels."""
    n = psi.n_points
    z = psi.grid
    length = psi.box_length
    sig = grid.sigma_z
    # periodic image sum of the Gaussian kernel centered at 0
    u = np.mod(z + 0.5 * length, length) - 0.5 * length
    kernel = np.zeros(n)
    for shift in (-length, 0.0, length):
        kernel += np.exp(-((u + shift) ** 2) / (4.0 * sig**2))
    kernel *= (2.0 * np.pi * sig**2) ** (-0.25)
    fk = np.conj(sfft.fft(kernel))
    stride = n // len(grid.z0)
    if stride * len(grid.z0) != n:
        raise PhysicsError("husimi z0 grid must evenly divide the wavefunction grid")
    out = np.empty((psi.n_spin, len(grid.z0), len(grid.p0)), dtype=complex)
    for ip, p0 in enumerate(grid.p0):
        h = psi.psi * np.exp(-1j * p0 * z)[:, None]
        corr = sfft.ifft(sfft.fft(h, axis=0) * fk[:, None], axis=0) * psi.dz
        out[:, :, ip] = corr[::stride].T
    return out


def husimi_q(psi: SpinorWavefunction, cfg: LatticeConfig,
             phase_space_grid: HusimiGrid | None = None) -> HusimiQ:
    """Joint Husimi distribution over motional and spin coherent states.

    Q(z0,p0,theta,phi) = (1/2pi)((2F+1)/4pi) |<z0,p0| x <theta,phi|psi>|^2.
    """
    if phase_space_grid is None:
        phase_space_grid = default_husimi_grid(psi, cfg)
    g = phase_space_grid
    overlaps = _coherent_overlaps(psi.normalized(), g)
    th, ph = np.meshgrid(g.theta, g.phi, indexing="ij")
    cmat = spin_coherent_amplitudes(cfg.f_spin, th.ravel(), ph.ravel())
    cmat = cmat.reshape(len(g.theta), len(g.phi), cfg.n_spin)
    amp = np.einsum("tpm,mzk->zktp", cmat.conj(), overlaps)
    w = (1.0 / (2.0 * np.pi)) * (cfg.n_spin / (4.0 * np.pi))
    return HusimiQ(grid=g, values=w * np.abs(amp) ** 2, f_spin=cfg.f_spin,
                   gyro_sign=cfg.gyro_sign)


def sample_husimi(q: HusimiQ, n_samples: int, rng_seed: int) -> np.ndarray:
    """Draw classical states (z, p, n_hat) from Q by rejection sampling.

    The proposal is uniform over the bounding box of the support of the
    gridded Q (cells above 1e-8 of the peak); candidate densities are
    multilinearly interpolated.  The (theta, phi) marginal gives the
    spin-coherent direction; the returned n_hat is the magnetic-moment
    direction, i.e. gyro_sign times the spin direction.  Deterministic
    for a given seed.  Raises when the acceptance rate drops below 1e-4.
    """
    from .iotools import trajectory_rng
    rng = trajectory_rng(rng_seed, 0)
    g = q.grid
    vals = q.values  # axis 2 is ascending in cos(theta) by construction
    qmax = float(vals.max())
    if qmax <= 0:
        raise NumericalError("Husimi distribution is empty")
    axes = (g.z0, g.p0, np.cos(g.theta), g.phi)
    idx = np.argwhere(vals > 1e-8 * qmax)
    bounds = []
    for d, a in enumerate(axes):
        lo = max(0, idx[:, d].min() - 1)
        hi = min(len(a) - 1, idx[:, d].max() + 1)
        bounds.append((a[lo], a[hi]))
    spans = np.array([b[1] - b[0] for b in bounds])
    if np.any(spans <= 0):
        raise NumericalError("degenerate Husimi support")

    def interp(pts):
        idxf = []
        for d, a in enumerate(axes):
            x = np.clip(pts[:, d], a[0], a[-1])
            j = np.clip(np.searchsorted(a, x) - 1, 0, len(a) - 2)
            t = (x - a[j]) / (a[j + 1] - a[j])
            idxf.append((j, t))
        v = np.zeros(len(pts))
        for corner in range(16):
            wgt = np.ones(len(pts))
            ii = []
            for d in range(4):
                j, t = idxf[d]
                if corner >> d & 1:
                    wgt *= t
                    ii.append(j + 1)
                else:
                    wgt *= 1.0 - t
                    ii.append(j)
            v += wgt * vals[ii[0], ii[1], ii[2], ii[3]]
        return v

    accepted = []
    tried = 0
    batch = max(4 * n_samples, 1000)
    lows = np.array([b[0] for b in bounds])
    while len(accepted) < n_samples:
        pts = lows + rng.random((batch, 4)) * spans
        keep = rng.random(batch) * (1.05 * qmax) < interp(pts)
        tried += batch
        for row in pts[keep]:
            accepted.append(row)
            if len(accepted) == n_samples:
                break
        if tried >= 50 * batch and len(accepted) / tried < 1e-4:
            raise NumericalError(
                f"pathological Husimi acceptance rate {len(accepted)/tried:.2e}")
    out = np.empty((n_samples, 5))
    for i, (z0, p0, ct, phi) in enumerate(accepted):
        st = np.sqrt(max(0.0, 1.0 - ct * ct))
        out[i, 0] = z0
        out[i, 1] = p0
        out[i, 2] = q.gyro_sign * st * np.cos(phi)
        out[i, 3] = q.gyro_sign * st * np.sin(phi)
        out[i, 4] = q.gyro_sign * ct
    return out


def adiabatic_populations(psi: SpinorWavefunction, cfg: LatticeConfig):
    """Per-surface amplitudes and populations.

    Returns (amps, pops): amps[i, M] is the amplitude on adiabatic
    surface M (ascending energy order) at grid point i; populations sum
    to 1 for a normalized state.
    """
    rot = adiabatic_frame_rotations(psi.grid, cfg)
    amps = np.einsum("nba,nb->na", rot.conj(), psi.psi)
    # rotation columns are ordered m = F..-F along the local field; energy
    # ascending order is m = -F..F for gyro_sign=-1 and the reverse for +1
    if cfg.gyro_sign < 0:
        amps = amps[:, ::-1]
    pops = np.sum(np.abs(amps) ** 2, axis=0) * psi.dz
    return amps, pops
