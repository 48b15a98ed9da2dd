"""Physical model of a 1-D lin-theta-lin magneto-optical lattice.

An alkali atom of total ground-manifold spin F moves in a standing wave
whose two linear polarizations are misaligned by an angle theta_L.  The
light shift splits into a scalar lattice

    U_J(z) = 2 U0 cos(theta_L) cos(2 k z)

plus an effective Zeeman interaction  -mu . B_eff(z)  with

    B_eff(z) = B_x e_x + (B_fict(z) + B_z) e_z,
    mu_B B_fict(z) = -U0 sin(theta_L) sin(2 k z).

Unit system (defaults): hbar = 1, lengths in 1/k, momenta in hbar*k,
energies in the recoil energy E_R = hbar^2 k^2 / 2m, time in hbar/E_R.
With k_laser = 1 and mass = 1/2 this makes E_R = 1, so a momentum p in
hbar*k units carries kinetic energy p^2 in E_R.  Magnetic fields are
stored as Zeeman energies mu_B*B in E_R; only that product ever enters
the dynamics.  For the cesium lattice, E_R/h = 2 kHz sets the SI clock.

The magnetic moment is mu = gyro_sign * mu_B * F_vec / F; gyro_sign=-1
reproduces the alkali ground-state convention (moment antiparallel to F).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# E_R/h for the cesium lattice, used only at I/O boundaries.
CS_RECOIL_HZ = 2.0e3


@dataclass(frozen=True)
class LatticeConfig:
    """Lattice and atom parameters in recoil units.

    u0        : light-shift scale U0 (E_R), > 0
    theta_l   : polarization misalignment angle (rad), in (0, pi)
    bx, bz    : transverse / longitudinal Zeeman energies mu_B*B (E_R)
    f_spin    : total spin F (half-integer, e.g. 4 for Cs)
    k_laser   : laser wavenumber (sets the length unit; default 1)
    mass      : atomic mass (default 1/2 so that E_R = 1)
    gyro_sign : sign of the gyromagnetic ratio; -1 gives mu = -mu_B F/F
    """

    u0: float
    theta_l: float
    bx: float = 0.0
    bz: float = 0.0
    f_spin: float = 4.0
    k_laser: float = 1.0
    mass: float = 0.5
    gyro_sign: float = -1.0

    def __post_init__(self):
        # u0 = 0 is admitted for the empty-lattice / uniform-field limits
        if self.u0 < 0:
            raise ValueError(f"u0 must be non-negative, got {self.u0}")
        if not 0.0 < self.theta_l < np.pi:
            raise ValueError(f"theta_l must lie in (0, pi), got {self.theta_l}")
        two_f = 2.0 * self.f_spin
        if self.f_spin < 0.5 or abs(two_f - round(two_f)) > 1e-12:
            raise ValueError(f"f_spin must be a half-integer >= 1/2, got {self.f_spin}")
        if self.k_laser <= 0 or self.mass <= 0:
            raise ValueError("k_laser and mass must be positive")
        if self.gyro_sign not in (-1.0, 1.0):
            raise ValueError(f"gyro_sign must be +1 or -1, got {self.gyro_sign}")

    @property
    def n_spin(self) -> int:
        """Dimension 2F+1 of the spin manifold."""
        return int(round(2.0 * self.f_spin)) + 1

    @property
    def recoil_energy(self) -> float:
        """E_R = hbar^2 k^2 / 2m in the configured units (1 by default)."""
        return self.k_laser**2 / (2.0 * self.mass)

    @property
    def lattice_period(self) -> float:
        """Spatial period pi/k of every potential term."""
        return np.pi / self.k_laser


@dataclass(frozen=True)
class FieldVector:
    """Effective field at a point, stored as Zeeman energies mu_B*B (E_R).

    The lattice geometry keeps the field in the x-z plane, so by = 0.
    """

    bx: float
    by: float
    bz: float

    @property
    def magnitude(self) -> float:
        return float(np.sqrt(self.bx**2 + self.by**2 + self.bz**2))


def scalar_potential(z, cfg: LatticeConfig):
    """Scalar light shift U_J(z) = 2 U0 cos(theta_L) cos(2kz)."""
    return 2.0 * cfg.u0 * np.cos(cfg.theta_l) * np.cos(2.0 * cfg.k_laser * z)


def fictitious_field(z, cfg: LatticeConfig):
    """z-component Zeeman energy of the polarization-gradient field."""
    return -cfg.u0 * np.sin(cfg.theta_l) * np.sin(2.0 * cfg.k_laser * z)


def effective_field(z: float, cfg: LatticeConfig) -> FieldVector:
    """Total effective field (applied + fictitious) at position z."""
    return FieldVector(bx=cfg.bx, by=0.0, bz=float(fictitious_field(z, cfg)) + cfg.bz)


def field_components(z, cfg: LatticeConfig):
    """Vectorized (bx, bz) Zeeman-energy components at positions z."""
    z = np.asarray(z, dtype=float)
    bz = fictitious_field(z, cfg) + cfg.bz
    bx = np.full_like(bz, cfg.bx)
    return bx, bz


def field_magnitude(z, cfg: LatticeConfig):
    """|mu_B B_eff(z)| in E_R, vectorized over z."""
    bx, bz = field_components(z, cfg)
    return np.hypot(bx, bz)


@lru_cache(maxsize=32)
def spin_matrices(f_spin: float):
    """Angular-momentum matrices (Fx, Fy, Fz) for spin F, hbar = 1.

    Basis ordered m = F, F-1, ..., -F, so Fz = diag(F, ..., -F).
    Satisfies [Fx, Fy] = i Fz.
    """
    two_f = round(2.0 * f_spin)
    if f_spin < 0.5 or abs(2.0 * f_spin - two_f) > 1e-12:
        raise ValueError(f"invalid spin {f_spin}")
    dim = int(two_f) + 1
    m = f_spin - np.arange(dim)
    fz = np.diag(m).astype(complex)
    # F+ |m> = sqrt(F(F+1) - m(m+1)) |m+1>; with descending basis the
    # raising operator populates the superdiagonal.
    amp = np.sqrt(f_spin * (f_spin + 1.0) - m[1:] * (m[1:] + 1.0))
    fplus = np.zeros((dim, dim), dtype=complex)
    fplus[np.arange(dim - 1), np.arange(1, dim)] = amp
    fminus = fplus.conj().T
    fx = 0.5 * (fplus + fminus)
    fy = -0.5j * (fplus - fminus)
    for a in (fx, fy, fz):
        a.setflags(write=False)
    return fx, fy, fz


def magnetic_quantum_numbers(cfg: LatticeConfig) -> np.ndarray:
    """m_F values in basis order (F down to -F)."""
    return cfg.f_spin - np.arange(cfg.n_spin)


def potential_matrix(z: float, cfg: LatticeConfig) -> np.ndarray:
    """(2F+1) x (2F+1) Hermitian light-shift matrix at position z.

    U(z) = U_J(z) I - mu . B_eff(z) with mu = gyro_sign mu_B F/F, i.e.
    U = U_J I - (gyro_sign/F) (Fx bx + Fz bz).
    """
    fx, _, fz = spin_matrices(cfg.f_spin)
    field = effective_field(z, cfg)
    uj = float(scalar_potential(z, cfg))
    w = -cfg.gyro_sign / cfg.f_spin
    u = uj * np.eye(cfg.n_spin, dtype=complex) + w * (fx * field.bx + fz * field.bz)
    return u


def potential_matrices(z, cfg: LatticeConfig) -> np.ndarray:
    """Stack of potential matrices over an array of positions, shape (N, d, d)."""
    z = np.asarray(z, dtype=float)
    fx, _, fz = spin_matrices(cfg.f_spin)
    bx, bz = field_components(z, cfg)
    uj = scalar_potential(z, cfg)
    w = -cfg.gyro_sign / cfg.f_spin
    eye = np.eye(cfg.n_spin, dtype=complex)
    return (uj[:, None, None] * eye
            + w * (bx[:, None, None] * fx + bz[:, None, None] * fz))


def adiabatic_potentials(z: float, cfg: LatticeConfig) -> np.ndarray:
    """The 2F+1 adiabatic surfaces at z, sorted ascending.

    These are U_J(z) + (M/F) |mu_B B_eff(z)| for M = -F..F; the lowest
    surface (moment aligned with the local field) forms the double-well
    lattice in the experimental regime.
    """
    return adiabatic_surfaces(np.atleast_1d(np.asarray(z, dtype=float)), cfg)[0]


def adiabatic_surfaces(z, cfg: LatticeConfig) -> np.ndarray:
    """Vectorized adiabatic surfaces, shape (N, 2F+1), ascending per row."""
    z = np.asarray(z, dtype=float)
    uj = scalar_potential(z, cfg)
    bmag = field_magnitude(z, cfg)
    m_over_f = np.arange(-cfg.f_spin, cfg.f_spin + 0.5) / cfg.f_spin
    return uj[:, None] + bmag[:, None] * m_over_f[None, :]


def local_field_angle(z, cfg: LatticeConfig):
    """Polar angle of B_eff about +z (in the x-z plane), vectorized."""
    bx, bz = field_components(z, cfg)
    return np.arctan2(bx, bz)


def adiabatic_frame_rotations(z, cfg: LatticeConfig) -> np.ndarray:
    """Rotations D(z) = exp(-i theta_B(z) Fy) mapping the Fz eigenbasis
    onto the local-field eigenbasis, shape (N, d, d).

    Column M of D(z) is the spin state with F.B_hat eigenvalue m_M, so
    potential_matrix(z) = D (U_J + w |B| Fz) D^dagger with w = -gyro/F.
    """
    z = np.asarray(z, dtype=float)
    _, fy, _ = spin_matrices(cfg.f_spin)
    evals, evecs = np.linalg.eigh(fy)
    theta = local_field_angle(z, cfg)
    phases = np.exp(-1j * theta[:, None] * evals[None, :])
    return np.einsum("ab,nb,cb->nac", evecs, phases, evecs.conj())
