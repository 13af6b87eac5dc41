"""Crystal acoustic model: Christoffel eigenproblem, slowness surfaces, walk-off,
curvature, and acoustic attenuation.

Conventions
-----------
* Stiffness and photoelastic tensors are stored in reduced 6x6 (Voigt) form and
  expanded to rank 4 on use.  Stiffness in Pa, density in kg/m^3.
* Velocities are returned in mm/us (1 mm/us = 1000 m/s).
* Directions are 3-vectors in the crystal frame (x, y along the tetragonal
  a axes, z along the optic axis).
* Attenuation coefficient alpha0 in dB/us/GHz^2 acting on acoustic power.

Default constants are the widely used paratellurite set of Ohmachi & Uchida
(J. Appl. Phys. 41, 2307 (1970)); refractive indices and rotatory power come
from the Uchida dispersion measurements (Phys. Rev. B 4, 3736 (1971)), with
rotatory dispersion extrapolated by a single-pole fit anchored at the
86.9 deg/mm value measured at 633 nm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])
AXIS_110 = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
AXIS_1B10 = np.array([-1.0, 1.0, 0.0]) / math.sqrt(2.0)

# Voigt index pairs: (i, j) tensor -> reduced index
_VOIGT = {(0, 0): 0, (1, 1): 1, (2, 2): 2,
          (1, 2): 3, (2, 1): 3, (0, 2): 4, (2, 0): 4, (0, 1): 5, (1, 0): 5}

BRANCH_NAMES = ("slow_shear", "fast_shear", "longitudinal")


class InvalidMaterialError(ValueError):
    """Material constants violate a structural invariant."""


class IllConditionedCurvatureError(RuntimeError):
    """Curvature fit requested at or near an acoustic branch degeneracy."""


@dataclass(frozen=True)
class IndexEntry:
    """Refractive data for one tabulated wavelength."""

    n_o: float
    n_e: float
    rotatory_power: float  # rad/m


@dataclass(frozen=True)
class MaterialConstants:
    """Immutable single-crystal constants.

    ``stiffness`` and ``photoelastic`` are reduced 6x6 matrices; ``indices``
    maps wavelength in nm to an :class:`IndexEntry`.
    """

    name: str
    stiffness: np.ndarray          # 6x6, Pa
    photoelastic: np.ndarray       # 6x6, dimensionless
    density: float                 # kg/m^3
    indices: dict[float, IndexEntry]
    attenuation_coeff: float       # dB/us/GHz^2
    effective_photoelastic: float  # scalar used by the efficiency formula

    def __post_init__(self):
        stiff = np.asarray(self.stiffness, dtype=float)
        if stiff.shape != (6, 6):
            raise InvalidMaterialError("stiffness must be a 6x6 matrix")
        if not np.allclose(stiff, stiff.T, rtol=0.0, atol=1e-3):
            raise InvalidMaterialError("stiffness matrix must be symmetric")
        if np.linalg.eigvalsh(stiff).min() <= 0.0:
            raise InvalidMaterialError("stiffness matrix must be positive definite")
        if self.density <= 0.0:
            raise InvalidMaterialError("density must be positive")
        if self.attenuation_coeff < 0.0:
            raise InvalidMaterialError("attenuation coefficient must be >= 0")
        for lam, entry in self.indices.items():
            if not entry.n_e > entry.n_o > 1.0:
                raise InvalidMaterialError(
                    f"need n_e > n_o > 1 at {lam} nm (positive uniaxial)")
        object.__setattr__(self, "stiffness", stiff)
        object.__setattr__(self, "photoelastic",
                           np.asarray(self.photoelastic, dtype=float))
        object.__setattr__(self, "_rank4", _expand_voigt(stiff))

    @property
    def stiffness_rank4(self) -> np.ndarray:
        return self._rank4

    def wavelengths(self) -> list[float]:
        return sorted(self.indices)


@dataclass(frozen=True)
class AcousticMode:
    """One acoustic eigenmode for a fixed propagation direction.

    ``walkoff_angle`` is the angle between the group velocity (slowness-surface
    normal) and the phase propagation direction, in degrees.  The curvature
    coefficients are the quadratic excess-curvature factors of the slowness
    surface relative to an isotropic medium: ``curvature_in_plane`` for tilts
    in the meridional plane (containing the direction and the z axis) and
    ``curvature_out_of_plane`` for azimuthal tilts.
    """

    direction: np.ndarray
    branch: str
    velocity: float                # mm/us
    polarization: np.ndarray       # unit vector
    walkoff_angle: float           # degrees
    curvature_in_plane: float | None = None
    curvature_out_of_plane: float | None = None
    group_direction: np.ndarray = field(default=None, repr=False)


def _expand_voigt(reduced: np.ndarray) -> np.ndarray:
    full = np.empty((3, 3, 3, 3))
    for (i, j), p in _VOIGT.items():
        for (k, l), q in _VOIGT.items():
            full[i, j, k, l] = reduced[p, q]
    return full


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero direction vector")
    return v / n


def christoffel_matrix(material: MaterialConstants, direction) -> np.ndarray:
    n = _unit(direction)
    c4 = material.stiffness_rank4
    return np.einsum("ijkl,j,l->ik", c4, n, n) / material.density


def group_velocity(material: MaterialConstants, direction,
                   polarization, velocity_mm_us: float) -> np.ndarray:
    """Group velocity vector (mm/us) from the eigenpair of one branch."""
    n = _unit(direction)
    u = _unit(polarization)
    v_ms = velocity_mm_us * 1e3
    vg = np.einsum("ijkl,j,k,l->i", material.stiffness_rank4, u, u, n)
    return vg / (material.density * v_ms) / 1e3


def solve_christoffel(material: MaterialConstants, direction,
                      with_curvature: bool = False) -> list[AcousticMode]:
    """Solve the acoustic eigenproblem for one propagation direction.

    Returns the three modes sorted by velocity; the slowest is labeled
    ``slow_shear``.  Velocity ties (symmetry-forced degeneracies) are broken
    by polarization overlap with [-110].
    """
    n = _unit(direction)
    gamma = christoffel_matrix(material, n)
    evals, evecs = np.linalg.eigh(gamma)
    if evals[0] <= 0.0:
        raise InvalidMaterialError("non-positive acoustic eigenvalue")
    order = list(range(3))
    # eigh returns ascending eigenvalues; refine tie order by [-110] overlap
    for a in range(2):
        if math.isclose(evals[order[a]], evals[order[a + 1]], rel_tol=1e-9):
            ov_a = abs(evecs[:, order[a]] @ AXIS_1B10)
            ov_b = abs(evecs[:, order[a + 1]] @ AXIS_1B10)
            if ov_b > ov_a:
                order[a], order[a + 1] = order[a + 1], order[a]
    modes = []
    for rank, idx in enumerate(order):
        vel = math.sqrt(evals[idx]) / 1e3  # mm/us
        pol = evecs[:, idx]
        vg = group_velocity(material, n, pol, vel)
        vg_hat = vg / np.linalg.norm(vg)
        transverse = vg_hat - (vg_hat @ n) * n
        walkoff = math.degrees(math.atan2(float(np.linalg.norm(transverse)),
                                          float(vg_hat @ n)))
        b_in = b_out = None
        if with_curvature:
            try:
                _, b_in, b_out = walkoff_and_curvature(
                    material, n, BRANCH_NAMES[rank])
            except IllConditionedCurvatureError:
                b_in = b_out = float("nan")
        modes.append(AcousticMode(direction=n, branch=BRANCH_NAMES[rank],
                                  velocity=vel, polarization=pol,
                                  walkoff_angle=walkoff,
                                  curvature_in_plane=b_in,
                                  curvature_out_of_plane=b_out,
                                  group_direction=vg_hat))
    return modes


def slow_shear_mode(material: MaterialConstants, direction) -> AcousticMode:
    return solve_christoffel(material, direction)[0]


def _branch_index(branch: str) -> int:
    try:
        return BRANCH_NAMES.index(branch)
    except ValueError:
        raise ValueError(f"unknown branch {branch!r}; expected one of {BRANCH_NAMES}")


def _tilt_frame(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Meridional and azimuthal tilt directions for a propagation direction."""
    n = _unit(direction)
    if abs(abs(n @ Z_AXIS) - 1.0) < 1e-12:
        # on the optic axis the meridional plane is arbitrary
        merid = X_AXIS - (X_AXIS @ n) * n
    else:
        merid = Z_AXIS - (Z_AXIS @ n) * n
    merid = merid / np.linalg.norm(merid)
    azim = np.cross(n, merid)
    return merid, azim


def _branch_velocity_trace(material: MaterialConstants, direction: np.ndarray,
                           tilt_dir: np.ndarray, branch_idx: int,
                           deltas: np.ndarray) -> np.ndarray:
    """Velocity of one branch along a tilt fan, tracked by polarization overlap."""
    n0 = _unit(direction)
    ref_pol = None
    vels = np.empty_like(deltas)
    modes0 = solve_christoffel(material, n0)
    ref_pol = modes0[branch_idx].polarization
    v_all0 = np.array([m.velocity for m in modes0])
    gaps = np.diff(v_all0)
    if gaps.min() < 1e-6 * v_all0.max():
        raise IllConditionedCurvatureError(
            "acoustic branches degenerate at this direction")
    for i, d in enumerate(deltas):
        nd = math.cos(d) * n0 + math.sin(d) * tilt_dir
        gamma = christoffel_matrix(material, nd)
        evals, evecs = np.linalg.eigh(gamma)
        overlaps = np.abs(ref_pol @ evecs)
        j = int(np.argmax(overlaps))
        if overlaps[j] < 0.7:
            raise IllConditionedCurvatureError(
                "branch tracking lost (mode crossing within fit stencil)")
        vels[i] = math.sqrt(evals[j]) / 1e3
    return vels


def _quadratic_curvature(deltas: np.ndarray, vels: np.ndarray) -> float:
    coeffs = np.polyfit(deltas, vels, 2)
    v0 = float(np.polyval(coeffs, 0.0))
    return 1.0 + 2.0 * float(coeffs[0]) / v0


def walkoff_and_curvature(material: MaterialConstants, direction,
                          branch: str = "slow_shear",
                          stencil_deg: float = 0.5,
                          points: int = 11) -> tuple[float, float, float]:
    """Walk-off angle and excess slowness-surface curvatures for one branch.

    Returns ``(psi_deg, b_in_plane, b_out_of_plane)`` where psi is the angle
    between the group velocity and the phase direction, and the b factors are
    ``1 + V''/V`` from a local quadratic least-squares fit of the phase
    velocity over ``+-stencil_deg``.
    """
    n = _unit(direction)
    idx = _branch_index(branch)
    mode = solve_christoffel(material, n)[idx]
    merid, azim = _tilt_frame(n)
    deltas = np.deg2rad(np.linspace(-stencil_deg, stencil_deg, points))
    b_in = _quadratic_curvature(
        deltas, _branch_velocity_trace(material, n, merid, idx, deltas))
    b_out = _quadratic_curvature(
        deltas, _branch_velocity_trace(material, n, azim, idx, deltas))
    return mode.walkoff_angle, b_in, b_out


def walkoff_from_axis(material: MaterialConstants, direction,
                      branch: str = "slow_shear",
                      axis=AXIS_110) -> float:
    """Angle in degrees between the group velocity and a reference crystal axis.

    This is the beam-steer figure used for crystal sizing: for a transducer
    rotated away from [110] the acoustic energy walks relative to the crystal
    faces, not relative to the (rotated) phase direction.
    """
    idx = _branch_index(branch)
    mode = solve_christoffel(material, direction)[idx]
    a = _unit(axis)
    return math.degrees(math.acos(float(np.clip(mode.group_direction @ a, -1, 1))))


def acoustic_attenuation(material: MaterialConstants, f_mhz, t_us):
    """Linear amplitude factor 10^(-alpha0 f^2 t / 20) for f in MHz, t in us."""
    f = np.asarray(f_mhz, dtype=float)
    t = np.asarray(t_us, dtype=float)
    if np.any(f < 0.0) or np.any(t < 0.0):
        raise ValueError("frequency and time must be non-negative")
    db = material.attenuation_coeff * (f / 1e3) ** 2 * t
    out = 10.0 ** (-db / 20.0)
    return float(out) if out.ndim == 0 else out


def attenuation_db_per_us(material: MaterialConstants, f_mhz: float) -> float:
    return material.attenuation_coeff * (f_mhz / 1e3) ** 2


def slowness_sweep(material: MaterialConstants,
                   theta_deg: np.ndarray, phi_deg: np.ndarray) -> list[dict]:
    """Spherical sweep of all three branches.

    theta is the polar angle from the z axis and phi the azimuth from x.
    Returns one row dict per (theta, phi, branch).
    """
    rows = []
    for th in np.atleast_1d(theta_deg):
        for ph in np.atleast_1d(phi_deg):
            t, p = math.radians(th), math.radians(ph)
            d = np.array([math.sin(t) * math.cos(p),
                          math.sin(t) * math.sin(p),
                          math.cos(t)])
            for mode in solve_christoffel(material, d):
                rows.append({"theta_deg": float(th), "phi_deg": float(ph),
                             "branch": mode.branch,
                             "velocity_mm_per_us": mode.velocity,
                             "walkoff_deg": mode.walkoff_angle})
    return rows


def _teo2_stiffness() -> np.ndarray:
    c = np.zeros((6, 6))
    c[0, 0] = c[1, 1] = 5.57e10
    c[2, 2] = 10.58e10
    c[0, 1] = c[1, 0] = 5.12e10
    c[0, 2] = c[2, 0] = c[1, 2] = c[2, 1] = 2.18e10
    c[3, 3] = c[4, 4] = 2.65e10
    c[5, 5] = 6.59e10
    return c


def _teo2_photoelastic() -> np.ndarray:
    p = np.zeros((6, 6))
    p[0, 0] = p[1, 1] = 0.0074
    p[0, 1] = p[1, 0] = 0.187
    p[0, 2] = p[1, 2] = 0.340
    p[2, 0] = p[2, 1] = 0.0905
    p[2, 2] = 0.240
    p[3, 3] = p[4, 4] = -0.17
    p[5, 5] = -0.0463
    return p


# Index tables: Sellmeier fits evaluated at the supported wavelengths; rotatory
# power from a single-pole dispersion model anchored at 86.9 deg/mm (633 nm).
_TEO2_INDICES = {
    476.0: IndexEntry(2.340303, 2.507410, 3196.41),
    480.0: IndexEntry(2.336836, 2.503322, 3120.40),
    532.0: IndexEntry(2.300835, 2.460912, 2351.04),
    633.0: IndexEntry(2.259599, 2.412442, 1515.53),
    780.0: IndexEntry(2.229183, 2.376780, 931.29),
    785.0: IndexEntry(2.228472, 2.375947, 917.96),
}


def teo2(**overrides) -> MaterialConstants:
    """Default TeO2 (paratellurite) constants; keyword overrides replace fields."""
    kwargs = dict(
        name="TeO2",
        stiffness=_teo2_stiffness(),
        photoelastic=_teo2_photoelastic(),
        density=5990.0,
        indices=dict(_TEO2_INDICES),
        attenuation_coeff=18.0,
        effective_photoelastic=0.09,
    )
    kwargs.update(overrides)
    return MaterialConstants(**kwargs)
