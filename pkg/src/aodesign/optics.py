"""Optical momentum surfaces of a uniaxial optically active crystal.

The two coupled eigenmodes are modeled through the composition of linear and
circular birefringence: dn_l(theta) = n_e(theta) - n_o (exact extraordinary
index), dn_c(theta) = rho_r * lambda / pi * cos^2(theta), total
dn = sqrt(dn_l^2 + dn_c^2).  The inner (ordinary-like) branch index is
nbar - dn/2 and the outer (extraordinary-like) branch nbar + dn/2 with
nbar = (n_o + n_e(theta)) / 2.  Ellipticity xi = dn_c / (dn + dn_l).

All directions are unit vectors in the crystal frame; theta is the polar
angle from the optic (z) axis.  The uniaxial surfaces are azimuthally
symmetric: indices depend on direction only through theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .materials import MaterialConstants, Z_AXIS

INNER = "inner"
OUTER = "outer"


class WavelengthRangeError(ValueError):
    """Requested wavelength is outside the tabulated dispersion range."""


def _interp_entry(material: MaterialConstants, wavelength_nm: float):
    lams = material.wavelengths()
    if not lams[0] <= wavelength_nm <= lams[-1]:
        raise WavelengthRangeError(
            f"{wavelength_nm} nm outside tabulated range "
            f"[{lams[0]}, {lams[-1]}] nm")
    n_o = np.interp(wavelength_nm, lams, [material.indices[l].n_o for l in lams])
    n_e = np.interp(wavelength_nm, lams, [material.indices[l].n_e for l in lams])
    rot = np.interp(wavelength_nm, lams,
                    [material.indices[l].rotatory_power for l in lams])
    return float(n_o), float(n_e), float(rot)


def principal_indices(material: MaterialConstants,
                      wavelength_nm: float) -> tuple[float, float]:
    n_o, n_e, _ = _interp_entry(material, wavelength_nm)
    return n_o, n_e


def rotatory_power(material: MaterialConstants, wavelength_nm: float) -> float:
    """Rotatory power in rad/m at the given wavelength."""
    return _interp_entry(material, wavelength_nm)[2]


def extraordinary_index(n_o: float, n_e: float, theta_rad) -> np.ndarray:
    c2 = np.cos(theta_rad) ** 2
    s2 = 1.0 - c2
    return 1.0 / np.sqrt(c2 / n_o**2 + s2 / n_e**2)


def birefringences(material: MaterialConstants, wavelength_nm: float,
                   theta_rad, small_angle: bool = False):
    """Linear, circular, and total birefringence at polar angle theta.

    ``small_angle=True`` swaps the exact n_e(theta) for the
    (n_e - n_o) sin^2(theta) approximation, for cross-checks.
    """
    n_o, n_e, rot = _interp_entry(material, wavelength_nm)
    theta = np.asarray(theta_rad, dtype=float)
    c2 = np.cos(theta) ** 2
    if small_angle:
        dn_l = (n_e - n_o) * (1.0 - c2)
    else:
        dn_l = extraordinary_index(n_o, n_e, theta) - n_o
    dn_c = rot * wavelength_nm * 1e-9 / math.pi * c2
    dn = np.hypot(dn_l, dn_c)
    return dn_l, dn_c, dn


def _theta_of(direction) -> float:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return math.acos(float(np.clip(abs(d @ Z_AXIS), 0.0, 1.0)))


def ellipticity(material: MaterialConstants, wavelength_nm: float,
                theta_rad) -> np.ndarray:
    """Unsigned eigenmode ellipticity xi = dn_c / (dn + dn_l)."""
    dn_l, dn_c, dn = birefringences(material, wavelength_nm, theta_rad)
    return dn_c / (dn + dn_l)


@dataclass(frozen=True)
class PolarizationState:
    """Elliptical eigenmode: signed ellipticity, major axis, handedness."""

    ellipticity: float
    major_axis: np.ndarray
    handedness: int

    def __post_init__(self):
        if abs(self.ellipticity) > 1.0 + 1e-12:
            raise ValueError("|ellipticity| must be <= 1")


def _transverse_basis(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(theta_hat, phi_hat): radial/meridional and circumferential unit vectors."""
    d = direction / np.linalg.norm(direction)
    z_cross = np.cross(Z_AXIS, d)
    n = np.linalg.norm(z_cross)
    if n < 1e-12:
        phi_hat = np.array([0.0, 1.0, 0.0])
    else:
        phi_hat = z_cross / n
    theta_hat = np.cross(phi_hat, d)
    return theta_hat, phi_hat


def eigen_polarizations(material: MaterialConstants, wavelength_nm: float,
                        direction) -> tuple[PolarizationState, PolarizationState]:
    """The two orthogonal elliptical eigenmodes for a propagation direction.

    The ordinary-like mode has a circumferential major axis, the
    extraordinary-like mode a radial one; ellipticities are equal in magnitude
    and opposite in sign (handedness).
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    theta = _theta_of(d)
    xi = float(ellipticity(material, wavelength_nm, theta))
    theta_hat, phi_hat = _transverse_basis(d)
    ordinary_like = PolarizationState(ellipticity=+xi, major_axis=phi_hat,
                                      handedness=+1)
    extraordinary_like = PolarizationState(ellipticity=-xi, major_axis=theta_hat,
                                           handedness=-1)
    return ordinary_like, extraordinary_like


def jones_vectors(material: MaterialConstants, wavelength_nm: float,
                  direction) -> tuple[np.ndarray, np.ndarray]:
    """Complex transverse Jones vectors of the two eigenmodes (3-vector form)."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    theta = _theta_of(d)
    xi = float(ellipticity(material, wavelength_nm, theta))
    theta_hat, phi_hat = _transverse_basis(d)
    norm = math.sqrt(1.0 + xi * xi)
    mode_o = (phi_hat + 1j * xi * theta_hat) / norm
    mode_e = (theta_hat + 1j * xi * phi_hat) / norm
    return mode_o, mode_e


def branch_index(material: MaterialConstants, wavelength_nm: float,
                 theta_rad, branch: str, activity: bool = True):
    """Refractive index of one branch at polar angle theta.

    With ``activity=False`` this reduces to the inactive uniaxial surfaces
    (inner -> n_o, outer -> n_e(theta)).
    """
    n_o, n_e, _ = _interp_entry(material, wavelength_nm)
    theta = np.asarray(theta_rad, dtype=float)
    ne_th = extraordinary_index(n_o, n_e, theta)
    if not activity:
        if branch == INNER:
            return np.full(theta.shape, n_o) if theta.ndim else float(n_o)
        if branch == OUTER:
            return ne_th
        raise ValueError(f"unknown branch {branch!r}")
    dn_l, dn_c, dn = birefringences(material, wavelength_nm, theta)
    nbar = 0.5 * (ne_th + n_o)
    if branch == INNER:
        return nbar - 0.5 * dn
    if branch == OUTER:
        return nbar + 0.5 * dn
    raise ValueError(f"unknown branch {branch!r}")


def index_with_activity(material: MaterialConstants, wavelength_nm: float,
                        theta_rad, branch: str) -> float:
    """Branch index including the optical-activity perturbation."""
    return branch_index(material, wavelength_nm, theta_rad, branch, activity=True)


def momentum_magnitude(material: MaterialConstants, wavelength_nm: float,
                       theta_rad, branch: str, activity: bool = True):
    """|k| in rad/mm for one branch (wavelength in nm -> 1e-6 mm)."""
    n = branch_index(material, wavelength_nm, theta_rad, branch, activity)
    return 2.0e6 * math.pi * np.asarray(n) / wavelength_nm


def index_from_momentum(k_rad_per_mm, wavelength_nm: float):
    """Invert momentum magnitude back to a refractive index."""
    return np.asarray(k_rad_per_mm) * wavelength_nm / (2.0e6 * math.pi)


def activity_curve_rows(material: MaterialConstants, wavelength_nm: float,
                        theta_deg: np.ndarray) -> list[dict]:
    """Rows for the ellipticity / index-difference CSV export."""
    rows = []
    for th in np.atleast_1d(theta_deg):
        t = math.radians(float(th))
        dn_l, dn_c, _ = birefringences(material, wavelength_nm, t)
        xi = float(ellipticity(material, wavelength_nm, t))
        n_o_act = branch_index(material, wavelength_nm, t, INNER, activity=True)
        n_o_ref = branch_index(material, wavelength_nm, t, INNER, activity=False)
        n_e_act = branch_index(material, wavelength_nm, t, OUTER, activity=True)
        n_e_ref = branch_index(material, wavelength_nm, t, OUTER, activity=False)
        rows.append({"theta_deg": float(th), "xi": xi,
                     "dn_l": float(dn_l), "dn_c": float(dn_c),
                     "n_o_act_minus_n_o": float(n_o_act - n_o_ref),
                     "n_e_act_minus_n_e": float(n_e_act - n_e_ref)})
    return rows
