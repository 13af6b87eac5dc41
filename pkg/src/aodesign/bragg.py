"""Momentum-space phase-matching solver.

Geometry
--------
The interaction plane is spanned by the acoustic symmetry axis [110] (e1) and
the device optical axis u3, which is the crystal z axis rotated by the
optical rotation phi_o about e1 (a tilt toward [-110]).  The acoustic
wavevector-sum direction is e1 tilted by the acoustic rotation phi_a within
the plane, away from u3:

    u3   = cos(phi_o) * e3 - sin(phi_o) * e2
    K^   = cos(phi_a) * e1 - sin(phi_a) * u3

With this tilt sign the tangentially diffracted beam emerges at +phi_a from
the device axis (bands in the angular domain are centered on the acoustic
rotation angle).  The Doppler sign only selects the up- or down-shifting twin
device (reversed acoustic propagation); both twins share the same matching
triangle, so matching solutions are independent of it.

In-plane directions are parametrized by gamma, the angle from u3 toward e1.
Internal angles are radians; degrees appear only in ``DeviceGeometry`` and
exported artifacts.  Wavevectors are rad/mm and frequencies MHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from . import optics
from .materials import (AXIS_110, AXIS_1B10, MaterialConstants, Z_AXIS,
                        slow_shear_mode)
from .transducer import TransducerSpec

MIN_FREQ_MHZ = 10.0
MAX_FREQ_MHZ = 500.0
CLOSURE_REL_TOL = 1e-6  # momentum-closure residual, relative to |k_i|

E1 = AXIS_110
E2 = AXIS_1B10
E3 = Z_AXIS


class NoTangencyError(RuntimeError):
    """No tangential matching solution exists for this geometry."""


class InfeasiblePrismError(RuntimeError):
    """Required prism wedge exceeds the fabrication bound."""


@dataclass(frozen=True)
class DeviceGeometry:
    """Device orientation and aperture description (angles in degrees)."""

    optical_rotation: float
    acoustic_rotation: float
    doppler_sign: int = +1
    aperture_length: float = 10.0          # mm
    transducer: TransducerSpec | None = None
    prism_front: float | None = None       # deg, filled by prism_cut
    prism_exit: float | None = None

    def __post_init__(self):
        if abs(self.optical_rotation) > 20.0:
            raise ValueError("optical rotation limited to +-20 deg")
        if abs(self.acoustic_rotation) > 10.0:
            raise ValueError("acoustic rotation limited to +-10 deg")
        if self.doppler_sign not in (+1, -1):
            raise ValueError("doppler_sign must be +1 or -1")
        if self.aperture_length <= 0.0:
            raise ValueError("aperture length must be positive")

    def with_prism(self, front: float, exit_: float) -> "DeviceGeometry":
        return replace(self, prism_front=front, prism_exit=exit_)


@dataclass(frozen=True)
class MatchSolution:
    """Tangential phase-matching solution for one wavelength."""

    f_tangential: float              # MHz
    incidence_angle_internal: float  # deg, from u3 toward e1
    diffraction_angle_internal: float
    K_a: float                       # rad/mm
    branch_in: str = optics.OUTER
    branch_out: str = optics.INNER


class PlaneFrame:
    """Cached in-plane frame and acoustic data for one (geometry, material).

    Rotation signs select mirror-image devices; for the tetragonal crystal
    model every sign combination is symmetry-equivalent, so the internal
    frame canonicalizes to the rotation magnitudes.
    """

    def __init__(self, geometry: DeviceGeometry, material: MaterialConstants):
        self.geometry = geometry
        self.material = material
        phi_o = math.radians(abs(geometry.optical_rotation))
        phi_a = math.radians(abs(geometry.acoustic_rotation))
        self.u3 = math.cos(phi_o) * E3 - math.sin(phi_o) * E2
        self.k_hat = math.cos(phi_a) * E1 - math.sin(phi_a) * self.u3
        mode = slow_shear_mode(material, self.k_hat)
        self.acoustic_mode = mode
        self.velocity = mode.velocity  # mm/us

    def direction(self, gamma):
        """In-plane unit direction(s) at angle gamma (rad) from u3 toward e1."""
        gamma = np.asarray(gamma, dtype=float)
        return (np.sin(gamma)[..., None] * E1
                + np.cos(gamma)[..., None] * self.u3)

    def gamma_of(self, vec: np.ndarray):
        return np.arctan2(vec @ E1, vec @ self.u3)

    def branch_k(self, wavelength_nm: float, vec: np.ndarray, branch: str):
        """|k| on a branch for the direction(s) of in-plane vector(s)."""
        v = np.asarray(vec, dtype=float)
        norm = np.linalg.norm(v, axis=-1, keepdims=True)
        cos_t = np.clip(np.abs((v / norm) @ E3), 0.0, 1.0)
        theta = np.arccos(cos_t)
        return optics.momentum_magnitude(self.material, wavelength_nm,
                                         theta, branch)

    def incident_k(self, wavelength_nm: float, alpha: float) -> np.ndarray:
        d = self.direction(alpha)
        return self.branch_k(wavelength_nm, d, optics.OUTER) * d

    def acoustic_k(self, f_mhz):
        return 2.0 * math.pi * np.asarray(f_mhz, dtype=float) / self.velocity

    def mismatch(self, wavelength_nm: float, alpha: float, f_mhz):
        """Radial closure defect |k_i + K_a| - k_inner, rad/mm (vector over f)."""
        f = np.atleast_1d(np.asarray(f_mhz, dtype=float))
        tips = (self.incident_k(wavelength_nm, alpha)[None, :]
                + self.acoustic_k(f)[:, None] * self.k_hat[None, :])
        mag = np.linalg.norm(tips, axis=-1)
        return mag - self.branch_k(wavelength_nm, tips, optics.INNER)

    def mismatch_scalar(self, wavelength_nm: float, alpha: float,
                        f_mhz: float) -> float:
        return float(self.mismatch(wavelength_nm, alpha, [f_mhz])[0])

    def surface_intersection(self, wavelength_nm: float, tips: np.ndarray,
                             branch: str = optics.INNER,
                             max_iter: int = 40) -> np.ndarray:
        """Signed distance along u3 from each tip to the branch surface.

        Newton iteration on |tip + d*u3| = k_branch; rows that fail to
        converge (tip beyond the surface reach) return NaN.
        """
        d = np.zeros(tips.shape[0])
        ok = np.ones(tips.shape[0], dtype=bool)
        for _ in range(max_iter):
            pts = tips + d[:, None] * self.u3[None, :]
            mag = np.linalg.norm(pts, axis=-1)
            res = mag - self.branch_k(wavelength_nm, pts, branch)
            slope = (pts / mag[:, None]) @ self.u3
            small = np.abs(slope) < 1e-3
            ok &= ~small
            slope = np.where(small, 1.0, slope)
            step = res / slope
            d = d - np.where(ok, step, 0.0)
            if np.max(np.abs(step[ok]), initial=0.0) < 1e-12:
                break
        else:
            pts = tips + d[:, None] * self.u3[None, :]
            res = (np.linalg.norm(pts, axis=-1)
                   - self.branch_k(wavelength_nm, pts, branch))
            ok &= np.abs(res) < 1e-6
        return np.where(ok, d, np.nan)


def _min_mismatch(frame: PlaneFrame, wavelength_nm: float, alpha: float,
                  f_lo: float = MIN_FREQ_MHZ, f_hi: float = MAX_FREQ_MHZ,
                  coarse_mhz: float = 0.5) -> tuple[float, float]:
    """Frequency and value of the minimum mismatch over [f_lo, f_hi]."""
    grid = np.arange(f_lo, f_hi, coarse_mhz)
    vals = frame.mismatch(wavelength_nm, alpha, grid)
    i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    for _ in range(60):
        c = a + (b - a) * 0.38196601125010515
        d = b - (b - a) * 0.38196601125010515
        if (frame.mismatch_scalar(wavelength_nm, alpha, c)
                < frame.mismatch_scalar(wavelength_nm, alpha, d)):
            b = d
        else:
            a = c
        if b - a < 1e-10:
            break
    f_min = 0.5 * (a + b)
    return f_min, frame.mismatch_scalar(wavelength_nm, alpha, f_min)


def tangential_match(geometry: DeviceGeometry, material: MaterialConstants,
                     wavelength_nm: float,
                     frame: PlaneFrame | None = None) -> MatchSolution:
    """Find the tangential matching frequency and incidence angle.

    Locates the incidence angle where the minimum of the mismatch-versus-
    frequency curve is exactly zero (a double closure root).  Among multiple
    tangencies the near-axis design branch (smallest frequency) is returned.
    """
    frame = frame or PlaneFrame(geometry, material)
    alphas = np.deg2rad(np.linspace(-8.0, 8.0, 33))
    scan = [_min_mismatch(frame, wavelength_nm, a) for a in alphas]
    vals = np.array([v for _, v in scan])
    crossings = np.where(np.diff(np.sign(vals)) != 0)[0]
    if len(crossings) == 0:
        raise NoTangencyError(
            f"no tangential solution in {MIN_FREQ_MHZ}-{MAX_FREQ_MHZ} MHz "
            f"for lambda={wavelength_nm} nm")
    candidates = []
    for i in crossings:
        lo, hi = alphas[i], alphas[i + 1]
        v_lo = vals[i]
        f_hint = scan[i][0]
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            f_hint, v = _min_mismatch(frame, wavelength_nm, mid,
                                      max(f_hint - 30.0, MIN_FREQ_MHZ),
                                      f_hint + 30.0, coarse_mhz=0.25)
            if math.copysign(1.0, v) == math.copysign(1.0, v_lo):
                lo = mid
            else:
                hi = mid
        alpha = 0.5 * (lo + hi)
        f_t, resid = _min_mismatch(frame, wavelength_nm, alpha,
                                   max(f_hint - 30.0, MIN_FREQ_MHZ),
                                   f_hint + 30.0, coarse_mhz=0.25)
        if f_t <= MIN_FREQ_MHZ + 0.5 or f_t >= MAX_FREQ_MHZ - 0.5:
            continue  # boundary minimum, not a true interior double root
        candidates.append((f_t, alpha, resid))
    if not candidates:
        raise NoTangencyError(
            f"no interior tangency in {MIN_FREQ_MHZ}-{MAX_FREQ_MHZ} MHz "
            f"for lambda={wavelength_nm} nm")
    candidates.sort()
    f_t, alpha, resid = candidates[0]
    k_i = frame.incident_k(wavelength_nm, alpha)
    if abs(resid) > CLOSURE_REL_TOL * np.linalg.norm(k_i):
        raise NoTangencyError("tangency refinement failed to converge")
    tip = k_i + frame.acoustic_k(f_t) * frame.k_hat
    gamma_d = float(frame.gamma_of(tip))
    return MatchSolution(f_tangential=f_t,
                         incidence_angle_internal=math.degrees(alpha),
                         diffraction_angle_internal=math.degrees(gamma_d),
                         K_a=float(frame.acoustic_k(f_t)))


def bragg_frequency_at_angle(geometry: DeviceGeometry,
                             material: MaterialConstants,
                             wavelength_nm: float, incidence_angle_deg: float,
                             f_lo: float = MIN_FREQ_MHZ,
                             f_hi: float = MAX_FREQ_MHZ,
                             frame: PlaneFrame | None = None) -> list[float]:
    """Exact momentum-closure frequencies at a fixed incidence angle.

    Returns zero, one, or two roots; a tangential incidence has a double
    root reported once.
    """
    frame = frame or PlaneFrame(geometry, material)
    alpha = math.radians(incidence_angle_deg)
    grid = np.arange(f_lo, f_hi, 0.25)
    vals = frame.mismatch(wavelength_nm, alpha, grid)
    roots = []
    for i in np.where(np.diff(np.sign(vals)) != 0)[0]:
        root = brentq(lambda f: frame.mismatch_scalar(wavelength_nm, alpha, f),
                      grid[i], grid[i + 1], xtol=1e-10)
        # a grazing double root can register as two crossings a hair apart
        if not roots or root - roots[-1] > 1e-3:
            roots.append(float(root))
    if not roots:
        # double root at tangency never crosses zero; detect by magnitude
        f_min, v_min = _min_mismatch(frame, wavelength_nm, alpha, f_lo, f_hi)
        k_mag = float(np.linalg.norm(frame.incident_k(wavelength_nm, alpha)))
        if abs(v_min) <= CLOSURE_REL_TOL * k_mag:
            roots = [f_min]
    return roots


@dataclass(frozen=True)
class Degeneracy:
    frequency: float    # MHz
    kind: str           # "midband" or "rediffraction"
    in_band: bool


MIDBAND_TOL_MHZ = 1.0


def find_degeneracies(geometry: DeviceGeometry, material: MaterialConstants,
                      wavelength_nm: float, incidence_angle_deg: float,
                      f_range: tuple[float, float],
                      usable_band: tuple[float, float] | None = None,
                      f_tangential: float | None = None,
                      frame: PlaneFrame | None = None,
                      grid_mhz: float = 0.1) -> list[Degeneracy]:
    """Frequencies where once-diffracted light re-closes inner -> outer.

    For each drive frequency the once-diffracted state is the inner-surface
    point nearest the closure tip; adding the same acoustic wavevector again
    and testing outer-surface closure yields the degenerate double-diffraction
    residual.  Roots at the band center are tagged ``midband`` (the symmetric
    second-order condition), all others ``rediffraction``.
    """
    frame = frame or PlaneFrame(geometry, material)
    alpha = math.radians(incidence_angle_deg)
    f = np.arange(f_range[0], f_range[1], grid_mhz)
    k_i = frame.incident_k(wavelength_nm, alpha)
    ka = frame.acoustic_k(f)
    tips = k_i[None, :] + ka[:, None] * frame.k_hat[None, :]
    delta = frame.surface_intersection(wavelength_nm, tips, optics.INNER)
    k_d = tips + delta[:, None] * frame.u3[None, :]
    tips2 = k_d + ka[:, None] * frame.k_hat[None, :]
    res2 = (np.linalg.norm(tips2, axis=-1)
            - frame.branch_k(wavelength_nm, tips2, optics.OUTER))
    res2 = np.where(np.isnan(delta), np.nan, res2)
    if f_tangential is None:
        try:
            f_tangential = tangential_match(
                geometry, material, wavelength_nm, frame).f_tangential
        except NoTangencyError:
            f_tangential = math.nan
    found = []
    finite = np.isfinite(res2)
    for i in np.where(np.diff(np.sign(res2)) != 0)[0]:
        if not (finite[i] and finite[i + 1]):
            continue
        x0, x1, y0, y1 = f[i], f[i + 1], res2[i], res2[i + 1]
        root = x0 - y0 * (x1 - x0) / (y1 - y0)
        kind = ("midband"
                if math.isfinite(f_tangential)
                and abs(root - f_tangential) <= MIDBAND_TOL_MHZ
                else "rediffraction")
        in_band = bool(usable_band
                       and usable_band[0] <= root <= usable_band[1])
        found.append(Degeneracy(frequency=float(root), kind=kind,
                                in_band=in_band))
    return found


def closure_residual(geometry: DeviceGeometry, material: MaterialConstants,
                     wavelength_nm: float, incidence_angle_deg: float,
                     f_mhz: float) -> float:
    """Momentum-closure residual (rad/mm) for direct verification."""
    frame = PlaneFrame(geometry, material)
    return frame.mismatch_scalar(wavelength_nm,
                                 math.radians(incidence_angle_deg), f_mhz)


def _snell_external(wedge_rad: float, alpha_internal: float, n: float) -> float:
    """External angle from u3 for a ray at internal angle alpha through a face
    whose normal is tilted by wedge_rad from u3 (toward e1).  All in-plane."""
    s = n * math.sin(alpha_internal + wedge_rad)
    if abs(s) >= 1.0:
        raise InfeasiblePrismError("total internal reflection at prism face")
    return math.asin(s) - wedge_rad


@dataclass(frozen=True)
class PrismCut:
    """Prism design: face tilts and the headline crystal wedge angle.

    ``front_wedge`` is the full prism angle between the entrance and exit
    faces (what the fabricator cuts); ``front_face_tilt`` and
    ``exit_face_tilt`` are each face's tilt from the nominal face normal u3.
    """

    front_wedge: float       # deg
    exit_wedge: float        # deg (exit face tilt)
    front_face_tilt: float   # deg
    external_input_angle: float   # deg, shared collinear input direction
    external_output_angles: tuple[float, float]  # deg per wavelength


def prism_cut(geometry: DeviceGeometry, material: MaterialConstants,
              wavelength_red_nm: float, wavelength_blue_nm: float,
              incidence_red_deg: float | None = None,
              incidence_blue_deg: float | None = None,
              max_wedge_deg: float = 45.0) -> PrismCut:
    """Design the entrance/exit prism faces for two-color operation.

    The entrance face tilt is solved so one collinear external input refracts
    into each wavelength's Bragg incidence angle (outer-branch indices in
    Snell's law).  The exit face is tilted to be normal to the common midband
    diffracted direction so both colors leave undeviated.  The headline
    prism angle is the wedge between the two faces.
    """
    frame_cache: dict[float, PlaneFrame] = {}

    def frame_for(lam):
        if lam not in frame_cache:
            frame_cache[lam] = PlaneFrame(geometry, material)
        return frame_cache[lam]

    sols = {}
    for lam, inc in ((wavelength_red_nm, incidence_red_deg),
                     (wavelength_blue_nm, incidence_blue_deg)):
        sol = tangential_match(geometry, material, lam, frame_for(lam))
        alpha = math.radians(inc) if inc is not None \
            else math.radians(sol.incidence_angle_internal)
        sols[lam] = (alpha, sol)

    def n_outer(lam, alpha):
        frame = frame_for(lam)
        d = frame.direction(alpha)
        return float(frame.branch_k(lam, d, optics.OUTER)
                     * lam / (2.0e6 * math.pi))

    a_r, sol_r = sols[wavelength_red_nm]
    a_b, sol_b = sols[wavelength_blue_nm]
    n_r = n_outer(wavelength_red_nm, a_r)
    n_b = n_outer(wavelength_blue_nm, a_b)

    # exit face: normal to the mean midband diffracted direction
    gamma_d = 0.5 * (math.radians(sol_r.diffraction_angle_internal)
                     + math.radians(sol_b.diffraction_angle_internal))
    exit_tilt = gamma_d

    degenerate = (abs(wavelength_red_nm - wavelength_blue_nm) < 1e-9
                  and abs(a_r - a_b) < 1e-12)
    if degenerate:
        # one condition left: align the external input with the exit direction
        def objective(w):
            return _snell_external(w, a_r, n_r) - gamma_d
    else:
        def objective(w):
            return (_snell_external(w, a_r, n_r)
                    - _snell_external(w, a_b, n_b))

    w_max = math.radians(max_wedge_deg)
    grid = np.linspace(-w_max, w_max, 721)
    vals = []
    for w in grid:
        try:
            vals.append(objective(w))
        except InfeasiblePrismError:
            vals.append(math.nan)
    vals = np.array(vals)
    roots = []
    for i in np.where(np.diff(np.sign(vals)) != 0)[0]:
        if not (np.isfinite(vals[i]) and np.isfinite(vals[i + 1])):
            continue
        roots.append(brentq(objective, grid[i], grid[i + 1], xtol=1e-12))
    if not roots:
        raise InfeasiblePrismError(
            f"no entrance wedge below {max_wedge_deg} deg reconciles the "
            "two Bragg angles")
    front_tilt = min(roots, key=abs)
    external = _snell_external(front_tilt, a_r, n_r)
    prism_angle = front_tilt + exit_tilt
    if abs(math.degrees(prism_angle)) > max_wedge_deg:
        raise InfeasiblePrismError("prism angle exceeds fabrication bound")

    def exit_external(lam, sol):
        frame = frame_for(lam)
        gamma = math.radians(sol.diffraction_angle_internal)
        theta = math.acos(abs(float(frame.direction(gamma) @ E3)))
        n_in = float(optics.branch_index(material, lam, theta, optics.INNER))
        # refraction at the exit face (normal tilted by exit_tilt)
        s = n_in * math.sin(gamma - exit_tilt)
        return math.degrees(math.asin(s) + exit_tilt)

    return PrismCut(front_wedge=math.degrees(prism_angle),
                    exit_wedge=math.degrees(exit_tilt),
                    front_face_tilt=math.degrees(front_tilt),
                    external_input_angle=math.degrees(external),
                    external_output_angles=(
                        exit_external(wavelength_red_nm, sol_r),
                        exit_external(wavelength_blue_nm, sol_b)))


def diffracted_angle_at(geometry: DeviceGeometry, material: MaterialConstants,
                        wavelength_nm: float, incidence_angle_deg: float,
                        f_mhz: float,
                        frame: PlaneFrame | None = None) -> float:
    """Internal diffracted-beam angle (deg from the device axis) at one tone.

    Uses the inner-surface point nearest the closure tip, which is the
    direction the diffracted power actually takes inside the band.
    """
    frame = frame or PlaneFrame(geometry, material)
    alpha = math.radians(incidence_angle_deg)
    tip = (frame.incident_k(wavelength_nm, alpha)
           + float(frame.acoustic_k(f_mhz)) * frame.k_hat)
    delta = frame.surface_intersection(wavelength_nm, tip[None, :],
                                       optics.INNER)[0]
    if math.isnan(delta):
        raise NoTangencyError(
            f"no diffracted solution at {f_mhz} MHz for this incidence")
    k_d = tip + delta * frame.u3
    return math.degrees(float(frame.gamma_of(k_d)))


def two_color_overlap_residual(geometry: DeviceGeometry,
                               material: MaterialConstants,
                               f_red_mhz: float,
                               wavelength_red_nm: float,
                               wavelength_blue_nm: float,
                               incidence_red_deg: float | None = None,
                               incidence_blue_deg: float | None = None) -> dict:
    """Angular mismatch between a red tone and its proportional blue partner.

    The isotropic proportional rule f_blue = f_red * lam_red / lam_blue only
    guarantees overlap for isotropic diffraction; anisotropic matching makes
    the exact overlap geometry-dependent.  Returns the blue tone, both
    internal diffracted angles, and their difference in degrees.
    """
    frame = PlaneFrame(geometry, material)
    if incidence_red_deg is None:
        incidence_red_deg = tangential_match(
            geometry, material, wavelength_red_nm,
            frame).incidence_angle_internal
    if incidence_blue_deg is None:
        incidence_blue_deg = tangential_match(
            geometry, material, wavelength_blue_nm,
            frame).incidence_angle_internal
    f_blue = f_red_mhz * wavelength_red_nm / wavelength_blue_nm
    angle_red = diffracted_angle_at(geometry, material, wavelength_red_nm,
                                    incidence_red_deg, f_red_mhz, frame)
    angle_blue = diffracted_angle_at(geometry, material, wavelength_blue_nm,
                                     incidence_blue_deg, f_blue, frame)
    return {"f_blue_mhz": f_blue,
            "angle_red_deg": angle_red,
            "angle_blue_deg": angle_blue,
            "residual_deg": angle_blue - angle_red}


def matching_curve_rows(geometry: DeviceGeometry, material: MaterialConstants,
                        wavelength_nm: float, incidence_deg: np.ndarray,
                        f_mhz: np.ndarray) -> list[dict]:
    """Rows ``f_MHz, theta_in_deg, mismatch_rad_per_mm`` for CSV export."""
    frame = PlaneFrame(geometry, material)
    rows = []
    for a_deg in np.atleast_1d(incidence_deg):
        mm = frame.mismatch(wavelength_nm, math.radians(float(a_deg)),
                            np.atleast_1d(f_mhz))
        for f, m in zip(np.atleast_1d(f_mhz), mm):
            rows.append({"f_MHz": float(f), "theta_in_deg": float(a_deg),
                         "mismatch_rad_per_mm": float(m)})
    return rows
