"""Born-approximation diffraction engine: RF bandshapes, ripple design,
absolute diffraction efficiency, and the dual-band octave report.

The bandshape at fixed incidence evaluates, per drive frequency, the
longitudinal closure defect of the acoustic tip against the inner momentum
surface and weights it with the transducer's in-plane band response
(incoherently summed over the out-of-plane intersection locus).  Acoustic
attenuation averaged coherently over the optical aperture is available as an
optional weighting; the design-band numbers are defined on the pure
momentum-space response, so it defaults to off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import optics, transducer as xd
from .bragg import (DeviceGeometry, MatchSolution, NoTangencyError, PlaneFrame,
                    bragg_frequency_at_angle, find_degeneracies,
                    tangential_match)
from .materials import MaterialConstants

RIPPLE_CRITERION = "ripple"
DB3_CRITERION = "3db"

GRID_MHZ = 0.1
_WINDOW_MHZ = 70.0   # half-width of the evaluation window around tangency
_EPS_POWER = 1e-15


class EmptyBandshapeError(RuntimeError):
    """No Bragg solution anywhere in the requested frequency window."""


class RippleUnachievableError(RuntimeError):
    """Requested ripple depth cannot be reached within detuning bounds."""


@dataclass(frozen=True)
class Bandshape:
    """Sampled relative-efficiency curve with band annotations."""

    wavelength_nm: float
    f_mhz: np.ndarray
    eff_db: np.ndarray
    band_edges: tuple[float, float]
    ripple_db: float
    center: float
    incidence_angle_deg: float
    f_tangential: float
    degeneracy_markers: tuple[float, ...] = ()

    @property
    def bandwidth(self) -> float:
        return self.band_edges[1] - self.band_edges[0]

    def csv_rows(self) -> list[dict]:
        return [{"f_MHz": float(f), "eff_dB": float(e)}
                for f, e in zip(self.f_mhz, self.eff_db)]


@dataclass(frozen=True)
class DrivePlan:
    """Discrete RF tones (MHz, W)."""

    tones: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if any(p < 0.0 for _, p in self.tones):
            raise ValueError("tone powers must be non-negative")

    @property
    def total_power(self) -> float:
        return sum(p for _, p in self.tones)


def aperture_attenuation_power(material: MaterialConstants, f_mhz,
                               velocity_mm_us: float,
                               aperture_mm: float) -> np.ndarray:
    """Power weighting from attenuation averaged coherently over the aperture.

    The Fourier-plane diffracted amplitude accumulates the grating amplitude
    across the full aperture transit, so the mean amplitude factor is squared.
    """
    f = np.asarray(f_mhz, dtype=float)
    transit_us = aperture_mm / velocity_mm_us
    x = (material.attenuation_coeff * (f / 1e3) ** 2 * transit_us
         / 20.0 * math.log(10.0))
    safe = np.maximum(x, 1e-12)
    mean_amp = np.where(x > 1e-12, (1.0 - np.exp(-safe)) / safe, 1.0)
    return mean_amp ** 2


def efficiency_curve(geometry: DeviceGeometry, material: MaterialConstants,
                     wavelength_nm: float, incidence_angle_deg: float,
                     spec: xd.TransducerSpec, f_mhz: np.ndarray,
                     frame: PlaneFrame | None = None,
                     include_attenuation: bool = False) -> np.ndarray:
    """Relative diffracted power over a frequency grid (not normalized)."""
    frame = frame or PlaneFrame(geometry, material)
    alpha = math.radians(incidence_angle_deg)
    f = np.asarray(f_mhz, dtype=float)
    tips = (frame.incident_k(wavelength_nm, alpha)[None, :]
            + frame.acoustic_k(f)[:, None] * frame.k_hat[None, :])
    delta = frame.surface_intersection(wavelength_nm, tips, optics.INNER)
    power = np.where(np.isnan(delta), 0.0,
                     xd.band_response(spec, np.nan_to_num(delta)))
    if include_attenuation:
        power = power * aperture_attenuation_power(
            material, f, frame.velocity, geometry.aperture_length)
    return power


def _band_edges_from_curve(f: np.ndarray, eff_db: np.ndarray,
                           ripple_db: float) -> tuple[float, float]:
    above = np.where(eff_db >= -ripple_db)[0]
    if len(above) == 0:
        raise EmptyBandshapeError("no samples within the ripple criterion")
    i0, i1 = int(above[0]), int(above[-1])
    f_lo = f[i0] if i0 == 0 else float(np.interp(
        -ripple_db, [eff_db[i0 - 1], eff_db[i0]], [f[i0 - 1], f[i0]]))
    f_hi = f[i1] if i1 == len(f) - 1 else float(np.interp(
        -ripple_db, [eff_db[i1 + 1], eff_db[i1]], [f[i1 + 1], f[i1]]))
    return f_lo, f_hi


def bandshape(geometry: DeviceGeometry, material: MaterialConstants,
              wavelength_nm: float, incidence_angle_deg: float,
              spec: xd.TransducerSpec,
              ripple_db: float = 3.0,
              band_criterion: str = RIPPLE_CRITERION,
              include_attenuation: bool = False,
              grid_mhz: float = GRID_MHZ,
              frame: PlaneFrame | None = None,
              with_degeneracies: bool = True,
              tangential: MatchSolution | None = None) -> Bandshape:
    """Compute the normalized RF bandshape at a fixed incidence angle.

    Band edges use the outermost crossings of the ripple criterion (or the
    3 dB criterion when ``band_criterion='3db'``).
    """
    frame = frame or PlaneFrame(geometry, material)
    try:
        sol = tangential or tangential_match(geometry, material,
                                             wavelength_nm, frame)
    except NoTangencyError as err:
        raise EmptyBandshapeError(str(err)) from err
    f_lo = max(sol.f_tangential - _WINDOW_MHZ, 2.0)
    f = np.arange(f_lo, sol.f_tangential + _WINDOW_MHZ, grid_mhz)
    power = efficiency_curve(geometry, material, wavelength_nm,
                             incidence_angle_deg, spec, f, frame,
                             include_attenuation)
    peak = power.max()
    if peak <= _EPS_POWER:
        raise EmptyBandshapeError("no Bragg response in the window")
    eff_db = 10.0 * np.log10(np.maximum(power / peak, _EPS_POWER))
    threshold = 3.0 if band_criterion == DB3_CRITERION else ripple_db
    edges = _band_edges_from_curve(f, eff_db, threshold)
    markers: tuple[float, ...] = ()
    if with_degeneracies:
        degs = find_degeneracies(geometry, material, wavelength_nm,
                                 incidence_angle_deg,
                                 (f[0], f[-1]), usable_band=edges,
                                 f_tangential=sol.f_tangential, frame=frame)
        markers = tuple(d.frequency for d in degs)
    return Bandshape(wavelength_nm=wavelength_nm, f_mhz=f, eff_db=eff_db,
                     band_edges=edges, ripple_db=threshold,
                     center=0.5 * (edges[0] + edges[1]),
                     incidence_angle_deg=incidence_angle_deg,
                     f_tangential=sol.f_tangential,
                     degeneracy_markers=markers)


def design_ripple_incidence(geometry: DeviceGeometry,
                            material: MaterialConstants,
                            wavelength_nm: float, spec: xd.TransducerSpec,
                            ripple_db: float,
                            frame: PlaneFrame | None = None,
                            tangential: MatchSolution | None = None) -> float:
    """Incidence angle (deg) whose bandshape dip is exactly ripple_db deep.

    Detunes from the tangential incidence into the two-closure-root regime
    until the mid-band dip between the root peaks sits ripple_db below them.
    A zero ripple returns the tangential incidence itself.
    """
    if not 0.0 <= ripple_db <= 3.0:
        raise ValueError("ripple must lie in [0, 3] dB")
    frame = frame or PlaneFrame(geometry, material)
    sol = tangential or tangential_match(geometry, material, wavelength_nm,
                                         frame)
    alpha_t = math.radians(sol.incidence_angle_internal)
    if ripple_db == 0.0:
        return sol.incidence_angle_internal
    probe = math.radians(0.02)
    sign = +1.0
    from .bragg import _min_mismatch
    if _min_mismatch(frame, wavelength_nm, alpha_t + probe,
                     max(sol.f_tangential - 40, 2.0),
                     sol.f_tangential + 40, 0.25)[1] >= 0.0:
        sign = -1.0

    def dip_depth(detune_rad: float) -> float:
        alpha = alpha_t + sign * detune_rad
        roots = bragg_frequency_at_angle(
            geometry, material, wavelength_nm, math.degrees(alpha),
            max(sol.f_tangential - 45.0, 2.0),
            sol.f_tangential + 45.0, frame)
        if len(roots) < 2:
            return 0.0
        f1, f2 = min(roots), max(roots)
        grid = np.linspace(f1, f2, 400)
        power = efficiency_curve(geometry, material, wavelength_nm,
                                 math.degrees(alpha), spec, grid, frame)
        peak = min(power[0], power[-1])
        return 10.0 * math.log10(peak / max(power.min(), _EPS_POWER))

    target = ripple_db * 0.999  # keep the dip strictly above the band threshold
    lo, hi = 0.0, math.radians(0.02)
    for _ in range(40):
        if dip_depth(hi) >= target:
            break
        hi *= 1.4
    else:
        raise RippleUnachievableError(
            f"{ripple_db} dB dip not reachable within detuning bounds")
    for _ in range(36):
        mid = 0.5 * (lo + hi)
        if dip_depth(mid) < target:
            lo = mid
        else:
            hi = mid
    return math.degrees(alpha_t + sign * 0.5 * (lo + hi))


def designed_bandshape(geometry: DeviceGeometry, material: MaterialConstants,
                       wavelength_nm: float, spec: xd.TransducerSpec,
                       ripple_db: float,
                       band_criterion: str = RIPPLE_CRITERION,
                       include_attenuation: bool = False,
                       frame: PlaneFrame | None = None) -> Bandshape:
    """Ripple design followed by the bandshape at the designed incidence."""
    frame = frame or PlaneFrame(geometry, material)
    sol = tangential_match(geometry, material, wavelength_nm, frame)
    incidence = design_ripple_incidence(geometry, material, wavelength_nm,
                                        spec, ripple_db, frame, tangential=sol)
    return bandshape(geometry, material, wavelength_nm, incidence, spec,
                     ripple_db=ripple_db, band_criterion=band_criterion,
                     include_attenuation=include_attenuation, frame=frame,
                     tangential=sol)


def material_figure_of_merit(material: MaterialConstants,
                             wavelength_nm: float) -> float:
    """M2 = n^6 p^2 / (rho V^3) in s^3/kg for the slow-shear interaction.

    Evaluated with the on-axis indices of the coupled branches and the
    effective scalar photoelastic constant from the material config.
    """
    from .materials import AXIS_110, slow_shear_mode
    n_in = float(optics.branch_index(material, wavelength_nm, 0.0, optics.INNER))
    n_out = float(optics.branch_index(material, wavelength_nm, 0.0, optics.OUTER))
    v_ms = slow_shear_mode(material, AXIS_110).velocity * 1e3
    p = material.effective_photoelastic
    return (n_in * n_out) ** 3 * p ** 2 / (material.density * v_ms ** 3)


def efficiency(material: MaterialConstants, wavelength_nm: float,
               spec: xd.TransducerSpec, acoustic_power_w: float,
               branch_pair: tuple[str, str] = (optics.OUTER, optics.INNER)) -> float:
    """Absolute diffraction efficiency sin^2(sqrt(pi^2 P L M2 / (2 lambda^2 H)))."""
    if acoustic_power_w < 0.0:
        raise ValueError("acoustic power must be non-negative")
    del branch_pair  # both orderings share the symmetric index product
    m2 = material_figure_of_merit(material, wavelength_nm)
    lam_m = wavelength_nm * 1e-9
    arg = (math.pi ** 2 * acoustic_power_w * (spec.length * 1e-3) * m2
           / (2.0 * lam_m ** 2 * (spec.height * 1e-3)))
    return math.sin(math.sqrt(arg)) ** 2


def power_for_efficiency(material: MaterialConstants, wavelength_nm: float,
                         spec: xd.TransducerSpec, eta: float) -> float:
    """Closed-form inversion of :func:`efficiency` (first branch of sin^2)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    m2 = material_figure_of_merit(material, wavelength_nm)
    lam_m = wavelength_nm * 1e-9
    root = math.asin(math.sqrt(eta))
    return root ** 2 * 2.0 * lam_m ** 2 * (spec.height * 1e-3) / (
        math.pi ** 2 * (spec.length * 1e-3) * m2)


@dataclass(frozen=True)
class DualBandReport:
    """Separation and octave bookkeeping for a red/blue band pair (MHz)."""

    band_red: tuple[float, float]
    band_blue: tuple[float, float]
    gap_mhz: float
    octave_lo: float
    octave_hi: float
    bw_over_octave_mhz: float
    overlap: tuple[float, float] | None

    def text(self) -> str:
        lines = [
            f"band_red_MHz = {self.band_red[0]:.3f} {self.band_red[1]:.3f}",
            f"band_blue_MHz = {self.band_blue[0]:.3f} {self.band_blue[1]:.3f}",
            f"gap_MHz = {self.gap_mhz:.3f}",
            f"octave_lo = {self.octave_lo:.3f}",
            f"octave_hi = {self.octave_hi:.3f}",
            f"bw_over_octave_MHz = {self.bw_over_octave_mhz:.3f}",
        ]
        if self.overlap is not None:
            lines.append(
                f"overlap_MHz = {self.overlap[0]:.3f} {self.overlap[1]:.3f}")
        return "\n".join(lines) + "\n"


def dual_band_report(band_red: tuple[float, float],
                     band_blue: tuple[float, float]) -> DualBandReport:
    """Gap, octave span, and octave-excess bandwidth for two bands.

    Overlapping bands are flagged, not rejected; the octave span runs from
    the lower edge of the lower band to twice that frequency.
    """
    lo_band, hi_band = sorted([tuple(band_red), tuple(band_blue)])
    gap = hi_band[0] - lo_band[1]
    overlap = None
    if gap < 0.0:
        overlap = (hi_band[0], min(lo_band[1], hi_band[1]))
        gap = 0.0
    octave_lo = lo_band[0]
    octave_hi = 2.0 * octave_lo
    over = max(0.0, hi_band[1] - octave_hi)
    return DualBandReport(band_red=tuple(band_red), band_blue=tuple(band_blue),
                          gap_mhz=float(gap), octave_lo=float(octave_lo),
                          octave_hi=float(octave_hi),
                          bw_over_octave_mhz=float(over), overlap=overlap)
