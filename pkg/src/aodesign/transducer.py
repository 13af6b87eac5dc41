"""Transducer apertures, their Fourier transforms, and acoustic beam
propagation.

Axes: the transducer length L lies along the device optical axis (the
in-interaction-plane transverse direction, subject to walk-off and the
in-plane curvature b_z); the height H lies out of the interaction plane
(b_t curvature).  ``propagate`` evolves a transverse profile against the
propagation distance with the anisotropic paraxial angular-spectrum method,
one transverse plane at a time; the stored grid is the Bragg-readout style
(propagation x transverse) amplitude history.

Paraxial propagator (per transverse dimension, excess curvature b and
optional walk-off tilt psi):

    k_x(k_t) = K - tan(psi) k_t - b k_t^2 / (2 K)

valid for angular content within a few degrees of the carrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

RECTANGLE = "rectangle"
DIAMOND = "diamond"
TRUNCATED_DIAMOND = "truncated-diamond"
_SHAPES = (RECTANGLE, DIAMOND, TRUNCATED_DIAMOND)


class GridResolutionError(ValueError):
    """Requested propagation grid cannot resolve the field."""


@dataclass(frozen=True)
class TransducerSpec:
    """Aperture shape and dimensions in mm."""

    shape: str = DIAMOND
    length: float = 8.0
    height: float = 4.0
    truncation: float = 0.75
    center_frequency_hint: float | None = None

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise ValueError(f"shape must be one of {_SHAPES}")
        if self.length <= 0.0 or self.height <= 0.0:
            raise ValueError("transducer dimensions must be positive")
        if not 0.0 < self.truncation <= 1.0:
            raise ValueError("truncation fraction must lie in (0, 1]")

    def aperture(self, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Indicator a(u, w) on a meshgrid; u along length, w along height."""
        uu, ww = np.meshgrid(u, w, indexing="ij")
        hl, hh = 0.5 * self.length, 0.5 * self.height
        if self.shape == RECTANGLE:
            inside = (np.abs(uu) <= hl) & (np.abs(ww) <= hh)
        else:
            inside = np.abs(uu) / hl + np.abs(ww) / hh <= 1.0
            if self.shape == TRUNCATED_DIAMOND:
                inside &= np.abs(uu) <= self.truncation * hl
        return inside.astype(float)

    def length_profile(self, u: np.ndarray) -> np.ndarray:
        """Projection of the aperture onto the length axis (height-integrated)."""
        hl = 0.5 * self.length
        if self.shape == RECTANGLE:
            prof = np.where(np.abs(u) <= hl, self.height, 0.0)
        else:
            prof = self.height * np.clip(1.0 - np.abs(u) / hl, 0.0, None)
            if self.shape == TRUNCATED_DIAMOND:
                prof = np.where(np.abs(u) <= self.truncation * hl, prof, 0.0)
        return prof

    def height_profile(self, w: np.ndarray) -> np.ndarray:
        """Projection of the aperture onto the height axis (length-integrated)."""
        hh = 0.5 * self.height
        if self.shape == RECTANGLE:
            return np.where(np.abs(w) <= hh, self.length, 0.0)
        prof = self.length * np.clip(1.0 - np.abs(w) / hh, 0.0, None)
        if self.shape == TRUNCATED_DIAMOND:
            c = self.truncation
            # width of the hexagonal outline at height w
            full = self.length * np.clip(1.0 - np.abs(w) / hh, 0.0, None)
            prof = np.minimum(full, c * self.length)
            prof = np.where(np.abs(w) <= hh, prof, 0.0)
        return prof

    def inplane_widths(self, n_slices: int = 201) -> tuple[np.ndarray, np.ndarray]:
        """(weights, widths): aperture width along the length axis per height
        slice, used for the incoherent band response."""
        w = np.linspace(-0.5 * self.height, 0.5 * self.height, n_slices)
        hh = 0.5 * self.height
        if self.shape == RECTANGLE:
            widths = np.full_like(w, self.length)
        else:
            widths = self.length * np.clip(1.0 - np.abs(w) / hh, 0.0, None)
            if self.shape == TRUNCATED_DIAMOND:
                widths = np.minimum(widths, self.truncation * self.length)
        return np.ones_like(w), widths


def _sinc(x):
    return np.sinc(np.asarray(x) / math.pi)


def inplane_cut(spec: TransducerSpec, k_u) -> np.ndarray:
    """In-plane cut of the 2-D aperture transform, normalized amplitude.

    Rectangle -> sinc(k L / 2); diamond -> sinc^2(k L / 4); truncated diamond
    evaluated by quadrature of its length-axis projection.
    """
    k = np.atleast_1d(np.asarray(k_u, dtype=float))
    if spec.shape == RECTANGLE:
        out = _sinc(0.5 * k * spec.length)
    elif spec.shape == DIAMOND:
        out = _sinc(0.25 * k * spec.length) ** 2
    else:
        # closed-form transform of the clipped-triangle length projection
        a = 0.5 * spec.truncation * spec.length
        b = 0.5 * spec.length
        small = np.abs(k) < 1e-9
        ks = np.where(small, 1.0, k)
        raw = 2.0 * (np.sin(ks * a) / ks
                     - (a * np.sin(ks * a) / ks
                        + (np.cos(ks * a) - 1.0) / ks ** 2) / b)
        norm = 2.0 * (a - a * a / (2.0 * b))
        out = np.where(small, 1.0, raw / norm)
    return out if np.ndim(k_u) else float(out[0])


def band_response(spec: TransducerSpec, k_u, n_slices: int = 201) -> np.ndarray:
    """Effective in-plane power response for the RF bandshape.

    The diffracted power sums incoherently over the out-of-plane intersection
    locus on the momentum surface, so each height slice of the aperture
    contributes its own sinc^2 weighted by slice width squared.  For a
    separable (rectangular) aperture this reduces to the plain sinc^2.
    Returned in power units, normalized to unit peak.
    """
    k = np.atleast_1d(np.asarray(k_u, dtype=float))
    _, widths = spec.inplane_widths(n_slices)
    weights = widths ** 2
    weights = weights / weights.sum()
    s = _sinc(0.5 * np.outer(k, widths)) ** 2
    out = s @ weights
    return out if np.ndim(k_u) else float(out[0])


def aperture_spectrum(spec: TransducerSpec, k_u: np.ndarray,
                      k_w: np.ndarray) -> np.ndarray:
    """2-D spatial-frequency amplitude A(k_u, k_w), unit peak.

    Analytic for rectangle (separable sinc product) and diamond (product of
    squared sincs in the rotated diagonal coordinates); numeric FFT-free
    quadrature for the truncated diamond.
    """
    ku = np.asarray(k_u, dtype=float)
    kw = np.asarray(k_w, dtype=float)
    kuu, kww = np.meshgrid(ku, kw, indexing="ij")
    if spec.shape == RECTANGLE:
        return _sinc(0.5 * kuu * spec.length) * _sinc(0.5 * kww * spec.height)
    if spec.shape == DIAMOND:
        # diagonals of the rhombus map to +-45 deg rotated rect coordinates
        a = 0.25 * (kuu * spec.length + kww * spec.height)
        b = 0.25 * (kuu * spec.length - kww * spec.height)
        return _sinc(a) * _sinc(b)
    u = np.linspace(-0.5 * spec.length, 0.5 * spec.length, 513)
    w = np.linspace(-0.5 * spec.height, 0.5 * spec.height, 257)
    ap = spec.aperture(u, w)
    # two-stage separable quadrature of exp(-i k r) over the aperture
    eu = np.exp(-1j * np.outer(ku, u))
    ew = np.exp(-1j * np.outer(kw, w))
    inner = np.tensordot(eu, ap, axes=(1, 0))          # (nku, nw)
    full = np.tensordot(inner, ew.T, axes=(1, 0))      # (nku, nkw)
    full = np.abs(full)
    return full / full.max()


def first_sidelobe_db(spec: TransducerSpec, n: int = 40001) -> float:
    """Power level (dB) of the first in-plane sidelobe of the aperture cut."""
    k = np.linspace(0.0, 16.0 * math.pi / spec.length, n)
    amp = np.abs(inplane_cut(spec, k))
    minima = np.where((amp[1:-1] < amp[:-2]) & (amp[1:-1] <= amp[2:]))[0] + 1
    if len(minima) == 0:
        raise RuntimeError("no null found in the sampled transform")
    after = amp[minima[0]:]
    maxima = np.where((after[1:-1] > after[:-2]) & (after[1:-1] >= after[2:]))[0] + 1
    if len(maxima) == 0:
        raise RuntimeError("no sidelobe found in the sampled transform")
    return 20.0 * math.log10(max(float(after[maxima[0]]), 1e-300))


def wavelength_mm(velocity_mm_us: float, f_mhz: float) -> float:
    return velocity_mm_us / f_mhz


def rayleigh_range(spec: TransducerSpec, velocity_mm_us: float, f_mhz: float,
                   b_curvature: float,
                   aperture_mm: float | None = None) -> tuple[float, bool | None]:
    """Collimated near-field distance Z0 = H^2 / (b * Lambda) in mm.

    Returns ``(z0, collimated)`` where ``collimated`` flags the A < Z0
    criterion for the supplied optical aperture (None when not supplied).
    """
    if f_mhz <= 0.0:
        raise ValueError("frequency must be positive")
    lam_a = wavelength_mm(velocity_mm_us, f_mhz)
    z0 = spec.height ** 2 / (b_curvature * lam_a)
    flag = None if aperture_mm is None else bool(aperture_mm < z0)
    return z0, flag


@dataclass(frozen=True)
class AcousticField:
    """Propagated acoustic field history.

    ``grid`` holds complex amplitude indexed (propagation step, transverse
    sample); ``projection`` is the final-plane transverse amplitude profile
    (the Bragg-readout accumulation along the other transverse axis is
    already folded into the initial profile).
    """

    grid: np.ndarray
    transverse_mm: np.ndarray
    distances_mm: np.ndarray
    frequency_mhz: float
    plane: str

    @property
    def projection(self) -> np.ndarray:
        return self.grid[-1]

    def power_per_step(self) -> np.ndarray:
        dx = self.transverse_mm[1] - self.transverse_mm[0]
        return np.sum(np.abs(self.grid) ** 2, axis=1) * dx


def _plane_parameters(spec: TransducerSpec, plane: str):
    if plane == "height":
        return spec.height
    if plane == "length":
        return spec.length
    raise ValueError("plane must be 'height' or 'length'")


def propagate(spec: TransducerSpec, velocity_mm_us: float, f_mhz: float,
              distance_mm: float, steps: int = 64, plane: str = "height",
              b_curvature: float = 52.0, walkoff_deg: float = 0.0,
              attenuation_db_per_us: float = 0.0,
              margin: float = 0.25, min_samples_per_wavelength: float = 4.0,
              max_points: int = 1 << 17,
              initial_profile: np.ndarray | None = None,
              transverse_mm: np.ndarray | None = None) -> AcousticField:
    """Anisotropic paraxial angular-spectrum propagation of one transverse
    profile.

    The initial profile is the Bragg-readout projection of the aperture onto
    the chosen transverse axis ('height': out-of-plane, curvature b_t;
    'length': in-plane, curvature b_z plus walk-off tilt).  The window is the
    aperture extent plus walk-off excursion padded by ``margin`` per side;
    spacing resolves Lambda_a / min_samples_per_wavelength so the tilted
    angular spectrum fits without aliasing.
    """
    lam_a = wavelength_mm(velocity_mm_us, f_mhz)
    k_carrier = 2.0 * math.pi / lam_a
    extent = _plane_parameters(spec, plane)
    drift = abs(distance_mm * math.tan(math.radians(walkoff_deg)))
    span = (extent + drift) * (1.0 + 2.0 * margin)
    dx = lam_a / min_samples_per_wavelength
    n = 1 << max(int(math.ceil(math.log2(span / dx))), 4)
    if n > max_points:
        raise GridResolutionError(
            f"window needs {n} points (> {max_points}); coarsen the request")
    if transverse_mm is None:
        x = (np.arange(n) - n // 2) * (span / n)
    else:
        x = np.asarray(transverse_mm, dtype=float)
        n = len(x)
    if initial_profile is None:
        prof = (spec.height_profile(x) if plane == "height"
                else spec.length_profile(x))
        prof = prof / max(prof.max(), 1e-300)
    else:
        prof = np.asarray(initial_profile, dtype=complex)
    dxs = x[1] - x[0]
    if dxs > lam_a / 2.0:
        raise GridResolutionError("transverse grid does not resolve Lambda_a/2")
    kt = 2.0 * math.pi * np.fft.fftfreq(n, dxs)
    tilt = math.tan(math.radians(walkoff_deg))
    phase_per_mm = -(tilt * kt + b_curvature * kt ** 2 / (2.0 * k_carrier))
    dz = distance_mm / steps
    att_amp_per_mm = 10.0 ** (-(attenuation_db_per_us / velocity_mm_us) / 20.0)
    grid = np.empty((steps + 1, n), dtype=complex)
    grid[0] = prof
    spec_f = np.fft.fft(prof)
    step_op = np.exp(1j * phase_per_mm * dz)
    for s in range(1, steps + 1):
        spec_f = spec_f * step_op
        field = np.fft.ifft(spec_f)
        if attenuation_db_per_us:
            field = field * att_amp_per_mm ** (s * dz)
        grid[s] = field
    return AcousticField(grid=grid, transverse_mm=x,
                         distances_mm=np.linspace(0.0, distance_mm, steps + 1),
                         frequency_mhz=f_mhz, plane=plane)


def centroid_mm(field_row: np.ndarray, x: np.ndarray) -> float:
    w = np.abs(field_row) ** 2
    return float(np.sum(x * w) / np.sum(w))


def ripple_variance(field: AcousticField, z_max_mm: float) -> float:
    """Variance of the normalized on-axis intensity over [0, z_max]."""
    i0 = int(np.argmin(np.abs(field.transverse_mm)))
    sel = field.distances_mm <= z_max_mm
    trace = np.abs(field.grid[sel, i0]) ** 2
    return float(np.var(trace / trace.mean()))


def write_field_dump(field: AcousticField, path: str | Path) -> Path:
    """Flat binary grid with a small text header, plus a CSV projection."""
    path = Path(path)
    header = (f"# acoustic field dump\n"
              f"# plane: {field.plane}\n"
              f"# frequency_MHz: {field.frequency_mhz:.9g}\n"
              f"# steps: {field.grid.shape[0]}\n"
              f"# transverse_points: {field.grid.shape[1]}\n"
              f"# transverse_spacing_mm: "
              f"{field.transverse_mm[1] - field.transverse_mm[0]:.9g}\n"
              f"# distance_mm: {field.distances_mm[-1]:.9g}\n"
              f"# dtype: complex128 row-major (step, transverse)\n")
    path.with_suffix(".hdr").write_text(header, encoding="utf-8")
    field.grid.astype(np.complex128).tofile(path)
    csv_path = path.with_suffix(".projection.csv")
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("transverse_mm,amplitude,intensity\n")
        for xv, amp in zip(field.transverse_mm, field.projection):
            fh.write(f"{xv:.9g},{abs(amp):.9g},{abs(amp)**2:.9g}\n")
    return path
