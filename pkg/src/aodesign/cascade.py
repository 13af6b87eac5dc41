"""Cascaded up/down-shifting deflector system model: Doppler bookkeeping,
proportional two-color drive, resolvable spots, and focal-spot sizing.

Tones are kept on an integer-kHz lattice so matched up/down pairs cancel
exactly.  Gaussian spots use the 1/e^2 intensity diameter convention
throughout: focal spot d = 4 lambda f / (pi D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bragg import DeviceGeometry


class AddressingError(RuntimeError):
    """Requested array cannot be addressed by the scanner."""


def _round_khz(f_mhz: float) -> float:
    return round(f_mhz * 1000.0) / 1000.0


def proportional_pair(f_ref_mhz: float, wavelength_ref_nm: float,
                      wavelength_other_nm: float) -> float:
    """Drive frequency giving the other color the same first-order deflection.

    Equal isotropic deflection angle lambda*f/V requires
    f_other = f_ref * lambda_ref / lambda_other.
    """
    if min(f_ref_mhz, wavelength_ref_nm, wavelength_other_nm) <= 0.0:
        raise ValueError("frequencies and wavelengths must be positive")
    return f_ref_mhz * wavelength_ref_nm / wavelength_other_nm


@dataclass(frozen=True)
class CascadeConfig:
    """Two-stage crossed scanner plus the downstream addressing optics."""

    stage1: DeviceGeometry
    stage2: DeviceGeometry
    beam_diameter_mm: float = 3.0        # 1/e^2
    fourier_focal_mm: float = 42.0
    collimator_focal_mm: float = 400.0
    objective_focal_mm: float = 110.0
    trap_pitch_um: float = 8.0
    band_red_mhz: tuple[float, float] = (97.0, 119.0)
    band_blue_mhz: tuple[float, float] = (174.0, 208.0)

    def __post_init__(self):
        if self.stage1.doppler_sign == self.stage2.doppler_sign:
            raise ValueError("cascade stages must have opposite Doppler signs")
        for f in (self.beam_diameter_mm, self.fourier_focal_mm,
                  self.collimator_focal_mm, self.objective_focal_mm):
            if f <= 0.0:
                raise ValueError("beam and focal lengths must be positive")

    @property
    def demagnification(self) -> float:
        return self.collimator_focal_mm / self.objective_focal_mm

    def band(self, color: str) -> tuple[float, float]:
        return self.band_red_mhz if color == "red" else self.band_blue_mhz


def cascaded_band(band1: tuple[float, float],
                  band2: tuple[float, float]) -> tuple[float, float]:
    """Intersection of the two stages' usable bands for one color."""
    lo, hi = max(band1[0], band2[0]), min(band1[1], band2[1])
    if hi <= lo:
        raise AddressingError("stage bands do not overlap")
    return lo, hi


@dataclass(frozen=True)
class DopplerLedger:
    """Signed tone bookkeeping for one color."""

    tones_mhz: tuple[tuple[float, int], ...]   # (frequency, sign)
    net_mhz: float
    precompensation_mhz: float
    axis_residual_mhz: float | None


def doppler_ledger(tones_mhz: dict[str, list[tuple[float, int]]]
                   ) -> dict[str, DopplerLedger]:
    """Net Doppler per color from signed tones, with pre-compensation tones.

    Each tone is (frequency MHz, sign) with sign +1 for an upshifting stage
    and -1 for a downshifting one.  The 2-D residual (f_x - f_y) is reported
    when a color has exactly two tones.
    """
    out = {}
    for color, tones in tones_mhz.items():
        net = 0.0
        for f, sign in tones:
            if sign not in (+1, -1):
                raise ValueError("tone signs must be +1 or -1")
            net += sign * _round_khz(f)
        net = round(net * 1000.0) / 1000.0
        residual = None
        if len(tones) == 2:
            residual = _round_khz(tones[0][0]) - _round_khz(tones[1][0])
        out[color] = DopplerLedger(tones_mhz=tuple((float(f), int(s))
                                                   for f, s in tones),
                                   net_mhz=net,
                                   precompensation_mhz=-net + 0.0,
                                   axis_residual_mhz=residual)
    return out


def access_time_us(aperture_mm: float, velocity_mm_us: float) -> float:
    return aperture_mm / velocity_mm_us


def resolvable_spots(access_time: float, bandwidth_mhz: float) -> int:
    """Time-bandwidth product, floored to a spot count."""
    if bandwidth_mhz < 0.0:
        raise ValueError("bandwidth must be non-negative")
    return int(math.floor(access_time * bandwidth_mhz))


def scan_metrics(config: CascadeConfig, bandwidth_mhz: float,
                 velocity_mm_us: float) -> tuple[float, int]:
    """(access time us, resolvable spots) for the configured beam diameter."""
    t = access_time_us(config.beam_diameter_mm, velocity_mm_us)
    return t, resolvable_spots(t, bandwidth_mhz)


@dataclass(frozen=True)
class SpotChain:
    wavelength_nm: float
    fourier_spot_um: float
    trap_spot_um: float
    crosstalk_margin: float  # trap pitch over trap-plane spot radius


def gaussian_focal_spot_um(wavelength_nm: float, focal_mm: float,
                           beam_diameter_mm: float) -> float:
    """1/e^2 focal-spot diameter 4 lambda f / (pi D), in um."""
    return 4.0 * (wavelength_nm * 1e-9) * (focal_mm * 1e-3) / (
        math.pi * beam_diameter_mm * 1e-3) * 1e6


def spot_chain(config: CascadeConfig, wavelength_nm: float) -> SpotChain:
    """Focal spot at the Fourier plane and after demagnification to the traps."""
    d_fourier = gaussian_focal_spot_um(wavelength_nm, config.fourier_focal_mm,
                                       config.beam_diameter_mm)
    d_trap = d_fourier * config.objective_focal_mm / config.collimator_focal_mm
    margin = config.trap_pitch_um / (0.5 * d_trap)
    return SpotChain(wavelength_nm=wavelength_nm, fourier_spot_um=d_fourier,
                     trap_spot_um=d_trap, crosstalk_margin=margin)


def site_frequency_step_mhz(config: CascadeConfig, wavelength_nm: float,
                            velocity_mm_us: float) -> float:
    """Drive-frequency increment that moves one trap pitch at the trap plane.

    Deflection angle per MHz is lambda/V; displacement follows through the
    Fourier lens and the demagnifier.  The step is rounded to the kHz lattice
    used by the tone tables.
    """
    angle_per_mhz = (wavelength_nm * 1e-9) * 1e6 / (velocity_mm_us * 1e3)
    disp_per_mhz_um = (angle_per_mhz * config.fourier_focal_mm * 1e-3
                       / config.demagnification) * 1e6
    return _round_khz(config.trap_pitch_um / disp_per_mhz_um)


@dataclass(frozen=True)
class AddressRow:
    site_i: int
    site_j: int
    f_red_x_mhz: float
    f_red_y_mhz: float
    f_blue_x_mhz: float
    f_blue_y_mhz: float
    precomp_red_mhz: float
    precomp_blue_mhz: float
    net_doppler_mhz: float

    def csv_row(self) -> dict:
        return {"site_i": self.site_i, "site_j": self.site_j,
                "f_red_x_MHz": self.f_red_x_mhz, "f_red_y_MHz": self.f_red_y_mhz,
                "f_blue_x_MHz": self.f_blue_x_mhz,
                "f_blue_y_MHz": self.f_blue_y_mhz,
                "precomp_red_MHz": self.precomp_red_mhz,
                "precomp_blue_MHz": self.precomp_blue_mhz,
                "net_doppler_MHz": self.net_doppler_mhz}


def addressing_table(config: CascadeConfig, sites_x: int, sites_y: int,
                     wavelength_red_nm: float = 780.0,
                     wavelength_blue_nm: float = 480.0,
                     velocity_mm_us: float = 0.62,
                     bandwidth_mhz: float | None = None) -> list[AddressRow]:
    """Drive-tone table for an array of trap sites.

    Red tones are laid out on the kHz lattice around each axis band center
    with the pitch-derived step; blue tones follow the proportional rule so
    both colors land on the same site.  Pre-compensation tones cancel the
    per-color net Doppler of the two crossed stages exactly.
    """
    if sites_x < 1 or sites_y < 1:
        raise AddressingError("array dimensions must be at least 1x1")
    band_red = config.band("red")
    if bandwidth_mhz is None:
        bandwidth_mhz = band_red[1] - band_red[0]
    t_us = access_time_us(config.beam_diameter_mm, velocity_mm_us)
    n_spots = resolvable_spots(t_us, bandwidth_mhz)
    if max(sites_x, sites_y) > n_spots:
        raise AddressingError(
            f"resolvable-spots-exceeded: requested {sites_x}x{sites_y}, "
            f"scanner resolves {n_spots} spots per axis")
    step_red = site_frequency_step_mhz(config, wavelength_red_nm,
                                       velocity_mm_us)
    center_red = _round_khz(0.5 * (band_red[0] + band_red[1]))
    span_x = (sites_x - 1) * step_red
    span_y = (sites_y - 1) * step_red
    if max(span_x, span_y) > bandwidth_mhz:
        raise AddressingError(
            f"required tone span {max(span_x, span_y):.3f} MHz exceeds the "
            f"usable band {bandwidth_mhz:.3f} MHz")
    s1, s2 = config.stage1.doppler_sign, config.stage2.doppler_sign
    rows = []
    for i in range(sites_x):
        fx_red = _round_khz(center_red + (i - (sites_x - 1) / 2.0) * step_red)
        fx_blue = _round_khz(proportional_pair(fx_red, wavelength_red_nm,
                                               wavelength_blue_nm))
        for j in range(sites_y):
            fy_red = _round_khz(center_red
                                + (j - (sites_y - 1) / 2.0) * step_red)
            fy_blue = _round_khz(proportional_pair(fy_red, wavelength_red_nm,
                                                   wavelength_blue_nm))
            ledger = doppler_ledger({
                "red": [(fx_red, s1), (fy_red, s2)],
                "blue": [(fx_blue, s1), (fy_blue, s2)],
            })
            net_after = (ledger["red"].net_mhz
                         + ledger["red"].precompensation_mhz)
            rows.append(AddressRow(
                site_i=i, site_j=j,
                f_red_x_mhz=fx_red, f_red_y_mhz=fy_red,
                f_blue_x_mhz=fx_blue, f_blue_y_mhz=fy_blue,
                precomp_red_mhz=ledger["red"].precompensation_mhz,
                precomp_blue_mhz=ledger["blue"].precompensation_mhz,
                net_doppler_mhz=net_after))
    return rows


@dataclass(frozen=True)
class CascadeReport:
    """End-to-end scanner summary for both colors."""

    net_doppler_mhz: dict[str, float]
    drive_pairs_mhz: dict[str, tuple[float, float]]
    access_time_us: float
    resolvable_spots: dict[str, int]
    fourier_spots_um: dict[str, float]
    trap_spots_um: dict[str, float]
    crosstalk_margin: dict[str, float]
    cascaded_bands_mhz: dict[str, tuple[float, float]]


def cascade_report(config: CascadeConfig, velocity_mm_us: float,
                   wavelength_red_nm: float = 780.0,
                   wavelength_blue_nm: float = 480.0) -> CascadeReport:
    """Assemble the full cascade summary from the configured bands."""
    t_us = access_time_us(config.beam_diameter_mm, velocity_mm_us)
    nets, pairs, spots, fouriers, traps, margins, bands = ({} for _ in range(7))
    wavelengths = {"red": wavelength_red_nm, "blue": wavelength_blue_nm}
    s1, s2 = config.stage1.doppler_sign, config.stage2.doppler_sign
    for color, lam in wavelengths.items():
        band = cascaded_band(config.band(color), config.band(color))
        center = _round_khz(0.5 * (band[0] + band[1]))
        ledger = doppler_ledger({color: [(center, s1), (center, s2)]})[color]
        chain = spot_chain(config, lam)
        bands[color] = band
        nets[color] = ledger.net_mhz
        pairs[color] = (center, center)
        spots[color] = resolvable_spots(t_us, band[1] - band[0])
        fouriers[color] = chain.fourier_spot_um
        traps[color] = chain.trap_spot_um
        margins[color] = chain.crosstalk_margin
    return CascadeReport(net_doppler_mhz=nets, drive_pairs_mhz=pairs,
                         access_time_us=t_us, resolvable_spots=spots,
                         fourier_spots_um=fouriers, trap_spots_um=traps,
                         crosstalk_margin=margins, cascaded_bands_mhz=bands)
