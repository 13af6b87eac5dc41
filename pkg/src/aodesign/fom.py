"""Figure-of-merit landscape over optical and acoustic rotation.

Each cell runs the full two-color design (tangential match, ripple design,
bandshape, degeneracy scan) and scores

    fom = (BW_blue + BW_red - BW_over_octave) / crystal_volume

gated to zero by the high-frequency transducer limit and by any in-band
degenerate double diffraction.  The crystal volume model is
(A + A tan(psi) + 2 mm) x (L + 2 mm) x (H + 2 mm) with psi the acoustic
group walk-off measured from the [110] axis.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import bandshape as bs
from .bragg import DeviceGeometry, NoTangencyError, PlaneFrame
from .materials import MaterialConstants, walkoff_from_axis
from .transducer import TransducerSpec

REASON_OK = "ok"
REASON_NO_TANGENCY = "no_tangency"
REASON_HF_LIMIT = "hf_limit"
REASON_DEGENERACY = "in_band_degeneracy"
REASON_EMPTY_BAND = "empty_band"

DEFAULT_HF_LIMIT_MHZ = 230.0
MARGIN_MM = 2.0


@dataclass(frozen=True)
class DesignLimits:
    hf_limit_mhz: float = DEFAULT_HF_LIMIT_MHZ
    ripple_red_db: float = 0.5
    ripple_blue_db: float = 1.0


@dataclass(frozen=True)
class FomCell:
    phi_o_deg: float
    phi_a_deg: float
    bw_red: float
    bw_blue: float
    bw_over_octave: float
    crystal_volume_mm3: float
    hf_ok: bool
    degeneracy_ok: bool
    fom: float                      # MHz / mm^3
    reason: str
    band_red: tuple[float, float] = (0.0, 0.0)
    band_blue: tuple[float, float] = (0.0, 0.0)

    def csv_row(self) -> dict:
        return {"phi_o_deg": self.phi_o_deg, "phi_a_deg": self.phi_a_deg,
                "bw_red": self.bw_red, "bw_blue": self.bw_blue,
                "bw_over_octave": self.bw_over_octave,
                "volume_mm3": self.crystal_volume_mm3,
                "fom": self.fom, "reason": self.reason}


def crystal_volume_mm3(geometry: DeviceGeometry, material: MaterialConstants,
                       spec: TransducerSpec) -> float:
    frame = PlaneFrame(geometry, material)
    psi = math.radians(walkoff_from_axis(material, frame.k_hat))
    a = geometry.aperture_length
    return ((a + a * math.tan(abs(psi)) + MARGIN_MM)
            * (spec.length + MARGIN_MM)
            * (spec.height + MARGIN_MM))


def _zero_cell(phi_o, phi_a, volume, reason, hf_ok=True, deg_ok=True) -> FomCell:
    return FomCell(phi_o_deg=phi_o, phi_a_deg=phi_a, bw_red=0.0, bw_blue=0.0,
                   bw_over_octave=0.0, crystal_volume_mm3=volume,
                   hf_ok=hf_ok, degeneracy_ok=deg_ok, fom=0.0, reason=reason)


def evaluate_cell(phi_o_deg: float, phi_a_deg: float,
                  material: MaterialConstants, spec: TransducerSpec,
                  wavelength_red_nm: float = 780.0,
                  wavelength_blue_nm: float = 480.0,
                  limits: DesignLimits = DesignLimits(),
                  aperture_mm: float = 10.0) -> FomCell:
    """Score one geometry cell; infeasible cells return fom = 0 with a reason."""
    geometry = DeviceGeometry(optical_rotation=phi_o_deg,
                              acoustic_rotation=phi_a_deg,
                              aperture_length=aperture_mm, transducer=spec)
    volume = crystal_volume_mm3(geometry, material, spec)
    shapes = {}
    for lam, ripple in ((wavelength_red_nm, limits.ripple_red_db),
                        (wavelength_blue_nm, limits.ripple_blue_db)):
        try:
            shapes[lam] = bs.designed_bandshape(geometry, material, lam,
                                                spec, ripple)
        except NoTangencyError:
            return _zero_cell(phi_o_deg, phi_a_deg, volume, REASON_NO_TANGENCY)
        except (bs.EmptyBandshapeError, bs.RippleUnachievableError):
            return _zero_cell(phi_o_deg, phi_a_deg, volume, REASON_EMPTY_BAND)
    red, blue = shapes[wavelength_red_nm], shapes[wavelength_blue_nm]
    if blue.band_edges[1] > limits.hf_limit_mhz:
        return _zero_cell(phi_o_deg, phi_a_deg, volume, REASON_HF_LIMIT,
                          hf_ok=False)
    for shape in (red, blue):
        if any(shape.band_edges[0] <= d <= shape.band_edges[1]
               for d in shape.degeneracy_markers):
            return _zero_cell(phi_o_deg, phi_a_deg, volume, REASON_DEGENERACY,
                              deg_ok=False)
    report = bs.dual_band_report(red.band_edges, blue.band_edges)
    fom = (red.bandwidth + blue.bandwidth
           - report.bw_over_octave_mhz) / volume
    return FomCell(phi_o_deg=phi_o_deg, phi_a_deg=phi_a_deg,
                   bw_red=red.bandwidth, bw_blue=blue.bandwidth,
                   bw_over_octave=report.bw_over_octave_mhz,
                   crystal_volume_mm3=volume, hf_ok=True, degeneracy_ok=True,
                   fom=fom, reason=REASON_OK,
                   band_red=red.band_edges, band_blue=blue.band_edges)


@dataclass(frozen=True)
class GridSpec:
    phi_o_deg: tuple[float, ...] = tuple(float(x) for x in range(4, 15))
    phi_a_deg: tuple[float, ...] = tuple(x * 0.5 for x in range(0, 11))

    def __post_init__(self):
        if not self.phi_o_deg or not self.phi_a_deg:
            raise ValueError("grid must be non-empty")

    def cells(self) -> list[tuple[float, float]]:
        return [(po, pa) for po in self.phi_o_deg for pa in self.phi_a_deg]


@dataclass(frozen=True)
class ScanResult:
    cells: list[FomCell]
    argmax: FomCell

    def matrix_rows(self) -> list[dict]:
        return [c.csv_row() for c in self.cells]


def _cell_args(args) -> FomCell:
    return evaluate_cell(*args)


def scan(grid: GridSpec, material: MaterialConstants, spec: TransducerSpec,
         wavelength_red_nm: float = 780.0, wavelength_blue_nm: float = 480.0,
         limits: DesignLimits = DesignLimits(), aperture_mm: float = 10.0,
         jobs: int = 1) -> ScanResult:
    """Evaluate all grid cells; results are merged in grid order regardless of
    worker scheduling.  Argmax ties break toward smaller |phi_a|, then |phi_o|.
    """
    points = grid.cells()
    args = [(po, pa, material, spec, wavelength_red_nm, wavelength_blue_nm,
             limits, aperture_mm) for po, pa in points]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_cell_args, args, chunksize=2))
    else:
        cells = [_cell_args(a) for a in args]
    best = max(cells, key=lambda c: (c.fom, -abs(c.phi_a_deg), -abs(c.phi_o_deg)))
    return ScanResult(cells=cells, argmax=best)
